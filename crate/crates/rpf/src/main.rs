fn main() {
    std::process::exit(rpf::cli::run(std::env::args_os()));
}

//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rpf_core::classical::{
    key_renewal_asymptote, lalley_counting_asymptote, markov_renewal_g, KeyRenewalAsymptote,
};
use rpf_core::geometry::{sierpinski_gamma_tube_fn, SelfSimilarSystem};
use rpf_core::potential::{detect_lattice, LatticeKind, LATTICE_TOL};
use rpf_core::simulate::{reduce, SimulationSpec};
use rpf_core::spectral::{build_transfer, leading_eigendata, pressure, solve_delta, working_depth};
use rpf_core::{Error as CoreError, LocallyConstantPotential, RenewalProblem};

use crate::error::CliError;
use crate::output::{emit, to_json, Output, Table};
use crate::parallel::{map_indexed, worker_count};
use crate::reports::*;
use crate::schema::{self, KeyFile, Loaded, MarkovFile, ProblemFile, TimeFnSpec};
use crate::{grid, paper_check};

const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "rpf", version, about = "Renewal theorems via transfer operators on subshifts of finite type")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Absolute tolerance for series and solvers.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Transfer-operator depth (cylinder word length).
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Random seed for simulation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProblemArg {
    /// JSON problem file.
    #[arg(long, short)]
    problem: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Leading eigendata of the transfer operator of a potential.
    Spectral {
        #[command(flatten)]
        file: ProblemArg,
        /// Name of the potential in the problem file.
        #[arg(long, default_value = "eta")]
        potential: String,
        /// Use `potential − s·xi` instead.
        #[arg(long)]
        xi_coef: Option<f64>,
    },
    /// Topological pressure of a potential.
    Pressure {
        #[command(flatten)]
        file: ProblemArg,
        #[arg(long, default_value = "eta")]
        potential: String,
        #[arg(long)]
        xi_coef: Option<f64>,
    },
    /// Root δ of P(eta − δ·xi) = 0.
    Delta {
        #[command(flatten)]
        file: ProblemArg,
    },
    /// N(t, x) on a grid; CSV columns t, N, scaled_N, target.
    RenewalEval {
        #[command(flatten)]
        file: ProblemArg,
        /// `a:b:n` (n points from a to b) or a comma-separated list.
        #[arg(long, allow_hyphen_values = true)]
        t: String,
    },
    /// Asymptotic constant of e^{−tδ}N(t, x).
    Asymptote {
        #[command(flatten)]
        file: ProblemArg,
        /// Sample the lattice periodic factor at this many points of a period.
        #[arg(long)]
        table: Option<usize>,
    },
    /// Running mean of e^{−tδ}N(t, x) over [0, t_max].
    Cesaro {
        #[command(flatten)]
        file: ProblemArg,
        #[arg(long)]
        t_max: f64,
        #[arg(long, default_value_t = 4001)]
        points: usize,
    },
    /// Sampled evidence for the regularity conditions (A)–(D).
    Conditions {
        #[command(flatten)]
        file: ProblemArg,
        #[arg(long, default_value = "-20:0:41", allow_hyphen_values = true)]
        t: String,
        /// Riemann-sum meshes.
        #[arg(long, default_value = "0.1,0.01,0.002")]
        h: String,
    },
    /// Classical corollaries.
    Classical {
        #[command(subcommand)]
        which: Classical,
    },
    /// Minkowski dimension and average content of a self-similar set.
    Minkowski {
        /// Contraction ratios, comma separated.
        #[arg(long)]
        ratios: String,
        /// `builtin:gasket` or a JSON time-profile file.
        #[arg(long, default_value = "builtin:gasket")]
        gamma: String,
        /// Ambient dimension.
        #[arg(long, default_value_t = 2)]
        ambient: usize,
        /// Grid for the scaled tube-volume curve.
        #[arg(long, default_value = "0:20:201", allow_hyphen_values = true)]
        curve: String,
    },
    /// Monte-Carlo estimate of N(t, x) for a normalised potential.
    Simulate {
        #[command(flatten)]
        file: ProblemArg,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        /// Steps per path; chosen automatically when absent.
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Runs the acceptance criteria and prints a pass/fail table.
    PaperCheck {
        /// Only these criteria (comma separated).
        #[arg(long)]
        only: Option<String>,
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Subcommand)]
enum Classical {
    /// Key renewal equation Z = z + Σ p_i Z(· − s_i).
    Key {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<String>,
    },
    /// Markov renewal equation with point-mass kernels.
    Markov {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Lattice counting asymptote (eta ≡ 0).
    Lalley {
        #[command(flatten)]
        file: ProblemArg,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
    },
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli).and_then(|o| emit(&o, cli.global.out.as_deref(), stdout)) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

struct Ctx<'a> {
    g: &'a Global,
    loaded: Option<Loaded>,
}

impl Ctx<'_> {
    fn tol(&self) -> Result<f64, CliError> {
        let t = self
            .g
            .tol
            .or_else(|| self.loaded.as_ref().and_then(|l| l.options.tol))
            .unwrap_or(DEFAULT_TOL);
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Usage(format!("--tol must be positive, got {t}")));
        }
        Ok(t)
    }
    fn depth(&self) -> Option<usize> {
        self.g.depth.or_else(|| self.loaded.as_ref().and_then(|l| l.options.depth))
    }
    fn loaded(&self) -> &Loaded {
        self.loaded.as_ref().expect("problem loaded")
    }
}

fn load(path: &Path) -> Result<Loaded, CliError> {
    let pf: ProblemFile = schema::read(path)?;
    pf.load()
}

fn execute(cli: &Cli) -> Result<Output, CliError> {
    let mut ctx = Ctx {
        g: &cli.global,
        loaded: None,
    };
    match &cli.command {
        Command::Spectral { file, potential, xi_coef } => {
            ctx.loaded = Some(load(&file.problem)?);
            let phi = selected_potential(ctx.loaded(), potential, *xi_coef)?;
            let m = ctx.depth().unwrap_or_else(|| working_depth(&[phi.depth()]));
            let sd = leading_eigendata(&build_transfer(&phi, m)?)?;
            json(&SpectralReport::new(&sd, ctx.loaded().shift.alphabet_size()))
        }
        Command::Pressure { file, potential, xi_coef } => {
            ctx.loaded = Some(load(&file.problem)?);
            let phi = selected_potential(ctx.loaded(), potential, *xi_coef)?;
            let m = ctx.depth().unwrap_or_else(|| working_depth(&[phi.depth()]));
            let p = pressure(&phi, m)?;
            json(&PressureReport {
                depth: m,
                pressure: p,
                gamma: p.exp(),
            })
        }
        Command::Delta { file } => {
            ctx.loaded = Some(load(&file.problem)?);
            let l = ctx.loaded();
            let d = solve_delta(&l.potential("eta")?, &l.potential("xi")?, ctx.depth(), ctx.tol()?.min(1e-12))?;
            json(&DeltaReport::from(d))
        }
        Command::RenewalEval { file, t } => {
            ctx.loaded = Some(load(&file.problem)?);
            let p = ctx.loaded().problem()?;
            let ts = grid::parse(t)?;
            let tol = ctx.tol()?;
            let target = Target::new(&p)?;
            let rows = map_indexed(ts.len(), worker_count(), |i| -> Result<Vec<f64>, CliError> {
                let t = ts[i];
                let n = p.eval_n(t, tol)?.value;
                let scaled = (-t * p.delta()).exp() * n;
                Ok(vec![t, n, scaled, target.at(&p, t, tol)?])
            })?;
            let mut table = Table::new(&["t", "N", "scaled_N", "target"]);
            rows.into_iter().for_each(|r| table.push(r));
            Ok(Output::Csv(table))
        }
        Command::Asymptote { file, table } => {
            ctx.loaded = Some(load(&file.problem)?);
            let p = ctx.loaded().problem()?;
            let lat = p.lattice();
            let r = match lat.kind {
                LatticeKind::NonLattice => p.asymptotic_g()?,
                _ => p.average_g()?,
            };
            let mut rep = AsymptoteReport::new(&r, lat.kind.as_str(), lat.span);
            if let Some(n) = table {
                rep.period_table = Some(
                    p.lattice_gtilde_table(*n, ctx.tol()?)?
                        .into_iter()
                        .map(|(t, v)| [t, v])
                        .collect(),
                );
            }
            json(&rep)
        }
        Command::Cesaro { file, t_max, points } => {
            ctx.loaded = Some(load(&file.problem)?);
            let p = ctx.loaded().problem()?;
            json(&CesaroReport::from(p.cesaro_average(*t_max, *points, ctx.tol()?)?))
        }
        Command::Conditions { file, t, h } => {
            ctx.loaded = Some(load(&file.problem)?);
            let p = ctx.loaded().problem()?;
            let r = p.check_conditions(&grid::parse(t)?, &grid::parse(h)?)?;
            json(&ConditionsSummary::new(&r, p.shift().alphabet_size()))
        }
        Command::Classical { which } => classical(&mut ctx, which),
        Command::Minkowski {
            ratios,
            gamma,
            ambient,
            curve,
        } => {
            let ratios = grid::parse_list(ratios)?;
            let gamma = if let Some(name) = gamma.strip_prefix("builtin:") {
                match name {
                    "gasket" => sierpinski_gamma_tube_fn(),
                    other => return Err(CliError::Usage(format!("unknown builtin profile {other:?}"))),
                }
            } else {
                schema::read::<TimeFnSpec>(Path::new(gamma))?.build()?
            };
            let sys = SelfSimilarSystem::new(ratios, *ambient, gamma)?;
            let content = sys.average_minkowski_content()?;
            let ts = grid::parse(curve)?;
            let tol = ctx.tol()?;
            let shift = sys.dimension() - *ambient as f64;
            let p = sys.problem()?;
            let rows = map_indexed(ts.len(), worker_count(), |i| -> Result<Vec<f64>, CliError> {
                let t = ts[i];
                Ok(vec![t, (-t * shift).exp() * p.eval_n(t, tol)?.value])
            })?;
            let mut table = Table::new(&["t", "scaled_tube_volume"]);
            rows.into_iter().for_each(|r| table.push(r));
            Ok(Output::JsonAndCsv(to_json(&MinkowskiReport::new(&content, *ambient))?, table))
        }
        Command::Simulate {
            file,
            paths,
            t,
            horizon,
        } => {
            ctx.loaded = Some(load(&file.problem)?);
            simulate(&ctx, *paths, t, *horizon)
        }
        Command::PaperCheck { only, json: as_json } => {
            let ids = match only {
                Some(s) => s
                    .split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<u8>()
                            .ok()
                            .filter(|i| (1..=9).contains(i))
                            .ok_or_else(|| CliError::Usage(format!("criterion id {x:?} not in 1..9")))
                    })
                    .collect::<Result<Vec<_>, _>>()?,
                None => Vec::new(),
            };
            let reports = paper_check::run(&ids);
            if *as_json {
                json(&reports)
            } else {
                Ok(Output::Text(paper_check::render(&reports)))
            }
        }
    }
}

fn json<T: serde::Serialize>(v: &T) -> Result<Output, CliError> {
    Ok(Output::Json(to_json(v)?))
}

fn selected_potential(l: &Loaded, name: &str, xi_coef: Option<f64>) -> Result<LocallyConstantPotential, CliError> {
    let p = l.potential(name)?;
    Ok(match xi_coef {
        Some(s) => p.combine(1.0, &l.potential("xi")?, -s)?,
        None => p,
    })
}

/// What `e^{−tδ}N(t, x)` should approach: the constant in the non-lattice
/// case, the periodic factor when lattice data is available, the Cesàro
/// limit otherwise.
enum Target {
    Constant(f64),
    Periodic,
}

impl Target {
    fn new(p: &RenewalProblem) -> Result<Self, CliError> {
        let lat = p.lattice();
        Ok(match lat.kind {
            LatticeKind::NonLattice => Target::Constant(p.asymptotic_g()?.value),
            LatticeKind::Lattice if lat.zeta.is_some() => Target::Periodic,
            _ => Target::Constant(p.average_g()?.value),
        })
    }

    fn at(&self, p: &RenewalProblem, t: f64, tol: f64) -> Result<f64, CliError> {
        Ok(match self {
            Target::Constant(c) => *c,
            Target::Periodic => p.lattice_gtilde(t, tol)?.value,
        })
    }
}

fn classical(ctx: &mut Ctx, which: &Classical) -> Result<Output, CliError> {
    match which {
        Classical::Key { spec, t } => {
            let spec = schema::read::<KeyFile>(spec)?.build()?;
            let a = key_renewal_asymptote(&spec)?;
            let ts = match t {
                Some(t) => grid::parse(t)?,
                None => {
                    let period = a.span.unwrap_or(1.0);
                    (0..11).map(|i| period * i as f64 / 10.0).collect()
                }
            };
            let tol = ctx.tol()?;
            let curve = ts
                .iter()
                .map(|&t| Ok([t, key_value(&a, t, tol)?]))
                .collect::<Result<Vec<_>, CliError>>()?;
            json(&KeyReport::new(&a, curve))
        }
        Classical::Markov { spec } => {
            let spec = schema::read::<MarkovFile>(spec)?.build()?;
            let r = markov_renewal_g(&spec, ctx.tol()?.min(1e-12))?;
            json(&MarkovReport::from(&r))
        }
        Classical::Lalley { file, t } => {
            ctx.loaded = Some(load(&file.problem)?);
            let l = ctx.loaded();
            let xi = l.potential("xi")?;
            let chi = l.potential("chi")?;
            let lat = match l.lattice_report()? {
                Some(r) => r,
                None => detect_lattice(&xi, l.options.max_cycle_len, LATTICE_TOL)?,
            };
            let x = l.x_head()?;
            let mut table = Table::new(&["t", "asymptote"]);
            for t in grid::parse(t)? {
                table.push(vec![t, lalley_counting_asymptote(&xi, &chi, &lat, &x, t)?]);
            }
            Ok(Output::Csv(table))
        }
    }
}

fn key_value(a: &KeyRenewalAsymptote, t: f64, tol: f64) -> Result<f64, CliError> {
    Ok(match a.kind() {
        LatticeKind::Lattice => a.lattice(t, tol)?,
        _ => a.nonlattice()?,
    })
}

/// Initial horizon when none is given; grown on demand.
const AUTO_HORIZON: usize = 64;

fn simulate(ctx: &Ctx, paths: Option<usize>, t: &str, horizon: Option<usize>) -> Result<Output, CliError> {
    let l = ctx.loaded();
    let ts = grid::parse(t)?;
    let tol = ctx.tol()?;
    let n_paths = paths.or(l.options.paths).unwrap_or(10_000);
    let seed = ctx.g.seed.or(l.options.seed).unwrap_or(0);
    let fixed = horizon.or(l.options.n_max);
    let mut spec = SimulationSpec::new(
        l.potential("eta")?,
        l.potential("xi")?,
        l.family()?,
        l.x_head()?,
        fixed.unwrap_or(AUTO_HORIZON),
        n_paths,
        seed,
    )?;
    let workers = worker_count();
    // Later draws never change earlier ones, so growing the horizon only
    // extends each path.
    let per_path = loop {
        match map_indexed(n_paths, workers, |i| spec.path_values(i as u64, &ts)) {
            Ok(v) => break v,
            Err(CoreError::Horizon { suggested, .. }) if fixed.is_none() && suggested <= 1 << 24 => {
                spec.n_max = suggested;
            }
            Err(e) => return Err(e.into()),
        }
    };
    let est = reduce(&ts, &per_path);
    let p = spec.problem();
    let det = map_indexed(ts.len(), workers, |i| p.eval_n(ts[i], tol).map(|v| v.value))?;
    let mut table = Table::new(&["t", "mean", "stderr", "deterministic_N"]);
    for (e, d) in est.iter().zip(det) {
        table.push(vec![e.t, e.mean, e.stderr, d]);
    }
    Ok(Output::Csv(table))
}

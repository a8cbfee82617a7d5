//! Reproducible acceptance runs. Each criterion is computed from scratch and
//! compared against an oracle that does not share code with the quantity
//! being checked wherever that is possible.

use std::time::Instant;

use rpf_core::classical::{
    key_renewal_asymptote, key_renewal_problem, lalley_counting_asymptote, markov_renewal_g,
    markov_renewal_problem, KeyRenewalSpec, MarkovRenewalSpec,
};
use rpf_core::geometry::{minkowski_dimension, SelfSimilarSystem};
use rpf_core::potential::{birkhoff_sum, detect_lattice, geometric_potential, LATTICE_TOL};
use rpf_core::simulate::SimulationSpec;
use rpf_core::spectral::{
    build_transfer, gibbs_measure, leading_eigendata, normalize_potential, pressure, solve_delta, CylinderMasses,
};
use rpf_core::{FFamily, LocallyConstantPotential, RenewalProblem, Subshift, TimeFunction, Word};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Value quoted for the gasket's average Minkowski content.
pub const GASKET_CONTENT_QUOTED: f64 = 1.8126;
pub const C1_QUOTED_TOL: f64 = 1e-3;
pub const C1_BRACKET_TOL: f64 = 1e-10;
pub const C1_MAX_SECONDS: f64 = 1.0;
pub const C2_DIMENSION_TOL: f64 = 1e-12;
pub const C2_DELTA_TOL: f64 = 1e-10;
pub const C2_MAX_SECONDS: f64 = 1.0;
pub const C3_REL_TOL_SHORT: f64 = 0.02;
pub const C3_REL_TOL_LONG: f64 = 0.005;
pub const C3_POINTS_SHORT: usize = 1001;
pub const C3_POINTS_LONG: usize = 4001;
/// Relative spread allowed in `T·(c(T) − G)` between the two horizons.
pub const C3_DEFICIT_REL_TOL: f64 = 1e-3;
pub const C3_MAX_SECONDS: f64 = 30.0;
pub const C4_REL_TOL: f64 = 0.02;
pub const C4_MEANS: f64 = 25.0;
pub const C4_CLOSED_FORM_TOL: f64 = 1e-10;
pub const C4_MAX_SECONDS: f64 = 60.0;
pub const C5_DELTA_TOL: f64 = 1e-12;
pub const C5_G_TOL: f64 = 1e-8;
pub const C6_REL_TOL: f64 = 1e-9;
pub const C6_K_MAX: i32 = 30;
pub const C7_RESIDUAL_TOL: f64 = 1e-12;
pub const C7_FD_TOL: f64 = 1e-6;
pub const C7_FD_STEP: f64 = 1e-5;
pub const C8_SEEDS: u64 = 20;
pub const C8_PATHS: usize = 10_000;
pub const C8_MIN_HITS: usize = 18;
pub const C8_T: f64 = 6.0;
pub const C8_N_MAX: usize = 16;
pub const C8_MAX_SECONDS: f64 = 60.0;
pub const C9_TOL: f64 = 1e-11;
pub const C9_POINTS: usize = 50;

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: String,
    /// The criterion as stated, with the pinned tolerances.
    pub passed: bool,
    /// Extra evidence reported next to a literal failure.
    pub supplementary: Option<bool>,
    pub detail: String,
    pub seconds: f64,
}

type Check = (bool, Option<bool>, String);
type Criterion = (u8, &'static str, fn() -> Result<Check, CliError>);

fn timed(id: u8, title: &str, f: impl FnOnce() -> Result<Check, CliError>) -> CriterionReport {
    let start = Instant::now();
    let (passed, supplementary, detail) = match f() {
        Ok(c) => c,
        Err(e) => (false, None, format!("error: {e}")),
    };
    CriterionReport {
        id,
        title: title.into(),
        passed,
        supplementary,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Runs criteria `ids` (all of 1..=9 when empty) in order.
pub fn run(ids: &[u8]) -> Vec<CriterionReport> {
    let all: [Criterion; 9] = [
        (1, "gasket average Minkowski content", c1),
        (2, "gasket Minkowski dimension", c2),
        (3, "lattice Cesàro convergence", c3),
        (4, "key renewal cross-oracle", c4),
        (5, "Markov embedding consistency", c5),
        (6, "lattice counting", c6),
        (7, "spectral invariants", c7),
        (8, "Monte-Carlo validation", c8),
        (9, "renewal-equation identity", c9),
    ];
    all.iter()
        .filter(|(id, _, _)| ids.is_empty() || ids.contains(id))
        .map(|&(id, title, f)| {
            let mut r = timed(id, title, f);
            let limit = match id {
                1 => Some(C1_MAX_SECONDS),
                2 => Some(C2_MAX_SECONDS),
                3 => Some(C3_MAX_SECONDS),
                4 => Some(C4_MAX_SECONDS),
                8 => Some(C8_MAX_SECONDS),
                _ => None,
            };
            if let Some(l) = limit {
                r.detail.push_str(&format!("; runtime {:.3} s (limit {l} s)", r.seconds));
                if r.seconds >= l {
                    r.passed = false;
                }
            }
            r
        })
        .collect()
}

pub fn run_all() -> Vec<CriterionReport> {
    run(&[])
}

/// Plain-text table of reports.
pub fn render(reports: &[CriterionReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        let sup = match r.supplementary {
            Some(true) => " (supplementary: PASS)",
            Some(false) => " (supplementary: FAIL)",
            None => "",
        };
        s.push_str(&format!("criterion {}: {verdict}{sup} [{}] {}\n", r.id, r.title, r.detail));
    }
    let n = reports.iter().filter(|r| r.passed).count();
    s.push_str(&format!("{n}/{} criteria passed\n", reports.len()));
    s
}

/// Bracket `(√3^{−(D+1)}/log 2)·[1/(2−D) + 2/(D−1) − 1/D]`, written out here
/// rather than taken from the geometry module.
fn gasket_bracket() -> f64 {
    let d = 3f64.ln() / 2f64.ln();
    3f64.sqrt().powf(-(d + 1.0)) / 2f64.ln() * (1.0 / (2.0 - d) + 2.0 / (d - 1.0) - 1.0 / d)
}

fn c1() -> Result<Check, CliError> {
    let c = SelfSimilarSystem::gasket().average_minkowski_content()?.value;
    let b = gasket_bracket();
    let ok = (c - GASKET_CONTENT_QUOTED).abs() < C1_QUOTED_TOL && (c - b).abs() < C1_BRACKET_TOL;
    Ok((ok, None, format!("content {c:.12}, bracket {b:.12}, |diff| {:.2e}", (c - b).abs())))
}

fn c2() -> Result<Check, CliError> {
    let want = 3f64.ln() / 2f64.ln();
    let d = minkowski_dimension(&[0.5; 3])?;
    let xi = geometric_potential(&[0.5; 3])?;
    let delta = solve_delta(&xi.scale(-2.0), &xi, None, 1e-14)?.delta;
    let ok = (d - want).abs() < C2_DIMENSION_TOL && (delta + 2.0 - d).abs() < C2_DELTA_TOL;
    Ok((
        ok,
        None,
        format!("D {d:.15}, |D − log3/log2| {:.1e}, δ + 2 − D {:.1e}", (d - want).abs(), delta + 2.0 - d),
    ))
}

fn c3() -> Result<Check, CliError> {
    let g = SelfSimilarSystem::gasket();
    let target = g.average_minkowski_content()?.value;
    let p = g.problem()?;
    let a = 2f64.ln();
    let (t1, t2) = (40.0 * a, 160.0 * a);
    let c1 = p.cesaro_average(t1, C3_POINTS_SHORT, 1e-10)?.value;
    let c2 = p.cesaro_average(t2, C3_POINTS_LONG, 1e-10)?.value;
    let (r1, r2) = (rel(c1, target), rel(c2, target));
    let literal = r1 < C3_REL_TOL_SHORT && r2 < C3_REL_TOL_LONG;
    // The running mean carries an O(1/T) bias from the transient on [0, T*]:
    // T·(c(T) − G) is the same constant at both horizons, and the mean over
    // the window [T1, T2] has no bias left.
    let (d1, d2) = (t1 * (c1 - target), t2 * (c2 - target));
    let window = (t2 * c2 - t1 * c1) / (t2 - t1);
    let sup = rel(d1, d2) < C3_DEFICIT_REL_TOL && rel(window, target) < C3_REL_TOL_LONG;
    Ok((
        literal,
        Some(sup),
        format!(
            "c(40a) {c1:.8} ({:+.3}%), c(160a) {c2:.8} ({:+.3}%), T·(c−G) {d1:.6} / {d2:.6}, window mean {window:.10} ({:+.1e})",
            100.0 * (c1 - target) / target,
            100.0 * (c2 - target) / target,
            (window - target) / target
        ),
    ))
}

fn key_spec() -> Result<KeyRenewalSpec, CliError> {
    let z = TimeFunction::exp_decay(1.0, 1.0, 0.0)?;
    Ok(KeyRenewalSpec::new(vec![0.5, 0.5], vec![2f64.ln(), 3f64.ln()], z)?)
}

fn c4() -> Result<Check, CliError> {
    let spec = key_spec()?;
    let closed = key_renewal_asymptote(&spec)?.nonlattice()?;
    let expected = 2.0 / 6f64.ln();
    let p = key_renewal_problem(&spec)?;
    let general = p.asymptotic_g()?.value;
    let t = C4_MEANS * spec.mean();
    let v = p.eval_scaled(t, 1e-10)?.value;
    let r = rel(v, expected);
    let ok = r < C4_REL_TOL && (closed - general).abs() < C4_CLOSED_FORM_TOL && (closed - expected).abs() < 1e-14;
    Ok((
        ok,
        None,
        format!(
            "e^(−tδ)N({t:.4}) = {v:.8} vs 2/log6 = {expected:.8} ({:+.3}%), closed − general {:.1e}",
            100.0 * (v - expected) / expected,
            closed - general
        ),
    ))
}

fn golden() -> Result<Subshift, CliError> {
    Ok(Subshift::new(vec![vec![1, 1], vec![1, 0]])?)
}

fn golden_xi(s: &Subshift, v00: f64, v01: f64, v10: f64) -> Result<LocallyConstantPotential, CliError> {
    Ok(LocallyConstantPotential::from_table(
        s,
        2,
        vec![(Word::new(vec![0, 0]), v00), (Word::new(vec![0, 1]), v01), (Word::new(vec![1, 0]), v10)],
    )?)
}

fn c5() -> Result<Check, CliError> {
    let s = golden()?;
    let xi = golden_xi(&s, 1.0, 2.0, 1.0)?;
    let zero = LocallyConstantPotential::constant(&s, 0.0)?;
    let f = vec![TimeFunction::exp_decay(1.0, 0.5, 0.0)?, TimeFunction::indicator(-0.5, 2.0, 1.0)?];
    let parry = normalize_potential(&zero, 1)?;
    let tilted = LocallyConstantPotential::from_fn(&s, 2, |w| -0.4 + 0.3 * w[1] as f64)?;
    let mut worst_delta = 0.0f64;
    let mut worst_g = 0.0f64;
    for eta in [parry, tilted] {
        let spec = MarkovRenewalSpec::new(eta, xi.clone(), f.clone())?;
        let direct = markov_renewal_g(&spec, 1e-14)?;
        for i in 0..spec.states() {
            let p = markov_renewal_problem(&spec, i as u8)?;
            worst_delta = worst_delta.max((p.delta() - direct.delta).abs());
            worst_g = worst_g.max(rel(p.average_g()?.value, direct.g[i]));
        }
    }
    Ok((
        worst_delta < C5_DELTA_TOL && worst_g < C5_G_TOL,
        None,
        format!("max |Δδ| {worst_delta:.1e}, max rel |ΔG| {worst_g:.1e} (Parry and tilted weights)"),
    ))
}

fn c6() -> Result<Check, CliError> {
    let s = Subshift::full(2)?;
    let a = 2f64.ln();
    let xi = LocallyConstantPotential::constant(&s, a)?;
    let chi = LocallyConstantPotential::constant(&s, 1.0)?;
    let lat = detect_lattice(&xi, None, LATTICE_TOL)?;
    let x = Word::new(vec![0]);
    let count = RenewalProblem::new(
        LocallyConstantPotential::constant(&s, 0.0)?,
        xi.clone(),
        chi.clone(),
        FFamily::uniform(TimeFunction::indicator(0.0, f64::INFINITY, 1.0)?),
        x.clone(),
    )?;
    let mut gaps = Vec::new();
    let mut exact = true;
    for k in 0..=C6_K_MAX {
        let t = k as f64 * a + 0.1;
        let brute = count.eval_n(t, 1e-9)?.value;
        exact &= brute == 2f64.powi(k + 1) - 1.0;
        let v = lalley_counting_asymptote(&xi, &chi, &lat, &x, t)?;
        gaps.push(rel(v, brute));
    }
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let last = *gaps.last().unwrap_or(&f64::INFINITY);
    Ok((
        exact && decreasing && last < C6_REL_TOL,
        None,
        format!(
            "counts exact: {exact}; relative gap {:.1e} at k=0 decreasing to {last:.1e} at k={C6_K_MAX}",
            gaps[0]
        ),
    ))
}

/// `(φ, ψ)` pairs for the derivative check.
fn c7_potentials() -> Result<Vec<(LocallyConstantPotential, LocallyConstantPotential)>, CliError> {
    let f2 = Subshift::full(2)?;
    let f3 = Subshift::full(3)?;
    let g = golden()?;
    Ok(vec![
        (
            LocallyConstantPotential::from_letters(&f2, &[0.3, -0.2])?,
            LocallyConstantPotential::from_letters(&f2, &[1.0, 2.0])?,
        ),
        (
            LocallyConstantPotential::from_fn(&f3, 2, |w| 0.1 * w[0] as f64 - 0.25 * w[1] as f64 + 0.05 * (w[0] * w[1]) as f64)?,
            LocallyConstantPotential::from_fn(&f3, 2, |w| 0.5 + 0.3 * w[1] as f64 - 0.2 * w[0] as f64)?,
        ),
        (golden_xi(&g, -0.3, 0.4, 0.1)?, golden_xi(&g, 0.8, 1.3, 0.6)?),
        (LocallyConstantPotential::constant(&g, 0.0)?, golden_xi(&g, 1.0, 2.0, 1.0)?),
        (
            geometric_potential(&[0.5, 0.3])?.scale(-0.7),
            geometric_potential(&[0.5, 0.3])?,
        ),
    ])
}

fn c7() -> Result<Check, CliError> {
    let mut worst_res = 0.0f64;
    let mut worst_fd = 0.0f64;
    let mut gibbs_ok = true;
    let mut measure_err = 0.0f64;
    let mut words = 0usize;
    for (phi, psi) in c7_potentials()? {
        let m = phi.depth().max(psi.depth()).max(1);
        let sd = leading_eigendata(&build_transfer(&phi, m)?)?;
        worst_res = worst_res.max(sd.residual_right).max(sd.residual_left);

        let rep = gibbs_measure(&phi, m)?;
        let c = rep.constant;
        gibbs_ok &= c.is_finite() && c >= 1.0;
        let masses = CylinderMasses::new(&phi, &rep.data)?;
        let shift = phi.shift();
        let tail = phi.depth().saturating_sub(1).max(1);
        let heads = shift.admissible_words(tail)?;
        for n in 1..=rep.max_len {
            let mut total = 0.0;
            for u in shift.admissible_words(n)? {
                let mu = masses.mu(u.letters());
                total += mu;
                for x in &heads {
                    if !shift.allows(*u.0.last().expect("nonempty"), x.0[0]) {
                        continue;
                    }
                    let s = birkhoff_sum(&phi, &u, x)? - n as f64 * rep.data.pressure;
                    let r = mu / s.exp();
                    gibbs_ok &= r <= c * (1.0 + 1e-12) && r >= (1.0 - 1e-12) / c;
                    words += 1;
                }
                // shift invariance: μ[u] = Σ_j μ[ju]
                let pre: f64 = (0..shift.alphabet_size() as u8)
                    .filter(|j| shift.allows(*j, u.0[0]))
                    .map(|j| masses.mu(Word::new(vec![j]).concat(u.letters()).letters()))
                    .sum();
                measure_err = measure_err.max((pre - mu).abs());
            }
            measure_err = measure_err.max((total - 1.0).abs());
        }

        let h = C7_FD_STEP;
        let dp = (pressure(&phi.combine(1.0, &psi, h)?, m)? - pressure(&phi.combine(1.0, &psi, -h)?, m)?) / (2.0 * h);
        worst_fd = worst_fd.max((dp - sd.integrate(&psi)?).abs());
    }
    let ok = worst_res <= C7_RESIDUAL_TOL && gibbs_ok && measure_err < 1e-12 && worst_fd < C7_FD_TOL;
    Ok((
        ok,
        None,
        format!(
            "max residual {worst_res:.1e}; Gibbs bounds hold on {words} (word, head) pairs: {gibbs_ok}; measure defect {measure_err:.1e}; max |P' − ∫ψdμ| {worst_fd:.1e}"
        ),
    ))
}

/// Golden-mean shift with Parry weights, depth-2 interarrivals and a
/// letter-dependent indicator profile.
pub fn mc_spec(seed: u64, paths: usize, n_max: usize) -> Result<SimulationSpec, CliError> {
    let s = golden()?;
    let zero = LocallyConstantPotential::constant(&s, 0.0)?;
    let eta = normalize_potential(&zero, 1)?;
    let xi = golden_xi(&s, 0.8, 1.3, 0.6)?;
    let f = FFamily::new(
        &s,
        1,
        vec![
            (Word::new(vec![0]), TimeFunction::indicator(0.0, f64::INFINITY, 1.0)?),
            (Word::new(vec![1]), TimeFunction::indicator(0.0, 2.5, 0.5)?),
        ],
    )?;
    Ok(SimulationSpec::new(eta, xi, f, Word::new(vec![0, 1]), n_max, paths, seed)?)
}

fn c8() -> Result<Check, CliError> {
    let exact = mc_spec(0, 1, C8_N_MAX)?.problem().eval_n(C8_T, 1e-12)?.value;
    let workers = crate::parallel::worker_count();
    let mut hits = 0;
    let mut worst = 0.0f64;
    for seed in 0..C8_SEEDS {
        let spec = mc_spec(seed, C8_PATHS, C8_N_MAX)?;
        let per_path = crate::parallel::map_indexed(C8_PATHS, workers, |i| spec.path_values(i as u64, &[C8_T]))?;
        let e = rpf_core::simulate::reduce(&[C8_T], &per_path)[0];
        let z = (e.mean - exact).abs() / e.stderr;
        worst = worst.max(z);
        if z <= 3.0 {
            hits += 1;
        }
    }
    Ok((
        hits >= C8_MIN_HITS,
        None,
        format!("N({C8_T}) = {exact:.8}; {hits}/{C8_SEEDS} seeds within 3σ (worst {worst:.2}σ)"),
    ))
}

/// `N(t, x) − Σ_j e^{η(jx)} N(t − ξ(jx), jx) − χ(x) f_x(t)`, maximised over a grid.
pub fn renewal_defect(p: &RenewalProblem, grid: &[f64], tol: f64) -> Result<f64, CliError> {
    let x = p.x_head().clone();
    let mut worst = 0.0f64;
    let mut next = Vec::new();
    for j in 0..p.shift().alphabet_size() as u8 {
        if p.shift().allows(j, x.0[0]) {
            let y = Word::new(vec![j]).concat(x.letters());
            let w = p.eta().eval(y.letters())?.exp();
            let s = p.xi().eval(y.letters())?;
            next.push((p.with_base(y)?, w, s));
        }
    }
    let own = p.chi().eval(x.letters())?;
    let f = p.f().get(x.letters())?;
    for &t in grid {
        let lhs = p.eval_n(t, tol)?.value;
        let mut rhs = own * f.eval(t);
        for (q, w, s) in &next {
            rhs += w * q.eval_n(t - s, tol)?.value;
        }
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

fn c9() -> Result<Check, CliError> {
    let grid: Vec<f64> = (0..C9_POINTS).map(|i| -2.0 + 0.31 * i as f64).collect();
    let lattice = SelfSimilarSystem::gasket().problem()?;
    let nonlattice = key_renewal_problem(&key_spec()?)?;
    let s = golden()?;
    let markov = markov_renewal_problem(
        &MarkovRenewalSpec::new(
            LocallyConstantPotential::from_fn(&s, 2, |w| -0.4 + 0.3 * w[1] as f64)?,
            golden_xi(&s, 1.0, 2.0, 1.0)?,
            vec![TimeFunction::exp_decay(1.0, 0.5, 0.0)?, TimeFunction::indicator(-0.5, 2.0, 1.0)?],
        )?,
        0,
    )?;
    let mut defects = Vec::new();
    for p in [&lattice, &nonlattice, &markov] {
        defects.push(renewal_defect(p, &grid, C9_TOL)?);
    }
    Ok((
        defects.iter().all(|d| *d <= 3.0 * C9_TOL),
        None,
        format!(
            "max defect lattice {:.1e}, non-lattice {:.1e}, Markov {:.1e} (bound {:.1e})",
            defects[0],
            defects[1],
            defects[2],
            3.0 * C9_TOL
        ),
    ))
}

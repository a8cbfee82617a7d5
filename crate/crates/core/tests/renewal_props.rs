use proptest::prelude::*;
use rpf_core::classical::{
    key_renewal_asymptote, key_renewal_problem, lalley_counting_asymptote, markov_renewal_g,
    markov_renewal_problem, KeyRenewalSpec, MarkovRenewalSpec,
};
use rpf_core::geometry::SelfSimilarSystem;
use rpf_core::potential::detect_lattice;
use rpf_core::spectral::build_transfer;
use rpf_core::{Error, FFamily, LocallyConstantPotential, RenewalProblem, Subshift, TimeFunction, Word};

fn golden() -> Subshift {
    Subshift::new(vec![vec![1, 1], vec![1, 0]]).unwrap()
}

fn key_problem() -> (KeyRenewalSpec, RenewalProblem) {
    let z = TimeFunction::exp_decay(1.0, 1.0, 0.0).unwrap();
    let spec = KeyRenewalSpec::new(vec![0.5, 0.5], vec![2f64.ln(), 3f64.ln()], z).unwrap();
    let p = key_renewal_problem(&spec).unwrap();
    (spec, p)
}

fn markov_spec() -> MarkovRenewalSpec {
    let s = golden();
    let xi = LocallyConstantPotential::from_table(
        &s,
        2,
        vec![(Word::new(vec![0, 0]), 1.0), (Word::new(vec![0, 1]), 2.0), (Word::new(vec![1, 0]), 1.0)],
    )
    .unwrap();
    let eta = LocallyConstantPotential::from_fn(&s, 2, |w| -0.4 + 0.3 * w[1] as f64).unwrap();
    MarkovRenewalSpec::new(
        eta,
        xi,
        vec![
            TimeFunction::exp_decay(1.0, 0.5, 0.0).unwrap(),
            TimeFunction::indicator(-0.5, 2.0, 1.0).unwrap(),
        ],
    )
    .unwrap()
}

/// N(t,x) − Σ_j N(t − ξ(jx), jx) e^{η(jx)} − χ(x) f_x(t) on a grid.
fn renewal_defect(p: &RenewalProblem, grid: &[f64], tol: f64) -> f64 {
    let x = p.x_head().clone();
    let mut worst = 0.0f64;
    for &t in grid {
        let lhs = p.eval_n(t, tol).unwrap().value;
        let mut rhs = p.chi().eval(x.letters()).unwrap() * p.f().get(x.letters()).unwrap().eval(t);
        for j in 0..p.shift().alphabet_size() as u8 {
            if !p.shift().allows(j, x.0[0]) {
                continue;
            }
            let y = Word::new(vec![j]).concat(x.letters());
            let q = p.with_base(y.clone()).unwrap();
            rhs += q.eval_n(t - p.xi().eval(y.letters()).unwrap(), tol).unwrap().value
                * p.eta().eval(y.letters()).unwrap().exp();
        }
        worst = worst.max((lhs - rhs).abs());
    }
    worst
}

#[test]
fn renewal_equation_three_problems() {
    let tol = 1e-11;
    let grid: Vec<f64> = (0..50).map(|i| -2.0 + 0.31 * i as f64).collect();
    let lattice = SelfSimilarSystem::gasket().problem().unwrap();
    let (_, nonlattice) = key_problem();
    let markov = markov_renewal_problem(&markov_spec(), 0).unwrap();
    for p in [&lattice, &nonlattice, &markov] {
        let d = renewal_defect(p, &grid, tol);
        assert!(d <= 3.0 * tol, "defect {d}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn halving_tolerance_stays_within_certificates(t in -2.0f64..12.0, e in 6i32..12) {
        let p = SelfSimilarSystem::gasket().problem().unwrap();
        let tol = 10f64.powi(-e);
        let a = p.eval_n(t, tol).unwrap();
        let b = p.eval_n(t, tol / 2.0).unwrap();
        prop_assert!(a.tail_bound <= tol && b.tail_bound <= tol / 2.0);
        prop_assert!((a.value - b.value).abs() <= a.tail_bound + b.tail_bound + 1e-15 * a.value.abs());
    }

    #[test]
    fn key_embedding_matches_closed_form(p0 in 0.05f64..0.95, s0 in 0.2f64..3.0, s1 in 0.2f64..3.0, rate in 0.3f64..3.0) {
        let z = TimeFunction::exp_decay(1.0, rate, 0.0).unwrap();
        let spec = KeyRenewalSpec::new(vec![p0, 1.0 - p0], vec![s0, s1], z).unwrap();
        let closed = key_renewal_asymptote(&spec).unwrap();
        let prob = key_renewal_problem(&spec).unwrap();
        prop_assume!(closed.span.is_none() && prob.lattice().kind != rpf_core::LatticeKind::Lattice);
        let g = prob.average_g().unwrap().value;
        prop_assert!((g - closed.average).abs() <= 1e-10 * closed.average.max(1.0));
    }

    #[test]
    fn lattice_key_embedding_matches_closed_form(p0 in 0.05f64..0.95, a in 0.3f64..2.0, k1 in 1u32..5, t in -1.0f64..5.0) {
        // s = (a, k1·a) has span a
        let z = TimeFunction::indicator(0.0, 1.3, 1.0).unwrap();
        let spec = KeyRenewalSpec::new(vec![p0, 1.0 - p0], vec![a, k1 as f64 * a], z).unwrap();
        let closed = key_renewal_asymptote(&spec).unwrap();
        prop_assert!((closed.span.unwrap() - a).abs() < 1e-9);
        let prob = key_renewal_problem(&spec).unwrap();
        let gt = prob.lattice_gtilde(t, 1e-13).unwrap().value;
        let want = closed.lattice(t, 1e-13).unwrap();
        prop_assert!((gt - want).abs() <= 1e-10 * want.abs().max(1.0), "{} vs {}", gt, want);
    }

    #[test]
    fn markov_embedding_matches(c0 in -1.0f64..0.5, c1 in -1.0f64..0.5, x0 in 0.3f64..2.0, x1 in 0.3f64..2.0, x2 in 0.3f64..2.0) {
        let s = Subshift::full(2).unwrap();
        let xi = LocallyConstantPotential::from_fn(&s, 2, |w| [x0, x1, x2, 0.5 * (x0 + x2)][(2 * w[0] + w[1]) as usize]).unwrap();
        let eta = LocallyConstantPotential::from_fn(&s, 2, |w| if w[0] == 0 { c0 } else { c1 + 0.1 * w[1] as f64 }).unwrap();
        let spec = MarkovRenewalSpec::new(eta, xi, vec![
            TimeFunction::exp_decay(1.0, 4.0, 0.0).unwrap(),
            TimeFunction::indicator(0.0, 1.0, 2.0).unwrap(),
        ]).unwrap();
        let closed = match markov_renewal_g(&spec, 1e-15) {
            Ok(r) => r,
            Err(_) => return Ok(()),
        };
        for i in 0..2u8 {
            let p = match markov_renewal_problem(&spec, i) {
                Ok(p) => p,
                // f may not be integrable against e^{-δt} when δ is very negative
                Err(Error::Unsupported(_)) | Err(Error::Precondition(_)) => return Ok(()),
                Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
            };
            prop_assert!((p.delta() - closed.delta).abs() <= 1e-12 * (1.0 + closed.delta.abs()));
            let g = p.average_g().unwrap().value;
            prop_assert!((g - closed.g[i as usize]).abs() <= 1e-8 * g.abs().max(1.0));
        }
    }
}

#[test]
fn markov_transfer_matrix_is_the_kernel() {
    let spec = markov_spec();
    for s in [-0.7, 0.0, 0.4] {
        let phi = spec.eta.combine(1.0, &spec.xi, s).unwrap();
        let t = build_transfer(&phi, 1).unwrap();
        let b = spec.kernel(s);
        let dense = t.dense();
        for i in 0..2 {
            for j in 0..2 {
                let v = dense[i][j];
                assert!((v - b[i][j]).abs() <= 1e-14 * b[i][j].max(1.0), "{i}{j}: {v} vs {}", b[i][j]);
            }
        }
    }
}

#[test]
fn nonlattice_error_shrinks() {
    let (spec, p) = key_problem();
    let g = p.asymptotic_g().unwrap().value;
    let m = spec.mean();
    let errs: Vec<f64> = [10.0, 20.0, 30.0]
        .iter()
        .map(|k| (p.eval_scaled(k * m, 1e-12).unwrap().value - g).abs())
        .collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn lattice_convergence_along_the_lattice() {
    let g = SelfSimilarSystem::gasket();
    let p = g.problem().unwrap();
    let a = 2f64.ln();
    for t0 in [0.05, 0.4] {
        let target = p.lattice_gtilde(t0, 1e-13).unwrap().value;
        let hit = (0..200).find(|k| {
            let v = p.eval_scaled(t0 + *k as f64 * a, 1e-12).unwrap().value;
            ((v - target) / target).abs() < 0.01
        });
        let k = hit.expect("converges along the lattice");
        // once inside 1% it stays there and keeps improving
        let e1 = (p.eval_scaled(t0 + (k + 10) as f64 * a, 1e-12).unwrap().value - target).abs();
        let e2 = (p.eval_scaled(t0 + (k + 40) as f64 * a, 1e-12).unwrap().value - target).abs();
        assert!(e2 < e1 && e1 < 0.01 * target);
    }
}

#[test]
fn cesaro_error_shrinks_with_horizon() {
    let g = SelfSimilarSystem::gasket();
    let p = g.problem().unwrap();
    let target = g.average_minkowski_content().unwrap().value;
    let a = 2f64.ln();
    let c1 = p.cesaro_average(20.0 * a, 1001, 1e-10).unwrap();
    let c2 = p.cesaro_average(40.0 * a, 2001, 1e-10).unwrap();
    assert!((c2.value - target).abs() < (c1.value - target).abs());
    assert!((c1.target.unwrap() - target).abs() < 1e-10);
}

#[test]
fn lalley_matches_brute_force_counts() {
    let s = Subshift::full(2).unwrap();
    let a = 2f64.ln();
    let xi = LocallyConstantPotential::constant(&s, a).unwrap();
    let chi = LocallyConstantPotential::constant(&s, 1.0).unwrap();
    let zero = LocallyConstantPotential::constant(&s, 0.0).unwrap();
    let lat = detect_lattice(&xi, None, 1e-9).unwrap();
    let x = Word::new(vec![0]);
    let count = RenewalProblem::new(
        zero,
        xi.clone(),
        chi.clone(),
        FFamily::uniform(TimeFunction::indicator(0.0, f64::INFINITY, 1.0).unwrap()),
        x.clone(),
    )
    .unwrap();
    let mut last = f64::INFINITY;
    for k in 0..=30 {
        let t = k as f64 * a + 0.1;
        let n = count.eval_n(t, 1e-9).unwrap().value;
        assert_eq!(n, 2f64.powi(k + 1) - 1.0);
        let v = lalley_counting_asymptote(&xi, &chi, &lat, &x, t).unwrap();
        let rel = (v - n).abs() / n;
        assert!(rel < last);
        last = rel;
    }
    assert!(last < 1e-9);
}

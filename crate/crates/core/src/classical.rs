//! Classical corollaries in closed form: the key renewal theorem for i.i.d.
//! interarrivals, Markov renewal equations with point-mass kernels, and
//! lattice counting functions. Each solver is independent of the general
//! machinery so the two can check each other; the `*_problem` helpers build
//! the corresponding [`RenewalProblem`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::input_err;
use crate::math::{abs, exp, floor, ln, pairwise_sum};
use crate::potential::{
    check_eventually_positive, real_gcd_all, LatticeKind, LatticeReport, LocallyConstantPotential,
};
use crate::renewal::{FFamily, RenewalProblem};
use crate::spectral::{build_transfer, leading_eigendata, solve_delta};
use crate::symbolic::{Letter, Subshift, Word};
use crate::timefn::TimeFunction;
use crate::{Error, Result};

/// Span tolerance for `{s_i}`.
pub const SPAN_TOL: f64 = 1e-9;

/// I.i.d. interarrivals taking value `s_i` with probability `p_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct KeyRenewalSpec {
    pub p: Vec<f64>,
    pub s: Vec<f64>,
    pub z: TimeFunction,
}

impl KeyRenewalSpec {
    pub fn new(p: Vec<f64>, s: Vec<f64>, z: TimeFunction) -> Result<Self> {
        if p.len() < 2 || p.len() != s.len() {
            return Err(input_err!("need M >= 2 probabilities and as many interarrival values"));
        }
        if p.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
            return Err(input_err!("probabilities must lie in (0, 1)"));
        }
        if abs(p.iter().sum::<f64>() - 1.0) > 1e-12 {
            return Err(input_err!("probabilities must sum to 1"));
        }
        if s.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(input_err!("interarrival values must be positive"));
        }
        Ok(KeyRenewalSpec { p, s, z })
    }

    /// `Σ p_i s_i`.
    pub fn mean(&self) -> f64 {
        let terms: Vec<f64> = self.p.iter().zip(&self.s).map(|(p, s)| p * s).collect();
        pairwise_sum(&terms)
    }

    /// Lattice span of `{s_i}`, if any.
    pub fn span(&self) -> Option<f64> {
        let g = real_gcd_all(&self.s, SPAN_TOL);
        let lattice = g > 0.0
            && self.s.iter().all(|s| abs(s / g - crate::math::round(s / g)) * g <= SPAN_TOL * (1.0 + s));
        if lattice && g >= 1e3 * SPAN_TOL {
            Some(g)
        } else {
            None
        }
    }
}

/// Asymptotes of `Z(t) = z(t) + Σ p_i Z(t − s_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KeyRenewalAsymptote {
    pub mean: f64,
    /// `∫ z`.
    pub integral: f64,
    pub span: Option<f64>,
    /// `∫z / Σ p_i s_i`: the non-lattice limit and, always, the Cesàro limit.
    pub average: f64,
    z: TimeFunction,
}

impl KeyRenewalAsymptote {
    pub fn kind(&self) -> LatticeKind {
        if self.span.is_some() {
            LatticeKind::Lattice
        } else {
            LatticeKind::NonLattice
        }
    }

    /// Non-lattice limit; errors for lattice interarrivals.
    pub fn nonlattice(&self) -> Result<f64> {
        match self.span {
            None => Ok(self.average),
            Some(a) => Err(Error::WrongTheorem(format!("interarrivals are lattice with span {a}"))),
        }
    }

    /// Lattice asymptote `(a/Σp_i s_i) Σ_l z(al + t)`.
    pub fn lattice(&self, t: f64, tol: f64) -> Result<f64> {
        let a = self
            .span
            .ok_or_else(|| Error::WrongTheorem("interarrivals are non-lattice".into()))?;
        let s = self.z.lattice_sum(a, t, 0.0, tol)?;
        Ok(a / self.mean * s.value)
    }
}

pub fn key_renewal_asymptote(spec: &KeyRenewalSpec) -> Result<KeyRenewalAsymptote> {
    let mean = spec.mean();
    let integral = spec.z.integral_exp(0.0)?;
    Ok(KeyRenewalAsymptote {
        mean,
        integral,
        span: spec.span(),
        average: integral / mean,
        z: spec.z.clone(),
    })
}

/// Full-shift embedding with `η = log p_i`, `ξ = s_i` (so `δ = 0`).
pub fn key_renewal_problem(spec: &KeyRenewalSpec) -> Result<RenewalProblem> {
    let shift = Subshift::full(spec.p.len())?;
    let logs: Vec<f64> = spec.p.iter().map(|p| ln(*p)).collect();
    let eta = LocallyConstantPotential::from_letters(&shift, &logs)?;
    let xi = LocallyConstantPotential::from_letters(&shift, &spec.s)?;
    let chi = LocallyConstantPotential::constant(&shift, 1.0)?;
    RenewalProblem::new(eta, xi, chi, FFamily::uniform(spec.z.clone()), Word::new(vec![0]))
}

/// Markov renewal equation `Z_i(t) = f_i(t) + Σ_j e^{η̃(ji)} Z_j(t − ξ̃(ji))`
/// with depth-2 tables `η̃`, `ξ̃` indexed by the transition word `ji`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovRenewalSpec {
    pub eta: LocallyConstantPotential,
    pub xi: LocallyConstantPotential,
    pub f: Vec<TimeFunction>,
}

impl MarkovRenewalSpec {
    pub fn new(eta: LocallyConstantPotential, xi: LocallyConstantPotential, f: Vec<TimeFunction>) -> Result<Self> {
        if eta.shift() != xi.shift() {
            return Err(input_err!("eta and xi must live on the same subshift"));
        }
        if eta.depth() > 2 || xi.depth() > 2 {
            return Err(input_err!("Markov kernels depend on one transition (depth <= 2)"));
        }
        if f.len() != xi.shift().alphabet_size() {
            return Err(input_err!("need one profile per state"));
        }
        Ok(MarkovRenewalSpec {
            eta: eta.lift(2)?,
            xi: xi.lift(2)?,
            f,
        })
    }

    pub fn states(&self) -> usize {
        self.xi.shift().alphabet_size()
    }

    /// `B(s)_{ij} = exp(η̃(ji) + s ξ̃(ji))` on allowed transitions.
    pub fn kernel(&self, s: f64) -> Vec<Vec<f64>> {
        let n = self.states();
        let shift = self.xi.shift();
        let mut b = vec![vec![0.0; n]; n];
        for (i, row) in b.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                if shift.allows(j as Letter, i as Letter) {
                    let w = [j as Letter, i as Letter];
                    *v = exp(self.eta.eval(&w).unwrap_or(0.0) + s * self.xi.eval(&w).unwrap_or(0.0));
                }
            }
        }
        b
    }
}

/// Perron root and vectors of a nonnegative primitive matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Perron {
    pub root: f64,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
}

/// Power iteration on `B + I` (same Perron vectors, no periodicity issues).
pub fn perron(b: &[Vec<f64>]) -> Result<Perron> {
    let n = b.len();
    let iterate = |transpose: bool| -> Result<(f64, Vec<f64>)> {
        let mut v = vec![1.0 / n as f64; n];
        let mut prev = f64::INFINITY;
        for _ in 0..2_000_000 {
            let mut w = v.clone();
            for i in 0..n {
                for j in 0..n {
                    w[i] += if transpose { b[j][i] } else { b[i][j] } * v[j];
                }
            }
            let s: f64 = w.iter().sum();
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Numerical("Perron iteration degenerated".into()));
            }
            w.iter_mut().for_each(|x| *x /= s);
            let diff = v.iter().zip(&w).map(|(a, c)| abs(a - c)).fold(0.0, f64::max);
            v = w;
            if diff <= 4.0 * f64::EPSILON && abs(s - prev) <= 4.0 * f64::EPSILON * s {
                return Ok((s - 1.0, v));
            }
            prev = s;
        }
        Err(Error::NoConvergence {
            method: "Perron iteration",
            iterations: 2_000_000,
            last_change: f64::NAN,
        })
    };
    let (rr, right) = iterate(false)?;
    let (rl, left) = iterate(true)?;
    // Rayleigh-type estimate from both sides is more accurate than either sum
    let num: f64 = (0..n)
        .map(|i| (0..n).map(|j| left[i] * b[i][j] * right[j]).sum::<f64>())
        .sum();
    let den: f64 = left.iter().zip(&right).map(|(a, c)| a * c).sum();
    let root = num / den;
    if abs(root - rr) > 1e-9 * root || abs(root - rl) > 1e-9 * root {
        return Err(Error::Numerical(format!("Perron roots disagree: {rr}, {rl}, {root}")));
    }
    Ok(Perron { root, right, left })
}

/// Solution of a Markov renewal equation.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovRenewalResult {
    pub delta: f64,
    /// `G(i)` per state.
    pub g: Vec<f64>,
    pub perron: Perron,
    /// `ln spr B(−δ)` at the returned `δ`.
    pub residual: f64,
}

/// `δ` with `spr B(−δ) = 1` and the constants `G(i)`.
pub fn markov_renewal_g(spec: &MarkovRenewalSpec, tol: f64) -> Result<MarkovRenewalResult> {
    let pos = check_eventually_positive(&spec.xi)?;
    if !pos.positive {
        return Err(Error::Precondition("xi is not eventually positive".into()));
    }
    let g = |d: f64| -> Result<f64> { Ok(ln(perron(&spec.kernel(-d))?.root)) };
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while g(lo)? < 0.0 {
        hi = lo;
        lo *= 2.0;
        if lo < -1e6 {
            return Err(Error::Numerical("cannot bracket δ".into()));
        }
    }
    while g(hi)? > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Numerical("cannot bracket δ".into()));
        }
    }
    // plain bisection: slow but independent of the pressure solver
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= tol.min(1e-15) * (1.0 + abs(mid)) {
            break;
        }
        if g(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let delta = 0.5 * (lo + hi);
    let b = spec.kernel(-delta);
    let p = perron(&b)?;
    let n = spec.states();
    let ints: Vec<f64> = spec
        .f
        .iter()
        .map(|f| f.integral_exp(delta))
        .collect::<Result<Vec<_>>>()?;
    let num: f64 = pairwise_sum(&(0..n).map(|j| p.left[j] * ints[j]).collect::<Vec<_>>());
    let mut den_terms = Vec::new();
    for k in 0..n {
        for j in 0..n {
            if b[k][j] > 0.0 {
                // B_kj = e^{η̃(jk) − δ ξ̃(jk)}
                let xi = spec.xi.eval(&[j as Letter, k as Letter])?;
                den_terms.push(p.left[k] * p.right[j] * xi * b[k][j]);
            }
        }
    }
    let den = pairwise_sum(&den_terms);
    let gs = (0..n).map(|i| p.right[i] * num / den).collect();
    Ok(MarkovRenewalResult {
        delta,
        g: gs,
        residual: ln(p.root),
        perron: p,
    })
}

/// Depth-2 embedding of a Markov renewal equation, based at `state`.
pub fn markov_renewal_problem(spec: &MarkovRenewalSpec, state: Letter) -> Result<RenewalProblem> {
    let shift = spec.xi.shift();
    let chi = LocallyConstantPotential::constant(shift, 1.0)?;
    let members = spec
        .f
        .iter()
        .enumerate()
        .map(|(i, f)| (Word::new(vec![i as Letter]), f.clone()));
    let f = FFamily::new(shift, 1, members)?;
    // the base word must determine the spectral cylinder (depth 2)
    let next = (0..spec.states() as Letter)
        .find(|j| shift.allows(state, *j))
        .ok_or_else(|| input_err!("state {state} has no successor"))?;
    RenewalProblem::new(
        spec.eta.clone(),
        spec.xi.clone(),
        chi,
        f,
        Word::new(vec![state, next]),
    )
}

/// Lalley's lattice counting asymptote for `η ≡ 0`:
///
/// ```text
/// N(t, x) ~ a h(x) ∫ χ(y) e^{δa⌊t/a − (ψ(y) − ψ(x))/a⌋} dν(y) / ((1 − e^{−δa}) ∫ ζ dμ)
/// ```
///
/// with the spectral data of `−δζ`.
pub fn lalley_counting_asymptote(
    xi: &LocallyConstantPotential,
    chi: &LocallyConstantPotential,
    lattice: &LatticeReport,
    x_head: &Word,
    t: f64,
) -> Result<f64> {
    if lattice.kind != LatticeKind::Lattice {
        return Err(Error::WrongTheorem(format!(
            "xi is {}; the counting corollary needs lattice data",
            lattice.kind.as_str()
        )));
    }
    let a = lattice.span.ok_or_else(|| Error::Unsupported("lattice span missing".into()))?;
    let (zeta, psi) = match (&lattice.zeta, &lattice.psi) {
        (Some(z), Some(p)) => (z, p),
        _ => return Err(Error::Unsupported("zeta and psi are required".into())),
    };
    let shift = xi.shift();
    let zero = LocallyConstantPotential::constant(shift, 0.0)?;
    let delta = solve_delta(&zero, xi, None, 1e-14)?.delta;
    let m = [zeta.depth(), psi.depth(), chi.depth(), 1].into_iter().max().unwrap_or(1);
    let sd = leading_eigendata(&build_transfer(&zeta.scale(-delta), m)?)?;
    let psi_x = psi.eval(x_head.letters())?;
    let h_x = sd.h_at(x_head.letters())?;
    let terms: Vec<f64> = sd
        .index
        .words()
        .enumerate()
        .map(|(i, w)| {
            let c = chi.eval(w.letters()).unwrap_or(0.0);
            let k = floor(t / a - (psi.eval(w.letters()).unwrap_or(0.0) - psi_x) / a);
            c * exp(delta * a * k) * sd.nu[i]
        })
        .collect();
    let zeta_int = sd.integrate(zeta)?;
    Ok(a * h_x * pairwise_sum(&terms) / ((1.0 - exp(-delta * a)) * zeta_int))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::detect_lattice;

    #[test]
    fn key_examples() {
        let unit = KeyRenewalSpec::new(
            vec![0.5, 0.5],
            vec![1.0, 1.0],
            TimeFunction::indicator(0.0, 1.0, 1.0).unwrap(),
        )
        .unwrap();
        let a = key_renewal_asymptote(&unit).unwrap();
        assert_eq!(a.span, Some(1.0));
        assert!((a.lattice(0.3, 1e-12).unwrap() - 1.0).abs() < 1e-14);
        assert!((a.average - 1.0).abs() < 1e-14);

        let z = TimeFunction::exp_decay(1.0, 1.0, 0.0).unwrap();
        let nl = KeyRenewalSpec::new(vec![0.5, 0.5], vec![ln(2.0), ln(3.0)], z).unwrap();
        let a = key_renewal_asymptote(&nl).unwrap();
        assert_eq!(a.span, None);
        assert!((a.nonlattice().unwrap() - 2.0 / ln(6.0)).abs() < 1e-14);
        assert_eq!(a.average, a.nonlattice().unwrap());

        let mixed = KeyRenewalSpec::new(
            vec![0.5, 0.5],
            vec![1.0, 2.0],
            TimeFunction::indicator(0.0, 1.0, 1.0).unwrap(),
        )
        .unwrap();
        let a = key_renewal_asymptote(&mixed).unwrap();
        assert_eq!(a.span, Some(1.0));
        assert!((a.lattice(0.25, 1e-12).unwrap() - 1.0 / 1.5).abs() < 1e-14);
    }

    #[test]
    fn key_embedding_agrees() {
        let z = TimeFunction::exp_decay(1.0, 1.0, 0.0).unwrap();
        let spec = KeyRenewalSpec::new(vec![0.3, 0.7], vec![ln(2.0), ln(3.0)], z).unwrap();
        let p = key_renewal_problem(&spec).unwrap();
        assert!(p.delta().abs() < 1e-12);
        let g = p.asymptotic_g().unwrap().value;
        let want = key_renewal_asymptote(&spec).unwrap().average;
        assert!((g - want).abs() < 1e-10, "{g} vs {want}");
    }

    fn golden_markov() -> MarkovRenewalSpec {
        let shift = Subshift::new(vec![vec![1, 1], vec![1, 0]]).unwrap();
        // ξ̃: (1,1) ↦ 1, (1,2) ↦ 2, (2,1) ↦ 1 (words are 0-based here)
        let xi = LocallyConstantPotential::from_table(
            &shift,
            2,
            vec![
                (Word::new(vec![0, 0]), 1.0),
                (Word::new(vec![0, 1]), 2.0),
                (Word::new(vec![1, 0]), 1.0),
            ],
        )
        .unwrap();
        let eta = LocallyConstantPotential::from_fn(&shift, 2, |w| 0.2 * w[0] as f64 - 0.5).unwrap();
        let f = vec![
            TimeFunction::exp_decay(1.0, 2.0, 0.0).unwrap(),
            TimeFunction::indicator(0.0, 1.0, 0.5).unwrap(),
        ];
        MarkovRenewalSpec::new(eta, xi, f).unwrap()
    }

    #[test]
    fn markov_matches_embedding() {
        let spec = golden_markov();
        let r = markov_renewal_g(&spec, 1e-15).unwrap();
        assert!(r.residual.abs() < 1e-13);
        for i in 0..2u8 {
            let p = markov_renewal_problem(&spec, i).unwrap();
            assert!((p.delta() - r.delta).abs() < 1e-12);
            let g = p.asymptotic_g();
            // ξ̃ is integer-valued, so the embedding is lattice; compare averages
            let g = match g {
                Ok(v) => v.value,
                Err(Error::WrongTheorem(_)) => p.average_g().unwrap().value,
                Err(e) => panic!("{e}"),
            };
            assert!((g - r.g[i as usize]).abs() < 1e-8 * (1.0 + g.abs()), "{g} vs {}", r.g[i as usize]);
        }
        let zero = MarkovRenewalSpec::new(
            spec.eta.clone(),
            spec.xi.clone(),
            vec![TimeFunction::zero(), TimeFunction::zero()],
        )
        .unwrap();
        assert!(markov_renewal_g(&zero, 1e-14).unwrap().g.iter().all(|g| *g == 0.0));
    }

    #[test]
    fn lalley_examples() {
        let s = Subshift::full(2).unwrap();
        let xi = LocallyConstantPotential::constant(&s, ln(2.0)).unwrap();
        let chi = LocallyConstantPotential::constant(&s, 1.0).unwrap();
        let lat = detect_lattice(&xi, None, 1e-9).unwrap();
        let x = Word::new(vec![0]);
        let a = ln(2.0);
        for k in 0..10 {
            let t = k as f64 * a + 0.1;
            let v = lalley_counting_asymptote(&xi, &chi, &lat, &x, t).unwrap();
            assert!((v - crate::math::powi(2.0, k + 1)).abs() < 1e-12 * v);
            let v2 = lalley_counting_asymptote(&xi, &chi, &lat, &x, t + a).unwrap();
            assert!((v2 - 2.0 * v).abs() < 1e-12 * v2);
        }
        let zero = LocallyConstantPotential::constant(&s, 0.0).unwrap();
        assert_eq!(lalley_counting_asymptote(&xi, &zero, &lat, &x, 1.0).unwrap(), 0.0);
        let nl = LocallyConstantPotential::from_letters(&s, &[ln(2.0), ln(3.0)]).unwrap();
        let r = detect_lattice(&nl, None, 1e-9).unwrap();
        assert!(matches!(
            lalley_counting_asymptote(&nl, &chi, &r, &x, 1.0),
            Err(Error::WrongTheorem(_))
        ));
    }
}

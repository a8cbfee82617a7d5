//! Self-similar sets: Minkowski dimension from the Moran equation, the
//! tube-volume renewal series and the average Minkowski content.
//!
//! Only the self-similar case is covered, where `ξ = −log r_{ω₁}` has depth
//! one and the eigenfunction is constant.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::input_err;
use crate::math::{abs, exp, ln, pairwise_sum, powf, sqrt};
use crate::potential::{detect_lattice, geometric_potential, LatticeKind, LocallyConstantPotential};
use crate::renewal::{FFamily, NValue, RenewalProblem};
use crate::symbolic::Word;
use crate::timefn::{ExpTerm, Piece, TimeFunction};
use crate::{Error, Result};

/// Root `D` of `Σ r_i^D = 1` by bisection.
pub fn minkowski_dimension(ratios: &[f64]) -> Result<f64> {
    if ratios.len() < 2 {
        return Err(input_err!("need at least 2 contraction ratios"));
    }
    if let Some(r) = ratios.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(input_err!("contraction ratio {r} outside (0, 1)"));
    }
    let moran = |d: f64| ratios.iter().map(|r| powf(*r, d)).sum::<f64>() - 1.0;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while moran(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e9 {
            return Err(Error::Numerical("Moran equation has no root below 1e9".into()));
        }
    }
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if moran(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `T* = −log(√3/12)`, where the gasket's tube profile changes form.
pub fn gasket_breakpoint() -> f64 {
    ln(12.0 / sqrt(3.0))
}

/// `λ₂(F_{e^{−t}} ∩ Γ)` for the Sierpinski gasket with unit side.
pub fn sierpinski_gamma_tube(t: f64) -> f64 {
    let s3 = sqrt(3.0);
    if t <= gasket_breakpoint() {
        s3 / 16.0
    } else {
        1.5 * exp(-t) - 3.0 * s3 * exp(-2.0 * t)
    }
}

/// [`sierpinski_gamma_tube`] as a [`TimeFunction`].
pub fn sierpinski_gamma_tube_fn() -> TimeFunction {
    let s3 = sqrt(3.0);
    let ts = gasket_breakpoint();
    TimeFunction::from_pieces(vec![
        Piece::new(f64::NEG_INFINITY, ts, vec![ExpTerm::new(s3 / 16.0, 0, 0.0)]),
        Piece::new(
            ts,
            f64::INFINITY,
            vec![ExpTerm::new(1.5, 0, -1.0), ExpTerm::new(-3.0 * s3, 0, -2.0)],
        ),
    ])
    .expect("static pieces are valid")
}

/// `(√3^{−(D+1)}/log 2)·[1/(2−D) + 2/(D−1) − 1/D]` with `D = log 3/log 2`.
pub fn gasket_content_closed_form() -> f64 {
    let d = ln(3.0) / ln(2.0);
    powf(sqrt(3.0), -(d + 1.0)) / ln(2.0) * (1.0 / (2.0 - d) + 2.0 / (d - 1.0) - 1.0 / d)
}

/// Similarity ratios, ambient dimension and the tube profile on the
/// generator `Γ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SelfSimilarSystem {
    ratios: Vec<f64>,
    ambient: usize,
    gamma_tube: TimeFunction,
    dimension: f64,
}

impl SelfSimilarSystem {
    pub fn new(ratios: Vec<f64>, ambient: usize, gamma_tube: TimeFunction) -> Result<Self> {
        if ambient == 0 {
            return Err(input_err!("ambient dimension must be at least 1"));
        }
        let dimension = minkowski_dimension(&ratios)?;
        Ok(SelfSimilarSystem {
            ratios,
            ambient,
            gamma_tube,
            dimension,
        })
    }

    /// The Sierpinski gasket: three maps of ratio 1/2 in the plane.
    pub fn gasket() -> Self {
        Self::new(vec![0.5; 3], 2, sierpinski_gamma_tube_fn()).expect("gasket data is valid")
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }
    pub fn ambient(&self) -> usize {
        self.ambient
    }
    pub fn gamma_tube(&self) -> &TimeFunction {
        &self.gamma_tube
    }
    pub fn dimension(&self) -> f64 {
        self.dimension
    }

    pub fn xi(&self) -> Result<LocallyConstantPotential> {
        geometric_potential(&self.ratios)
    }

    /// Renewal problem with `ξ = −log r`, `η = −d ξ`, `χ ≡ 1`, `f = γ_tube`.
    pub fn problem(&self) -> Result<RenewalProblem> {
        let xi = self.xi()?;
        let chi = LocallyConstantPotential::constant(xi.shift(), 1.0)?;
        RenewalProblem::new(
            xi.scale(-(self.ambient as f64)),
            xi,
            chi,
            FFamily::uniform(self.gamma_tube.clone()),
            Word::new(vec![0]),
        )
    }

    /// `Σ_n Σ_{|u|=n} e^{−d S_nξ} λ_d(F_{e^{−(t − S_nξ)}} ∩ Γ)`.
    pub fn tube_volume_series(&self, t: f64, tol: f64) -> Result<NValue> {
        self.problem()?.eval_n(t, tol)
    }

    pub fn average_minkowski_content(&self) -> Result<MinkowskiContent> {
        let delta = self.dimension - self.ambient as f64;
        let numerator = self.gamma_tube.integral_exp(delta).map_err(|e| {
            input_err!("tube profile is not o(e^(t(D-d))): {e}")
        })?;
        let terms: Vec<f64> = self
            .ratios
            .iter()
            .map(|r| -ln(*r) * powf(*r, self.dimension))
            .collect();
        let denominator = pairwise_sum(&terms);
        let lattice = detect_lattice(&self.xi()?, None, crate::potential::LATTICE_TOL)?;
        Ok(MinkowskiContent {
            value: numerator / denominator,
            numerator,
            denominator,
            dimension: self.dimension,
            kind: lattice.kind,
            span: lattice.span,
        })
    }

    /// Samples `e^{−t(D−d)} γ_tube(t)` at large `t`; it must tend to zero.
    pub fn check_gamma_decay(&self, t_from: f64, samples: usize) -> bool {
        let delta = self.dimension - self.ambient as f64;
        let vals: Vec<f64> = (0..samples.max(2))
            .map(|i| {
                let t = t_from * (1.0 + i as f64);
                abs(exp(-t * delta) * self.gamma_tube.eval(t))
            })
            .collect();
        vals.windows(2).all(|w| w[1] <= w[0] + 1e-300) && vals.last().is_some_and(|v| *v < 1e-6)
    }
}

/// Average Minkowski content with its ingredients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinkowskiContent {
    pub value: f64,
    /// `∫ e^{−T(D−d)} λ_d(F_{e^{−T}} ∩ Γ) dT`.
    pub numerator: f64,
    /// `−Σ log(r_i) r_i^D`.
    pub denominator: f64,
    pub dimension: f64,
    /// Lattice classification of `ξ`; in the lattice case the content only
    /// exists as an average.
    pub kind: LatticeKind,
    pub span: Option<f64>,
}

//! Serializable results printed by the subcommands.

use rpf_core::classical::{KeyRenewalAsymptote, MarkovRenewalResult};
use rpf_core::geometry::MinkowskiContent;
use rpf_core::renewal::{AsymptoticKind, AsymptoticResult, CesaroResult, ConditionsReport, DriReport, ExponentFit};
use rpf_core::spectral::{DeltaSolution, SpectralData};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub depth: usize,
    /// Cylinder words (1-based), in the order of `h`, `nu` and `mu`.
    pub words: Vec<String>,
    pub gamma: f64,
    pub pressure: f64,
    /// Estimated, not certified.
    pub gap: f64,
    pub h: Vec<f64>,
    pub nu: Vec<f64>,
    pub mu: Vec<f64>,
    pub residual_right: f64,
    pub residual_left: f64,
    pub iterations: usize,
}

impl SpectralReport {
    pub fn new(sd: &SpectralData, alphabet: usize) -> Self {
        SpectralReport {
            depth: sd.depth(),
            words: sd.index.words().map(|w| w.to_string_for(alphabet)).collect(),
            gamma: sd.gamma,
            pressure: sd.pressure,
            gap: sd.gap,
            h: sd.h.clone(),
            nu: sd.nu.clone(),
            mu: sd.mu.clone(),
            residual_right: sd.residual_right,
            residual_left: sd.residual_left,
            iterations: sd.iterations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureReport {
    pub depth: usize,
    pub pressure: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub delta: f64,
    pub pressure_residual: f64,
    pub gamma_residual: f64,
    pub bracket: [f64; 2],
}

impl From<DeltaSolution> for DeltaReport {
    fn from(d: DeltaSolution) -> Self {
        DeltaReport {
            delta: d.delta,
            pressure_residual: d.pressure_residual,
            gamma_residual: d.gamma_residual,
            bracket: [d.bracket.0, d.bracket.1],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    NonLattice,
    Lattice,
    Average,
}

impl From<AsymptoticKind> for Law {
    fn from(k: AsymptoticKind) -> Self {
        match k {
            AsymptoticKind::NonLattice => Law::NonLattice,
            AsymptoticKind::Lattice => Law::Lattice,
            AsymptoticKind::Average => Law::Average,
        }
    }
}

/// Asymptotic constant of `e^{−tδ} N(t, x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteReport {
    /// `lattice`, `non-lattice` or `inconclusive`.
    pub xi_kind: String,
    pub span: Option<f64>,
    pub law: Law,
    pub delta: f64,
    /// Limit (non-lattice) or Cesàro limit (otherwise).
    pub value: f64,
    pub h_x: f64,
    pub xi_integral: f64,
    pub time_integrals: Vec<f64>,
    pub depth: usize,
    /// One period of the lattice factor as `[t, G̃(t)]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period_table: Option<Vec<[f64; 2]>>,
}

impl AsymptoteReport {
    pub fn new(r: &AsymptoticResult, xi_kind: &str, span: Option<f64>) -> Self {
        AsymptoteReport {
            xi_kind: xi_kind.into(),
            span,
            law: r.kind.into(),
            delta: r.delta,
            value: r.value,
            h_x: r.h_x,
            xi_integral: r.xi_integral,
            time_integrals: r.time_integrals.clone(),
            depth: r.depth,
            period_table: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CesaroReport {
    pub value: f64,
    pub target: Option<f64>,
    pub relative_error: Option<f64>,
    pub t_max: f64,
    pub n_points: usize,
    pub tail_bound: f64,
}

impl From<CesaroResult> for CesaroReport {
    fn from(c: CesaroResult) -> Self {
        CesaroReport {
            value: c.value,
            target: c.target,
            relative_error: c.target.map(|g| (c.value - g) / g),
            t_max: c.t_max,
            n_points: c.n_points,
            tail_bound: c.tail_bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitReport {
    Vanishes,
    Slope(f64),
    TooFewPoints,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriRow {
    pub h: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriSummary {
    pub rows: Vec<DriRow>,
    pub upper_infinite: bool,
    pub monotone_gaps: bool,
    pub smallest_gap: f64,
    pub threshold: f64,
    pub consistent: bool,
    pub note: Option<String>,
}

impl From<&DriReport> for DriSummary {
    fn from(d: &DriReport) -> Self {
        DriSummary {
            rows: d.rows.iter().map(|&(h, lower, upper)| DriRow { h, lower, upper }).collect(),
            upper_infinite: d.upper_infinite,
            monotone_gaps: d.monotone_gaps,
            smallest_gap: d.smallest_gap,
            threshold: d.threshold,
            consistent: d.consistent,
            note: d.note.clone(),
        }
    }
}

/// Sampled evidence for the regularity conditions (A)–(D).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionsSummary {
    pub a_integrable: bool,
    pub a_integrals: Vec<(String, Option<f64>)>,
    pub b_bounded: bool,
    pub b_constant: f64,
    pub c_fit: FitReport,
    pub c_declared_exponent: Option<f64>,
    pub c_holds: bool,
    pub d_monotone: bool,
    pub d_equi_dri: DriSummary,
    pub t_points: usize,
}

impl ConditionsSummary {
    pub fn new(c: &ConditionsReport, alphabet: usize) -> Self {
        ConditionsSummary {
            a_integrable: c.a_integrable,
            a_integrals: c.a_integrals.iter().map(|(w, v)| (w.to_string_for(alphabet), *v)).collect(),
            b_bounded: c.b_bounded,
            b_constant: c.b_constant,
            c_fit: match c.c_fit {
                ExponentFit::Vanishes => FitReport::Vanishes,
                ExponentFit::Slope(s) => FitReport::Slope(s),
                ExponentFit::TooFewPoints => FitReport::TooFewPoints,
            },
            c_declared_exponent: c.c_declared_exponent,
            c_holds: c.c_holds,
            d_monotone: c.d_monotone,
            d_equi_dri: (&c.d_equi_dri).into(),
            t_points: c.t_points,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyReport {
    pub kind: String,
    pub span: Option<f64>,
    pub mean: f64,
    pub integral: f64,
    /// `∫ z / Σ p_i s_i`.
    pub average: f64,
    /// `[t, asymptote(t)]`.
    pub curve: Vec<[f64; 2]>,
}

impl KeyReport {
    pub fn new(a: &KeyRenewalAsymptote, curve: Vec<[f64; 2]>) -> Self {
        KeyReport {
            kind: a.kind().as_str().into(),
            span: a.span,
            mean: a.mean,
            integral: a.integral,
            average: a.average,
            curve,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovReport {
    pub delta: f64,
    pub g: Vec<f64>,
    pub perron_root: f64,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
    pub residual: f64,
}

impl From<&MarkovRenewalResult> for MarkovReport {
    fn from(m: &MarkovRenewalResult) -> Self {
        MarkovReport {
            delta: m.delta,
            g: m.g.clone(),
            perron_root: m.perron.root,
            right: m.perron.right.clone(),
            left: m.perron.left.clone(),
            residual: m.residual,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiReport {
    #[serde(rename = "D")]
    pub dimension: f64,
    pub ambient: usize,
    pub kind: String,
    pub span: Option<f64>,
    /// Average Minkowski content (the content itself when non-lattice).
    pub content: f64,
    pub numerator: f64,
    pub denominator: f64,
}

impl MinkowskiReport {
    pub fn new(c: &MinkowskiContent, ambient: usize) -> Self {
        MinkowskiReport {
            dimension: c.dimension,
            ambient,
            kind: c.kind.as_str().into(),
            span: c.span,
            content: c.value,
            numerator: c.numerator,
            denominator: c.denominator,
        }
    }
}

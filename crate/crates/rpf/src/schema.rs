//! JSON input documents and their conversion into core objects.
//!
//! Words are written 1-based (`"12"`, or `"1,12"` for alphabets above 9).
//! Infinite piece endpoints are written as `null` or omitted.

use std::collections::BTreeMap;

use rpf_core::classical::{KeyRenewalSpec, MarkovRenewalSpec};
use rpf_core::geometry::sierpinski_gamma_tube_fn;
use rpf_core::potential::{geometric_potential, LatticeReport, LATTICE_TOL};
use rpf_core::renewal::RenewalOptions;
use rpf_core::spectral::normalize_potential;
use rpf_core::timefn::{ExpTerm, Piece, Tail};
use rpf_core::{FFamily, LocallyConstantPotential, RenewalProblem, Subshift, TimeFunction, Word};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// `{"M": 3}` for the full shift, or `{"M": 2, "A": [[1, 1], [1, 0]]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftSpec {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<u8>>>,
}

impl ShiftSpec {
    pub fn build(&self) -> Result<Subshift, CliError> {
        let s = match &self.a {
            None => Subshift::full(self.m)?,
            Some(rows) => Subshift::new(rows.clone())?,
        };
        if s.alphabet_size() != self.m {
            return Err(CliError::Input(format!("M = {} but A is {}×{}", self.m, s.alphabet_size(), s.alphabet_size())));
        }
        Ok(s)
    }
}

/// A locally constant potential: either `{"depth": d, "values": {word: v}}`
/// listing every admissible word of length `d`, or one of the shorthands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialSpec {
    Table(TableSpec),
    Short(ShortPotential),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub depth: usize,
    pub values: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ShortPotential {
    Constant(f64),
    /// Depth 1, one value per letter.
    Letters(Vec<f64>),
    /// `−log r_i` on the full shift.
    Geometric(Vec<f64>),
    /// Row-stochastic normalisation `η̃` of another potential.
    Normalized { potential: Box<PotentialSpec>, depth: usize },
}

impl PotentialSpec {
    pub fn build(&self, shift: &Subshift) -> Result<LocallyConstantPotential, CliError> {
        Ok(match self {
            PotentialSpec::Short(ShortPotential::Constant(c)) => LocallyConstantPotential::constant(shift, *c)?,
            PotentialSpec::Short(ShortPotential::Letters(v)) => LocallyConstantPotential::from_letters(shift, v)?,
            PotentialSpec::Table(TableSpec { depth, values }) => {
                let m = shift.alphabet_size();
                let table = values
                    .iter()
                    .map(|(w, v)| Ok((Word::parse(w, m)?, *v)))
                    .collect::<Result<Vec<_>, rpf_core::Error>>()?;
                LocallyConstantPotential::from_table(shift, *depth, table)?
            }
            PotentialSpec::Short(ShortPotential::Geometric(r)) => {
                let g = geometric_potential(r)?;
                if g.shift() != shift {
                    return Err(CliError::Input("geometric potential needs the full shift on as many letters as ratios".into()));
                }
                g
            }
            PotentialSpec::Short(ShortPotential::Normalized { potential, depth }) => normalize_potential(&potential.build(shift)?, *depth)?,
        })
    }
}

/// `c · t^p · e^{q t}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub c: f64,
    #[serde(default)]
    pub p: u32,
    #[serde(default)]
    pub q: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    #[serde(default)]
    pub from: Option<f64>,
    #[serde(default)]
    pub to: Option<f64>,
    pub terms: Vec<TermSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Zero,
    /// `c · 1_{[from, to)}`.
    Indicator {
        #[serde(default)]
        from: Option<f64>,
        #[serde(default)]
        to: Option<f64>,
        #[serde(default = "one")]
        c: f64,
    },
    /// `c · e^{−rate t} · 1_{[from, ∞)}`.
    ExpDecay {
        #[serde(default = "one")]
        c: f64,
        rate: f64,
        #[serde(default)]
        from: f64,
    },
    Pieces(Vec<PieceSpec>),
    /// Linear interpolation of `values` at `t0 + k·step`, zero outside.
    Grid { t0: f64, step: f64, values: Vec<f64> },
    /// `"gasket"`: the Sierpinski tube profile.
    Builtin(String),
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TailSpec {
    Support(f64),
    Exp { c: f64, rate: f64, from: f64 },
}

impl From<TailSpec> for Tail {
    fn from(t: TailSpec) -> Tail {
        match t {
            TailSpec::Support(s) => Tail::Support(s),
            TailSpec::Exp { c, rate, from } => Tail::Exp { c, rate, from },
        }
    }
}

/// A time profile with optional tail overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeFnSpec {
    pub shape: ShapeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_tail: Option<TailSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_tail: Option<TailSpec>,
}

impl TimeFnSpec {
    pub fn build(&self) -> Result<TimeFunction, CliError> {
        let lo = |v: Option<f64>| v.unwrap_or(f64::NEG_INFINITY);
        let hi = |v: Option<f64>| v.unwrap_or(f64::INFINITY);
        let mut f = match &self.shape {
            ShapeSpec::Zero => TimeFunction::zero(),
            ShapeSpec::Indicator { from, to, c } => TimeFunction::indicator(lo(*from), hi(*to), *c)?,
            ShapeSpec::ExpDecay { c, rate, from } => TimeFunction::exp_decay(*c, *rate, *from)?,
            ShapeSpec::Pieces(ps) => TimeFunction::from_pieces(
                ps.iter()
                    .map(|p| {
                        Piece::new(
                            lo(p.from),
                            hi(p.to),
                            p.terms.iter().map(|t| ExpTerm::new(t.c, t.p, t.q)).collect(),
                        )
                    })
                    .collect(),
            )?,
            ShapeSpec::Grid { t0, step, values } => TimeFunction::from_grid(*t0, *step, values.clone())?,
            ShapeSpec::Builtin(name) => match name.as_str() {
                "gasket" => sierpinski_gamma_tube_fn(),
                other => return Err(CliError::Input(format!("unknown builtin profile {other:?}"))),
            },
        };
        if let Some(t) = &self.lower_tail {
            f = f.with_lower_tail(t.clone().into())?;
        }
        if let Some(t) = &self.upper_tail {
            f = f.with_upper_tail(t.clone().into())?;
        }
        Ok(f)
    }
}

/// `{"uniform": f}` or `{"per_cylinder": {"depth": d, "members": {"1": f, ...}}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FFamilySpec {
    Uniform(TimeFnSpec),
    PerCylinder {
        depth: usize,
        members: BTreeMap<String, TimeFnSpec>,
    },
}

impl FFamilySpec {
    pub fn build(&self, shift: &Subshift) -> Result<FFamily, CliError> {
        Ok(match self {
            FFamilySpec::Uniform(f) => FFamily::uniform(f.build()?),
            FFamilySpec::PerCylinder { depth, members } => {
                let m = shift.alphabet_size();
                let ms = members
                    .iter()
                    .map(|(w, f)| Ok((Word::parse(w, m)?, f.build()?)))
                    .collect::<Result<Vec<_>, CliError>>()?;
                FFamily::new(shift, *depth, ms)?
            }
        })
    }
}

/// User-supplied lattice data `(a, ζ, ψ)` naming two potentials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub span: f64,
    pub zeta: String,
    pub psi: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsSpec {
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub depth: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub n_max: Option<usize>,
    #[serde(default)]
    pub paths: Option<usize>,
    #[serde(default)]
    pub max_cycle_len: Option<usize>,
    #[serde(default)]
    pub merge_rel: Option<f64>,
}

/// A renewal problem document. `eta` defaults to 0 and `chi` to 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub shift: ShiftSpec,
    #[serde(default)]
    pub potentials: BTreeMap<String, PotentialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_family: Option<FFamilySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_head: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSpec>,
    #[serde(default)]
    pub options: OptionsSpec,
}

/// A [`ProblemFile`] with everything built.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub shift: Subshift,
    pub potentials: BTreeMap<String, LocallyConstantPotential>,
    pub family: Option<FFamily>,
    pub x_head: Option<Word>,
    pub lattice: Option<LatticeSpec>,
    pub options: OptionsSpec,
}

impl ProblemFile {
    pub fn load(&self) -> Result<Loaded, CliError> {
        let shift = self.shift.build()?;
        let mut potentials = BTreeMap::new();
        for (name, spec) in &self.potentials {
            let p = spec
                .build(&shift)
                .map_err(|e| e.context(&format!("potential {name:?}")))?;
            potentials.insert(name.clone(), p);
        }
        let family = self.f_family.as_ref().map(|f| f.build(&shift)).transpose()?;
        let x_head = self
            .x_head
            .as_ref()
            .map(|w| Word::parse(w, shift.alphabet_size()))
            .transpose()?;
        Ok(Loaded {
            shift,
            potentials,
            family,
            x_head,
            lattice: self.lattice.clone(),
            options: self.options.clone(),
        })
    }
}

impl Loaded {
    /// Named potential, with `eta ↦ 0` and `chi ↦ 1` defaults.
    pub fn potential(&self, name: &str) -> Result<LocallyConstantPotential, CliError> {
        if let Some(p) = self.potentials.get(name) {
            return Ok(p.clone());
        }
        match name {
            "eta" => Ok(LocallyConstantPotential::constant(&self.shift, 0.0)?),
            "chi" => Ok(LocallyConstantPotential::constant(&self.shift, 1.0)?),
            _ => Err(CliError::Input(format!("potential {name:?} is not defined"))),
        }
    }

    pub fn renewal_options(&self) -> RenewalOptions {
        let mut o = RenewalOptions::default();
        if let Some(m) = self.options.max_cycle_len {
            o.max_cycle_len = Some(m);
        }
        if let Some(r) = self.options.merge_rel {
            o.merge_rel = r;
        }
        o
    }

    pub fn family(&self) -> Result<FFamily, CliError> {
        self.family
            .clone()
            .ok_or_else(|| CliError::Input("f_family is required".into()))
    }

    pub fn x_head(&self) -> Result<Word, CliError> {
        self.x_head
            .clone()
            .ok_or_else(|| CliError::Input("x_head is required".into()))
    }

    /// User lattice data, validated against `ξ`.
    pub fn lattice_report(&self) -> Result<Option<LatticeReport>, CliError> {
        let Some(spec) = &self.lattice else { return Ok(None) };
        let xi = self.potential("xi")?;
        let zeta = self.potential(&spec.zeta)?;
        let psi = self.potential(&spec.psi)?;
        Ok(Some(LatticeReport::user_supplied(&xi, spec.span, zeta, psi, 1e3 * LATTICE_TOL)?))
    }

    pub fn problem(&self) -> Result<RenewalProblem, CliError> {
        let mut p = RenewalProblem::with_options(
            self.potential("eta")?,
            self.potential("xi")?,
            self.potential("chi")?,
            self.family()?,
            self.x_head()?,
            self.renewal_options(),
        )?;
        if let Some(l) = self.lattice_report()? {
            p.set_lattice(l)?;
        }
        Ok(p)
    }
}

/// `Z(t) = z(t) + Σ p_i Z(t − s_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyFile {
    pub p: Vec<f64>,
    pub s: Vec<f64>,
    pub z: TimeFnSpec,
}

impl KeyFile {
    pub fn build(&self) -> Result<KeyRenewalSpec, CliError> {
        Ok(KeyRenewalSpec::new(self.p.clone(), self.s.clone(), self.z.build()?)?)
    }
}

/// Markov renewal equation with depth-2 kernels on transition words `ji`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovFile {
    pub shift: ShiftSpec,
    pub eta: PotentialSpec,
    pub xi: PotentialSpec,
    pub f: Vec<TimeFnSpec>,
}

impl MarkovFile {
    pub fn build(&self) -> Result<MarkovRenewalSpec, CliError> {
        let shift = self.shift.build()?;
        let f = self.f.iter().map(|f| f.build()).collect::<Result<Vec<_>, _>>()?;
        Ok(MarkovRenewalSpec::new(self.eta.build(&shift)?, self.xi.build(&shift)?, f)?)
    }
}

/// Parses JSON text, reporting the JSON pointer of the first offending node.
pub fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let pointer = if path == "." {
            String::new()
        } else {
            path.split('.')
                .filter(|s| !s.is_empty())
                .map(|s| format!("/{}", s.trim_start_matches('[').trim_end_matches(']')))
                .collect()
        };
        CliError::Schema {
            pointer,
            message: e.into_inner().to_string(),
        }
    })
}

pub fn read<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse(&text)
}

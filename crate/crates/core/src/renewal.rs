//! The renewal function
//!
//! ```text
//! N(t, x) = Σ_{n>=0} Σ_{σⁿy = x} χ(y) f_y(t − S_nξ(y)) e^{S_nη(y)}
//! ```
//!
//! its regularity checks, and the three asymptotic laws (non-lattice,
//! lattice, Cesàro average).
//!
//! Evaluation runs level by level over preimages `y = u·x`. Everything the
//! summand depends on is a function of the first `K` letters of `y`, so
//! prefixes are aggregated by `(state, S_nξ)` and the cost grows with the
//! number of distinct partial sums rather than with `Mⁿ`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::input_err;
use crate::math::{abs, exp, frac, ln, pairwise_sum};
use crate::potential::{
    check_eventually_positive, detect_lattice, LatticeKind, LatticeReport, LocallyConstantPotential,
    PositivityReport, LATTICE_TOL,
};
use crate::spectral::{build_transfer, leading_eigendata, solve_delta, SpectralData};
use crate::symbolic::{CylinderIndex, Letter, Subshift, Word};
use crate::timefn::{Tail, TimeFunction};
use crate::{Error, Result};

/// Per-cylinder time profiles `f_y`, depending on the first `depth` letters
/// of `y` (depth 0: one profile for every `y`).
#[derive(Clone, Debug, PartialEq)]
pub struct FFamily {
    depth: usize,
    index: Option<CylinderIndex>,
    functions: Vec<TimeFunction>,
}

impl FFamily {
    /// The same profile for every point.
    pub fn uniform(f: TimeFunction) -> Self {
        FFamily {
            depth: 0,
            index: None,
            functions: vec![f],
        }
    }

    /// One profile per admissible word of length `depth >= 1`.
    pub fn new<I>(shift: &Subshift, depth: usize, members: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Word, TimeFunction)>,
    {
        if depth == 0 {
            let mut it = members.into_iter();
            let (w, f) = it.next().ok_or_else(|| input_err!("f family is empty"))?;
            if !w.is_empty() || it.next().is_some() {
                return Err(input_err!("a depth-0 f family has exactly one member keyed by the empty word"));
            }
            return Ok(Self::uniform(f));
        }
        let index = shift.cylinders(depth)?;
        let mut slots: Vec<Option<TimeFunction>> = vec![None; index.len()];
        for (w, f) in members {
            if w.len() != depth {
                return Err(input_err!(
                    "f family key {} has length {}, expected {depth}",
                    w.to_string_for(shift.alphabet_size()),
                    w.len()
                ));
            }
            let i = index.index_of(w.letters()).ok_or_else(|| {
                input_err!("f family key {} is not admissible", w.to_string_for(shift.alphabet_size()))
            })?;
            if slots[i].replace(f).is_some() {
                return Err(input_err!(
                    "f family key {} given twice",
                    w.to_string_for(shift.alphabet_size())
                ));
            }
        }
        let mut functions = Vec::with_capacity(slots.len());
        for (i, s) in slots.into_iter().enumerate() {
            functions.push(s.ok_or_else(|| {
                input_err!(
                    "f family misses cylinder {}",
                    index.word(i).to_string_for(shift.alphabet_size())
                )
            })?);
        }
        Ok(FFamily {
            depth,
            index: Some(index),
            functions,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn functions(&self) -> &[TimeFunction] {
        &self.functions
    }

    /// `(cylinder word, profile)` pairs; the word is empty at depth 0.
    pub fn members(&self) -> Vec<(Word, &TimeFunction)> {
        match &self.index {
            None => vec![(Word::empty(), &self.functions[0])],
            Some(ix) => ix.words().zip(self.functions.iter()).collect(),
        }
    }

    /// Profile of the point whose head is `y`.
    pub fn get(&self, y: &[Letter]) -> Result<&TimeFunction> {
        match &self.index {
            None => Ok(&self.functions[0]),
            Some(ix) => ix
                .index_of(y)
                .map(|i| &self.functions[i])
                .ok_or_else(|| input_err!("no f profile for this head (too short or inadmissible)")),
        }
    }

    /// Common lower tail of all members.
    pub fn lower_tail(&self) -> Option<Tail> {
        combine_tails(self.functions.iter().map(|f| f.lower_tail()), true)
    }

    /// Common upper tail of all members.
    pub fn upper_tail(&self) -> Option<Tail> {
        combine_tails(self.functions.iter().map(|f| f.upper_tail()), false)
    }

    fn check_shift(&self, shift: &Subshift) -> Result<()> {
        if let Some(ix) = &self.index {
            let other = shift.cylinders(self.depth)?;
            if &other != ix {
                return Err(input_err!("f family lives on a different subshift"));
            }
        }
        Ok(())
    }
}

/// Merges tail bounds into one valid for every member.
fn combine_tails<I: Iterator<Item = Option<Tail>>>(tails: I, lower: bool) -> Option<Tail> {
    let tails: Vec<Tail> = tails.collect::<Option<Vec<_>>>()?;
    if tails.is_empty() {
        return None;
    }
    if tails.iter().all(|t| matches!(t, Tail::Support(_))) {
        let v = tails.iter().map(|t| match t {
            Tail::Support(s) => *s,
            _ => unreachable!(),
        });
        return Some(Tail::Support(if lower {
            v.fold(f64::INFINITY, f64::min)
        } else {
            v.fold(f64::NEG_INFINITY, f64::max)
        }));
    }
    // Exponential bounds: take the extreme rate and region, and rescale the
    // constants so each bound still holds there. A support bound holds with
    // any constant beyond its support point.
    let mut from = if lower { f64::INFINITY } else { f64::NEG_INFINITY };
    let mut rate = if lower { f64::INFINITY } else { f64::NEG_INFINITY };
    for t in &tails {
        match *t {
            Tail::Support(s) => from = if lower { from.min(s) } else { from.max(s) },
            Tail::Exp { rate: r, from: f, .. } => {
                from = if lower { from.min(f) } else { from.max(f) };
                rate = if lower { rate.min(r) } else { rate.max(r) };
            }
        }
    }
    let mut c = 0.0f64;
    for t in &tails {
        if let Tail::Exp { c: ci, rate: ri, .. } = *t {
            // e^{ri t} <= e^{(ri − rate) from} e^{rate t} on the tail side of `from`
            c = c.max(ci * exp((ri - rate) * from));
        }
    }
    Some(Tail::Exp { c, rate, from })
}

/// Tunables for [`RenewalProblem`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenewalOptions {
    /// Target for `|P(η − δξ)|`.
    pub delta_tol: f64,
    pub lattice_tol: f64,
    pub max_cycle_len: Option<usize>,
    /// Partial sums within this relative distance are merged.
    pub merge_rel: f64,
    pub max_levels: usize,
    pub max_entries: usize,
}

impl Default for RenewalOptions {
    fn default() -> Self {
        RenewalOptions {
            delta_tol: 1e-13,
            lattice_tol: LATTICE_TOL,
            max_cycle_len: None,
            merge_rel: 1e-12,
            max_levels: 200_000,
            max_entries: 4_000_000,
        }
    }
}

/// One prepending step `y ↦ j·y` on the state graph.
#[derive(Clone, Copy, Debug)]
struct Step {
    target: usize,
    xi: f64,
    eta: f64,
}

/// Precomputed data on the states (first `K` letters of `y`).
#[derive(Clone, Debug)]
struct StateGraph {
    index: CylinderIndex,
    steps: Vec<Vec<Step>>,
    chi: Vec<f64>,
    f_of: Vec<usize>,
    /// Minimum of `S_kξ` over walks of length `k >= 1` from each state.
    floor_desc: Vec<f64>,
}

/// Tail regime used to truncate the series.
#[derive(Clone, Debug)]
enum Truncation {
    /// Every profile vanishes below `t_lo`.
    Support { t_lo: f64 },
    /// `|f(t)| <= c e^{rate t}` for `t < from`; `desc[s] = (Q R)(s)` with
    /// `R = (I − Q)⁻¹ 1` and `Q` the transfer matrix of `η − rate·ξ`.
    Exponential { c: f64, rate: f64, from: f64, desc: Vec<f64> },
    Unbounded(alloc::string::String),
}

/// A renewal problem on a subshift with a fixed base point.
#[derive(Clone, Debug)]
pub struct RenewalProblem {
    shift: Subshift,
    eta: LocallyConstantPotential,
    xi: LocallyConstantPotential,
    chi: LocallyConstantPotential,
    f: FFamily,
    x_head: Word,
    delta: f64,
    delta_residual: f64,
    positivity: PositivityReport,
    lattice: LatticeReport,
    options: RenewalOptions,
    graph: StateGraph,
    truncation: Truncation,
}

/// Which values [`RenewalProblem::eval_n`] sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Signed,
    Absolute,
}

/// Value of the renewal series with its truncation certificate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NValue {
    pub value: f64,
    /// Bound on the neglected part of the series.
    pub tail_bound: f64,
    /// Number of levels summed.
    pub levels: usize,
    /// Largest number of aggregated prefixes held at one level.
    pub peak_entries: usize,
}

impl RenewalProblem {
    pub fn new(
        eta: LocallyConstantPotential,
        xi: LocallyConstantPotential,
        chi: LocallyConstantPotential,
        f: FFamily,
        x_head: Word,
    ) -> Result<Self> {
        Self::with_options(eta, xi, chi, f, x_head, RenewalOptions::default())
    }

    pub fn with_options(
        eta: LocallyConstantPotential,
        xi: LocallyConstantPotential,
        chi: LocallyConstantPotential,
        f: FFamily,
        x_head: Word,
        options: RenewalOptions,
    ) -> Result<Self> {
        let shift = xi.shift().clone();
        if eta.shift() != &shift || chi.shift() != &shift {
            return Err(input_err!("eta, xi and chi must live on the same subshift"));
        }
        f.check_shift(&shift)?;
        if chi.values().iter().any(|v| *v < 0.0) {
            return Err(input_err!("chi must be nonnegative"));
        }
        if chi.values().iter().all(|v| *v == 0.0) {
            return Err(input_err!("chi must not vanish identically"));
        }
        let positivity = check_eventually_positive(&xi)?;
        if !positivity.positive {
            return Err(Error::Precondition(format!(
                "xi is not eventually positive (a periodic orbit has mean {})",
                positivity.kappa
            )));
        }
        let need = Self::base_length(&eta, &xi, &chi, &f);
        if x_head.len() < need {
            return Err(input_err!(
                "base word has length {}, need at least {need}",
                x_head.len()
            ));
        }
        shift.check_admissible(x_head.letters())?;
        let sol = solve_delta(&eta, &xi, None, options.delta_tol)?;
        let lattice = detect_lattice(&xi, options.max_cycle_len, options.lattice_tol)?;
        let graph = build_state_graph(&shift, &eta, &xi, &chi, &f)?;
        let truncation = build_truncation(&f, &graph, sol.delta);
        Ok(RenewalProblem {
            shift,
            eta,
            xi,
            chi,
            f,
            x_head,
            delta: sol.delta,
            delta_residual: sol.pressure_residual,
            positivity,
            lattice,
            options,
            graph,
            truncation,
        })
    }

    /// Shortest admissible base word.
    fn base_length(
        eta: &LocallyConstantPotential,
        xi: &LocallyConstantPotential,
        chi: &LocallyConstantPotential,
        f: &FFamily,
    ) -> usize {
        let k = state_depth(eta, xi, chi, f);
        k.max(spectral_depth(eta, xi, chi, f, None))
    }

    /// Replaces the detected lattice data, e.g. with a user-supplied `(ζ, ψ)`.
    pub fn set_lattice(&mut self, report: LatticeReport) -> Result<()> {
        if let (Some(z), Some(p)) = (&report.zeta, &report.psi) {
            if z.shift() != &self.shift || p.shift() != &self.shift {
                return Err(input_err!("lattice data lives on a different subshift"));
            }
        }
        self.lattice = report;
        Ok(())
    }

    /// Same problem seen from another base point.
    pub fn with_base(&self, x_head: Word) -> Result<Self> {
        let need = Self::base_length(&self.eta, &self.xi, &self.chi, &self.f);
        if x_head.len() < need {
            return Err(input_err!("base word has length {}, need at least {need}", x_head.len()));
        }
        self.shift.check_admissible(x_head.letters())?;
        let mut out = self.clone();
        out.x_head = x_head;
        Ok(out)
    }

    pub fn shift(&self) -> &Subshift {
        &self.shift
    }
    pub fn eta(&self) -> &LocallyConstantPotential {
        &self.eta
    }
    pub fn xi(&self) -> &LocallyConstantPotential {
        &self.xi
    }
    pub fn chi(&self) -> &LocallyConstantPotential {
        &self.chi
    }
    pub fn f(&self) -> &FFamily {
        &self.f
    }
    pub fn x_head(&self) -> &Word {
        &self.x_head
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    /// `P(η − δξ)` at the computed `δ`.
    pub fn delta_residual(&self) -> f64 {
        self.delta_residual
    }
    pub fn positivity(&self) -> &PositivityReport {
        &self.positivity
    }
    pub fn lattice(&self) -> &LatticeReport {
        &self.lattice
    }
    pub fn options(&self) -> &RenewalOptions {
        &self.options
    }
    /// Lower bound on `S_kξ` over all walks of length `k >= 1` from any state.
    pub fn min_future_sum(&self) -> f64 {
        self.graph.floor_desc.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Number of letters of `y` the series aggregates on.
    pub fn state_depth(&self) -> usize {
        self.graph.index.depth()
    }

    /// `N(t, x)` with neglected tail at most `tol`.
    pub fn eval_n(&self, t: f64, tol: f64) -> Result<NValue> {
        self.eval_series(t, tol, Sign::Signed)
    }

    /// `N^abs(t, x)` (profiles replaced by their absolute values).
    pub fn eval_n_abs(&self, t: f64, tol: f64) -> Result<NValue> {
        self.eval_series(t, tol, Sign::Absolute)
    }

    /// `e^{−tδ} N(t, x)` with tolerance `tol` on that scale.
    pub fn eval_scaled(&self, t: f64, tol: f64) -> Result<NValue> {
        let s = exp(t * self.delta);
        let mut v = self.eval_series(t, tol * s, Sign::Signed)?;
        v.value /= s;
        v.tail_bound /= s;
        Ok(v)
    }

    pub fn eval_series(&self, t: f64, tol: f64, sign: Sign) -> Result<NValue> {
        if !t.is_finite() {
            return Err(input_err!("time must be finite"));
        }
        if !(tol > 0.0) {
            return Err(input_err!("tolerance must be positive"));
        }
        let g = &self.graph;
        let start = g
            .index
            .index_of(self.x_head.letters())
            .ok_or_else(|| input_err!("base word too short"))?;
        let profile = |s: usize, at: f64| -> f64 {
            let v = self.f.functions[g.f_of[s]].eval(at);
            match sign {
                Sign::Signed => v,
                Sign::Absolute => abs(v),
            }
        };
        let chi_max = self.chi.max_value();
        let mut entries: Vec<Entry> = vec![Entry { state: start, s: 0.0, w: 1.0 }];
        let mut level_sums: Vec<f64> = Vec::new();
        let mut tail = 0.0f64;
        let mut peak = 1usize;
        let mut contrib: Vec<f64> = Vec::new();
        for level in 0..=self.options.max_levels {
            contrib.clear();
            contrib.extend(entries.iter().map(|e| {
                let c = g.chi[e.state];
                if c == 0.0 || e.w == 0.0 {
                    0.0
                } else {
                    e.w * c * profile(e.state, t - e.s)
                }
            }));
            level_sums.push(pairwise_sum(&contrib));

            // decide which prefixes may still have contributing descendants
            let mut keep: Vec<Entry> = Vec::with_capacity(entries.len());
            match &self.truncation {
                Truncation::Support { t_lo } => {
                    keep.extend(
                        entries
                            .iter()
                            .filter(|e| e.w != 0.0 && t - e.s - g.floor_desc[e.state] >= *t_lo)
                            .copied(),
                    );
                }
                Truncation::Exponential { c, rate, from, desc } => {
                    let budget_level = 0.5 * tol / ((level + 1) as f64 * (level + 2) as f64);
                    let mut candidates: Vec<(f64, usize)> = Vec::new();
                    let mut all_tail = true;
                    for (i, e) in entries.iter().enumerate() {
                        if e.w == 0.0 {
                            continue;
                        }
                        if t - e.s - g.floor_desc[e.state] < *from {
                            let b = e.w * chi_max * c * exp(rate * (t - e.s)) * desc[e.state];
                            candidates.push((b, i));
                        } else {
                            all_tail = false;
                        }
                    }
                    let total: f64 = candidates.iter().map(|c| c.0).sum();
                    if all_tail && tail + total <= tol {
                        tail += total;
                        return Ok(self.finish(level_sums, tail, level + 1, peak));
                    }
                    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
                    let mut used = 0.0;
                    let mut dropped = vec![false; entries.len()];
                    for (b, i) in candidates {
                        if used + b > budget_level {
                            break;
                        }
                        used += b;
                        dropped[i] = true;
                    }
                    tail += used;
                    keep.extend(
                        entries
                            .iter()
                            .enumerate()
                            .filter(|(i, e)| !dropped[*i] && e.w != 0.0)
                            .map(|(_, e)| *e),
                    );
                }
                Truncation::Unbounded(why) => {
                    return Err(Error::Unsupported(format!("cannot bound the tail of the series: {why}")));
                }
            }
            if keep.is_empty() {
                return Ok(self.finish(level_sums, tail, level + 1, peak));
            }
            entries = expand(&keep, g, self.options.merge_rel);
            peak = peak.max(entries.len());
            if entries.len() > self.options.max_entries {
                return Err(Error::Unsupported(format!(
                    "{} distinct partial sums at level {}; the series does not aggregate",
                    entries.len(),
                    level + 1
                )));
            }
        }
        Err(Error::NoConvergence {
            method: "renewal series",
            iterations: self.options.max_levels,
            last_change: tail,
        })
    }

    fn finish(&self, level_sums: Vec<f64>, tail: f64, levels: usize, peak: usize) -> NValue {
        NValue {
            value: pairwise_sum(&level_sums),
            tail_bound: tail,
            levels,
            peak_entries: peak,
        }
    }

    /// Depth at which the asymptotic constants are assembled.
    fn asymptotic_depth(&self, extra: Option<usize>) -> usize {
        spectral_depth(&self.eta, &self.xi, &self.chi, &self.f, extra)
    }

    /// Spectral data of `η − δξ` at the depth used for the asymptotic constants.
    pub fn spectral_data(&self) -> Result<SpectralData> {
        let m = self.asymptotic_depth(None);
        leading_eigendata(&build_transfer(&self.eta.combine(1.0, &self.xi, -self.delta)?, m)?)
    }

    /// `G(x)` from the non-lattice law.
    pub fn asymptotic_g(&self) -> Result<AsymptoticResult> {
        match self.lattice.kind {
            LatticeKind::Lattice => Err(Error::WrongTheorem(format!(
                "xi is lattice with span {}; use the periodic lattice law or the Cesàro average",
                self.lattice.span.unwrap_or(f64::NAN)
            ))),
            _ => {
                let mut r = self.g_formula()?;
                r.kind = AsymptoticKind::NonLattice;
                Ok(r)
            }
        }
    }

    /// Cesàro limit of `e^{−tδ} N(t, x)`; valid in both cases.
    pub fn average_g(&self) -> Result<AsymptoticResult> {
        self.g_formula()
    }

    fn g_formula(&self) -> Result<AsymptoticResult> {
        let sd = self.spectral_data()?;
        let xi_int = integrate_on(&self.xi, &sd)?;
        let mut time_integrals = Vec::with_capacity(sd.index.len());
        let mut weighted = Vec::with_capacity(sd.index.len());
        for (i, w) in sd.index.words().enumerate() {
            let f = self.f.get(w.letters())?;
            let ti = f.integral_exp(self.delta).map_err(|e| match e {
                Error::Input(m) => Error::Precondition(format!("condition (A) fails: {m}")),
                other => other,
            })?;
            let chi = self.chi.at(w.letters());
            weighted.push(chi * sd.nu[i] * ti);
            time_integrals.push(ti);
        }
        let h_x = sd.h_at(self.x_head.letters())?;
        let value = h_x / xi_int * pairwise_sum(&weighted);
        Ok(AsymptoticResult {
            kind: AsymptoticKind::Average,
            value,
            h_x,
            xi_integral: xi_int,
            time_integrals,
            depth: sd.depth(),
            delta: self.delta,
            tail_bound: 0.0,
        })
    }

    /// Periodic factor `G̃ₓ(t)` of the lattice law.
    pub fn lattice_gtilde(&self, t: f64, tol: f64) -> Result<GtildeValue> {
        let ctx = self.lattice_context()?;
        self.gtilde_with(&ctx, t, tol)
    }

    /// `G̃ₓ` sampled at `n` equally spaced points of one period `[0, a)`.
    pub fn lattice_gtilde_table(&self, n: usize, tol: f64) -> Result<Vec<(f64, f64)>> {
        let ctx = self.lattice_context()?;
        (0..n.max(1))
            .map(|i| {
                let t = ctx.a * i as f64 / n.max(1) as f64;
                self.gtilde_with(&ctx, t, tol).map(|g| (t, g.value))
            })
            .collect()
    }

    fn lattice_context(&self) -> Result<LatticeContext> {
        if self.lattice.kind != LatticeKind::Lattice {
            return Err(Error::WrongTheorem(format!(
                "xi is {}; the periodic law needs a lattice potential",
                self.lattice.kind.as_str()
            )));
        }
        let a = self.lattice.span.ok_or_else(|| Error::Unsupported("lattice span missing".into()))?;
        let (zeta, psi) = match (&self.lattice.zeta, &self.lattice.psi) {
            (Some(z), Some(p)) => (z.clone(), p.clone()),
            _ => {
                return Err(Error::Unsupported(
                    "xi is lattice but not aZ-valued; supply zeta and psi with xi - zeta = psi - psi∘shift".into(),
                ))
            }
        };
        let m = self.asymptotic_depth(Some(zeta.depth().max(psi.depth())));
        let phi = self.eta.combine(1.0, &zeta, -self.delta)?;
        let sd = leading_eigendata(&build_transfer(&phi, m)?)?;
        let zeta_int = integrate_on(&zeta, &sd)?;
        Ok(LatticeContext { a, psi, sd, zeta_int })
    }

    fn gtilde_with(&self, ctx: &LatticeContext, t: f64, tol: f64) -> Result<GtildeValue> {
        let a = ctx.a;
        let d = self.delta;
        let x = self.x_head.letters();
        let psi_x = ctx.psi.eval(x)?;
        let b = a * frac((t + psi_x) / a);
        let h_x = ctx.sd.h_at(x)?;
        let pre = exp(-b * d) * a * exp(d * psi_x) / ctx.zeta_int * h_x;
        let n = ctx.sd.index.len();
        let mut terms = Vec::with_capacity(n);
        let mut bound = 0.0;
        for (i, w) in ctx.sd.index.words().enumerate() {
            let chi = self.chi.at(w.letters());
            if chi == 0.0 {
                continue;
            }
            let f = self.f.get(w.letters())?;
            let s = b - ctx.psi.at(w.letters());
            let per = tol / (n as f64 * chi * ctx.sd.nu[i] * abs(pre)).max(f64::MIN_POSITIVE);
            let ls = f.lattice_sum(a, s, d, per.min(1e-3))?;
            terms.push(chi * ctx.sd.nu[i] * ls.value);
            bound += chi * ctx.sd.nu[i] * ls.tail_bound;
        }
        Ok(GtildeValue {
            value: pre * pairwise_sum(&terms),
            tail_bound: abs(pre) * bound,
            phase: b,
            span: a,
        })
    }

    /// Trapezoid approximation of `t_max⁻¹ ∫_0^{t_max} e^{−Tδ} N(T, x) dT`.
    pub fn cesaro_average(&self, t_max: f64, n_points: usize, tol: f64) -> Result<CesaroResult> {
        if !(t_max > 0.0) {
            return Err(input_err!("t_max must be positive"));
        }
        let n = n_points.max(2);
        let h = t_max / (n - 1) as f64;
        let mut vals = Vec::with_capacity(n);
        let mut tail = 0.0f64;
        for i in 0..n {
            let t = h * i as f64;
            let v = self.eval_scaled(t, tol)?;
            let wgt = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            vals.push(wgt * v.value);
            tail = tail.max(v.tail_bound);
        }
        let value = pairwise_sum(&vals) * h / t_max;
        let target = self.average_g().map(|g| g.value).ok();
        Ok(CesaroResult {
            value,
            target,
            t_max,
            n_points: n,
            tail_bound: tail,
        })
    }

    /// Advisory check of conditions (A)–(D) on sampled grids.
    pub fn check_conditions(&self, t_grid: &[f64], h_grid: &[f64]) -> Result<ConditionsReport> {
        if t_grid.is_empty() || h_grid.is_empty() {
            return Err(input_err!("grids must be nonempty"));
        }
        let d = self.delta;
        // (A)
        let mut integrals = Vec::new();
        let mut a_ok = true;
        for (w, f) in self.f.members() {
            match f.integral_exp_abs(d, 1e-12) {
                Ok((v, b)) => integrals.push((w, Some(v + b))),
                Err(_) => {
                    a_ok = false;
                    integrals.push((w, None));
                }
            }
        }
        // (B), (C)
        let mut sup = 0.0f64;
        let mut neg: Vec<(f64, f64)> = Vec::new();
        let mut b_ok = true;
        for &t in t_grid {
            match self.eval_n_abs(t, 1e-10 * exp(t * d).max(f64::MIN_POSITIVE)) {
                Ok(v) => {
                    let s = v.value * exp(-t * d);
                    sup = sup.max(s);
                    if t < 0.0 {
                        neg.push((t, s));
                    }
                }
                Err(_) => b_ok = false,
            }
        }
        let c_fit = fit_exponent(&neg);
        let declared_s = match self.f.lower_tail() {
            Some(Tail::Support(_)) => Some(f64::INFINITY),
            Some(Tail::Exp { rate, .. }) => Some(rate - d),
            None => None,
        };
        let c_ok = match c_fit {
            ExponentFit::Vanishes => true,
            ExponentFit::Slope(s) => s > 0.0,
            ExponentFit::TooFewPoints => declared_s.is_some_and(|s| s > 0.0),
        };
        // (D)
        let monotone = self.f.functions().iter().all(|f| is_monotone_sampled(f, d));
        let fam: Vec<&TimeFunction> = self.f.functions().iter().collect();
        let dri = dri_check_family(&fam, d, h_grid, DRI_THRESHOLD);
        Ok(ConditionsReport {
            a_integrable: a_ok,
            a_integrals: integrals,
            b_bounded: b_ok && sup.is_finite(),
            b_constant: sup,
            c_fit,
            c_declared_exponent: declared_s,
            c_holds: c_ok,
            d_monotone: monotone,
            d_equi_dri: dri,
            t_points: t_grid.len(),
        })
    }
}

#[derive(Clone, Debug)]
struct LatticeContext {
    a: f64,
    psi: LocallyConstantPotential,
    sd: SpectralData,
    zeta_int: f64,
}

/// `∫ ψ dμ` for `ψ` possibly one letter deeper than `μ` is tabulated.
fn integrate_on(psi: &LocallyConstantPotential, sd: &SpectralData) -> Result<f64> {
    if psi.depth() <= sd.depth() {
        return sd.integrate(psi);
    }
    Err(input_err!(
        "integrand depth {} exceeds spectral depth {}",
        psi.depth(),
        sd.depth()
    ))
}

fn state_depth(
    eta: &LocallyConstantPotential,
    xi: &LocallyConstantPotential,
    chi: &LocallyConstantPotential,
    f: &FFamily,
) -> usize {
    [
        xi.depth().saturating_sub(1),
        eta.depth().saturating_sub(1),
        chi.depth(),
        f.depth(),
        1,
    ]
    .into_iter()
    .max()
    .unwrap_or(1)
}

fn spectral_depth(
    eta: &LocallyConstantPotential,
    xi: &LocallyConstantPotential,
    chi: &LocallyConstantPotential,
    f: &FFamily,
    extra: Option<usize>,
) -> usize {
    [
        eta.depth().saturating_sub(1),
        xi.depth(),
        chi.depth(),
        f.depth(),
        extra.unwrap_or(1),
        1,
    ]
    .into_iter()
    .max()
    .unwrap_or(1)
}

fn build_state_graph(
    shift: &Subshift,
    eta: &LocallyConstantPotential,
    xi: &LocallyConstantPotential,
    chi: &LocallyConstantPotential,
    f: &FFamily,
) -> Result<StateGraph> {
    let k = state_depth(eta, xi, chi, f);
    let index = shift.cylinders(k)?;
    let n = index.len();
    let mut steps = Vec::with_capacity(n);
    let mut chis = Vec::with_capacity(n);
    let mut f_of = Vec::with_capacity(n);
    let mut buf: Vec<Letter> = Vec::with_capacity(k + 1);
    for w in index.words() {
        let mut row = Vec::new();
        for j in 0..shift.alphabet_size() as Letter {
            if !shift.allows(j, w.0[0]) {
                continue;
            }
            buf.clear();
            buf.push(j);
            buf.extend_from_slice(w.letters());
            row.push(Step {
                target: index.index_of(&buf).expect("admissible"),
                xi: xi.at(&buf),
                eta: eta.at(&buf),
            });
        }
        steps.push(row);
        chis.push(chi.at(w.letters()));
        f_of.push(match &f.index {
            None => 0,
            Some(ix) => ix.index_of(w.letters()).expect("admissible"),
        });
    }
    // F(s) = min(0, min_j ξ(js) + F(js)); converges because all cycles are positive.
    let mut floor = vec![0.0f64; n];
    let mut converged = false;
    for _ in 0..=n + 1 {
        let mut changed = false;
        for s in 0..n {
            let best = steps[s]
                .iter()
                .map(|st| st.xi + floor[st.target])
                .fold(0.0f64, f64::min);
            if best < floor[s] {
                floor[s] = best;
                changed = true;
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical("future-sum floor did not converge".into()));
    }
    let slack = 1e-9 * (1.0 + floor.iter().map(|v| abs(*v)).fold(0.0, f64::max));
    let floor_desc = steps
        .iter()
        .map(|row| {
            row.iter()
                .map(|st| st.xi + floor[st.target])
                .fold(f64::INFINITY, f64::min)
                - slack
        })
        .collect();
    Ok(StateGraph {
        index,
        steps,
        chi: chis,
        f_of,
        floor_desc,
    })
}

fn build_truncation(f: &FFamily, g: &StateGraph, delta: f64) -> Truncation {
    match f.lower_tail() {
        Some(Tail::Support(t_lo)) => Truncation::Support { t_lo },
        Some(Tail::Exp { c, rate, from }) => {
            if !(rate > delta) {
                return Truncation::Unbounded(format!(
                    "lower-tail rate {rate} must exceed δ = {delta}"
                ));
            }
            match resolvent_desc(g, rate) {
                Ok(desc) => Truncation::Exponential { c, rate, from, desc },
                Err(e) => Truncation::Unbounded(format!("{e}")),
            }
        }
        None => Truncation::Unbounded("no lower-tail bound on the f family".into()),
    }
}

/// `(Q R)(s)` with `R = (I − Q)⁻¹ 1`, `Q[s][s'] = Σ e^{η(js) − r ξ(js)}`.
fn resolvent_desc(g: &StateGraph, r: f64) -> Result<Vec<f64>> {
    let n = g.steps.len();
    let mut m = vec![vec![0.0f64; n + 1]; n];
    for s in 0..n {
        m[s][s] += 1.0;
        for st in &g.steps[s] {
            m[s][st.target] -= exp(st.eta - r * st.xi);
        }
        m[s][n] = 1.0;
    }
    let rsol = solve_dense(m)?;
    if rsol.iter().any(|v| !(*v >= 1.0) || !v.is_finite()) {
        return Err(Error::Numerical("tail resolvent is not positive".into()));
    }
    Ok(g.steps
        .iter()
        .map(|row| row.iter().map(|st| exp(st.eta - r * st.xi) * rsol[st.target]).sum())
        .collect())
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
pub(crate) fn solve_dense(mut m: Vec<Vec<f64>>) -> Result<Vec<f64>> {
    let n = m.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|a, b| abs(m[*a][col]).total_cmp(&abs(m[*b][col])))
            .expect("nonempty");
        if abs(m[piv][col]) < 1e-300 {
            return Err(Error::Numerical("singular linear system".into()));
        }
        m.swap(col, piv);
        for r in col + 1..n {
            let fct = m[r][col] / m[col][col];
            if fct != 0.0 {
                for c in col..=n {
                    m[r][c] -= fct * m[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = m[r][n];
        for c in r + 1..n {
            s -= m[r][c] * x[c];
        }
        x[r] = s / m[r][r];
    }
    Ok(x)
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    state: usize,
    s: f64,
    w: f64,
}

/// Prepends every allowed letter and merges equal `(state, S)` pairs.
fn expand(entries: &[Entry], g: &StateGraph, merge_rel: f64) -> Vec<Entry> {
    let mut next: Vec<Entry> = Vec::with_capacity(entries.len() * 2);
    for e in entries {
        for st in &g.steps[e.state] {
            next.push(Entry {
                state: st.target,
                s: e.s + st.xi,
                w: e.w * exp(st.eta),
            });
        }
    }
    next.sort_by(|a, b| a.state.cmp(&b.state).then(a.s.total_cmp(&b.s)));
    let mut out: Vec<Entry> = Vec::with_capacity(next.len());
    for e in next {
        if let Some(last) = out.last_mut() {
            if last.state == e.state && abs(last.s - e.s) <= merge_rel * (1.0 + abs(last.s)) {
                last.w += e.w;
                continue;
            }
        }
        out.push(e);
    }
    out
}

/// Kind of an [`AsymptoticResult`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AsymptoticKind {
    NonLattice,
    Lattice,
    Average,
}

/// Constant of the non-lattice or average law with its ingredients.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticResult {
    pub kind: AsymptoticKind,
    pub value: f64,
    /// `h_{η−δξ}(x)`.
    pub h_x: f64,
    /// `∫ ξ dμ_{η−δξ}`.
    pub xi_integral: f64,
    /// `∫ e^{−Tδ} f_w(T) dT` per cylinder of the working depth.
    pub time_integrals: Vec<f64>,
    pub depth: usize,
    pub delta: f64,
    pub tail_bound: f64,
}

/// One value of the lattice periodic factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GtildeValue {
    pub value: f64,
    pub tail_bound: f64,
    /// `a {(t + ψ(x))/a}`.
    pub phase: f64,
    pub span: f64,
}

/// Cesàro average with the limit it should approach.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CesaroResult {
    pub value: f64,
    pub target: Option<f64>,
    pub t_max: f64,
    pub n_points: usize,
    pub tail_bound: f64,
}

/// Log-slope fit of `e^{−tδ} N^abs(t)` on the negative half-axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExponentFit {
    /// All sampled values are zero.
    Vanishes,
    Slope(f64),
    TooFewPoints,
}

fn fit_exponent(points: &[(f64, f64)]) -> ExponentFit {
    let pos: Vec<(f64, f64)> = points.iter().filter(|p| p.1 > 0.0).map(|p| (p.0, ln(p.1))).collect();
    if !points.is_empty() && pos.is_empty() {
        return ExponentFit::Vanishes;
    }
    if pos.len() < 2 {
        return ExponentFit::TooFewPoints;
    }
    let n = pos.len() as f64;
    let mt = pos.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pos.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pos.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    if sxx == 0.0 {
        return ExponentFit::TooFewPoints;
    }
    let sxy: f64 = pos.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    ExponentFit::Slope(sxy / sxx)
}

/// Default d.R.i. threshold on the smallest `R̄ − R̲`.
pub const DRI_THRESHOLD: f64 = 1e-2;

/// Report of conditions (A)–(D); sampled evidence, not a proof.
#[derive(Clone, Debug)]
pub struct ConditionsReport {
    pub a_integrable: bool,
    /// `∫ e^{−tδ}|f_w(t)| dt` per member (upper estimate), `None` if divergent.
    pub a_integrals: Vec<(Word, Option<f64>)>,
    pub b_bounded: bool,
    /// `sup_t e^{−tδ} N^abs(t, x)` over the grid.
    pub b_constant: f64,
    pub c_fit: ExponentFit,
    /// Exponent `s` implied by the declared lower tails (`∞` for support bounds).
    pub c_declared_exponent: Option<f64>,
    pub c_holds: bool,
    pub d_monotone: bool,
    pub d_equi_dri: DriReport,
    pub t_points: usize,
}

/// Lower and upper Riemann sums of `e^{−δt}|f(t)|` for a list of meshes.
#[derive(Clone, Debug, PartialEq)]
pub struct DriReport {
    /// `(h, R̲(h), R̄(h))`.
    pub rows: Vec<(f64, f64, f64)>,
    /// A tail is not integrable, so `R̄ = ∞`.
    pub upper_infinite: bool,
    pub monotone_gaps: bool,
    pub smallest_gap: f64,
    pub threshold: f64,
    pub consistent: bool,
    pub note: Option<alloc::string::String>,
}

/// d.R.i. check of `g = e^{−δt}|f(t)|`.
pub fn dri_check(f: &TimeFunction, delta: f64, h_list: &[f64], threshold: f64) -> DriReport {
    dri_check_family(&[f], delta, h_list, threshold)
}

/// Equi-d.R.i. check: infimum and supremum are taken over the family in
/// every cell.
pub fn dri_check_family(fs: &[&TimeFunction], delta: f64, h_list: &[f64], threshold: f64) -> DriReport {
    let fail = |note: alloc::string::String, infinite: bool| DriReport {
        rows: Vec::new(),
        upper_infinite: infinite,
        monotone_gaps: false,
        smallest_gap: f64::INFINITY,
        threshold,
        consistent: false,
        note: Some(note),
    };
    if fs.is_empty() || h_list.iter().any(|h| !(*h > 0.0)) {
        return fail("empty family or non-positive mesh".into(), false);
    }
    // window common to the family, with tail descriptions for the upper sums
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut tails: Vec<(Option<Tail>, Option<Tail>)> = Vec::new();
    for f in fs {
        match f.window(delta, 1e-12) {
            Ok((a, b, _)) => {
                lo = lo.min(a);
                hi = hi.max(b);
                tails.push((f.lower_tail(), f.upper_tail()));
            }
            Err(e) => return fail(format!("{e}"), true),
        }
    }
    let mut breaks: Vec<f64> = fs.iter().flat_map(|f| f.breakpoints()).collect();
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup();
    let g = |f: &TimeFunction, t: f64, left: bool| {
        let v = if left { f.eval_left(t) } else { f.eval(t) };
        exp(-delta * t) * abs(v)
    };
    let mut rows = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let k0 = crate::math::floor(lo / h) as i64;
        let k1 = crate::math::ceil(hi / h) as i64;
        let cells = (k1 - k0).max(0) as u64;
        if cells > 20_000_000 {
            return fail(format!("mesh {h} needs {cells} cells"), false);
        }
        let mut lower = Vec::with_capacity(cells as usize);
        let mut upper = Vec::with_capacity(cells as usize);
        for k in k0..k1 {
            let a = k as f64 * h;
            let b = a + h;
            let mut inf = f64::INFINITY;
            let mut sup = 0.0f64;
            let first = breaks.partition_point(|t| *t <= a);
            let last = breaks.partition_point(|t| *t < b);
            for f in fs {
                let mut vals = [0.0f64; 32];
                vals[0] = g(f, a, false);
                for (i, v) in vals.iter_mut().enumerate().skip(1) {
                    *v = g(f, a + h * i as f64 / 32.0, false);
                }
                for v in vals {
                    inf = inf.min(v);
                    sup = sup.max(v);
                }
                let end = g(f, b, true);
                inf = inf.min(end);
                sup = sup.max(end);
                for &t in &breaks[first..last] {
                    let (v, l) = (g(f, t, false), g(f, t, true));
                    inf = inf.min(v);
                    if t > a {
                        inf = inf.min(l);
                    }
                    sup = sup.max(v).max(l);
                }
            }
            lower.push(h * inf);
            upper.push(h * sup);
        }
        let mut up = pairwise_sum(&upper);
        // upper sums over the cells outside the window, from the tail bounds
        for (lt, ut) in &tails {
            if let Some(Tail::Exp { c, rate, .. }) = lt {
                let kk = rate - delta;
                // cells [jh, (j+1)h) with j < k0: sup <= c e^{kk (j+1) h}
                up += h * c * exp(kk * k0 as f64 * h) / (1.0 - exp(-kk * h));
            }
            if let Some(Tail::Exp { c, rate, .. }) = ut {
                let kk = rate - delta;
                up += h * c * exp(kk * k1 as f64 * h) / (1.0 - exp(kk * h));
            }
        }
        rows.push((h, pairwise_sum(&lower), up));
    }
    let gaps: Vec<f64> = rows.iter().map(|r| r.2 - r.1).collect();
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12 * (1.0 + abs(w[0])));
    let smallest = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    DriReport {
        rows,
        upper_infinite: false,
        monotone_gaps: monotone,
        smallest_gap: smallest,
        threshold,
        consistent: monotone && smallest < threshold,
        note: None,
    }
}

/// Sampled monotonicity of `f` over its integration window.
fn is_monotone_sampled(f: &TimeFunction, delta: f64) -> bool {
    let (lo, hi) = match f.window(delta, 1e-9) {
        Ok((a, b, _)) => (a, b),
        Err(_) => return false,
    };
    let lo = lo - 1.0;
    let hi = hi + 1.0;
    let n = 4096;
    let mut up = true;
    let mut down = true;
    let mut prev = f.eval(lo);
    for i in 1..=n {
        let v = f.eval(lo + (hi - lo) * i as f64 / n as f64);
        if v < prev {
            up = false;
        }
        if v > prev {
            down = false;
        }
        prev = v;
    }
    up || down
}

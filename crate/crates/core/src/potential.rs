//! Locally constant potentials, Birkhoff sums, eventual positivity and
//! lattice classification.
//!
//! A potential of depth `d` is a table over admissible words of length `d`;
//! its variation vanishes beyond depth `d`, so it is α-Hölder for every α.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::input_err;
use crate::math::{abs, floor, ln, round};
use crate::symbolic::{min_mean_cycle, CylinderIndex, Letter, Subshift, Word};
use crate::{Error, Result};

/// Real function on `Σ_A` depending only on the first `depth` letters.
#[derive(Clone, Debug, PartialEq)]
pub struct LocallyConstantPotential {
    shift: Subshift,
    index: CylinderIndex,
    values: Vec<f64>,
}

impl LocallyConstantPotential {
    /// Builds the potential from `(word, value)` pairs; every admissible word
    /// of length `depth` must appear exactly once.
    pub fn from_table<I>(shift: &Subshift, depth: usize, table: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Word, f64)>,
    {
        let index = shift.cylinders(depth)?;
        let mut values = vec![f64::NAN; index.len()];
        let mut seen = vec![false; index.len()];
        for (w, v) in table {
            if w.len() != depth {
                return Err(input_err!(
                    "potential key {} has length {}, expected depth {depth}",
                    w.to_string_for(shift.alphabet_size()),
                    w.len()
                ));
            }
            let i = index.index_of(w.letters()).ok_or_else(|| {
                input_err!(
                    "potential key {} is not an admissible word",
                    w.to_string_for(shift.alphabet_size())
                )
            })?;
            if seen[i] {
                return Err(input_err!(
                    "potential key {} given twice",
                    w.to_string_for(shift.alphabet_size())
                ));
            }
            if !v.is_finite() {
                return Err(input_err!("potential value {v} is not finite"));
            }
            seen[i] = true;
            values[i] = v;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(input_err!(
                "potential table misses admissible word {}",
                index.word(i).to_string_for(shift.alphabet_size())
            ));
        }
        Ok(LocallyConstantPotential {
            shift: shift.clone(),
            index,
            values,
        })
    }

    /// Potential of depth `depth` with values given by `f` on each admissible word.
    pub fn from_fn<F>(shift: &Subshift, depth: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(&[Letter]) -> f64,
    {
        let index = shift.cylinders(depth)?;
        let values: Vec<f64> = index.words().map(|w| f(w.letters())).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(input_err!("potential values must be finite"));
        }
        Ok(LocallyConstantPotential {
            shift: shift.clone(),
            index,
            values,
        })
    }

    pub fn constant(shift: &Subshift, c: f64) -> Result<Self> {
        Self::from_fn(shift, 1, |_| c)
    }

    /// Depth-1 potential taking `values[i]` on the cylinder of letter `i`.
    pub fn from_letters(shift: &Subshift, values: &[f64]) -> Result<Self> {
        if values.len() != shift.alphabet_size() {
            return Err(input_err!(
                "expected {} letter values, got {}",
                shift.alphabet_size(),
                values.len()
            ));
        }
        Self::from_fn(shift, 1, |w| values[w[0] as usize])
    }

    pub fn depth(&self) -> usize {
        self.index.depth()
    }

    pub fn shift(&self) -> &Subshift {
        &self.shift
    }

    pub fn index(&self) -> &CylinderIndex {
        &self.index
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(word, value)` pairs in lexicographic order.
    pub fn table(&self) -> impl Iterator<Item = (Word, f64)> + '_ {
        self.index.words().zip(self.values.iter().copied())
    }

    /// Value at the depth-`d` prefix of `w`.
    pub fn eval(&self, w: &[Letter]) -> Result<f64> {
        if w.len() < self.depth() {
            return Err(input_err!(
                "word of length {} shorter than potential depth {}",
                w.len(),
                self.depth()
            ));
        }
        self.index
            .index_of(w)
            .map(|i| self.values[i])
            .ok_or_else(|| {
                input_err!(
                    "word {} is not admissible",
                    Word::from(&w[..self.depth()]).to_string_for(self.shift.alphabet_size())
                )
            })
    }

    /// Like [`eval`](Self::eval) for words already known to be admissible and
    /// long enough.
    #[inline]
    pub(crate) fn at(&self, w: &[Letter]) -> f64 {
        self.values[self.index.index_of(w).expect("admissible word of sufficient length")]
    }

    /// Same function re-tabulated at a larger depth.
    pub fn lift(&self, depth: usize) -> Result<Self> {
        if depth < self.depth() {
            return Err(input_err!(
                "cannot lower depth {} to {depth}",
                self.depth()
            ));
        }
        Self::from_fn(&self.shift, depth, |w| self.at(w))
    }

    /// `a·self + b·other`, tabulated at the larger of the two depths.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.shift != other.shift {
            return Err(input_err!("potentials live on different subshifts"));
        }
        let depth = self.depth().max(other.depth());
        Self::from_fn(&self.shift, depth, |w| a * self.at(w) + b * other.at(w))
    }

    pub fn scale(&self, a: f64) -> Self {
        LocallyConstantPotential {
            shift: self.shift.clone(),
            index: self.index.clone(),
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Edge weights of the shift graph at depth `max(depth - 1, 1)`.
    fn graph_weights(&self) -> Result<(crate::symbolic::CylinderGraph, Vec<f64>)> {
        let m = (self.depth().saturating_sub(1)).max(1);
        let graph = self.shift.cylinder_graph(m)?;
        let w = graph.edges().iter().map(|e| self.at(e.word.letters())).collect();
        Ok((graph, w))
    }
}

/// `S_n φ(u · x_head) = Σ_{k<n} φ(σ^k(u · x_head))` with `n = |u|`.
pub fn birkhoff_sum(pot: &LocallyConstantPotential, u: &Word, x_head: &Word) -> Result<f64> {
    let n = u.len();
    if n == 0 {
        return Ok(0.0);
    }
    let y = u.concat(x_head.letters());
    pot.shift.check_admissible(y.letters())?;
    if x_head.len() + 1 < pot.depth() {
        return Err(input_err!(
            "base word of length {} too short for potential depth {}",
            x_head.len(),
            pot.depth()
        ));
    }
    let mut s = 0.0;
    for k in 0..n {
        s += pot.at(&y.0[k..]);
    }
    Ok(s)
}

/// Above this many lengths `m*` is reported from the linear bound alone.
pub const EXACT_POSITIVITY_LIMIT: usize = 100_000;

/// Outcome of the eventual-positivity test.
#[derive(Clone, Debug, PartialEq)]
pub struct PositivityReport {
    /// Every periodic orbit has strictly positive mean.
    pub positive: bool,
    /// Minimum mean over periodic orbits.
    pub kappa: f64,
    /// Smallest `m*` such that `S_m ξ > 0` for every `m >= m*` (only when positive).
    pub m_star: Option<usize>,
    /// `c <= 0` with `S_m ξ >= m·κ + c` for all `m`.
    pub floor_correction: f64,
    /// Attaining cycle in the shift graph.
    pub cycle: Vec<usize>,
}

/// Decides whether some Birkhoff sum `S_n ξ` is strictly positive, which is
/// the same as every periodic orbit having positive mean.
pub fn check_eventually_positive(xi: &LocallyConstantPotential) -> Result<PositivityReport> {
    let (graph, w) = xi.graph_weights()?;
    let mc = min_mean_cycle(&graph, &w)?;
    let kappa = mc.value;
    let n = graph.node_count();
    // Walk minima under shifted weights w - κ: no negative cycles, so the
    // minimum over all lengths is reached within n - 1 edges.
    let shifted: Vec<f64> = w.iter().map(|x| x - kappa).collect();
    let mut cur = vec![0.0f64; n];
    let mut floor_c = 0.0f64;
    for _ in 1..n.max(2) {
        let mut next = vec![f64::INFINITY; n];
        for (ei, e) in graph.edges().iter().enumerate() {
            let c = cur[e.source] + shifted[ei];
            if c < next[e.target] {
                next[e.target] = c;
            }
        }
        floor_c = floor_c.min(next.iter().copied().fold(f64::INFINITY, f64::min));
        cur = next;
    }
    // Rounding can leave tiny negative cycle weights in the shifted graph.
    let floor_c = floor_c - 1e-12 * (1.0 + abs(floor_c));
    if !(kappa > 0.0) {
        return Ok(PositivityReport {
            positive: false,
            kappa,
            m_star: None,
            floor_correction: floor_c,
            cycle: mc.cycle,
        });
    }
    // S_k ≥ kκ + floor_c > 0 beyond this bound; the lengths below it are
    // checked exactly unless there are too many of them.
    let bound_f = floor(-floor_c / kappa) + 1.0;
    let m_star = if bound_f > EXACT_POSITIVITY_LIMIT as f64 {
        if bound_f > usize::MAX as f64 / 2.0 {
            usize::MAX / 2
        } else {
            bound_f as usize
        }
    } else {
        let bound = bound_f as usize;
        let mut cur = vec![0.0f64; n];
        let mut last_bad = 0usize;
        for k in 1..bound {
            let mut next = vec![f64::INFINITY; n];
            for (ei, e) in graph.edges().iter().enumerate() {
                let c = cur[e.source] + w[ei];
                if c < next[e.target] {
                    next[e.target] = c;
                }
            }
            if next.iter().copied().fold(f64::INFINITY, f64::min) <= 0.0 {
                last_bad = k;
            }
            cur = next;
        }
        last_bad + 1
    };
    Ok(PositivityReport {
        positive: true,
        kappa,
        m_star: Some(m_star),
        floor_correction: floor_c,
        cycle: mc.cycle,
    })
}

/// Lattice classification of a potential.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatticeKind {
    Lattice,
    NonLattice,
    Inconclusive,
}

impl LatticeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            LatticeKind::Lattice => "lattice",
            LatticeKind::NonLattice => "non-lattice",
            LatticeKind::Inconclusive => "inconclusive",
        }
    }
}

/// Result of [`detect_lattice`]. When the kind is lattice and `zeta`, `psi`
/// are present, they satisfy `ξ - ζ = ψ - ψ∘σ` with `ζ` valued in `aℤ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeReport {
    pub kind: LatticeKind,
    pub span: Option<f64>,
    pub zeta: Option<LocallyConstantPotential>,
    pub psi: Option<LocallyConstantPotential>,
    /// Number of periodic-orbit sums the verdict is based on.
    pub cycles_inspected: usize,
    /// Real gcd of the inspected sums before thresholding.
    pub gcd_estimate: f64,
}

impl LatticeReport {
    /// Lattice data supplied by the caller; checks the cohomology relation
    /// `ξ - ζ = ψ - ψ∘σ` and `ζ ∈ aℤ` to `tol`.
    pub fn user_supplied(
        xi: &LocallyConstantPotential,
        span: f64,
        zeta: LocallyConstantPotential,
        psi: LocallyConstantPotential,
        tol: f64,
    ) -> Result<Self> {
        if !(span > 0.0) {
            return Err(input_err!("lattice span must be positive"));
        }
        let depth = xi.depth().max(zeta.depth()).max(psi.depth() + 1);
        for w in xi.shift.admissible_words(depth)? {
            let l = w.letters();
            let lhs = xi.at(l) - zeta.at(l);
            let rhs = psi.at(l) - psi.at(&l[1..]);
            if abs(lhs - rhs) > tol {
                return Err(input_err!(
                    "xi - zeta != psi - psi∘shift on {} ({lhs} vs {rhs})",
                    w.to_string_for(xi.shift.alphabet_size())
                ));
            }
        }
        for &z in zeta.values() {
            if abs(z - span * round(z / span)) > tol {
                return Err(input_err!("zeta value {z} not in {span}·Z"));
            }
        }
        Ok(LatticeReport {
            kind: LatticeKind::Lattice,
            span: Some(span),
            zeta: Some(zeta),
            psi: Some(psi),
            cycles_inspected: 0,
            gcd_estimate: span,
        })
    }
}

/// Euclidean real gcd: remainders below `tol` (or within `tol` of the
/// divisor) count as zero.
pub fn real_gcd(a: f64, b: f64, tol: f64) -> f64 {
    let (mut a, mut b) = (abs(a), abs(b));
    if a < b {
        core::mem::swap(&mut a, &mut b);
    }
    for _ in 0..512 {
        if b <= tol {
            return a;
        }
        let mut r = a - b * floor(a / b);
        if r < 0.0 || b - r <= tol {
            r = 0.0;
        }
        a = b;
        b = r;
    }
    a
}

/// Real gcd of a list (zero entries are skipped); 0 for an empty list.
pub fn real_gcd_all(values: &[f64], tol: f64) -> f64 {
    values
        .iter()
        .filter(|v| abs(**v) > tol)
        .fold(0.0, |g, &v| if g == 0.0 { abs(v) } else { real_gcd(g, v, tol) })
}

/// Default threshold factor: a gcd below `SPAN_FLOOR_FACTOR · tol` is treated
/// as collapsed.
pub const SPAN_FLOOR_FACTOR: f64 = 1e3;

/// Default tolerance for lattice detection.
pub const LATTICE_TOL: f64 = 1e-9;

/// Span verdict for a list of values using the real gcd.
pub fn classify_values(values: &[f64], tol: f64) -> (LatticeKind, f64) {
    let g = real_gcd_all(values, tol);
    if !(g >= SPAN_FLOOR_FACTOR * tol) {
        return (LatticeKind::NonLattice, g);
    }
    let on_lattice = values.iter().all(|&s| abs(s - g * round(s / g)) <= tol);
    if on_lattice {
        (LatticeKind::Lattice, g)
    } else {
        (LatticeKind::Inconclusive, g)
    }
}

/// Classifies `ξ` as lattice or non-lattice from its periodic-orbit sums
/// over simple cycles of length `<= max_cycle_len` (default: number of
/// nodes of the shift graph).
pub fn detect_lattice(
    xi: &LocallyConstantPotential,
    max_cycle_len: Option<usize>,
    tol: f64,
) -> Result<LatticeReport> {
    if !(tol > 0.0) {
        return Err(input_err!("lattice tolerance must be positive"));
    }
    let (graph, w) = xi.graph_weights()?;
    let max_len = max_cycle_len.unwrap_or(graph.node_count()).max(1);
    let sums: Vec<f64> = graph
        .simple_cycles(max_len)
        .iter()
        .map(|c| graph.cycle_weight(c, &w))
        .collect();
    let (kind, g) = classify_values(&sums, tol);
    let mut report = LatticeReport {
        kind,
        span: None,
        zeta: None,
        psi: None,
        cycles_inspected: sums.len(),
        gcd_estimate: g,
    };
    if kind == LatticeKind::Lattice {
        report.span = Some(g);
        if xi.values().iter().all(|&v| abs(v - g * round(v / g)) <= tol) {
            report.zeta = Some(xi.clone());
            report.psi = Some(LocallyConstantPotential::constant(&xi.shift, 0.0)?);
        }
    }
    Ok(report)
}

/// Geometric potential `-log r_i` of a self-similar system on the full shift.
pub fn geometric_potential(ratios: &[f64]) -> Result<LocallyConstantPotential> {
    if ratios.len() < 2 {
        return Err(input_err!(
            "need at least 2 contraction ratios, got {}",
            ratios.len()
        ));
    }
    if let Some(r) = ratios.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(input_err!("contraction ratio {r} outside (0, 1)"));
    }
    let shift = Subshift::full(ratios.len())?;
    let values: Vec<f64> = ratios.iter().map(|r| -ln(*r)).collect();
    LocallyConstantPotential::from_letters(&shift, &values)
}

/// Fails with a precondition error unless `ξ` is eventually positive.
pub fn require_eventually_positive(xi: &LocallyConstantPotential) -> Result<PositivityReport> {
    let rep = check_eventually_positive(xi)?;
    if !rep.positive {
        return Err(Error::Precondition(format!(
            "xi is not eventually positive: a periodic orbit has mean {}",
            rep.kappa
        )));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn w(s: &str, m: usize) -> Word {
        Word::parse(s, m).unwrap()
    }

    fn golden() -> Subshift {
        Subshift::new(vec![vec![1, 1], vec![1, 0]]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let full = Subshift::full(2).unwrap();
        let c = LocallyConstantPotential::constant(&full, 2.5).unwrap();
        assert_eq!(c.eval(w("2121", 2).letters()).unwrap(), 2.5);
        let p = LocallyConstantPotential::from_letters(&full, &[ln(2.0), ln(3.0)]).unwrap();
        assert_eq!(p.eval(w("21", 2).letters()).unwrap(), ln(3.0));
        let d2 = LocallyConstantPotential::from_fn(&full, 2, |x| (x[0] * 2 + x[1]) as f64).unwrap();
        assert_eq!(d2.eval(w("121", 2).letters()).unwrap(), 1.0);
        assert!(d2.eval(w("1", 2).letters()).is_err());
    }

    #[test]
    fn table_must_be_total_and_admissible() {
        let g = golden();
        let missing = LocallyConstantPotential::from_table(&g, 2, vec![(w("11", 2), 1.0)]);
        assert!(missing.is_err());
        let bad = LocallyConstantPotential::from_table(
            &g,
            2,
            vec![(w("11", 2), 1.0), (w("12", 2), 1.0), (w("21", 2), 1.0), (w("22", 2), 1.0)],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn birkhoff_examples() {
        let full = Subshift::full(2).unwrap();
        let c = LocallyConstantPotential::constant(&full, 0.3).unwrap();
        let x = w("1", 2);
        assert!((birkhoff_sum(&c, &w("12121", 2), &x).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(birkhoff_sum(&c, &Word::empty(), &x).unwrap(), 0.0);
        let p = LocallyConstantPotential::from_letters(&full, &[1.0, 2.0]).unwrap();
        assert_eq!(birkhoff_sum(&p, &w("121", 2), &w("2", 2)).unwrap(), 4.0);
        let g = golden();
        let q = LocallyConstantPotential::constant(&g, 1.0).unwrap();
        assert!(birkhoff_sum(&q, &w("2", 2), &w("2", 2)).is_err());
    }

    #[test]
    fn positivity_examples() {
        let full = Subshift::full(2).unwrap();
        let c = LocallyConstantPotential::constant(&full, ln(2.0)).unwrap();
        let r = check_eventually_positive(&c).unwrap();
        assert!(r.positive);
        assert!((r.kappa - ln(2.0)).abs() < 1e-15);
        assert_eq!(r.m_star, Some(1));

        let p = LocallyConstantPotential::from_letters(&full, &[-1.0, 3.0]).unwrap();
        let r = check_eventually_positive(&p).unwrap();
        assert!(!r.positive);
        assert_eq!(r.kappa, -1.0);

        let s = Subshift::new(vec![vec![0, 1], vec![1, 1]]).unwrap();
        let p = LocallyConstantPotential::from_letters(&s, &[-0.1, 1.0]).unwrap();
        let r = check_eventually_positive(&p).unwrap();
        assert!(r.positive);
        assert!((r.kappa - 0.45).abs() < 1e-15);
        // S_1 can be -0.1, S_2 ≥ 0.9
        assert_eq!(r.m_star, Some(2));
    }

    #[test]
    fn lattice_examples() {
        let full = Subshift::full(2).unwrap();
        let c = LocallyConstantPotential::constant(&full, ln(2.0)).unwrap();
        let r = detect_lattice(&c, None, LATTICE_TOL).unwrap();
        assert_eq!(r.kind, LatticeKind::Lattice);
        assert!((r.span.unwrap() - ln(2.0)).abs() < 1e-12);
        assert!(r.psi.as_ref().unwrap().values().iter().all(|&v| v == 0.0));

        let p = LocallyConstantPotential::from_letters(&full, &[ln(2.0), ln(3.0)]).unwrap();
        let r = detect_lattice(&p, None, LATTICE_TOL).unwrap();
        assert_eq!(r.kind, LatticeKind::NonLattice);

        let q = LocallyConstantPotential::from_letters(&full, &[1.0, 2.0]).unwrap();
        let r = detect_lattice(&q, None, LATTICE_TOL).unwrap();
        assert_eq!(r.kind, LatticeKind::Lattice);
        assert!((r.span.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lattice_via_cohomology_has_no_auto_zeta() {
        // ξ = ζ + ψ - ψ∘σ with ζ ≡ 1 and ψ depending on the first letter.
        let full = Subshift::full(2).unwrap();
        let psi = [0.0, 0.37];
        let xi = LocallyConstantPotential::from_fn(&full, 2, |x| {
            1.0 + psi[x[0] as usize] - psi[x[1] as usize]
        })
        .unwrap();
        let r = detect_lattice(&xi, None, LATTICE_TOL).unwrap();
        assert_eq!(r.kind, LatticeKind::Lattice);
        assert!((r.span.unwrap() - 1.0).abs() < 1e-12);
        assert!(r.zeta.is_none());
        let zeta = LocallyConstantPotential::constant(&full, 1.0).unwrap();
        let psi_pot = LocallyConstantPotential::from_letters(&full, &psi).unwrap();
        let user = LatticeReport::user_supplied(&xi, 1.0, zeta.clone(), psi_pot, 1e-12).unwrap();
        assert_eq!(user.kind, LatticeKind::Lattice);
        let wrong = LocallyConstantPotential::from_letters(&full, &[0.0, 0.2]).unwrap();
        assert!(LatticeReport::user_supplied(&xi, 1.0, zeta, wrong, 1e-12).is_err());
    }

    #[test]
    fn geometric_potential_examples() {
        let g = geometric_potential(&[0.5, 0.5, 0.5]).unwrap();
        assert!(g.values().iter().all(|&v| (v - ln(2.0)).abs() < 1e-15));
        assert!(geometric_potential(&[0.367]).is_err());
        assert!(geometric_potential(&[0.5, 1.0]).is_err());
        let h = geometric_potential(&[0.5, 0.25]).unwrap();
        assert!((h.values()[1] - ln(4.0)).abs() < 1e-15);
    }

    #[test]
    fn real_gcd_basics() {
        assert!((real_gcd(6.0, 4.0, 1e-9) - 2.0).abs() < 1e-12);
        assert!(real_gcd(ln(2.0), ln(3.0), 1e-9) < 1e-6);
        assert_eq!(real_gcd_all(&[], 1e-9), 0.0);
    }

    /// All simple-cycle means, by brute force.
    fn brute_positive(p: &LocallyConstantPotential) -> bool {
        let (graph, w) = p.graph_weights().unwrap();
        graph
            .simple_cycles(graph.node_count())
            .iter()
            .all(|c| graph.cycle_weight(c, &w) / c.len() as f64 > 0.0)
    }

    fn shifts() -> Vec<Subshift> {
        vec![
            Subshift::full(2).unwrap(),
            golden(),
            Subshift::full(3).unwrap(),
            Subshift::new(vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 1]]).unwrap(),
            Subshift::new(vec![
                vec![1, 1, 0, 0],
                vec![0, 0, 1, 1],
                vec![1, 0, 0, 1],
                vec![0, 1, 1, 0],
            ])
            .unwrap(),
        ]
    }

    proptest! {
        #[test]
        fn cocycle_identity(si in 0usize..5, depth in 1usize..=2, seed in any::<u64>(), n in 0usize..=3, m in 0usize..=3) {
            let shift = &shifts()[si];
            let mut s = seed;
            let pot = LocallyConstantPotential::from_fn(shift, depth, |_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            }).unwrap();
            let words = shift.admissible_words(n + m + 2).unwrap();
            let y = &words[(seed as usize) % words.len()];
            let u = Word::from(&y.0[..n]);
            let v = Word::from(&y.0[n..n + m]);
            let x = Word::from(&y.0[n + m..]);
            let uv = u.concat(v.letters());
            let whole = birkhoff_sum(&pot, &uv, &x).unwrap();
            let split = birkhoff_sum(&pot, &u, &v.concat(x.letters())).unwrap() + birkhoff_sum(&pot, &v, &x).unwrap();
            prop_assert!((whole - split).abs() < 1e-12);
        }

        #[test]
        fn positivity_agrees_with_cycle_means(si in 0usize..5, depth in 1usize..=2, seed in any::<u64>()) {
            let shift = &shifts()[si];
            let mut s = seed;
            let pot = LocallyConstantPotential::from_fn(shift, depth, |_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) * 3.0 - 1.0
            }).unwrap();
            let rep = check_eventually_positive(&pot).unwrap();
            prop_assert_eq!(rep.positive, brute_positive(&pot));
            if let Some(m_star) = rep.m_star.filter(|m| *m <= 8) {
                // S_m > 0 for m in [m*, m* + 6] on every admissible word.
                for mm in m_star..m_star + 6 {
                    for y in shift.admissible_words(mm + depth).unwrap() {
                        let u = Word::from(&y.0[..mm]);
                        let x = Word::from(&y.0[mm..]);
                        prop_assert!(birkhoff_sum(&pot, &u, &x).unwrap() > 0.0);
                    }
                }
            }
        }

        #[test]
        fn lattice_span_scales(c in 0.1f64..10.0, k1 in 1u32..6, k2 in 1u32..6) {
            let full = Subshift::full(2).unwrap();
            let base = LocallyConstantPotential::from_letters(&full, &[k1 as f64, k2 as f64]).unwrap();
            let a = detect_lattice(&base, None, LATTICE_TOL).unwrap();
            let b = detect_lattice(&base.scale(c), None, LATTICE_TOL).unwrap();
            prop_assert_eq!(a.kind, LatticeKind::Lattice);
            prop_assert_eq!(b.kind, LatticeKind::Lattice);
            let g = num_gcd(k1, k2) as f64;
            prop_assert!((a.span.unwrap() - g).abs() < 1e-9);
            prop_assert!((b.span.unwrap() - c * g).abs() < 1e-8 * c.max(1.0));
        }
    }

    fn num_gcd(a: u32, b: u32) -> u32 {
        if b == 0 { a } else { num_gcd(b, a % b) }
    }
}

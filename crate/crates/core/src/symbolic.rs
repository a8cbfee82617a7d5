//! Subshifts of finite type and their finite combinatorics.
//!
//! Letters are stored 0-based (`0..M`); the textual form of a [`Word`] is
//! 1-based, matching how alphabets are usually written (`"121"`).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::input_err;
use crate::{Error, Result};

/// A single symbol, 0-based.
pub type Letter = u8;

/// Largest supported alphabet.
pub const MAX_ALPHABET: usize = 255;

/// Finite word over the alphabet. The empty word is allowed and stands for
/// the empty prefix.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// Word `self · other`.
    pub fn concat(&self, other: &[Letter]) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(other);
        Word(v)
    }

    /// Parses the 1-based textual form. Letters are either written as single
    /// digits (`"121"`, alphabets up to 9) or separated by commas or spaces
    /// (`"1,12,3"`).
    pub fn parse(s: &str, alphabet: usize) -> Result<Word> {
        let s = s.trim();
        let mut letters = Vec::new();
        let separated = s.contains(',') || s.contains(' ');
        if separated {
            for tok in s.split(|c| c == ',' || c == ' ').filter(|t| !t.is_empty()) {
                let v: usize = tok
                    .parse()
                    .map_err(|_| input_err!("bad letter {tok:?} in word {s:?}"))?;
                letters.push(check_letter(v, alphabet, s)?);
            }
        } else {
            for c in s.chars() {
                let v = c
                    .to_digit(10)
                    .ok_or_else(|| input_err!("bad letter {c:?} in word {s:?}"))?
                    as usize;
                letters.push(check_letter(v, alphabet, s)?);
            }
        }
        Ok(Word(letters))
    }

    /// 1-based textual form; digits are run together when the alphabet has
    /// at most nine letters.
    pub fn to_string_for(&self, alphabet: usize) -> String {
        use core::fmt::Write;
        let mut out = String::new();
        for (k, l) in self.0.iter().enumerate() {
            if alphabet > 9 && k > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", *l as usize + 1);
        }
        out
    }
}

fn check_letter(v: usize, alphabet: usize, s: &str) -> Result<Letter> {
    if v == 0 || v > alphabet {
        return Err(input_err!(
            "letter {v} in word {s:?} outside alphabet 1..={alphabet}"
        ));
    }
    Ok((v - 1) as Letter)
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide = self.0.iter().any(|&l| l >= 9);
        for (k, l) in self.0.iter().enumerate() {
            if wide && k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", *l as usize + 1)?;
        }
        Ok(())
    }
}

impl From<&[Letter]> for Word {
    fn from(v: &[Letter]) -> Self {
        Word(v.to_vec())
    }
}

/// Boolean matrix product for square 0/1 matrices stored row-major.
fn bool_mul(a: &[bool], b: &[bool], m: usize) -> Vec<bool> {
    let mut out = vec![false; m * m];
    for i in 0..m {
        for k in 0..m {
            if a[i * m + k] {
                for j in 0..m {
                    if b[k * m + j] {
                        out[i * m + j] = true;
                    }
                }
            }
        }
    }
    out
}

fn validate_incidence(rows: &[Vec<u8>]) -> Result<Vec<bool>> {
    let m = rows.len();
    if m == 0 {
        return Err(input_err!("incidence matrix is empty"));
    }
    let mut a = Vec::with_capacity(m * m);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != m {
            return Err(input_err!(
                "incidence matrix is not square: row {} has {} entries, expected {m}",
                i + 1,
                row.len()
            ));
        }
        for (j, &v) in row.iter().enumerate() {
            match v {
                0 => a.push(false),
                1 => a.push(true),
                _ => {
                    return Err(input_err!(
                        "incidence entry ({}, {}) is {v}, expected 0 or 1",
                        i + 1,
                        j + 1
                    ))
                }
            }
        }
    }
    Ok(a)
}

/// Primitivity test for a 0/1 matrix.
///
/// Returns `Some(n)` with the smallest `n <= (M-1)^2 + 1` for which `A^n` is
/// entrywise positive, or `None` when no such power exists (Wielandt's bound
/// makes the search exhaustive).
pub fn is_primitive(rows: &[Vec<u8>]) -> Result<Option<usize>> {
    let a = validate_incidence(rows)?;
    Ok(primitive_witness(&a, rows.len()))
}

fn primitive_witness(a: &[bool], m: usize) -> Option<usize> {
    let bound = (m - 1) * (m - 1) + 1;
    let mut power = a.to_vec();
    for n in 1..=bound {
        if power.iter().all(|&x| x) {
            return Some(n);
        }
        power = bool_mul(&power, a, m);
    }
    None
}

/// One-sided subshift of finite type `Σ_A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subshift {
    m: usize,
    a: Vec<bool>,
    witness: usize,
}

impl Subshift {
    /// Builds a subshift from a primitive 0/1 incidence matrix with `M >= 2`.
    pub fn new(rows: Vec<Vec<u8>>) -> Result<Self> {
        let a = validate_incidence(&rows)?;
        let m = rows.len();
        if m < 2 {
            return Err(input_err!("alphabet size must be at least 2, got {m}"));
        }
        if m > MAX_ALPHABET {
            return Err(input_err!("alphabet size {m} exceeds {MAX_ALPHABET}"));
        }
        let witness = primitive_witness(&a, m).ok_or_else(|| {
            input_err!("incidence matrix is not primitive (irreducible-but-periodic and reducible matrices are rejected)")
        })?;
        Ok(Subshift { m, a, witness })
    }

    /// Full shift on `m` symbols.
    pub fn full(m: usize) -> Result<Self> {
        Self::new(vec![vec![1u8; m]; m])
    }

    pub fn alphabet_size(&self) -> usize {
        self.m
    }

    /// Smallest power of `A` that is entrywise positive.
    pub fn primitivity_exponent(&self) -> usize {
        self.witness
    }

    #[inline]
    pub fn allows(&self, i: Letter, j: Letter) -> bool {
        self.a[i as usize * self.m + j as usize]
    }

    pub fn is_full(&self) -> bool {
        self.a.iter().all(|&x| x)
    }

    pub fn matrix(&self) -> Vec<Vec<u8>> {
        (0..self.m)
            .map(|i| (0..self.m).map(|j| self.a[i * self.m + j] as u8).collect())
            .collect()
    }

    pub fn is_admissible(&self, w: &[Letter]) -> bool {
        w.iter().all(|&l| (l as usize) < self.m) && w.windows(2).all(|p| self.allows(p[0], p[1]))
    }

    pub fn check_admissible(&self, w: &[Letter]) -> Result<()> {
        if self.is_admissible(w) {
            Ok(())
        } else {
            Err(input_err!(
                "word {} is not admissible",
                Word::from(w).to_string_for(self.m)
            ))
        }
    }

    /// Admissible words of length `n`, in lexicographic order.
    pub fn admissible_words(&self, n: usize) -> Result<Vec<Word>> {
        if n == 0 {
            return Err(input_err!("word length must be at least 1"));
        }
        let mut out = Vec::new();
        let mut stack: Vec<Letter> = Vec::with_capacity(n);
        self.extend_words(&mut stack, n, &mut out);
        Ok(out)
    }

    fn extend_words(&self, stack: &mut Vec<Letter>, n: usize, out: &mut Vec<Word>) {
        if stack.len() == n {
            out.push(Word(stack.clone()));
            return;
        }
        for l in 0..self.m as Letter {
            if stack.last().map_or(true, |&p| self.allows(p, l)) {
                stack.push(l);
                self.extend_words(stack, n, out);
                stack.pop();
            }
        }
    }

    /// All admissible `u` of length `n` with `u · x_head` admissible, in
    /// lexicographic order. `n = 0` yields the single empty prefix.
    pub fn preimage_prefixes(&self, x_head: &Word, n: usize) -> Result<Vec<Word>> {
        if x_head.is_empty() {
            return Err(input_err!("base word must be nonempty"));
        }
        self.check_admissible(x_head.letters())?;
        if n == 0 {
            return Ok(vec![Word::empty()]);
        }
        let first = x_head.0[0];
        Ok(self
            .admissible_words(n)?
            .into_iter()
            .filter(|u| self.allows(u.0[n - 1], first))
            .collect())
    }

    /// Cylinder index of admissible words of length `depth`.
    pub fn cylinders(&self, depth: usize) -> Result<CylinderIndex> {
        CylinderIndex::new(self, depth)
    }

    /// Shift graph on depth-`depth` cylinders.
    pub fn cylinder_graph(&self, depth: usize) -> Result<CylinderGraph> {
        CylinderGraph::new(self, depth)
    }
}

/// Lexicographic bijection between admissible words of a fixed length and
/// `0..K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CylinderIndex {
    alphabet: usize,
    depth: usize,
    codes: Vec<u64>,
}

impl CylinderIndex {
    pub fn new(shift: &Subshift, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(input_err!("cylinder depth must be at least 1"));
        }
        let m = shift.alphabet_size() as u64;
        let fits = (0..depth).try_fold(1u64, |acc, _| acc.checked_mul(m)).is_some();
        if !fits {
            return Err(input_err!("cylinder depth {depth} too large for alphabet {m}"));
        }
        let codes = shift
            .admissible_words(depth)?
            .iter()
            .map(|w| encode(w.letters(), m))
            .collect();
        Ok(CylinderIndex {
            alphabet: shift.alphabet_size(),
            depth,
            codes,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Index of the cylinder given by the first `depth` letters of `w`.
    pub fn index_of(&self, w: &[Letter]) -> Option<usize> {
        if w.len() < self.depth {
            return None;
        }
        self.codes
            .binary_search(&encode(&w[..self.depth], self.alphabet as u64))
            .ok()
    }

    pub fn word(&self, idx: usize) -> Word {
        decode(self.codes[idx], self.depth, self.alphabet as u64)
    }

    pub fn words(&self) -> impl Iterator<Item = Word> + '_ {
        (0..self.len()).map(|i| self.word(i))
    }
}

fn encode(w: &[Letter], m: u64) -> u64 {
    w.iter().fold(0u64, |acc, &l| acc * m + l as u64)
}

fn decode(mut code: u64, depth: usize, m: u64) -> Word {
    let mut v = vec![0 as Letter; depth];
    for k in (0..depth).rev() {
        v[k] = (code % m) as Letter;
        code /= m;
    }
    Word(v)
}

/// Directed shift graph on depth-`m` cylinders: one edge `w → σ(w·a)` per
/// admissible word `w·a` of length `m + 1`. A closed walk of length `p` is a
/// periodic orbit of period `p`, and summing a potential of depth `<= m + 1`
/// along it gives the Birkhoff sum `S_p`.
#[derive(Clone, Debug)]
pub struct CylinderGraph {
    index: CylinderIndex,
    edges: Vec<Edge>,
    // out[u] = (target, edge id), sorted by target
    out: Vec<Vec<(usize, usize)>>,
}

/// Edge of a [`CylinderGraph`]; `word` is the length-`m+1` word it reads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub word: Word,
}

impl CylinderGraph {
    pub fn new(shift: &Subshift, depth: usize) -> Result<Self> {
        let index = CylinderIndex::new(shift, depth)?;
        let mut edges = Vec::new();
        for (source, w) in index.words().enumerate() {
            let last = *w.0.last().expect("depth >= 1");
            for a in 0..shift.alphabet_size() as Letter {
                if shift.allows(last, a) {
                    let word = w.concat(&[a]);
                    let target = index
                        .index_of(&word.0[1..])
                        .expect("suffix of an admissible word is admissible");
                    edges.push(Edge {
                        source,
                        target,
                        word,
                    });
                }
            }
        }
        let mut out = vec![Vec::new(); index.len()];
        for (ei, e) in edges.iter().enumerate() {
            out[e.source].push((e.target, ei));
        }
        for o in &mut out {
            o.sort_unstable();
        }
        Ok(CylinderGraph { index, edges, out })
    }

    pub fn index(&self) -> &CylinderIndex {
        &self.index
    }

    pub fn node_count(&self) -> usize {
        self.index.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge id of `u → v`, if present.
    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        let o = &self.out[u];
        o.binary_search_by_key(&v, |&(t, _)| t).ok().map(|k| o[k].1)
    }

    /// Simple directed cycles with at most `max_len` edges. Each cycle is
    /// listed once, as its node sequence starting from its smallest node.
    pub fn simple_cycles(&self, max_len: usize) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let adj: Vec<Vec<usize>> = self
            .out
            .iter()
            .map(|o| o.iter().map(|&(t, _)| t).collect())
            .collect();
        let mut out = Vec::new();
        let mut path = Vec::new();
        let mut on_path = vec![false; n];
        for start in 0..n {
            path.push(start);
            on_path[start] = true;
            cycles_from(&adj, start, max_len, &mut path, &mut on_path, &mut out);
            on_path[start] = false;
            path.pop();
        }
        out
    }

    /// Sum of edge weights along a closed node sequence.
    pub fn cycle_weight(&self, cycle: &[usize], weights: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in 0..cycle.len() {
            let (u, v) = (cycle[k], cycle[(k + 1) % cycle.len()]);
            s += self.edge_between(u, v).map_or(f64::INFINITY, |e| weights[e]);
        }
        s
    }
}

fn cycles_from(
    adj: &[Vec<usize>],
    start: usize,
    max_len: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<Vec<usize>>,
) {
    let here = *path.last().expect("nonempty path");
    for &next in &adj[here] {
        if next == start {
            out.push(path.clone());
        } else if next > start && !on_path[next] && path.len() < max_len {
            path.push(next);
            on_path[next] = true;
            cycles_from(adj, start, max_len, path, on_path, out);
            on_path[next] = false;
            path.pop();
        }
    }
}

/// Minimum mean-weight cycle, with an attaining cycle as node sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanCycle {
    pub value: f64,
    pub cycle: Vec<usize>,
}

/// Karp's minimum mean cycle on a cylinder graph; `weights[e]` belongs to
/// `graph.edges()[e]`.
pub fn min_mean_cycle(graph: &CylinderGraph, weights: &[f64]) -> Result<MeanCycle> {
    let n = graph.node_count();
    let edges = graph.edges();
    if weights.len() != edges.len() {
        return Err(input_err!(
            "expected {} edge weights, got {}",
            edges.len(),
            weights.len()
        ));
    }
    if edges.is_empty() || n == 0 {
        return Err(Error::Structure("graph has no cycle".into()));
    }
    // dist[k][v]: lightest walk with exactly k edges ending at v, from any start.
    let inf = f64::INFINITY;
    let mut dist = vec![vec![inf; n]; n + 1];
    let mut pred: Vec<Vec<Option<usize>>> = vec![vec![None; n]; n + 1];
    dist[0].iter_mut().for_each(|d| *d = 0.0);
    for k in 1..=n {
        for (ei, e) in edges.iter().enumerate() {
            let cand = dist[k - 1][e.source] + weights[ei];
            if cand < dist[k][e.target] {
                dist[k][e.target] = cand;
                pred[k][e.target] = Some(ei);
            }
        }
    }
    let mut best: Option<(f64, usize)> = None;
    for v in 0..n {
        if dist[n][v] == inf {
            continue;
        }
        let mut worst = f64::NEG_INFINITY;
        for k in 0..n {
            if dist[k][v] < inf {
                let r = (dist[n][v] - dist[k][v]) / (n - k) as f64;
                if r > worst {
                    worst = r;
                }
            }
        }
        if best.map_or(true, |(b, _)| worst < b) {
            best = Some((worst, v));
        }
    }
    let (value, v) = best.ok_or_else(|| Error::Structure("graph has no cycle".into()))?;
    // Walk the n-edge predecessor chain back from v; every cycle on it is a
    // minimum mean cycle up to rounding, keep the lightest one found.
    let mut walk = vec![v];
    let mut cur = v;
    for k in (1..=n).rev() {
        let ei = pred[k][cur].expect("finite distance has a predecessor");
        cur = edges[ei].source;
        walk.push(cur);
    }
    walk.reverse();
    let mut chosen: Option<(f64, Vec<usize>)> = None;
    let mut last_seen = vec![usize::MAX; n];
    for (pos, &node) in walk.iter().enumerate() {
        if last_seen[node] != usize::MAX {
            let cyc: Vec<usize> = walk[last_seen[node]..pos].to_vec();
            let mean = graph.cycle_weight(&cyc, weights) / cyc.len() as f64;
            if chosen.as_ref().map_or(true, |(m, _)| mean < *m) {
                chosen = Some((mean, cyc));
            }
        }
        last_seen[node] = pos;
    }
    let (_, mut cycle) = chosen.ok_or_else(|| Error::Structure("no cycle on Karp walk".into()))?;
    let rot = (0..cycle.len()).min_by_key(|&i| cycle[i]).unwrap_or(0);
    cycle.rotate_left(rot);
    Ok(MeanCycle { value, cycle })
}

/// Simple cycles of length `<= max_len` in the depth-`m` cylinder graph.
pub fn enumerate_cycles(shift: &Subshift, m: usize, max_len: usize) -> Result<Vec<Vec<usize>>> {
    if max_len == 0 {
        return Err(input_err!("max_len must be at least 1"));
    }
    Ok(shift.cylinder_graph(m)?.simple_cycles(max_len))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn golden() -> Subshift {
        Subshift::new(vec![vec![1, 1], vec![1, 0]]).unwrap()
    }

    /// Integer matrix power oracle.
    fn int_power(a: &[Vec<u8>], n: usize) -> Vec<Vec<u64>> {
        let m = a.len();
        let mut p: Vec<Vec<u64>> = (0..m)
            .map(|i| (0..m).map(|j| (i == j) as u64).collect())
            .collect();
        for _ in 0..n {
            let mut q = vec![vec![0u64; m]; m];
            for i in 0..m {
                for k in 0..m {
                    for j in 0..m {
                        q[i][j] += p[i][k] * a[k][j] as u64;
                    }
                }
            }
            p = q;
        }
        p
    }

    #[test]
    fn primitivity_examples() {
        assert_eq!(is_primitive(&[vec![1, 1], vec![1, 1]]).unwrap(), Some(1));
        assert_eq!(is_primitive(&[vec![0, 1], vec![1, 0]]).unwrap(), None);
        assert_eq!(is_primitive(&[vec![1, 1], vec![1, 0]]).unwrap(), Some(2));
    }

    #[test]
    fn primitivity_rejects_bad_matrices() {
        assert!(matches!(is_primitive(&[vec![1, 1]]), Err(Error::Input(_))));
        assert!(matches!(
            is_primitive(&[vec![1, 2], vec![1, 1]]),
            Err(Error::Input(_))
        ));
        assert!(Subshift::new(vec![vec![0, 1], vec![1, 0]]).is_err());
        assert!(Subshift::new(vec![vec![1]]).is_err());
    }

    #[test]
    fn primitivity_agrees_with_brute_force_up_to_m4() {
        for m in 1..=4usize {
            let cells = m * m;
            let bound = (m - 1) * (m - 1) + 1;
            for bits in 0u32..(1u32 << cells) {
                let a: Vec<Vec<u8>> = (0..m)
                    .map(|i| (0..m).map(|j| ((bits >> (i * m + j)) & 1) as u8).collect())
                    .collect();
                let expect = (1..=bound).find(|&n| {
                    int_power(&a, n).iter().all(|r| r.iter().all(|&x| x > 0))
                });
                assert_eq!(is_primitive(&a).unwrap(), expect, "{a:?}");
            }
        }
    }

    #[test]
    fn admissible_word_examples() {
        let full = Subshift::full(2).unwrap();
        let w = full.admissible_words(2).unwrap();
        let s: Vec<String> = w.iter().map(|w| w.to_string()).collect();
        assert_eq!(s, ["11", "12", "21", "22"]);
        let g = golden().admissible_words(2).unwrap();
        let s: Vec<String> = g.iter().map(|w| w.to_string()).collect();
        assert_eq!(s, ["11", "12", "21"]);
        assert_eq!(full.admissible_words(1).unwrap().len(), 2);
        assert!(full.admissible_words(0).is_err());
    }

    #[test]
    fn preimage_examples() {
        let full = Subshift::full(2).unwrap();
        let x = Word::parse("12", 2).unwrap();
        assert_eq!(full.preimage_prefixes(&x, 2).unwrap().len(), 4);
        assert_eq!(full.preimage_prefixes(&x, 0).unwrap(), vec![Word::empty()]);
        let g = golden();
        let x = Word::parse("21", 2).unwrap();
        let p = g.preimage_prefixes(&x, 1).unwrap();
        assert_eq!(p, vec![Word::parse("1", 2).unwrap()]);
        assert!(g.preimage_prefixes(&Word::parse("22", 2).unwrap(), 1).is_err());
    }

    #[test]
    fn words_parse_and_print() {
        let w = Word::parse("1,11,3", 12).unwrap();
        assert_eq!(w.0, vec![0, 10, 2]);
        assert_eq!(w.to_string_for(12), "1,11,3");
        assert_eq!(Word::parse("213", 3).unwrap().to_string(), "213");
        assert!(Word::parse("4", 3).is_err());
        assert!(Word::parse("0", 3).is_err());
    }

    #[test]
    fn cylinder_index_is_lexicographic_bijection() {
        let g = golden();
        let idx = g.cylinders(3).unwrap();
        let words: Vec<Word> = g.admissible_words(3).unwrap();
        assert_eq!(idx.len(), words.len());
        for (i, w) in words.iter().enumerate() {
            assert_eq!(idx.index_of(w.letters()), Some(i));
            assert_eq!(&idx.word(i), w);
        }
        assert_eq!(idx.index_of(&[1, 1, 0]), None);
    }

    #[test]
    fn cycle_enumeration_examples() {
        let full = Subshift::full(2).unwrap();
        let c = enumerate_cycles(&full, 1, 2).unwrap();
        assert_eq!(c, vec![vec![0], vec![0, 1], vec![1]]);
        let g = enumerate_cycles(&golden(), 1, 2).unwrap();
        assert_eq!(g, vec![vec![0], vec![0, 1]]);
        let loops = enumerate_cycles(&full, 1, 1).unwrap();
        assert_eq!(loops, vec![vec![0], vec![1]]);
        assert!(enumerate_cycles(&full, 1, 0).is_err());
    }

    #[test]
    fn min_mean_cycle_examples() {
        let full = Subshift::full(2).unwrap();
        let graph = full.cylinder_graph(1).unwrap();
        // constant weights
        let w = vec![0.7; graph.edges().len()];
        let mc = min_mean_cycle(&graph, &w).unwrap();
        assert!((mc.value - 0.7).abs() < 1e-15);
        // self-loop weights 1 and -1, cross edges 5
        let w: Vec<f64> = graph
            .edges()
            .iter()
            .map(|e| match (e.source, e.target) {
                (0, 0) => 1.0,
                (1, 1) => -1.0,
                _ => 5.0,
            })
            .collect();
        let mc = min_mean_cycle(&graph, &w).unwrap();
        assert_eq!(mc.value, -1.0);
        assert_eq!(mc.cycle, vec![1]);
        // golden mean: w(1->1)=3, w(1->2)=1, w(2->1)=1
        let gg = golden().cylinder_graph(1).unwrap();
        let w: Vec<f64> = gg
            .edges()
            .iter()
            .map(|e| if e.source == 0 && e.target == 0 { 3.0 } else { 1.0 })
            .collect();
        let mc = min_mean_cycle(&gg, &w).unwrap();
        assert!((mc.value - 1.0).abs() < 1e-15);
        assert_eq!(mc.cycle, vec![0, 1]);
    }

    #[test]
    fn min_mean_cycle_matches_simple_cycle_enumeration() {
        // deterministic pseudo-random weights on a few graphs
        let shifts = [
            Subshift::full(3).unwrap(),
            golden(),
            Subshift::new(vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 1]]).unwrap(),
        ];
        let mut seed = 12345u64;
        for shift in &shifts {
            for depth in 1..=2 {
                let graph = shift.cylinder_graph(depth).unwrap();
                for _ in 0..20 {
                    let w: Vec<f64> = graph
                        .edges()
                        .iter()
                        .map(|_| {
                            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                            ((seed >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 1.5
                        })
                        .collect();
                    let brute = graph
                        .simple_cycles(graph.node_count())
                        .iter()
                        .map(|c| graph.cycle_weight(c, &w) / c.len() as f64)
                        .fold(f64::INFINITY, f64::min);
                    let mc = min_mean_cycle(&graph, &w).unwrap();
                    assert!((mc.value - brute).abs() < 1e-12, "{} vs {}", mc.value, brute);
                    let m = graph.cycle_weight(&mc.cycle, &w) / mc.cycle.len() as f64;
                    assert!((m - brute).abs() < 1e-12);
                }
            }
        }
    }
}

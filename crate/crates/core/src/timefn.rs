//! Time profiles `t ↦ f(t)`: piecewise exponential-polynomials with exact
//! antiderivatives, or sampled grids with linear interpolation. Each
//! profile carries bounds on its lower and upper tails that the renewal
//! code uses to truncate series with a certificate.

use alloc::format;
use alloc::vec::Vec;

use crate::error::input_err;
use crate::math::{abs, ceil, exp, expm1, floor, gauss_legendre, ln, powi};
use crate::{Error, Result};

/// `c · t^p · e^{q t}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpTerm {
    pub c: f64,
    pub p: u32,
    pub q: f64,
}

impl ExpTerm {
    pub fn new(c: f64, p: u32, q: f64) -> Self {
        ExpTerm { c, p, q }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        if self.c == 0.0 {
            return 0.0;
        }
        let poly = if self.p == 0 { 1.0 } else { powi(t, self.p as i32) };
        self.c * poly * exp(self.q * t)
    }

    /// `∫_a^b c t^p e^{(q−δ)t} dt`; infinite ends must be integrable.
    fn integral_exp(&self, delta: f64, a: f64, b: f64) -> Result<f64> {
        if self.c == 0.0 || a == b {
            return Ok(0.0);
        }
        let k = self.q - delta;
        if (a.is_infinite() || b.is_infinite()) && k == 0.0 {
            return Err(input_err!("e^(-δt) f(t) is not integrable: constant term on an infinite piece"));
        }
        if b == f64::INFINITY && k > 0.0 || a == f64::NEG_INFINITY && k < 0.0 {
            return Err(input_err!("e^(-δt) f(t) grows on an infinite piece"));
        }
        let p = self.p as i32;
        if k == 0.0 {
            let f = |t: f64| powi(t, p + 1) / (p + 1) as f64;
            return Ok(self.c * (f(b) - f(a)));
        }
        if p == 0 {
            // e^{ka}(e^{k(b−a)} − 1)/k, stable for small k(b − a)
            let v = if a.is_infinite() {
                exp(k * b) / k
            } else if b.is_infinite() {
                -exp(k * a) / k
            } else {
                exp(k * a) * expm1(k * (b - a)) / k
            };
            return Ok(self.c * v);
        }
        let reach = abs(a).max(abs(b)) * abs(k);
        if reach.is_finite() && reach < (p + 2) as f64 {
            // the closed form cancels badly here; sum the Taylor series of e^{kt}
            let big = abs(a).max(abs(b));
            let mut s = 0.0;
            let mut fact = 1.0;
            for n in 0..400 {
                let e = p + n + 1;
                s += fact * (powi(b, e) - powi(a, e)) / e as f64;
                let size = abs(fact) * powi(big, e);
                if n > 0 && size <= 1e-18 * abs(s) || size == 0.0 {
                    break;
                }
                fact *= k / (n + 1) as f64;
            }
            return Ok(self.c * s);
        }
        // F(t) = e^{kt} Σ_i (−1)^i p!/(p−i)! t^{p−i} / k^{i+1}
        let anti = |t: f64| -> f64 {
            if t.is_infinite() {
                return 0.0;
            }
            let mut s = 0.0;
            let mut coef = 1.0;
            for i in 0..=p {
                s += coef * powi(t, p - i) / powi(k, i + 1);
                coef *= -((p - i) as f64);
            }
            s * exp(k * t)
        };
        Ok(self.c * (anti(b) - anti(a)))
    }
}

/// `Σ terms` on `[from, to)`; `from` may be `-∞`, `to` may be `+∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub from: f64,
    pub to: f64,
    pub terms: Vec<ExpTerm>,
}

impl Piece {
    pub fn new(from: f64, to: f64, terms: Vec<ExpTerm>) -> Self {
        Piece { from, to, terms }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|x| x.eval(t)).sum()
    }
}

/// Storage of a [`TimeFunction`].
#[derive(Clone, Debug, PartialEq)]
pub enum Representation {
    /// Disjoint pieces sorted by start; zero outside their union.
    Pieces(Vec<Piece>),
    /// Samples `values[i]` at `t0 + i·step`, linearly interpolated, zero
    /// outside `[t0, t0 + (n−1)·step]`.
    Grid { t0: f64, step: f64, values: Vec<f64> },
}

/// Bound on one tail of a time profile.
///
/// As a lower tail, `Support(T)` means `f(t) = 0` for `t < T` and
/// `Exp { c, rate, from }` means `|f(t)| <= c·e^{rate·t}` for `t < from`.
/// As an upper tail, `Support(T)` means `f(t) = 0` for `t > T` and the
/// exponential bound holds for `t >= from`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tail {
    Support(f64),
    Exp { c: f64, rate: f64, from: f64 },
}

/// A function of time with tail metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeFunction {
    repr: Representation,
    lower: Option<Tail>,
    upper: Option<Tail>,
}

impl TimeFunction {
    /// Piecewise exponential-polynomial; tails are derived automatically
    /// whenever the outer pieces are finite or purely exponential.
    pub fn from_pieces(mut pieces: Vec<Piece>) -> Result<Self> {
        for p in &pieces {
            if p.from.is_nan() || p.to.is_nan() || !(p.from < p.to) {
                return Err(input_err!("piece [{}, {}) is empty or malformed", p.from, p.to));
            }
            if p.from == f64::INFINITY || p.to == f64::NEG_INFINITY {
                return Err(input_err!("piece [{}, {}) lies at infinity", p.from, p.to));
            }
            if p.terms.iter().any(|x| !x.c.is_finite() || !x.q.is_finite() || x.p > 16) {
                return Err(input_err!("piece terms must be finite with degree <= 16"));
            }
        }
        pieces.sort_by(|a, b| a.from.total_cmp(&b.from));
        for w in pieces.windows(2) {
            if w[1].from < w[0].to {
                return Err(input_err!(
                    "pieces [{}, {}) and [{}, {}) overlap",
                    w[0].from,
                    w[0].to,
                    w[1].from,
                    w[1].to
                ));
            }
        }
        pieces.retain(|p| p.terms.iter().any(|x| x.c != 0.0));
        let lower = derive_lower(&pieces);
        let upper = derive_upper(&pieces);
        Ok(TimeFunction {
            repr: Representation::Pieces(pieces),
            lower,
            upper,
        })
    }

    /// Linear interpolation of equally spaced samples, zero outside.
    pub fn from_grid(t0: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite() && t0.is_finite()) {
            return Err(input_err!("grid needs finite t0 and positive step"));
        }
        if values.len() < 2 {
            return Err(input_err!("grid needs at least two samples"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(input_err!("grid samples must be finite"));
        }
        let t1 = t0 + step * (values.len() - 1) as f64;
        Ok(TimeFunction {
            repr: Representation::Grid { t0, step, values },
            lower: Some(Tail::Support(t0)),
            upper: Some(Tail::Support(t1)),
        })
    }

    pub fn zero() -> Self {
        TimeFunction {
            repr: Representation::Pieces(Vec::new()),
            lower: Some(Tail::Support(0.0)),
            upper: Some(Tail::Support(0.0)),
        }
    }

    /// `c · 1_{[a, b)}`.
    pub fn indicator(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::from_pieces(alloc::vec![Piece::new(a, b, alloc::vec![ExpTerm::new(c, 0, 0.0)])])
    }

    /// `c · e^{−rate·t} · 1_{[from, ∞)}`.
    pub fn exp_decay(c: f64, rate: f64, from: f64) -> Result<Self> {
        Self::from_pieces(alloc::vec![Piece::new(
            from,
            f64::INFINITY,
            alloc::vec![ExpTerm::new(c, 0, -rate)]
        )])
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn lower_tail(&self) -> Option<Tail> {
        self.lower
    }

    pub fn upper_tail(&self) -> Option<Tail> {
        self.upper
    }

    /// Replaces the lower-tail bound after checking it on samples.
    pub fn with_lower_tail(mut self, tail: Tail) -> Result<Self> {
        self.lower = Some(tail);
        self.verify_tails()?;
        Ok(self)
    }

    /// Replaces the upper-tail bound after checking it on samples.
    pub fn with_upper_tail(mut self, tail: Tail) -> Result<Self> {
        self.upper = Some(tail);
        self.verify_tails()?;
        Ok(self)
    }

    /// `T_lo` when `f` vanishes below it.
    pub fn support_lower(&self) -> Option<f64> {
        match self.lower {
            Some(Tail::Support(t)) => Some(t),
            _ => None,
        }
    }

    pub fn support_upper(&self) -> Option<f64> {
        match self.upper {
            Some(Tail::Support(t)) => Some(t),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Representation::Pieces(p) => p.is_empty(),
            Representation::Grid { values, .. } => values.iter().all(|v| *v == 0.0),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.repr {
            Representation::Pieces(pieces) => {
                let i = pieces.partition_point(|p| p.from <= t);
                if i == 0 {
                    return 0.0;
                }
                let p = &pieces[i - 1];
                if t < p.to {
                    p.eval(t)
                } else {
                    0.0
                }
            }
            Representation::Grid { t0, step, values } => {
                let x = (t - t0) / step;
                let n = values.len();
                if !(x >= 0.0) || x > (n - 1) as f64 {
                    return 0.0;
                }
                let i = (floor(x) as usize).min(n - 2);
                let w = x - i as f64;
                values[i] * (1.0 - w) + values[i + 1] * w
            }
        }
    }

    /// Left limit `lim_{s↑t} f(s)`.
    pub fn eval_left(&self, t: f64) -> f64 {
        match &self.repr {
            Representation::Pieces(pieces) => {
                let i = pieces.partition_point(|p| p.from < t);
                if i == 0 {
                    return 0.0;
                }
                let p = &pieces[i - 1];
                if t <= p.to {
                    p.eval(t)
                } else {
                    0.0
                }
            }
            Representation::Grid { t0, .. } => {
                if t <= *t0 {
                    0.0
                } else {
                    self.eval(t)
                }
            }
        }
    }

    /// Finite points where `f` may fail to be smooth, sorted.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        match &self.repr {
            Representation::Pieces(pieces) => {
                for p in pieces {
                    for t in [p.from, p.to] {
                        if t.is_finite() && out.last() != Some(&t) {
                            out.push(t);
                        }
                    }
                }
            }
            Representation::Grid { t0, step, values } => {
                out.extend((0..values.len()).map(|i| t0 + step * i as f64));
            }
        }
        out
    }

    /// `c · f`.
    pub fn scaled(&self, c: f64) -> Self {
        let repr = match &self.repr {
            Representation::Pieces(pieces) => Representation::Pieces(
                pieces
                    .iter()
                    .map(|p| Piece {
                        from: p.from,
                        to: p.to,
                        terms: p.terms.iter().map(|x| ExpTerm { c: c * x.c, ..*x }).collect(),
                    })
                    .collect(),
            ),
            Representation::Grid { t0, step, values } => Representation::Grid {
                t0: *t0,
                step: *step,
                values: values.iter().map(|v| c * v).collect(),
            },
        };
        let scale_tail = |t: Option<Tail>| match t {
            Some(Tail::Exp { c: k, rate, from }) => Some(Tail::Exp { c: abs(c) * k, rate, from }),
            other => other,
        };
        TimeFunction {
            repr,
            lower: scale_tail(self.lower),
            upper: scale_tail(self.upper),
        }
    }

    /// `t ↦ f(t − τ)`.
    pub fn shifted(&self, tau: f64) -> Self {
        let repr = match &self.repr {
            Representation::Pieces(pieces) => Representation::Pieces(
                pieces
                    .iter()
                    .map(|p| {
                        let mut terms = Vec::new();
                        for x in &p.terms {
                            // c (t−τ)^p e^{q(t−τ)} = Σ_i c C(p,i) (−τ)^{p−i} e^{−qτ} t^i e^{qt}
                            let base = x.c * exp(-x.q * tau);
                            let mut binom = 1.0;
                            for i in 0..=x.p {
                                let coef = base * binom * powi(-tau, (x.p - i) as i32);
                                terms.push(ExpTerm::new(coef, i, x.q));
                                binom = binom * (x.p - i) as f64 / (i + 1) as f64;
                            }
                        }
                        Piece::new(p.from + tau, p.to + tau, terms)
                    })
                    .collect(),
            ),
            Representation::Grid { t0, step, values } => Representation::Grid {
                t0: t0 + tau,
                step: *step,
                values: values.clone(),
            },
        };
        let shift_tail = |t: Option<Tail>| match t {
            Some(Tail::Support(s)) => Some(Tail::Support(s + tau)),
            Some(Tail::Exp { c, rate, from }) => Some(Tail::Exp {
                c: c * exp(-rate * tau),
                rate,
                from: from + tau,
            }),
            None => None,
        };
        TimeFunction {
            repr,
            lower: shift_tail(self.lower),
            upper: shift_tail(self.upper),
        }
    }

    /// Checks the tail metadata on sample points.
    pub fn verify_tails(&self) -> Result<()> {
        let check = |t: f64, bound: f64| -> Result<()> {
            let v = abs(self.eval(t)).max(abs(self.eval_left(t)));
            if v > bound * (1.0 + 1e-9) + 1e-300 {
                return Err(input_err!(
                    "tail bound violated at t = {t}: |f| = {v} exceeds {bound}"
                ));
            }
            Ok(())
        };
        let scale = self.natural_scale();
        if let Some(tail) = self.lower {
            for k in 1..=256 {
                let d = scale * k as f64 / 16.0;
                match tail {
                    Tail::Support(t) => check(t - d, 0.0)?,
                    Tail::Exp { c, rate, from } => {
                        let t = from - d;
                        check(t, c * exp(rate * t))?;
                    }
                }
            }
        }
        if let Some(tail) = self.upper {
            for k in 1..=256 {
                let d = scale * k as f64 / 16.0;
                match tail {
                    Tail::Support(t) => check(t + d, 0.0)?,
                    Tail::Exp { c, rate, from } => {
                        let t = from + d - scale / 16.0;
                        check(t, c * exp(rate * t))?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Characteristic length for sampling: width of the finite part, at least 1.
    fn natural_scale(&self) -> f64 {
        let b = self.breakpoints();
        match (b.first(), b.last()) {
            (Some(x), Some(y)) if y > x => (y - x).max(1.0),
            _ => 1.0,
        }
    }

    /// `∫ e^{−δt} f(t) dt` over `ℝ`, exact for both representations.
    pub fn integral_exp(&self, delta: f64) -> Result<f64> {
        match &self.repr {
            Representation::Pieces(pieces) => {
                let mut s = 0.0;
                for p in pieces {
                    for x in &p.terms {
                        s += x.integral_exp(delta, p.from, p.to)?;
                    }
                }
                Ok(s)
            }
            Representation::Grid { t0, step, values } => {
                let mut s = 0.0;
                let h = *step;
                for i in 0..values.len() - 1 {
                    let a = t0 + h * i as f64;
                    let slope = (values[i + 1] - values[i]) / h;
                    // ∫_0^h e^{−δ(a+u)} (v_i + slope·u) du
                    let c0 = ExpTerm::new(values[i], 0, -delta).integral_exp(0.0, 0.0, h)?;
                    let c1 = ExpTerm::new(slope, 1, -delta).integral_exp(0.0, 0.0, h)?;
                    s += exp(-delta * a) * (c0 + c1);
                }
                Ok(s)
            }
        }
    }

    /// Finite window `[lo, hi]` outside of which `∫ e^{−δt}|f(t)| dt <= eps`,
    /// together with the bound on the mass outside.
    pub fn window(&self, delta: f64, eps: f64) -> Result<(f64, f64, f64)> {
        let mut outside = 0.0;
        let lo = match self.lower {
            Some(Tail::Support(t)) => t,
            Some(Tail::Exp { c, rate, from }) => {
                let k = rate - delta;
                if !(k > 0.0) {
                    return Err(Error::Unsupported(format!(
                        "lower tail rate {rate} does not exceed δ = {delta}"
                    )));
                }
                // c e^{k L}/k = eps/2
                let l = if c > 0.0 { (ln(0.5 * eps * k / c) / k).min(from) } else { from };
                outside += if c > 0.0 { c * exp(k * l) / k } else { 0.0 };
                l
            }
            None => return Err(Error::Unsupported("no lower-tail bound declared".into())),
        };
        let hi = match self.upper {
            Some(Tail::Support(t)) => t,
            Some(Tail::Exp { c, rate, from }) => {
                let k = rate - delta;
                if !(k < 0.0) {
                    return Err(Error::Unsupported(format!(
                        "upper tail rate {rate} is not below δ = {delta}"
                    )));
                }
                let u = if c > 0.0 { (ln(-0.5 * eps * k / c) / k).max(from) } else { from };
                outside += if c > 0.0 { -c * exp(k * u) / k } else { 0.0 };
                u
            }
            None => return Err(Error::Unsupported("no upper-tail bound declared".into())),
        };
        let (lo, hi) = if hi < lo { (lo, lo) } else { (lo, hi) };
        Ok((lo, hi, outside))
    }

    /// `∫ e^{−δt}|f(t)| dt` by Gauss–Legendre between breakpoints on a
    /// window, plus the certified tail bound; returns `(value, tail_bound)`.
    pub fn integral_exp_abs(&self, delta: f64, eps: f64) -> Result<(f64, f64)> {
        let (lo, hi, outside) = self.window(delta, eps)?;
        if hi <= lo {
            return Ok((0.0, outside));
        }
        let mut cuts: Vec<f64> = self.breakpoints().into_iter().filter(|t| *t > lo && *t < hi).collect();
        cuts.insert(0, lo);
        cuts.push(hi);
        let mut s = 0.0;
        for w in cuts.windows(2) {
            let panels = (((w[1] - w[0]) * 8.0) as usize).clamp(4, 4096);
            s += gauss_legendre(|t| exp(-delta * t) * abs(self.eval(t)), w[0], w[1], panels);
        }
        Ok((s, outside))
    }

    /// `Σ_{l∈ℤ} e^{−a l δ} f(a l + s)` with a certified truncation bound.
    pub fn lattice_sum(&self, a: f64, s: f64, delta: f64, tol: f64) -> Result<LatticeSum> {
        if !(a > 0.0) {
            return Err(input_err!("lattice span must be positive"));
        }
        let mut bound = 0.0;
        let l_lo: f64 = match self.lower {
            Some(Tail::Support(t)) => ceil((t - s) / a),
            Some(Tail::Exp { c, rate, from }) => {
                let k = rate - delta;
                if !(k > 0.0) {
                    return Err(Error::Unsupported(format!(
                        "lower tail rate {rate} does not exceed δ = {delta}"
                    )));
                }
                // terms with a l + s < from: |·| <= c e^{rate s} e^{a l k}
                let first_in = ceil((from - s) / a);
                let log_c = ln(c.max(f64::MIN_POSITIVE)) + rate * s - ln(-expm1(-a * k));
                // Σ_{l <= L−1} c e^{rate s} e^{a l k} = e^{log_c + a (L−1) k}
                let want = (ln(0.5 * tol) - log_c) / (a * k) + 1.0;
                let l = floor(want).min(first_in);
                bound += exp(log_c + a * (l - 1.0) * k);
                l
            }
            None => return Err(Error::Unsupported("no lower-tail bound declared".into())),
        };
        let l_hi: f64 = match self.upper {
            Some(Tail::Support(t)) => floor((t - s) / a),
            Some(Tail::Exp { c, rate, from }) => {
                let k = rate - delta;
                if !(k < 0.0) {
                    return Err(Error::Unsupported(format!(
                        "upper tail rate {rate} is not below δ = {delta}"
                    )));
                }
                let last_before = floor((from - s) / a);
                let log_c = ln(c.max(f64::MIN_POSITIVE)) + rate * s - ln(-expm1(a * k));
                // Σ_{l >= U+1} = e^{log_c + a (U+1) k}
                let want = (ln(0.5 * tol) - log_c) / (a * k) - 1.0;
                let u = ceil(want).max(last_before);
                bound += exp(log_c + a * (u + 1.0) * k);
                u
            }
            None => return Err(Error::Unsupported("no upper-tail bound declared".into())),
        };
        if l_hi < l_lo {
            return Ok(LatticeSum { value: 0.0, tail_bound: bound, terms: 0 });
        }
        let count = l_hi - l_lo + 1.0;
        if count > 1e8 {
            return Err(Error::Unsupported(format!("lattice sum needs {count} terms")));
        }
        let n = count as usize;
        let values: Vec<f64> = (0..n)
            .map(|i| {
                let l = l_lo + i as f64;
                exp(-a * l * delta) * self.eval(a * l + s)
            })
            .collect();
        Ok(LatticeSum {
            value: crate::math::pairwise_sum(&values),
            tail_bound: bound,
            terms: n,
        })
    }

    /// Upper bound on `|f(t)|` for `t` below `t_max`, if the lower tail is
    /// exponential: `(c, rate)` with `|f(t)| <= c e^{rate t}` for all `t < t_max`.
    pub fn lower_exp_bound(&self, t_max: f64) -> Option<(f64, f64)> {
        match self.lower {
            Some(Tail::Exp { c, rate, from }) if t_max <= from => Some((c, rate)),
            _ => None,
        }
    }
}

fn derive_lower(pieces: &[Piece]) -> Option<Tail> {
    let first = match pieces.first() {
        None => return Some(Tail::Support(0.0)),
        Some(p) => p,
    };
    if first.from.is_finite() {
        return Some(Tail::Support(first.from));
    }
    if first.terms.iter().any(|x| x.p > 0 && x.c != 0.0) {
        return None;
    }
    let from = if first.to.is_finite() { first.to } else { 0.0 };
    let qmin = first.terms.iter().map(|x| x.q).fold(f64::INFINITY, f64::min);
    // |Σ c_j e^{q_j t}| <= (Σ |c_j| e^{(q_j − qmin) from}) e^{qmin t} for t < from
    let c = first.terms.iter().map(|x| abs(x.c) * exp((x.q - qmin) * from)).sum();
    Some(Tail::Exp { c, rate: qmin, from })
}

fn derive_upper(pieces: &[Piece]) -> Option<Tail> {
    let last = match pieces.last() {
        None => return Some(Tail::Support(0.0)),
        Some(p) => p,
    };
    if last.to.is_finite() {
        return Some(Tail::Support(last.to));
    }
    if last.terms.iter().any(|x| x.p > 0 && x.c != 0.0) {
        return None;
    }
    let from = if last.from.is_finite() { last.from } else { 0.0 };
    let qmax = last.terms.iter().map(|x| x.q).fold(f64::NEG_INFINITY, f64::max);
    let c = last.terms.iter().map(|x| abs(x.c) * exp((x.q - qmax) * from)).sum();
    Some(Tail::Exp { c, rate: qmax, from })
}

/// Result of [`TimeFunction::lattice_sum`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeSum {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn gasket_like() -> TimeFunction {
        let s3 = crate::math::sqrt(3.0);
        let ts = ln(12.0 / s3);
        TimeFunction::from_pieces(vec![
            Piece::new(f64::NEG_INFINITY, ts, vec![ExpTerm::new(s3 / 16.0, 0, 0.0)]),
            Piece::new(ts, f64::INFINITY, vec![ExpTerm::new(1.5, 0, -1.0), ExpTerm::new(-3.0 * s3, 0, -2.0)]),
        ])
        .unwrap()
    }

    #[test]
    fn eval_pieces_and_limits() {
        let f = TimeFunction::indicator(0.0, 1.0, 1.0).unwrap();
        assert_eq!(f.eval(-1e-12), 0.0);
        assert_eq!(f.eval(0.0), 1.0);
        assert_eq!(f.eval(1.0), 0.0);
        assert_eq!(f.eval_left(1.0), 1.0);
        assert_eq!(f.eval_left(0.0), 0.0);
        assert_eq!(f.breakpoints(), vec![0.0, 1.0]);
        assert_eq!(f.lower_tail(), Some(Tail::Support(0.0)));
        assert_eq!(f.upper_tail(), Some(Tail::Support(1.0)));
    }

    #[test]
    fn derived_tails_hold() {
        let g = gasket_like();
        g.verify_tails().unwrap();
        match g.lower_tail() {
            Some(Tail::Exp { rate, .. }) => assert_eq!(rate, 0.0),
            other => panic!("{other:?}"),
        }
        match g.upper_tail() {
            Some(Tail::Exp { rate, .. }) => assert_eq!(rate, -1.0),
            other => panic!("{other:?}"),
        }
        let bad = TimeFunction::exp_decay(1.0, 1.0, 0.0)
            .unwrap()
            .with_upper_tail(Tail::Exp { c: 0.5, rate: -1.0, from: 0.0 });
        assert!(bad.is_err());
    }

    #[test]
    fn exact_integrals() {
        let f = TimeFunction::exp_decay(1.0, 1.0, 0.0).unwrap();
        assert!((f.integral_exp(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((f.integral_exp(-0.5).unwrap() - 2.0).abs() < 1e-14);
        assert!(f.integral_exp(-1.0).is_err());
        let ind = TimeFunction::indicator(0.0, 2.0, 3.0).unwrap();
        assert!((ind.integral_exp(0.0).unwrap() - 6.0).abs() < 1e-15);
        // ∫_0^1 t² e^{t} dt = e − 2
        let p = TimeFunction::from_pieces(vec![Piece::new(0.0, 1.0, vec![ExpTerm::new(1.0, 2, 1.0)])]).unwrap();
        assert!((p.integral_exp(0.0).unwrap() - (exp(1.0) - 2.0)).abs() < 1e-14);
        // tiny δ does not lose accuracy
        let v = ind.integral_exp(1e-12).unwrap();
        assert!((v - 3.0 * -expm1(-2e-12) / 1e-12).abs() < 1e-12);
    }

    #[test]
    fn grid_integral_is_exact_for_piecewise_linear() {
        let g = TimeFunction::from_grid(0.0, 0.5, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!((g.integral_exp(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((g.eval(0.25) - 0.5).abs() < 1e-15);
        assert_eq!(g.eval(1.6), 0.0);
        let d = 0.7;
        let num = gauss_legendre(|t| exp(-d * t) * g.eval(t), 0.0, 0.5, 1)
            + gauss_legendre(|t| exp(-d * t) * g.eval(t), 0.5, 1.0, 1)
            + gauss_legendre(|t| exp(-d * t) * g.eval(t), 1.0, 1.5, 1);
        assert!((g.integral_exp(d).unwrap() - num).abs() < 1e-14);
    }

    #[test]
    fn abs_integral_with_tails() {
        let g = gasket_like();
        let d = ln(3.0) / ln(2.0) - 2.0;
        let exact = g.integral_exp(d).unwrap();
        let (v, b) = g.integral_exp_abs(d, 1e-10).unwrap();
        assert!(b <= 1e-10 * (1.0 + 1e-9));
        assert!((v - exact).abs() < 1e-9);
    }

    #[test]
    fn lattice_sums() {
        // Σ_l 1_{[0,1)}(l + s) = 1
        let f = TimeFunction::indicator(0.0, 1.0, 1.0).unwrap();
        for s in [0.0, 0.3, -2.7, 5.5] {
            let r = f.lattice_sum(1.0, s, 0.0, 1e-12).unwrap();
            assert_eq!(r.value, 1.0);
            assert_eq!(r.tail_bound, 0.0);
        }
        // Σ_{l >= 0} e^{−(l+s)} with s ∈ [0,1): e^{−s} / (1 − e^{−1})
        let e = TimeFunction::exp_decay(1.0, 1.0, 0.0).unwrap();
        let r = e.lattice_sum(1.0, 0.25, 0.0, 1e-13).unwrap();
        let want = exp(-0.25) / (1.0 - exp(-1.0));
        assert!((r.value - want).abs() <= r.tail_bound + 1e-14);
        assert!(r.tail_bound <= 1e-13);
    }

    #[test]
    fn shift_and_scale() {
        let g = gasket_like();
        let h = g.shifted(0.8).scaled(2.0);
        for t in [-3.0, 0.0, 1.0, 2.5, 2.7, 4.0, 9.0] {
            assert!((h.eval(t) - 2.0 * g.eval(t - 0.8)).abs() < 1e-14);
        }
        h.verify_tails().unwrap();
    }

    proptest! {
        #[test]
        fn exact_matches_quadrature(c in -2.0f64..2.0, p in 0u32..4, q in -2.0f64..2.0, a in -3.0f64..3.0, w in 0.1f64..4.0, d in -1.0f64..1.0) {
            let f = TimeFunction::from_pieces(vec![Piece::new(a, a + w, vec![ExpTerm::new(c, p, q)])]).unwrap();
            let exact = f.integral_exp(d).unwrap();
            let num = gauss_legendre(|t| exp(-d * t) * f.eval(t), a, a + w, 64);
            prop_assert!((exact - num).abs() < 1e-9 * (1.0 + num.abs()));
        }

        #[test]
        fn lattice_sum_is_periodic(s in -3.0f64..3.0, d in -0.5f64..0.5) {
            let g = gasket_like();
            let a = ln(2.0);
            let dd = d.min(-0.01);
            let r0 = g.lattice_sum(a, s, dd, 1e-13).unwrap();
            let r1 = g.lattice_sum(a, s + a, dd, 1e-13).unwrap();
            // shifting s by a reindexes l → l+1, scaling by e^{aδ}
            prop_assert!((r1.value * exp(-a * dd) - r0.value).abs() <= 1e-11);
        }
    }
}

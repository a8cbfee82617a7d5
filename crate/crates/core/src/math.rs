//! Thin wrappers over `libm` so the crate builds without `std`, plus a
//! deterministic pairwise summation.

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}

#[inline]
pub fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

/// Fractional part `t - floor(t)`, always in `[0, 1)`, also for negative `t`.
#[inline]
pub fn frac(t: f64) -> f64 {
    let r = t - floor(t);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Pairwise (cascade) summation with fan-in 2 and a fixed block size.
///
/// The reduction tree only depends on `values.len()`, so results are
/// bitwise reproducible no matter how the values were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 8;
    if values.len() <= BLOCK {
        let mut s = 0.0;
        for v in values {
            s += *v;
        }
        return s;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// 8-point Gauss–Legendre rule on `panels` equal panels of `[a, b]`.
pub fn gauss_legendre<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut s = 0.0;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
            s += w * (f(mid - half * x) + f(mid + half * x));
        }
        total += s * half;
    }
    total
}

/// Scalar bracketing root finder (Illinois variant of regula falsi).
///
/// `f(lo)` and `f(hi)` must have opposite signs. Stops once `|f| <= ftol` or
/// the bracket has shrunk to a few ulps.
pub(crate) fn illinois<F>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    mut flo: f64,
    mut fhi: f64,
    ftol: f64,
    max_iter: usize,
) -> crate::Result<(f64, f64)>
where
    F: FnMut(f64) -> crate::Result<f64>,
{
    if flo == 0.0 {
        return Ok((lo, 0.0));
    }
    if fhi == 0.0 {
        return Ok((hi, 0.0));
    }
    let mut side = 0i8;
    let mut best = (lo, flo);
    for _ in 0..max_iter {
        let mut x = (lo * fhi - hi * flo) / (fhi - flo);
        if !(x > lo.min(hi) && x < lo.max(hi)) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x)?;
        if abs(fx) < abs(best.1) {
            best = (x, fx);
        }
        if abs(fx) <= ftol || abs(hi - lo) <= 4.0 * f64::EPSILON * (1.0 + abs(x)) {
            return Ok(best);
        }
        if (fx > 0.0) == (fhi > 0.0) {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        } else {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        }
    }
    if abs(best.1) <= ftol {
        Ok(best)
    } else {
        Err(crate::Error::NoConvergence {
            method: "illinois",
            iterations: max_iter,
            last_change: abs(hi - lo),
        })
    }
}

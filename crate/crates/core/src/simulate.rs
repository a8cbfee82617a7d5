//! Monte-Carlo realisation of the point process behind the renewal series.
//!
//! With a normalised `η̃` (`Σ_j e^{η̃(j·w)} = 1`) the letters
//! `X₁, X₂, …` form a chain with `P(X_{n+1} = j | past) = e^{η̃(j·past)}`,
//! interarrivals are `W_n = ξ(X_{n+1} X_n ⋯ X₁ x)`, and
//!
//! ```text
//! N(t, x) = E_x[ Σ_n f̃_{X_n⋯X₁x}(t − W₀ − ⋯ − W_{n−1}) ].
//! ```
//!
//! Path `i` draws from ChaCha8 stream `i` of the seed, so a path does not
//! depend on how many others are simulated or in which order.

use alloc::format;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::input_err;
use crate::math::{abs, ceil, exp, pairwise_sum, sqrt};
use crate::potential::LocallyConstantPotential;
use crate::renewal::{FFamily, RenewalProblem};
use crate::spectral::row_sum_deviation;
use crate::symbolic::{Letter, Word};
use crate::timefn::Tail;
use crate::{Error, Result};

/// Largest accepted `max_w |Σ_j e^{η̃(j·w)} − 1|`.
pub const ROW_SUM_TOL: f64 = 1e-10;

/// A normalised problem together with horizon, path count and seed.
#[derive(Clone, Debug)]
pub struct SimulationSpec {
    problem: RenewalProblem,
    head_len: usize,
    t_lo: f64,
    pub n_max: usize,
    pub n_paths: usize,
    pub seed: u64,
}

/// Letters `X₁..X_{n_max}` and interarrivals `W₀..W_{n_max−1}` of one path.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePath {
    pub letters: Vec<Letter>,
    pub interarrivals: Vec<f64>,
}

/// Monte-Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub t: f64,
    pub mean: f64,
    pub stderr: f64,
    pub paths: usize,
}

impl SimulationSpec {
    /// `f` is `f̃ = χ f` with `χ` folded in; it must vanish below some time.
    pub fn new(
        eta: LocallyConstantPotential,
        xi: LocallyConstantPotential,
        f: FFamily,
        x_head: Word,
        n_max: usize,
        n_paths: usize,
        seed: u64,
    ) -> Result<Self> {
        let dev = row_sum_deviation(&eta)?;
        if dev > ROW_SUM_TOL {
            return Err(input_err!(
                "eta is not normalised: row sums of e^eta deviate from 1 by {dev:e}"
            ));
        }
        let t_lo = match f.lower_tail() {
            Some(Tail::Support(t)) => t,
            _ => {
                return Err(input_err!(
                    "simulation needs profiles vanishing below a finite time"
                ))
            }
        };
        if n_paths == 0 {
            return Err(input_err!("need at least one path"));
        }
        let head_len = [eta.depth(), xi.depth(), f.depth(), 1]
            .into_iter()
            .max()
            .unwrap_or(1);
        let chi = LocallyConstantPotential::constant(xi.shift(), 1.0)?;
        let problem = RenewalProblem::new(eta, xi, chi, f, x_head)?;
        if abs(problem.delta()) > 1e-9 {
            return Err(Error::Numerical(format!(
                "normalised eta should give δ = 0, got {}",
                problem.delta()
            )));
        }
        Ok(SimulationSpec {
            problem,
            head_len,
            t_lo,
            n_max,
            n_paths,
            seed,
        })
    }

    /// The deterministic problem whose `N` is being estimated.
    pub fn problem(&self) -> &RenewalProblem {
        &self.problem
    }

    fn rng(&self, path: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(path);
        rng
    }

    /// Draws path number `path`.
    pub fn sample_path(&self, path: u64) -> SamplePath {
        let p = &self.problem;
        let shift = p.shift();
        let mut rng = self.rng(path);
        let mut head: Vec<Letter> = p.x_head().letters().iter().copied().take(self.head_len).collect();
        let mut letters = Vec::with_capacity(self.n_max);
        let mut waits = Vec::with_capacity(self.n_max);
        let mut buf: Vec<Letter> = Vec::with_capacity(self.head_len + 1);
        for _ in 0..self.n_max {
            let u = uniform(&mut rng);
            let mut cum = 0.0;
            let mut pick = None;
            for j in 0..shift.alphabet_size() as Letter {
                if !shift.allows(j, head[0]) {
                    continue;
                }
                buf.clear();
                buf.push(j);
                buf.extend_from_slice(&head);
                cum += exp(p.eta().at(&buf));
                pick = Some(j);
                if u < cum {
                    break;
                }
            }
            let j = pick.expect("primitive shifts have predecessors");
            head.insert(0, j);
            head.truncate(self.head_len);
            waits.push(p.xi().at(&head));
            letters.push(j);
        }
        SamplePath {
            letters,
            interarrivals: waits,
        }
    }

    /// `Σ_{n <= n_max} f̃_{y_n}(t − S_n)` along one path for each `t`.
    pub fn path_values(&self, path: u64, ts: &[f64]) -> Result<Vec<f64>> {
        let p = &self.problem;
        let sp = self.sample_path(path);
        let t_max = ts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = sp.interarrivals.iter().sum();
        let reach = total + p.min_future_sum();
        if ts.is_empty() {
            return Ok(Vec::new());
        }
        if !(reach > t_max - self.t_lo) {
            let rate = total / self.n_max.max(1) as f64;
            let need = t_max - self.t_lo - p.min_future_sum().min(0.0);
            let suggested = if rate > 0.0 {
                (ceil(1.25 * need / rate) as usize).max(self.n_max + 1) + 16
            } else {
                2 * self.n_max + 16
            };
            return Err(Error::Horizon {
                n_max: self.n_max,
                suggested,
            });
        }
        let mut out = alloc::vec![0.0; ts.len()];
        let mut y: Vec<Letter> = p.x_head().letters().to_vec();
        let mut s = 0.0;
        for n in 0..=self.n_max {
            let f = p.f().get(&y)?;
            for (o, &t) in out.iter_mut().zip(ts) {
                *o += f.eval(t - s);
            }
            if n == self.n_max {
                break;
            }
            s += sp.interarrivals[n];
            y.insert(0, sp.letters[n]);
            y.truncate(self.head_len.max(p.x_head().len()));
        }
        Ok(out)
    }

    /// Sequential estimate of `N(t, x)` for each `t`.
    pub fn empirical_n(&self, ts: &[f64]) -> Result<Vec<Estimate>> {
        let per_path = (0..self.n_paths as u64)
            .map(|i| self.path_values(i, ts))
            .collect::<Result<Vec<_>>>()?;
        Ok(reduce(ts, &per_path))
    }
}

/// Combines per-path values (indexed by path) into estimates; the order of
/// summation is fixed, so the result does not depend on how paths were
/// scheduled.
pub fn reduce(ts: &[f64], per_path: &[Vec<f64>]) -> Vec<Estimate> {
    let n = per_path.len();
    ts.iter()
        .enumerate()
        .map(|(k, &t)| {
            let vals: Vec<f64> = per_path.iter().map(|v| v[k]).collect();
            let mean = pairwise_sum(&vals) / n as f64;
            let dev: Vec<f64> = vals.iter().map(|v| (v - mean) * (v - mean)).collect();
            let var = if n > 1 { pairwise_sum(&dev) / (n - 1) as f64 } else { 0.0 };
            Estimate {
                t,
                mean,
                stderr: sqrt(var / n as f64),
                paths: n,
            }
        })
        .collect()
}

/// Uniform draw in `[0, 1)` with 53 random bits.
fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

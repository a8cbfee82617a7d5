//! Ruelle–Perron–Frobenius transfer operators on subshifts of finite type,
//! and renewal theorems for point processes whose interarrival times depend
//! on the whole past of a finite-state process.
//!
//! Every potential handled here is locally constant of finite depth, so the
//! transfer operator acts on a finite-dimensional space of cylinder functions
//! and the renewal series can be evaluated by aggregating prefixes per cylinder
//! state. Points of the shift space are represented by finite admissible head
//! words long enough to determine every function involved.
//!
//! The crate is `no_std` and only needs `alloc`. IO, file formats and the
//! command-line front end live in the `rpf` crate.
//!
//! Module map:
//!
//! * [`symbolic`]: subshifts, admissible words, cylinder graphs, cycles.
//! * [`potential`]: locally constant potentials, Birkhoff sums, positivity
//!   and lattice classification.
//! * [`spectral`]: transfer matrices, leading eigendata, pressure, the
//!   renewal exponent and Gibbs measures.
//! * [`timefn`]: time profiles `t ↦ f_y(t)` with exact exponential-polynomial
//!   integration and tail metadata.
//! * [`renewal`]: the renewal function, regularity checks and the asymptotic laws.
//! * [`classical`]: key renewal, Markov renewal and lattice counting closed forms.
//! * [`geometry`]: Minkowski dimension and content of self-similar sets.
//! * [`simulate`]: seeded Monte-Carlo realisation of the point process.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classical;
mod error;
pub mod geometry;
pub mod math;
pub mod potential;
pub mod renewal;
pub mod simulate;
pub mod spectral;
pub mod symbolic;
pub mod timefn;

pub use error::{Error, Result};
pub use potential::{LatticeKind, LatticeReport, LocallyConstantPotential};

pub use renewal::{FFamily, RenewalProblem};
pub use spectral::{SpectralData, TransferMatrix};
pub use symbolic::{CylinderIndex, Subshift, Word};
pub use timefn::TimeFunction;


//! Estimation of traces of density-matrix powers from low-order moments.
//!
//! The crate works at the spectral level: a density operator is represented by
//! its eigenvalues ([`Spectrum`]), moments `Tr(ρ^i)` are exact rationals, and the
//! higher moments are reconstructed with the Newton-Girard recurrence. The
//! quantum measurement step is replaced by a binomial sampling surrogate.
//!
//! Module map:
//!
//! * [`series`]: power sums, Newton-Girard, recurrence extension.
//! * [`estimation`]: moment sampling and the end-to-end estimator for `Tr(ρ^k)`.
//! * [`observables`]: the same pipeline for `Tr(Mρ^k)`.
//! * [`multistate`]: the cross-trace grid `Tr(ρ^i σ^j)`.
//! * [`bounds`]: closed-form error bounds and checkers.
//! * [`applications`]: nonlinear traces, Gibbs cost, `K_α`, partial-transpose
//!   entanglement detection, and a small Hermitian eigen-solver.
//! * [`scenarios`]: eigenvalue distributions, experiment grids and reports.

pub mod applications;
pub mod bounds;
mod error;
pub mod estimation;
pub mod fraction;
pub mod multistate;
pub mod observables;
pub mod scenarios;
pub mod series;
mod spectrum;

pub use error::{Error, Result};
pub use rug::{Integer, Rational};
pub use series::{
    exact_trace_power, extend_series, newton_girard, power_sums, PowerSumSeries, SeriesKind,
    SymmetricPolys,
};
pub use spectrum::Spectrum;

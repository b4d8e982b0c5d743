//! Numerical laboratory for the quasi-periodic doubling renormalization of
//! forced unimodal maps.

pub mod asymptotics;
pub mod curvedyn;
pub mod error;
pub mod funcspace;
pub mod qprenorm;
pub mod renorm1d;
pub mod rotation;

pub use error::{Error, Result};
pub use funcspace::{DomainConfig, Real};
pub use rotation::RotationNumber;

/// Chebyshev series on the inflated interval.
pub type AnalyticFn = funcspace::AnalyticFn<f64>;
/// Fourier-Chebyshev series on the cylinder.
pub type QPFn = funcspace::QPFn<f64>;
/// Rotation coordinates `(u, v)` of one Fourier mode.
pub type PairFn = funcspace::PairFn<f64>;

pub type AnalyticFn32 = funcspace::AnalyticFn<f32>;
pub type QPFn32 = funcspace::QPFn<f32>;
pub type PairFn32 = funcspace::PairFn<f32>;

//! Spectral function spaces: Chebyshev series on the inflated interval
//! `I = [-(1 + delta_dom), 1 + delta_dom]` and Fourier-Chebyshev tensor
//! series on the cylinder `T x I`.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rustfft::FftNum;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod analytic;
pub mod cheb;
mod json;
mod qp;

pub use analytic::AnalyticFn;
pub use qp::{compose_fiber, PairFn, QPFn};

/// Interpolation tolerance used by consistency checks.
pub const TOL_INTERP: f64 = 1e-12;

/// Scalar type of the spectral core.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + FftNum
    + Default
    + Debug
    + Display
    + LowerExp
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainConfig {
    pub delta_dom: f64,
    pub w_center: f64,
    pub w_radius: f64,
    pub rho_strip: f64,
    pub n_cheb: usize,
    pub n_fourier: usize,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig {
            delta_dom: 0.1,
            w_center: 0.2,
            w_radius: 1.5,
            rho_strip: 0.1,
            n_cheb: 40,
            n_fourier: 16,
        }
    }
}

impl DomainConfig {
    pub fn with_n_cheb(mut self, n: usize) -> Self {
        self.n_cheb = n;
        self
    }

    pub fn with_n_fourier(mut self, k: usize) -> Self {
        self.n_fourier = k;
        self
    }

    pub fn half_width(&self) -> f64 {
        1.0 + self.delta_dom
    }

    /// Number of uniform theta samples used by spectral re-expansion.
    pub fn n_theta(&self) -> usize {
        2 * self.n_fourier + 1
    }

    pub fn contains(&self, x: f64) -> bool {
        let l = self.half_width();
        x.abs() <= l * (1.0 + 1e-13)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_dom > 0.0) {
            return Err(Error::Invalid(format!("delta_dom must be positive, got {}", self.delta_dom)));
        }
        if !(self.w_radius > 1.0 + self.delta_dom - self.w_center) {
            return Err(Error::Invalid(format!(
                "disc radius {} does not cover the interval (needs > {})",
                self.w_radius,
                1.0 + self.delta_dom - self.w_center
            )));
        }
        if self.n_cheb < 8 {
            return Err(Error::Invalid(format!("n_cheb must be at least 8, got {}", self.n_cheb)));
        }
        if self.n_fourier < 1 {
            return Err(Error::Invalid("n_fourier must be at least 1".into()));
        }
        Ok(())
    }
}

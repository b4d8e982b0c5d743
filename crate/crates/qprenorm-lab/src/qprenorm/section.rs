use serde::{Deserialize, Serialize};

use super::DtOperator;
use crate::error::{Error, Result};
use crate::funcspace::{AnalyticFn, PairFn, QPFn};

/// Section point `(theta0, x0)` with fallback abscissae tried when the
/// first mode vanishes at `x0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionConfig {
    pub theta0: f64,
    pub x0: f64,
    pub degenerate_scan: Vec<f64>,
}

impl Default for SectionConfig {
    fn default() -> Self {
        SectionConfig { theta0: 0.0, x0: 0.0, degenerate_scan: vec![0.25, -0.25, 0.5, -0.5] }
    }
}

pub const TOL_PI1: f64 = 1e-12;

/// Angle `gamma` in `[0, 1)` such that `t_gamma` puts the first-mode part
/// `A cos(2 pi theta) + B sin(2 pi theta)` on the section: zero at
/// `(theta0, x0)` with positive angular derivative.
pub fn section_gamma(a_fn: &AnalyticFn, b_fn: &AnalyticFn, section: &SectionConfig) -> Result<f64> {
    let norm = (a_fn.norm_l2().powi(2) + b_fn.norm_l2().powi(2)).sqrt();
    if norm < TOL_PI1 {
        return Err(Error::NoSection { norm });
    }
    let tau = 2.0 * std::f64::consts::PI;
    let (s0, c0) = (tau * section.theta0).sin_cos();
    for &x0 in std::iter::once(&section.x0).chain(section.degenerate_scan.iter()) {
        let (a, b) = (a_fn.eval_unchecked(x0), b_fn.eval_unchecked(x0));
        let at = a * c0 + b * s0;
        let bt = b * c0 - a * s0;
        if at.hypot(bt) <= 1e-12 * norm {
            continue;
        }
        let g0 = (-at).atan2(bt) / tau;
        for g in [g0, g0 + 0.5] {
            let ph = tau * (section.theta0 + g);
            let slope = tau * (-a * ph.sin() + b * ph.cos());
            if slope > 0.0 {
                return Ok(g.rem_euclid(1.0));
            }
        }
    }
    Err(Error::DegeneratePoint)
}

/// `(gamma0, t_gamma0(v))` placing `pi_1(v)` on the section.
pub fn gamma_normalize(v: &QPFn, section: &SectionConfig) -> Result<(f64, QPFn)> {
    let p = v.project_pik(1)?;
    let g = section_gamma(&p.u, &p.v, section)?;
    Ok((g, v.shift_tgamma(g)))
}

/// `L'_omega(v) = t_{gamma} L_omega(v)` for `v` in rotation coordinates of mode 1.
pub fn apply_l_prime(op: &DtOperator, phase: f64, v: &PairFn, section: &SectionConfig) -> Result<(f64, PairFn)> {
    let w = op.apply_pair(phase, v);
    if w.norm_l2() == 0.0 {
        return Err(Error::ZeroImage);
    }
    let g = section_gamma(&w.u, &w.v.scale(-1.0), section)?;
    Ok((g, w.rotate(2.0 * std::f64::consts::PI * g)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::DomainConfig;
    use std::f64::consts::PI;

    #[test]
    fn section_examples() {
        let d = DomainConfig::default();
        let s = SectionConfig::default();
        let sin = QPFn::from_fn(d, |t: f64, x: f64| (1.0 + x * x) * (2.0 * PI * t).sin());
        let (g, _) = gamma_normalize(&sin, &s).unwrap();
        assert!(g.abs() < 1e-14 || (g - 1.0).abs() < 1e-14);
        let cos = QPFn::from_fn(d, |t: f64, x: f64| (1.0 + x * x) * (2.0 * PI * t).cos());
        let (g, w) = gamma_normalize(&cos, &s).unwrap();
        assert!((g - 0.75).abs() < 1e-14);
        let (g2, _) = gamma_normalize(&w, &s).unwrap();
        assert!(g2.min(1.0 - g2) < 1e-12);
        assert!(w.eval(0.0, 0.0).unwrap().abs() < 1e-14);
        let flat = QPFn::from_fn(d, |_, x: f64| x);
        assert!(matches!(gamma_normalize(&flat, &s), Err(Error::NoSection { .. })));
    }

    #[test]
    fn degenerate_point_falls_back() {
        let d = DomainConfig::default();
        let v = QPFn::from_fn(d, |t: f64, x: f64| x * (2.0 * PI * t).cos());
        let (g, w) = gamma_normalize(&v, &SectionConfig::default()).unwrap();
        assert!((g - 0.75).abs() < 1e-14);
        assert!(w.eval(0.0, 0.25).unwrap().abs() < 1e-14);
        let s = SectionConfig { degenerate_scan: vec![], ..SectionConfig::default() };
        assert!(matches!(gamma_normalize(&v, &s), Err(Error::DegeneratePoint)));
    }
}

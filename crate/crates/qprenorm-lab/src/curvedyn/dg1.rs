use super::curve::{g1, solve_invariant_curve, CurveOptions, QPFiber};
use super::trig::TrigPoly;
use crate::error::{Error, Result};
use crate::funcspace::{AnalyticFn, QPFn};
use crate::renorm1d::UnimodalMap;
use crate::rotation::RotationNumber;

/// Default tolerance on `|psi(1)|` for membership in `Sigma_1`.
pub const TOL_SIGMA1: f64 = 1e-9;

struct CriticalData {
    dpsi1: f64,
    d2psi0: f64,
}

fn critical_data(psi: &UnimodalMap, tol_sigma: f64) -> Result<CriticalData> {
    let a = psi.a();
    if a.abs() > tol_sigma {
        return Err(Error::Inconsistency { what: "Sigma_1 residual psi(1)", a, b: tol_sigma });
    }
    let d = psi.psi().derivative();
    let d2psi0 = d.derivative().eval_unchecked(0.0);
    if d2psi0 == 0.0 {
        return Err(Error::Invalid("psi''(0) vanishes".into()));
    }
    Ok(CriticalData { dpsi1: d.eval_unchecked(1.0), d2psi0 })
}

/// `DG_1(omega, psi) v` at an uncoupled map with superstable 2-cycle `0 -> 1 -> 0`.
///
/// Linearizing the invariance equation gives the curve displacement
/// `dx(theta) = psi'(1) v(theta - 2 omega, 0) + v(theta - omega, 1)`, and
/// `DG_1 v = psi'(1) [d_x v(theta, 0) + psi''(0) dx(theta)]`.
pub fn dg1(psi: &UnimodalMap, omega: &RotationNumber, v: &QPFn) -> Result<TrigPoly> {
    dg1_with(psi, omega, v, TOL_SIGMA1)
}

pub fn dg1_with(psi: &UnimodalMap, omega: &RotationNumber, v: &QPFn, tol_sigma: f64) -> Result<TrigPoly> {
    let cd = critical_data(psi, tol_sigma)?;
    let at0 = v.mode_values(0.0);
    let at1 = v.mode_values(1.0);
    let d0 = v.dx().mode_values(0.0);
    let coeffs = (0..at0.len())
        .map(|k| {
            let e1 = crate::qprenorm::cis(-omega.multiple(k as u64));
            let e2 = crate::qprenorm::cis(-omega.multiple(2 * k as u64));
            let dx = at0[k] * e2 * cd.dpsi1 + at1[k] * e1;
            (d0[k] + dx * cd.d2psi0) * cd.dpsi1
        })
        .collect();
    Ok(TrigPoly::new(coeffs))
}

/// `DG^_1(psi) u` for `psi` in `Sigma_1`.
pub fn dg1_hat(psi: &UnimodalMap, u: &AnalyticFn) -> Result<f64> {
    dg1_hat_with(psi, u, TOL_SIGMA1)
}

pub fn dg1_hat_with(psi: &UnimodalMap, u: &AnalyticFn, tol_sigma: f64) -> Result<f64> {
    let cd = critical_data(psi, tol_sigma)?;
    let du0 = u.derivative().eval_unchecked(0.0);
    let dx = cd.dpsi1 * u.eval_unchecked(0.0) + u.eval_unchecked(1.0);
    Ok(cd.dpsi1 * (du0 + cd.d2psi0 * dx))
}

/// Relative sup-norm gap between [`dg1`] and the central difference of
/// `G_1(psi + h v)` on the curve grid.
pub fn dg1_fd_check(psi: &UnimodalMap, omega: &RotationNumber, v: &QPFn, h: f64, opts: &CurveOptions) -> Result<f64> {
    let base = QPFn::from_analytic(psi.psi());
    let side = |s: f64| -> Result<Vec<f64>> {
        let f = QPFiber::new(&base.axpy(s * h, v));
        let c = solve_invariant_curve(&f, omega, 1, &[0.0], opts)?;
        Ok(g1(&f, omega, &c)?.values)
    };
    let (p, m) = (side(1.0)?, side(-1.0)?);
    let an = dg1(psi, omega, v)?.sample(opts.m);
    let scale = an.iter().fold(0.0, |a: f64, x| a.max(x.abs()));
    let gap = p
        .iter()
        .zip(&m)
        .zip(&an)
        .map(|((a, b), c)| ((a - b) / (2.0 * h) - c).abs())
        .fold(0.0, f64::max);
    Ok(gap / scale.max(f64::MIN_POSITIVE))
}

/// [`dg1`] guarded by the finite-difference oracle.
pub fn dg1_checked(psi: &UnimodalMap, omega: &RotationNumber, v: &QPFn, tol: f64) -> Result<TrigPoly> {
    let rel = dg1_fd_check(psi, omega, v, 1e-5, &CurveOptions::default())?;
    if rel > tol {
        return Err(Error::FormulaMismatch { rel });
    }
    dg1(psi, omega, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvedyn::trig::{extremum, ExtremumKind};
    use crate::funcspace::DomainConfig;
    use crate::renorm1d::{superstable_params, FamilySpec, Forcing};
    use std::f64::consts::PI;

    fn sigma1_map() -> UnimodalMap {
        let fam = FamilySpec::forced_logistic("flm", Forcing::cos(1));
        let s = superstable_params(&fam, 1).unwrap();
        fam.uncoupled(s[1], DomainConfig::default()).unwrap()
    }

    #[test]
    fn theta_independent_direction_matches_hat() {
        let psi = sigma1_map();
        let d = *psi.domain();
        let u = AnalyticFn::polynomial(d, &[0.1, 0.3, -0.2]);
        let p = dg1(&psi, &RotationNumber::golden(), &QPFn::from_analytic(&u)).unwrap();
        assert_eq!(p.degree(), 0);
        assert!((p.coeffs[0].re - dg1_hat(&psi, &u).unwrap()).abs() < 1e-14);
        // d/dh of the 2-cycle multiplier
        let h = 1e-6;
        let g = |s: f64| crate::curvedyn::g1_hat(&UnimodalMap::from_fn_unchecked(psi.psi().axpy(s * h, &u))).unwrap();
        let fd = (g(1.0) - g(-1.0)) / (2.0 * h);
        assert!((fd - p.coeffs[0].re).abs() < 1e-7 * fd.abs().max(1.0));
    }

    #[test]
    fn first_mode_in_first_mode_out() {
        let psi = sigma1_map();
        let d = *psi.domain();
        let v = QPFn::from_fn(d, |t: f64, x: f64| (1.0 + 0.2 * x) * (2.0 * PI * t).cos());
        let p = dg1(&psi, &RotationNumber::golden(), &v).unwrap();
        assert!(p.coeffs[1].norm() > 0.1);
        assert!(p.coeffs[0].norm() < 1e-15);
        assert!(p.coeffs[2..].iter().all(|c| c.norm() < 1e-14));
        let lo = extremum(&p, ExtremumKind::Min).value;
        let hi = extremum(&p, ExtremumKind::Max).value;
        assert!((lo + hi).abs() < 1e-12);
    }

    #[test]
    fn matches_finite_differences() {
        let psi = sigma1_map();
        let d = *psi.domain();
        let v = QPFn::from_fn(d, |t: f64, x: f64| x * (2.0 * PI * t).cos() + 0.5 * (1.0 - x * x) * (4.0 * PI * t).sin());
        let rel = dg1_fd_check(&psi, &RotationNumber::golden(), &v, 1e-5, &CurveOptions::default()).unwrap();
        assert!(rel < 1e-6, "{rel}");
    }

    #[test]
    fn outside_sigma1_is_rejected() {
        let psi = UnimodalMap::quadratic(DomainConfig::default(), 1.4);
        let v = QPFn::zeros(*psi.domain());
        assert!(dg1(&psi, &RotationNumber::golden(), &v).is_err());
    }
}

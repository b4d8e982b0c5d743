//! Quasi-periodic renormalization `T_omega(g)(theta, x) = g(theta + omega, g(theta, a x)) / a`
//! with `a = int_0^1 g(theta, 1) d theta`, and its derivative at uncoupled maps.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::funcspace::{cheb, compose_fiber, AnalyticFn, PairFn, QPFn};
use crate::renorm1d::{d_renormalize, d_renormalize_matrix, matmul, NodeFrame, UnimodalMap, TOL_A};
use crate::rotation::RotationNumber;

mod lomega;
mod section;

pub use lomega::{build_l_omega, rotation_matrix, spectrum_l_omega, LOmegaOperator, SpectrumReport};
pub use section::{apply_l_prime, gamma_normalize, section_gamma, SectionConfig};

/// Tolerance below which a base map counts as angle independent.
pub const TOL_THETA: f64 = 1e-12;

pub fn apply_t(g: &QPFn, omega: &RotationNumber) -> Result<QPFn> {
    let a = g.project_p0().eval_unchecked(1.0);
    if a.abs() < TOL_A {
        return Err(Error::DegenerateScaling { a });
    }
    Ok(compose_fiber(g, omega.to_f64(), g, a)?.scale(1.0 / a))
}

/// `DT_omega(base) v` at an angle-independent base, evaluated mode by mode
/// at the nodes: `DR(psi) c_0` and `L1 c_k + e^{2 pi i k omega} L2 c_k`.
pub fn apply_dt(base: &QPFn, omega: &RotationNumber, v: &QPFn) -> Result<QPFn> {
    if !base.is_theta_independent(TOL_THETA) {
        return Err(Error::UnsupportedBase);
    }
    let psi = UnimodalMap::from_fn_unchecked(base.project_p0());
    let fr = NodeFrame::new(&psi)?;
    let dom = *v.domain();
    let l = dom.half_width();
    let mut modes = Vec::with_capacity(v.n_fourier() + 1);
    modes.push(
        d_renormalize(&psi, &v.project_p0())?
            .coeffs()
            .iter()
            .map(|&c| Complex64::new(c, 0.0))
            .collect::<Vec<_>>(),
    );
    for k in 1..=v.n_fourier() {
        let (re, im) = v.mode_parts(k);
        let ph = cis(omega.multiple(k as u64));
        let at = |x: f64| Complex64::new(cheb::clenshaw(re.coeffs(), x / l), cheb::clenshaw(im.coeffs(), x / l));
        let vals: Vec<Complex64> = (0..fr.x.len())
            .map(|i| (at(fr.y[i]) * fr.dpsi_z[i] + ph * at(fr.z[i])) / fr.a)
            .collect();
        let cr = cheb::values_to_coeffs(&vals.iter().map(|c| c.re).collect::<Vec<_>>());
        let ci = cheb::values_to_coeffs(&vals.iter().map(|c| c.im).collect::<Vec<_>>());
        modes.push(cr.into_iter().zip(ci).map(|(a, b)| Complex64::new(a, b)).collect());
    }
    QPFn::from_modes(dom, modes)
}

pub(crate) fn cis(turns: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * turns)
}

/// Coefficient-space matrices of `DR(psi)`, `L1` and `L2` at an uncoupled map.
#[derive(Clone, Debug)]
pub struct DtOperator {
    psi: UnimodalMap,
    n: usize,
    dr: Vec<f64>,
    l1: Vec<f64>,
    l2: Vec<f64>,
}

impl DtOperator {
    pub fn new(psi: &UnimodalMap) -> Result<Self> {
        let fr = NodeFrame::new(psi)?;
        let dom = psi.domain();
        let n = dom.n_cheb;
        let l = dom.half_width();
        let mut v1 = vec![0.0; n * n];
        let mut v2 = vec![0.0; n * n];
        for i in 0..n {
            let ty = cheb::basis_values(n, fr.y[i] / l);
            let tz = cheb::basis_values(n, fr.z[i] / l);
            for j in 0..n {
                v1[i * n + j] = fr.dpsi_z[i] * ty[j] / fr.a;
                v2[i * n + j] = tz[j] / fr.a;
            }
        }
        let t = cheb::transform_matrix(n);
        Ok(DtOperator {
            psi: psi.clone(),
            n,
            dr: d_renormalize_matrix(psi)?,
            l1: matmul(&t, &v1, n),
            l2: matmul(&t, &v2, n),
        })
    }

    pub fn psi(&self) -> &UnimodalMap {
        &self.psi
    }

    pub fn l1(&self) -> &[f64] {
        &self.l1
    }

    pub fn l2(&self) -> &[f64] {
        &self.l2
    }

    pub fn dr(&self) -> &[f64] {
        &self.dr
    }

    fn mv(&self, m: &[f64], x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n).map(|i| m[i * n..(i + 1) * n].iter().zip(x).map(|(p, q)| p * q).sum()).collect()
    }

    pub fn apply_dr(&self, u: &AnalyticFn) -> AnalyticFn {
        AnalyticFn::from_coeffs(*u.domain(), self.mv(&self.dr, u.coeffs())).expect("length")
    }

    /// `L_phase (u, v)` in the rotation coordinates `c_k = (u + i v) / 2`.
    pub fn apply_pair(&self, phase: f64, p: &PairFn) -> PairFn {
        let (s, c) = (2.0 * std::f64::consts::PI * phase).sin_cos();
        let l1u = self.mv(&self.l1, p.u.coeffs());
        let l1v = self.mv(&self.l1, p.v.coeffs());
        let l2u = self.mv(&self.l2, p.u.coeffs());
        let l2v = self.mv(&self.l2, p.v.coeffs());
        let dom = *p.domain();
        let u: Vec<f64> = (0..self.n).map(|i| l1u[i] + c * l2u[i] - s * l2v[i]).collect();
        let v: Vec<f64> = (0..self.n).map(|i| l1v[i] + s * l2u[i] + c * l2v[i]).collect();
        PairFn::from_vec(dom, &[u, v].concat())
    }

    /// Matrix route for `DT_omega(psi) v`.
    pub fn apply(&self, omega: &RotationNumber, v: &QPFn) -> QPFn {
        let dom = *v.domain();
        let mut modes = Vec::with_capacity(v.n_fourier() + 1);
        let c0 = self.apply_dr(&v.project_p0());
        modes.push(c0.coeffs().iter().map(|&c| Complex64::new(c, 0.0)).collect());
        for k in 1..=v.n_fourier() {
            let p = l_coords(v, k);
            let w = self.apply_pair(omega.multiple(k as u64), &p);
            modes.push(
                w.u.coeffs()
                    .iter()
                    .zip(w.v.coeffs())
                    .map(|(&a, &b)| Complex64::new(0.5 * a, 0.5 * b))
                    .collect(),
            );
        }
        QPFn::from_modes(dom, modes).expect("shape")
    }
}

/// Rotation coordinates of mode `k`: `u = 2 Re c_k`, `v = 2 Im c_k`, so the
/// mode reads `u cos(2 pi k theta) - v sin(2 pi k theta)`.
pub fn l_coords(f: &QPFn, k: usize) -> PairFn {
    let (re, im) = f.mode_parts(k);
    PairFn::new(re.scale(2.0), im.scale(2.0))
}

/// Inverse of [`l_coords`].
pub fn embed_l(k: usize, p: &PairFn) -> Result<QPFn> {
    QPFn::from_pair(k, &PairFn::new(p.u.clone(), p.v.scale(-1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::DomainConfig;
    use crate::renorm1d::{renormalize_1d, solve_fixed_point};
    use std::f64::consts::PI;

    fn phi() -> UnimodalMap {
        solve_fixed_point(&UnimodalMap::quadratic(DomainConfig::default(), 1.4), 40).unwrap().phi
    }

    #[test]
    fn uncoupled_reduction() {
        let psi = UnimodalMap::quadratic(DomainConfig::default(), 1.45);
        let g = QPFn::from_analytic(psi.psi());
        let t = apply_t(&g, &RotationNumber::golden()).unwrap();
        let r = renormalize_1d(&psi).unwrap();
        assert!(t.is_theta_independent(1e-14));
        assert!(t.project_p0().sub(r.psi()).sup_norm() < 1e-12);
    }

    #[test]
    fn taylor_and_central_difference() {
        let phi = phi();
        let d = *phi.domain();
        let w = RotationNumber::golden();
        let base = QPFn::from_analytic(phi.psi());
        let v = QPFn::from_fn(d, |t: f64, x: f64| x * (2.0 * PI * t).cos());
        let dt = apply_dt(&base, &w, &v).unwrap();
        let h = 1e-6;
        let p = apply_t(&base.axpy(h, &v), &w).unwrap();
        let m = apply_t(&base.axpy(-h, &v), &w).unwrap();
        let fd = p.sub(&m).scale(0.5 / h);
        assert!(fd.sub(&dt).sup_norm() < 1e-8);

        let c = QPFn::from_fn(d, |t: f64, _| (2.0 * PI * t).cos());
        let first = apply_t(&base.axpy(1e-6, &c), &w).unwrap();
        let lin = base.axpy(1e-6, &apply_dt(&base, &w, &c).unwrap());
        assert!(first.sub(&lin).sup_norm() < 1e-11);
    }

    #[test]
    fn matrix_route_agrees() {
        let phi = phi();
        let d = *phi.domain();
        let w = RotationNumber::golden();
        let v = QPFn::from_fn(d, |t: f64, x: f64| x * x * (2.0 * PI * t).sin() + (1.0 - x) * (6.0 * PI * t).cos() + 0.3 * x);
        let a = apply_dt(&QPFn::from_analytic(phi.psi()), &w, &v).unwrap();
        let b = DtOperator::new(&phi).unwrap().apply(&w, &v);
        assert!(a.sub(&b).norm_l2() < 1e-12);
    }

    #[test]
    fn theta_dependent_base_rejected() {
        let d = DomainConfig::default();
        let g = QPFn::from_fn(d, |t: f64, x: f64| 1.0 - 1.4 * x * x + 1e-3 * (2.0 * PI * t).cos());
        assert!(matches!(apply_dt(&g, &RotationNumber::golden(), &g), Err(Error::UnsupportedBase)));
    }

    #[test]
    fn coordinates_roundtrip() {
        let d = DomainConfig::default();
        let p = PairFn::new(AnalyticFn::polynomial(d, &[1.0, 0.5]), AnalyticFn::polynomial(d, &[0.0, 0.0, 2.0]));
        let f = embed_l(3, &p).unwrap();
        assert!(l_coords(&f, 3).sub(&p).norm_l2() < 1e-15);
        let t = 0.13;
        let want = p.u.eval_unchecked(0.4) * (6.0 * PI * t).cos() - p.v.eval_unchecked(0.4) * (6.0 * PI * t).sin();
        assert!((f.eval(t, 0.4).unwrap() - want).abs() < 1e-14);
    }
}

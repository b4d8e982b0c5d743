use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{d_renormalize_matrix, renormalize_1d, UnimodalMap};
use crate::error::{Error, Result};
use crate::funcspace::{AnalyticFn, DomainConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { max_iter: 50, tol: 1e-10 }
    }
}

/// Feigenbaum fixed point `Phi` with the spectral data of `DR(Phi)`.
#[derive(Clone, Debug)]
pub struct FixedPointData {
    pub phi: UnimodalMap,
    pub a_star: f64,
    pub delta_feig: f64,
    pub e_unstable: AnalyticFn,
    pub newton_residual: f64,
    pub newton_iters: usize,
    /// Eigenvalues of `DR(Phi)` on the even, `h(0) = 0` subspace, by decreasing modulus.
    pub spectrum: Vec<Complex64>,
}

impl FixedPointData {
    /// `|lambda_2| / delta`.
    pub fn spectral_gap(&self) -> f64 {
        self.spectrum.get(1).map_or(0.0, |z| z.norm()) / self.delta_feig
    }

    pub fn n_unstable(&self) -> usize {
        self.spectrum.iter().filter(|z| z.norm() > 1.0).count()
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Wire<'a> {
            phi: serde_json::Value,
            e_unstable: serde_json::Value,
            a_star: f64,
            delta_feig: f64,
            newton_residual: f64,
            spectrum_re: Vec<f64>,
            spectrum_im: Vec<f64>,
            #[serde(skip)]
            _p: std::marker::PhantomData<&'a ()>,
        }
        let w = Wire {
            phi: serde_json::from_str(&self.phi.psi().to_json()).expect("valid json"),
            e_unstable: serde_json::from_str(&self.e_unstable.to_json()).expect("valid json"),
            a_star: self.a_star,
            delta_feig: self.delta_feig,
            newton_residual: self.newton_residual,
            spectrum_re: self.spectrum.iter().map(|z| z.re).collect(),
            spectrum_im: self.spectrum.iter().map(|z| z.im).collect(),
            _p: std::marker::PhantomData,
        };
        serde_json::to_string_pretty(&w).expect("serializable")
    }
}

/// Even basis with `b_j(0) = 0`: `b_j = T_{2j}(x / L) - T_{2j}(0)`, `j = 1..=J`.
fn basis_size(n: usize) -> usize {
    (n - 1) / 2
}

fn from_unknowns(domain: DomainConfig, c: &[f64]) -> AnalyticFn {
    let mut coeffs = vec![0.0; domain.n_cheb];
    coeffs[0] = 1.0;
    for (j, &cj) in c.iter().enumerate() {
        let k = 2 * (j + 1);
        coeffs[k] = cj;
        coeffs[0] -= cj * if (j + 1) % 2 == 0 { 1.0 } else { -1.0 };
    }
    AnalyticFn::from_coeffs(domain, coeffs).expect("length")
}

fn to_unknowns(f: &AnalyticFn) -> Vec<f64> {
    (1..=basis_size(f.coeffs().len())).map(|j| f.coeffs()[2 * j]).collect()
}

/// Restriction of a coefficient-space matrix to the even basis.
fn restrict(mat: &[f64], n: usize) -> DMatrix<f64> {
    let jn = basis_size(n);
    DMatrix::from_fn(jn, jn, |r, c| {
        let col = 2 * (c + 1);
        let sign = if (c + 1) % 2 == 0 { 1.0 } else { -1.0 };
        // column of b_c = e_{2c} - sign e_0
        mat[2 * (r + 1) * n + col] - sign * mat[2 * (r + 1) * n]
    })
}

/// Newton iteration for `R(psi) = psi` in the even, `psi(0) = 1` class,
/// followed by the eigen-decomposition of `DR(Phi)`.
pub fn solve_fixed_point(initial: &UnimodalMap, n_cheb: usize) -> Result<FixedPointData> {
    solve_fixed_point_with(initial, n_cheb, NewtonOptions::default())
}

pub fn solve_fixed_point_with(initial: &UnimodalMap, n_cheb: usize, opts: NewtonOptions) -> Result<FixedPointData> {
    let domain = initial.domain().with_n_cheb(n_cheb);
    domain.validate()?;
    let start = AnalyticFn::from_fn(domain, |x| initial.eval(x)).even_part();
    let mut c = to_unknowns(&start);
    let mut residual = f64::INFINITY;
    let mut iters = 0;
    while iters < opts.max_iter {
        let psi = UnimodalMap::from_fn_unchecked(from_unknowns(domain, &c));
        let r = renormalize_1d(&psi)?.psi().sub(psi.psi());
        let rvec = DVector::from_vec(to_unknowns(&r));
        residual = r.sup_norm();
        if residual <= opts.tol * 1e-3 {
            break;
        }
        let dr = d_renormalize_matrix(&psi)?;
        let jac = restrict(&dr, n_cheb) - DMatrix::identity(c.len(), c.len());
        let step = jac.lu().solve(&rvec).ok_or(Error::NoConvergence { iters, residual })?;
        let step_norm = step.norm();
        for (ci, si) in c.iter_mut().zip(step.iter()) {
            *ci -= si;
        }
        iters += 1;
        if !residual.is_finite() {
            return Err(Error::NoConvergence { iters, residual });
        }
        if step_norm < 1e-15 {
            let psi = UnimodalMap::from_fn_unchecked(from_unknowns(domain, &c));
            residual = renormalize_1d(&psi)?.psi().sub(psi.psi()).sup_norm();
            break;
        }
    }
    if !(residual <= opts.tol) {
        return Err(Error::NoConvergence { iters, residual });
    }
    let phi = UnimodalMap::from_fn_unchecked(from_unknowns(domain, &c));
    let newton_residual = renormalize_1d(&phi)?.psi().sub(phi.psi()).sup_norm();

    let a_mat = restrict(&d_renormalize_matrix(&phi)?, n_cheb);
    let mut spectrum: Vec<Complex64> = a_mat.complex_eigenvalues().iter().copied().collect();
    spectrum.sort_by(|p, q| q.norm().total_cmp(&p.norm()));
    let lead = spectrum[0];
    if lead.im.abs() > 1e-8 * lead.norm() {
        return Err(Error::Inconsistency { what: "leading eigenvalue is not real", a: lead.re, b: lead.im });
    }
    let delta = lead.re;
    let shifted = &a_mat - DMatrix::identity(c.len(), c.len()) * delta;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|p, q| p.1.total_cmp(q.1))
        .expect("nonempty");
    let ev: Vec<f64> = v_t.row(imin).iter().copied().collect();
    let mut e = from_unknowns(domain, &ev);
    // from_unknowns adds the constant 1; remove it so that e(0) = 0
    e.coeffs_mut()[0] -= 1.0;
    let norm = e.norm_l2();
    let sign = if e.eval_unchecked(1.0) < 0.0 { -1.0 } else { 1.0 };
    let e_unstable = e.scale(sign / norm);

    Ok(FixedPointData {
        a_star: phi.a(),
        phi,
        delta_feig: delta,
        e_unstable,
        newton_residual,
        newton_iters: iters,
        spectrum,
    })
}

/// Containment margins of `a W` and `Phi(a W)` inside the disc `W`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct H0Report {
    pub n_boundary: usize,
    pub margin_scaled: f64,
    pub margin_image: f64,
}

impl H0Report {
    pub fn passes(&self) -> bool {
        self.margin_scaled > 0.0 && self.margin_image > 0.0
    }
}

pub fn check_h0(fp: &FixedPointData, n_boundary: usize) -> H0Report {
    let d = fp.phi.domain();
    check_h0_with(fp.phi.psi(), fp.a_star, d.w_center, d.w_radius, n_boundary)
}

/// Same test for an arbitrary disc and scaling.
pub fn check_h0_with(phi: &AnalyticFn, a: f64, center: f64, radius: f64, n_boundary: usize) -> H0Report {
    let series = phi.chopped(1e-15);
    let c = Complex64::new(center, 0.0);
    let mut far_scaled: f64 = 0.0;
    let mut far_image: f64 = 0.0;
    for k in 0..n_boundary {
        let t = 2.0 * std::f64::consts::PI * k as f64 / n_boundary as f64;
        let z = c + Complex64::from_polar(radius, t);
        let w = z * a;
        far_scaled = far_scaled.max((w - c).norm());
        far_image = far_image.max((series.eval_complex(w) - c).norm());
    }
    H0Report { n_boundary, margin_scaled: radius - far_scaled, margin_image: radius - far_image }
}

/// `J = DR(psi) - I` restricted to the even basis, exposed for tests.
#[cfg(test)]
pub(crate) fn even_jacobian(psi: &UnimodalMap) -> DMatrix<f64> {
    let n = psi.domain().n_cheb;
    restrict(&d_renormalize_matrix(psi).unwrap(), n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renorm1d::matvec;

    fn solve(n: usize) -> FixedPointData {
        let init = UnimodalMap::quadratic(DomainConfig::default(), 1.4);
        solve_fixed_point(&init, n).unwrap()
    }

    #[test]
    fn fixed_point_and_delta() {
        let fp = solve(40);
        assert!(fp.newton_residual <= 1e-10, "{}", fp.newton_residual);
        assert!((fp.delta_feig - 4.669_201_609).abs() < 5e-5, "{}", fp.delta_feig);
        assert_eq!(fp.n_unstable(), 1);
        assert!((fp.phi.eval(0.0) - 1.0).abs() < 1e-14);
        assert!(fp.e_unstable.eval_unchecked(0.0).abs() < 1e-13);
        assert!(fp.e_unstable.eval_unchecked(1.0) > 0.0);
        assert!(super::super::in_domain_r(&fp.phi).passes());
    }

    #[test]
    fn higher_order_solve_agrees() {
        let a = solve(40);
        let b = solve(60);
        assert!((a.a_star - b.a_star).abs() < 1e-12, "{} vs {}", a.a_star, b.a_star);
        assert!((a.a_star + 0.399_535_26).abs() < 1e-7);
    }

    #[test]
    fn eigenvector_is_eigenvector() {
        let fp = solve(40);
        let dr = d_renormalize_matrix(&fp.phi).unwrap();
        let image = matvec(&dr, fp.e_unstable.coeffs());
        for (x, y) in image.iter().zip(fp.e_unstable.coeffs()) {
            assert!((x - fp.delta_feig * y).abs() < 1e-9);
        }
        let _ = even_jacobian(&fp.phi);
    }

    #[test]
    fn h0_margins() {
        let fp = solve(40);
        let r = check_h0(&fp, 512);
        assert!(r.passes(), "{r:?}");
        let id = check_h0_with(fp.phi.psi(), 1.0, 0.2, 1.5, 512);
        assert!(id.margin_scaled.abs() < 1e-12);
        let m: Vec<f64> = [1.5, 1.4, 1.3]
            .iter()
            .map(|&r| check_h0_with(fp.phi.psi(), fp.a_star, 0.2, r, 512).margin_scaled)
            .collect();
        assert!(m[0] > m[1] && m[1] > m[2]);
    }
}

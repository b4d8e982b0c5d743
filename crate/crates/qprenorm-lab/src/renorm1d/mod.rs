//! One-dimensional doubling renormalization `R(psi)(x) = psi(psi(a x)) / a`,
//! `a = psi(1)`, on even unimodal maps normalized by `psi(0) = 1`.

use crate::error::{Error, Result};
use crate::funcspace::{cheb, AnalyticFn, DomainConfig};

mod cascade;
mod family;
mod fixed_point;

pub use cascade::{
    classify_escape, stable_manifold_param, superstable_params, unstable_manifold_points, Escape,
    StableManifoldParam, UnstableManifold,
};
pub use family::{FamilyKind, FamilySpec, Forcing, ForcingTerm, PhysicalFiber, Trig};
pub use fixed_point::{check_h0, check_h0_with, solve_fixed_point, FixedPointData, H0Report, NewtonOptions};

/// Smallest admissible `|a|` before the rescaling is declared degenerate.
pub const TOL_A: f64 = 1e-8;

/// Even unimodal map `psi` with `psi(0) = 1`, and the cached scaling `a = psi(1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnimodalMap {
    psi: AnalyticFn,
    a: f64,
}

/// Result of the sampled membership test for the normalized unimodal class.
#[derive(Clone, Debug, PartialEq)]
pub struct Membership {
    pub center_defect: f64,
    pub monotonicity_ok: bool,
    pub self_map_ok: bool,
}

impl Membership {
    pub fn passes(&self) -> bool {
        self.center_defect <= 1e-10 && self.monotonicity_ok && self.self_map_ok
    }
}

impl UnimodalMap {
    /// Wraps `psi`, checking the normalization and the unimodal shape.
    pub fn new(psi: AnalyticFn) -> Result<Self> {
        let m = Self::from_fn_unchecked(psi.clone()).membership();
        if m.center_defect > 1e-10 {
            return Err(Error::Invalid(format!("psi(0) differs from 1 by {:e}", m.center_defect)));
        }
        if !m.monotonicity_ok {
            return Err(Error::Invalid("x psi'(x) < 0 fails on the sample grid".into()));
        }
        if !m.self_map_ok {
            return Err(Error::Invalid("psi does not map the interval into itself".into()));
        }
        Ok(Self::from_fn_unchecked(psi))
    }

    pub fn from_fn_unchecked(psi: AnalyticFn) -> Self {
        let a = psi.eval_unchecked(1.0);
        UnimodalMap { psi, a }
    }

    /// `1 - mu x^2`.
    pub fn quadratic(domain: DomainConfig, mu: f64) -> Self {
        Self::from_fn_unchecked(AnalyticFn::polynomial(domain, &[1.0, 0.0, -mu]))
    }

    pub fn psi(&self) -> &AnalyticFn {
        &self.psi
    }

    pub fn domain(&self) -> &DomainConfig {
        self.psi.domain()
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.psi.eval_unchecked(x)
    }

    /// Critical orbit `psi^k(0)`, `k = 0..=steps`.
    pub fn critical_orbit(&self, steps: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(steps + 1);
        let mut x = 0.0;
        out.push(x);
        for _ in 0..steps {
            x = self.eval(x);
            out.push(x);
        }
        out
    }

    /// `psi^{2^j}(0)`, which vanishes exactly on `Sigma_j`.
    pub fn sigma_residual(&self, j: usize) -> f64 {
        let mut x = 0.0;
        for _ in 0..(1usize << j) {
            x = self.eval(x);
        }
        x
    }

    pub fn membership(&self) -> Membership {
        let l = self.domain().half_width();
        let d = self.psi.derivative();
        let mut monotone = true;
        let mut self_map = true;
        for t in cheb::lobatto::<f64>(4 * self.domain().n_cheb) {
            let x = t * l;
            if x.abs() > 1e-3 && x * d.eval_unchecked(x) >= 0.0 {
                monotone = false;
            }
            if !self.domain().contains(self.eval(x)) {
                self_map = false;
            }
        }
        Membership { center_defect: (self.eval(0.0) - 1.0).abs(), monotonicity_ok: monotone, self_map_ok: self_map }
    }

    pub fn sub_sup(&self, other: &UnimodalMap) -> f64 {
        self.psi.sub(&other.psi).sup_norm()
    }
}

/// Clauses of the renormalization domain and their margins (positive = satisfied).
#[derive(Clone, Debug, PartialEq)]
pub struct DomainReport {
    pub a: f64,
    pub a_prime: f64,
    pub b_prime: f64,
    pub psi_b_prime: f64,
    pub clauses: Vec<(&'static str, f64)>,
}

impl DomainReport {
    pub fn passes(&self) -> bool {
        self.clauses.iter().all(|&(_, m)| m > 0.0)
    }

    pub fn failing(&self) -> Option<&'static str> {
        self.clauses.iter().find(|&&(_, m)| !(m > 0.0)).map(|&(c, _)| c)
    }
}

/// Evaluates `a < 0`, `1 > b'`, `b' > -a'` and `psi(b') < -a'` with
/// `a' = (1 + delta_dom) a`, `b' = psi(a')`.
pub fn in_domain_r(psi: &UnimodalMap) -> DomainReport {
    let l = psi.domain().half_width();
    let a = psi.a();
    let a_prime = l * a;
    let b_prime = psi.eval(a_prime);
    let psi_b_prime = psi.eval(b_prime);
    let clauses = vec![
        ("a<0", -a),
        ("|a'|<=1+delta", l * (1.0 - a.abs()) + 64.0 * f64::EPSILON),
        ("1>b'", 1.0 - b_prime),
        ("b'>-a'", b_prime + a_prime),
        ("psi(b')<-a'", -a_prime - psi_b_prime),
    ];
    DomainReport { a, a_prime, b_prime, psi_b_prime, clauses }
}

/// `x -> psi(psi(a x)) / a`, re-expanded on the Chebyshev nodes.
pub fn renormalize_1d(psi: &UnimodalMap) -> Result<UnimodalMap> {
    let a = psi.a();
    if a.abs() < TOL_A {
        return Err(Error::DegenerateScaling { a });
    }
    let rep = in_domain_r(psi);
    if let Some(clause) = rep.failing() {
        return Err(Error::RenormDomain { clause });
    }
    Ok(renormalize_unchecked(psi))
}

pub(crate) fn renormalize_unchecked(psi: &UnimodalMap) -> UnimodalMap {
    let a = psi.a();
    let f = AnalyticFn::from_fn(*psi.domain(), |x| psi.eval(psi.eval(a * x)) / a);
    UnimodalMap::from_fn_unchecked(f)
}

/// Node data shared by the derivative operators at `psi`: `y = a x`, `z = psi(y)`.
pub(crate) struct NodeFrame {
    pub a: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub dpsi_y: Vec<f64>,
    pub dpsi_z: Vec<f64>,
    pub psi_z: Vec<f64>,
}

impl NodeFrame {
    pub fn new(psi: &UnimodalMap) -> Result<Self> {
        let a = psi.a();
        if a.abs() < TOL_A {
            return Err(Error::DegenerateScaling { a });
        }
        let dom = *psi.domain();
        let d = psi.psi().derivative();
        let x = AnalyticFn::<f64>::node_points(&dom);
        let y: Vec<f64> = x.iter().map(|&x| a * x).collect();
        let z: Vec<f64> = y.iter().map(|&y| psi.eval(y)).collect();
        for (&xi, &zi) in x.iter().zip(&z) {
            if !dom.contains(zi) {
                return Err(Error::CompositionDomain { theta: 0.0, x: xi, value: zi });
            }
        }
        Ok(NodeFrame {
            a,
            dpsi_y: y.iter().map(|&v| d.eval_unchecked(v)).collect(),
            dpsi_z: z.iter().map(|&v| d.eval_unchecked(v)).collect(),
            psi_z: z.iter().map(|&v| psi.eval(v)).collect(),
            x,
            y,
            z,
        })
    }
}

/// Frechet derivative of `R` at `psi` applied to `h`, including the variation of `a`.
pub fn d_renormalize(psi: &UnimodalMap, h: &AnalyticFn) -> Result<AnalyticFn> {
    let fr = NodeFrame::new(psi)?;
    let a = fr.a;
    let h1 = h.eval_unchecked(1.0);
    let vals: Vec<f64> = (0..fr.x.len())
        .map(|i| {
            (h.eval_unchecked(fr.z[i]) + fr.dpsi_z[i] * h.eval_unchecked(fr.y[i])) / a
                + h1 * (-fr.psi_z[i] / (a * a) + fr.dpsi_z[i] * fr.dpsi_y[i] * fr.x[i] / a)
        })
        .collect();
    Ok(AnalyticFn::from_node_values(*psi.domain(), &vals))
}

/// Dense matrix of `DR(psi)` on Chebyshev coefficients (row-major, `n x n`).
pub fn d_renormalize_matrix(psi: &UnimodalMap) -> Result<Vec<f64>> {
    let fr = NodeFrame::new(psi)?;
    let dom = psi.domain();
    let n = dom.n_cheb;
    let l = dom.half_width();
    let a = fr.a;
    let t1 = cheb::basis_values(n, 1.0 / l);
    let mut vals = vec![0.0; n * n];
    for i in 0..n {
        let tz = cheb::basis_values(n, fr.z[i] / l);
        let ty = cheb::basis_values(n, fr.y[i] / l);
        let w = -fr.psi_z[i] / (a * a) + fr.dpsi_z[i] * fr.dpsi_y[i] * fr.x[i] / a;
        for j in 0..n {
            vals[i * n + j] = (tz[j] + fr.dpsi_z[i] * ty[j]) / a + t1[j] * w;
        }
    }
    Ok(matmul(&cheb::transform_matrix(n), &vals, n))
}

pub(crate) fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

#[cfg(test)]
pub(crate) fn matvec(a: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..a.len() / n).map(|i| a[i * n..(i + 1) * n].iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom() -> DomainConfig {
        DomainConfig::default()
    }

    #[test]
    fn domain_examples() {
        let r = in_domain_r(&UnimodalMap::quadratic(dom(), 0.1));
        assert!(!r.passes());
        assert_eq!(r.failing(), Some("a<0"));
        assert!((r.a - 0.9).abs() < 1e-14);

        let r = in_domain_r(&UnimodalMap::quadratic(dom(), 2.0));
        assert!((r.a + 1.0).abs() < 1e-14);
        assert!((r.a_prime + 1.1).abs() < 1e-14);
        assert!(!r.passes());
        assert_eq!(r.failing(), Some("b'>-a'"));
    }

    #[test]
    fn quadratic_renormalizes_to_quartic() {
        let mu = 1.4;
        let psi = UnimodalMap::quadratic(dom(), mu);
        let r = renormalize_1d(&psi).unwrap();
        let a = 1.0 - mu;
        for x in [0.0, 0.3, -0.8, 1.05] {
            let y: f64 = 1.0 - mu * (a * x) * (a * x);
            let want = (1.0 - mu * y * y) / a;
            assert!((r.eval(x) - want).abs() < 1e-13);
        }
        assert!((r.eval(0.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let psi = UnimodalMap::quadratic(dom(), 1.4);
        let h = AnalyticFn::polynomial(dom(), &[0.0, 0.0, 0.3, 0.0, -0.2]);
        let d = d_renormalize(&psi, &h).unwrap();
        let eps = 1e-6;
        let p = UnimodalMap::from_fn_unchecked(psi.psi().axpy(eps, &h));
        let m = UnimodalMap::from_fn_unchecked(psi.psi().axpy(-eps, &h));
        let fd = renormalize_1d(&p).unwrap().psi().sub(renormalize_1d(&m).unwrap().psi()).scale(0.5 / eps);
        assert!(fd.sub(&d).sup_norm() < 1e-8);

        let mat = d_renormalize_matrix(&psi).unwrap();
        let via_mat = matvec(&mat, h.coeffs());
        for (a, b) in via_mat.iter().zip(d.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_scaling() {
        let psi = UnimodalMap::quadratic(dom(), 1.0);
        assert!(matches!(renormalize_1d(&psi), Err(Error::DegenerateScaling { .. })));
    }
}

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::DtOperator;
use crate::error::Result;
use crate::funcspace::PairFn;
use crate::renorm1d::UnimodalMap;
use crate::rotation::RotationNumber;

/// `L_{k omega} = diag(L1, L1) + rot(2 pi k omega) (x) L2` on `[u; v]` coefficients.
#[derive(Clone, Debug)]
pub struct LOmegaOperator {
    pub base_psi: UnimodalMap,
    pub omega: RotationNumber,
    pub k: usize,
    pub matrix: DMatrix<f64>,
}

pub fn build_l_omega(psi: &UnimodalMap, omega: &RotationNumber, k: usize) -> Result<LOmegaOperator> {
    let op = DtOperator::new(psi)?;
    Ok(LOmegaOperator {
        base_psi: psi.clone(),
        omega: *omega,
        k,
        matrix: l_matrix(&op, omega.multiple(k as u64)),
    })
}

pub(crate) fn l_matrix(op: &DtOperator, phase: f64) -> DMatrix<f64> {
    let n = op.psi().domain().n_cheb;
    let (s, c) = (2.0 * std::f64::consts::PI * phase).sin_cos();
    let l1 = DMatrix::from_row_slice(n, n, op.l1());
    let l2 = DMatrix::from_row_slice(n, n, op.l2());
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&(&l1 + &l2 * c));
    m.view_mut((0, n), (n, n)).copy_from(&(&l2 * (-s)));
    m.view_mut((n, 0), (n, n)).copy_from(&(&l2 * s));
    m.view_mut((n, n), (n, n)).copy_from(&(&l1 + &l2 * c));
    m
}

/// `R_gamma = rot(2 pi gamma)` acting on `[u; v]` blocks of size `n`.
pub fn rotation_matrix(gamma: f64, n: usize) -> DMatrix<f64> {
    let (s, c) = (2.0 * std::f64::consts::PI * gamma).sin_cos();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(i, i)] = c;
        m[(i, n + i)] = -s;
        m[(n + i, i)] = s;
        m[(n + i, n + i)] = c;
    }
    m
}

impl LOmegaOperator {
    pub fn apply(&self, p: &PairFn) -> PairFn {
        let x = nalgebra::DVector::from_vec(p.to_vec());
        PairFn::from_vec(*p.domain(), (&self.matrix * x).as_slice())
    }

    pub fn spectrum(&self) -> SpectrumReport {
        spectrum_l_omega(self)
    }
}

#[derive(Clone, Debug)]
pub struct SpectrumReport {
    /// Sorted by decreasing modulus.
    pub eigenvalues: Vec<Complex64>,
    pub spectral_radius: f64,
    /// Largest distance from an eigenvalue to its matched partner near its conjugate.
    pub worst_pair_defect: f64,
    pub unmatched: usize,
    pub pairing_ok: bool,
}

/// Eigenvalues below `TOL_SPEC` times the spectral radius form the numerical
/// zero cluster of the compact operator and are not paired.
pub const TOL_SPEC: f64 = 1e-6;

/// Every eigenvalue outside the zero cluster must be matched to a distinct
/// partner close to its conjugate: a conjugate pair, or a second copy of a real one.
pub fn spectrum_l_omega(op: &LOmegaOperator) -> SpectrumReport {
    let mut ev: Vec<Complex64> = op.matrix.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let radius = ev.first().map_or(0.0, |z| z.norm());
    let big: Vec<Complex64> = ev.iter().copied().filter(|z| z.norm() > TOL_SPEC * radius).collect();
    let mut used = vec![false; big.len()];
    let mut worst: f64 = 0.0;
    let mut unmatched = 0;
    for i in 0..big.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let target = big[i].conj();
        let best = (0..big.len())
            .filter(|&j| !used[j])
            .min_by(|&p, &q| (big[p] - target).norm().total_cmp(&(big[q] - target).norm()));
        match best {
            Some(j) => {
                let d = (big[j] - target).norm();
                // near-double eigenvalues split at the sqrt(eps) scale
                let tol = 1e-6 * big[i].norm() + f64::EPSILON.sqrt() * radius;
                if d > tol {
                    unmatched += 1;
                }
                worst = worst.max(d);
                used[j] = true;
            }
            None => unmatched += 1,
        }
    }
    SpectrumReport { eigenvalues: ev, spectral_radius: radius, worst_pair_defect: worst, unmatched, pairing_ok: unmatched == 0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::DomainConfig;
    use crate::renorm1d::solve_fixed_point;

    fn phi() -> UnimodalMap {
        solve_fixed_point(&UnimodalMap::quadratic(DomainConfig::default(), 1.4), 40).unwrap().phi
    }

    #[test]
    fn zero_and_quarter_rotation() {
        let phi = phi();
        let n = phi.domain().n_cheb;
        let op = DtOperator::new(&phi).unwrap();
        let l1 = DMatrix::from_row_slice(n, n, op.l1());
        let l2 = DMatrix::from_row_slice(n, n, op.l2());
        let m0 = build_l_omega(&phi, &RotationNumber::from_bits(0), 1).unwrap().matrix;
        assert!((m0.view((0, 0), (n, n)) - (&l1 + &l2)).norm() < 1e-14);
        assert!(m0.view((0, n), (n, n)).norm() == 0.0);
        let q = build_l_omega(&phi, &RotationNumber::from_ratio(1, 4).unwrap(), 1).unwrap().matrix;
        assert!((q.view((0, n), (n, n)) + &l2).norm() < 1e-14);
        assert!((q.view((n, 0), (n, n)) - &l2).norm() < 1e-14);
        assert!((q.view((0, 0), (n, n)) - &l1).norm() < 1e-14);
    }

    #[test]
    fn commutes_with_rotations() {
        let phi = phi();
        let n = phi.domain().n_cheb;
        let op = build_l_omega(&phi, &RotationNumber::golden(), 1).unwrap();
        for g in [0.1, 0.37, 0.81] {
            let r = rotation_matrix(g, n);
            let c = &op.matrix * &r - &r * &op.matrix;
            assert!(c.amax() < 1e-12, "{}", c.amax());
        }
    }

    #[test]
    fn spectrum_pairs_and_conjugates() {
        let phi = phi();
        let w = RotationNumber::golden();
        let s = build_l_omega(&phi, &w, 1).unwrap().spectrum();
        assert!(s.pairing_ok, "{s:?}");
        let minus = RotationNumber::from_bits(w.bits().wrapping_neg());
        let t = build_l_omega(&phi, &minus, 1).unwrap().spectrum();
        for z in s.eigenvalues.iter().filter(|z| z.norm() > 1e-3) {
            let d = t.eigenvalues.iter().map(|y| (y - z.conj()).norm()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-8 * s.spectral_radius, "{z} {d}");
        }
        let z = build_l_omega(&phi, &RotationNumber::from_bits(0), 1).unwrap().spectrum();
        assert!(z.pairing_ok, "{z:?}");
    }
}

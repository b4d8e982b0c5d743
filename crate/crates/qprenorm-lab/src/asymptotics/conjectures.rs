use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{diophantine_gate, slope_runs, EquivalenceFit};
use crate::curvedyn::{FixedPointTail, SlopeMode, SlopeOptions};
use crate::error::{Error, Result};
use crate::funcspace::{AnalyticFn, PairFn};
use crate::qprenorm::{apply_l_prime, DtOperator, SectionConfig};
use crate::renorm1d::FamilySpec;
use crate::rotation::{RotationNumber, GOLDEN_FRAC};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct H3Report {
    /// `(n, || v~_{n-1} / ||v~_{n-1}|| - v_{n-1} / ||v_{n-1}|| ||)`.
    pub direction_gaps: Vec<(usize, f64)>,
    pub fit: EquivalenceFit,
    /// `min_n ||v_{n-1}||`.
    pub c_floor: f64,
    /// `min_n |m(DG_1(omega_{n-1}, f*_1, v_{n-1} / ||v_{n-1}||))|`.
    pub c0_floor: f64,
    /// `(n, |q_n(exact) - q_n(fixed)|)`.
    pub quotient_gaps: Vec<(usize, f64)>,
    pub pass: bool,
}

/// Exact-orbit and fixed-point recurrences side by side for `n = 1..=n_max`.
pub fn check_h3(
    c: &FamilySpec,
    omega0: &RotationNumber,
    n_max: usize,
    tail: &FixedPointTail,
    opts: &SlopeOptions,
) -> Result<H3Report> {
    diophantine_gate(omega0)?;
    let tail = tail.retarget(c, opts.domain)?;
    let ex = slope_runs(c, omega0, 1..=n_max, SlopeMode::ExactOrbit, None, opts)?;
    let fp = slope_runs(c, omega0, 1..=n_max, SlopeMode::FixedPoint, Some(&tail), opts)?;
    let mut direction_gaps = Vec::with_capacity(n_max);
    let (mut c_floor, mut c0_floor) = (f64::INFINITY, f64::INFINITY);
    for (e, f) in ex.iter().zip(&fp) {
        let (ve, vf) = (e.v_last(), f.v_last());
        direction_gaps.push((e.n, ve.scale(1.0 / ve.norm_l2()).sub(&vf.scale(1.0 / vf.norm_l2())).norm_l2()));
        c_floor = c_floor.min(vf.norm_l2());
        c0_floor = c0_floor.min(f.normalized_min().abs());
    }
    let quotient_gaps = (1..n_max)
        .map(|i| {
            let qe = ex[i].alpha_prime / ex[i - 1].alpha_prime;
            let qf = fp[i].alpha_prime / fp[i - 1].alpha_prime;
            (i + 1, (qe - qf).abs())
        })
        .collect();
    let fit = EquivalenceFit::from_differences(&direction_gaps)?;
    let pass = fit.passes() && c_floor > 0.0 && c0_floor > 0.0;
    Ok(H3Report { direction_gaps, fit, c_floor, c0_floor, quotient_gaps, pass })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairNorm {
    /// Euclidean norm of the Chebyshev coefficients of `(u, v)`.
    L2,
    /// `sup_x sqrt(u^2 + v^2)` on a uniform grid, the sup over `theta` of the mode.
    GridSup,
}

const SUP_GRID: usize = 513;

pub fn pair_norm(p: &PairFn, norm: PairNorm) -> f64 {
    match norm {
        PairNorm::L2 => p.norm_l2(),
        PairNorm::GridSup => {
            let l = p.domain().half_width();
            (0..SUP_GRID)
                .map(|i| {
                    let x = -l + 2.0 * l * i as f64 / (SUP_GRID - 1) as f64;
                    p.u.eval_unchecked(x).hypot(p.v.eval_unchecked(x))
                })
                .fold(0.0, f64::max)
        }
    }
}

/// Second component of `L1'(omega, v) = (2 omega, L'_omega(v) / ||L'_omega(v)||)`.
pub fn l1_prime(op: &DtOperator, omega: &RotationNumber, v: &PairFn, section: &SectionConfig) -> Result<PairFn> {
    let (_, w) = apply_l_prime(op, omega.multiple(1), v, section)?;
    Ok(w.scale(1.0 / w.norm_l2()))
}

/// `||L1'(omega, u) - L1'(omega, v)|| / ||u - v||`; zero for identical inputs.
pub fn pair_ratio(
    op: &DtOperator,
    omega: &RotationNumber,
    u: &PairFn,
    v: &PairFn,
    section: &SectionConfig,
    norm: PairNorm,
) -> Result<f64> {
    let num = pair_norm(&l1_prime(op, omega, u, section)?.sub(&l1_prime(op, omega, v, section)?), norm);
    if num == 0.0 {
        return Ok(0.0);
    }
    Ok(num / pair_norm(&u.sub(v), norm))
}

/// `m` points `frac((j + omega_golden) / m)`.
pub fn omega_grid(m: usize) -> Vec<RotationNumber> {
    let g = RotationNumber::golden().to_f64();
    (0..m).map(|j| RotationNumber::from_f64((j as f64 + g) / m as f64)).collect()
}

#[derive(Clone, Debug)]
pub struct H4Options {
    pub n_pairs: usize,
    pub radius: f64,
    pub seed: u64,
    pub multi_steps: usize,
    pub section: SectionConfig,
}

impl Default for H4Options {
    fn default() -> Self {
        H4Options { n_pairs: 100, radius: 0.5, seed: 0, multi_steps: 8, section: SectionConfig::default() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct H4Report {
    /// `||L1'(w, e) - e||` of the centre after the power iteration.
    pub centre_residual: f64,
    pub max_ratio_l2: f64,
    pub max_ratio_sup: f64,
    pub pass_l2: bool,
    pub pass_sup: bool,
    /// Pairs dropped on a section degeneracy.
    pub skipped: usize,
    /// Images that left the candidate ball.
    pub v_violations: usize,
    pub evaluations: usize,
    /// Multi-step fit, run when the one-step bound fails.
    pub multi_step: Option<EquivalenceFit>,
    pub pass: bool,
}

/// Normalized dominant direction of `L'` at fixed `omega`, by power iteration on the section.
pub fn centre_direction(op: &DtOperator, omega: &RotationNumber, section: &SectionConfig) -> Result<(PairFn, f64)> {
    let d = *op.psi().domain();
    let mut v = PairFn::new(AnalyticFn::constant(d, 1.0), AnalyticFn::zeros(d));
    let mut res = f64::INFINITY;
    for _ in 0..2000 {
        let w = l1_prime(op, omega, &v, section)?;
        res = w.sub(&v).norm_l2();
        v = w;
        if res < 1e-13 {
            break;
        }
    }
    Ok((v, res))
}

fn sample_in_ball(rng: &mut ChaCha8Rng, centre: &PairFn, radius: f64, section: &SectionConfig) -> Result<PairFn> {
    let c = centre.to_vec();
    let dir: Vec<f64> = (0..c.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nd = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    let r = radius * rng.random::<f64>();
    let x: Vec<f64> = c.iter().zip(&dir).map(|(a, b)| a + r * b / nd).collect();
    let p = PairFn::from_vec(*centre.domain(), &x);
    // back onto the section and the unit sphere
    let g = crate::qprenorm::section_gamma(&p.u, &p.v.scale(-1.0), section)?;
    let p = p.rotate(2.0 * std::f64::consts::PI * g);
    Ok(p.scale(1.0 / p.norm_l2()))
}

/// Pairwise contraction of `L1'` on a ball around the dominant direction at golden `omega`.
pub fn check_h4(psi_op: &DtOperator, grid: &[RotationNumber], opts: &H4Options) -> Result<H4Report> {
    let sec = &opts.section;
    let (centre, centre_residual) = centre_direction(psi_op, &RotationNumber::from_bits(GOLDEN_FRAC), sec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut pairs = Vec::with_capacity(opts.n_pairs);
    let mut skipped = 0;
    for _ in 0..opts.n_pairs {
        match (sample_in_ball(&mut rng, &centre, opts.radius, sec), sample_in_ball(&mut rng, &centre, opts.radius, sec)) {
            (Ok(u), Ok(v)) => pairs.push((u, v)),
            _ => skipped += 1,
        }
    }
    // (ratio_l2, ratio_sup, violations) per pair, None on a degeneracy
    let per_pair: Vec<Option<(f64, f64, usize)>> = pairs
        .par_iter()
        .map(|(u, v)| {
            let (mut a, mut b, mut viol) = (0.0f64, 0.0f64, 0usize);
            for w in grid {
                let (lu, lv) = (l1_prime(psi_op, w, u, sec).ok()?, l1_prime(psi_op, w, v, sec).ok()?);
                let d = lu.sub(&lv);
                let du = u.sub(v);
                if pair_norm(&d, PairNorm::L2) > 0.0 {
                    a = a.max(pair_norm(&d, PairNorm::L2) / pair_norm(&du, PairNorm::L2));
                    b = b.max(pair_norm(&d, PairNorm::GridSup) / pair_norm(&du, PairNorm::GridSup));
                }
                viol += [&lu, &lv].iter().filter(|x| x.sub(&centre).norm_l2() > opts.radius).count();
            }
            Some((a, b, viol))
        })
        .collect();
    let mut max_ratio_l2 = 0.0f64;
    let mut max_ratio_sup = 0.0f64;
    let mut v_violations = 0;
    for r in &per_pair {
        match r {
            Some((a, b, v)) => {
                max_ratio_l2 = max_ratio_l2.max(*a);
                max_ratio_sup = max_ratio_sup.max(*b);
                v_violations += v;
            }
            None => skipped += 1,
        }
    }
    let pass_l2 = max_ratio_l2 < 1.0;
    let pass_sup = max_ratio_sup < 1.0;
    let multi_step = if pass_sup || pairs.is_empty() {
        None
    } else {
        Some(multi_step_fit(psi_op, &pairs, opts)?)
    };
    Ok(H4Report {
        centre_residual,
        max_ratio_l2,
        max_ratio_sup,
        pass_l2,
        pass_sup,
        skipped,
        v_violations,
        evaluations: pairs.len() * grid.len(),
        multi_step,
        pass: pass_sup,
    })
}

/// Worst fitted rate of `||pi_2 (L1')^j(omega, u) - pi_2 (L1')^j(omega, v)||` along the
/// doubling orbit of golden `omega`.
fn multi_step_fit(op: &DtOperator, pairs: &[(PairFn, PairFn)], opts: &H4Options) -> Result<EquivalenceFit> {
    let mut worst: Option<EquivalenceFit> = None;
    for (u, v) in pairs.iter().take(10) {
        let (mut u, mut v) = (u.clone(), v.clone());
        let mut w = RotationNumber::golden();
        let mut d = vec![(0usize, pair_norm(&u.sub(&v), PairNorm::GridSup))];
        for j in 1..=opts.multi_steps {
            u = l1_prime(op, &w, &u, &opts.section)?;
            v = l1_prime(op, &w, &v, &opts.section)?;
            w = w.double_mod1()?;
            d.push((j, pair_norm(&u.sub(&v), PairNorm::GridSup)));
        }
        let f = EquivalenceFit::from_differences(&d)?;
        if worst.as_ref().is_none_or(|x| f.rho_hat > x.rho_hat) {
            worst = Some(f);
        }
    }
    worst.ok_or(Error::NotFound)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct H5Report {
    /// `(n, ||v_{n,2}|| / ||v_{n,1}||)` for `n = 0..=n_max`.
    pub ratios: Vec<(usize, f64)>,
    /// `||v_{0,2}|| / ||v_{0,1}||`.
    pub r0: f64,
    pub c1: f64,
    pub c2: f64,
    /// Min and max of the raw ratio over `n = 1..=n_max`.
    pub band: (f64, f64),
    pub within_two_decades: bool,
}

/// `v_{k,1} = L_{omega_{k-1}} v_{k-1,1}` and `v_{k,2} = L_{2 omega_{k-1}} v_{k-1,2}`.
pub fn check_h5(op: &DtOperator, omega0: &RotationNumber, v01: &PairFn, v02: &PairFn, n_max: usize) -> Result<H5Report> {
    diophantine_gate(omega0)?;
    let r0 = v02.norm_l2() / v01.norm_l2();
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::Invalid("H5 needs nonzero initial vectors".into()));
    }
    let (mut v1, mut v2) = (v01.clone(), v02.clone());
    let mut w = *omega0;
    let mut ratios = vec![(0, r0)];
    for n in 1..=n_max {
        v1 = op.apply_pair(w.multiple(1), &v1);
        v2 = op.apply_pair(w.multiple(2), &v2);
        ratios.push((n, v2.norm_l2() / v1.norm_l2()));
        if n < n_max {
            w = w.double_mod1()?;
        }
    }
    let band = ratios[1..].iter().fold((f64::INFINITY, 0.0f64), |a, r| (a.0.min(r.1), a.1.max(r.1)));
    Ok(H5Report {
        c1: band.0 / r0,
        c2: band.1 / r0,
        within_two_decades: band.1 / band.0 <= 100.0,
        ratios,
        r0,
        band,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::DomainConfig;
    use crate::renorm1d::UnimodalMap;

    fn op() -> DtOperator {
        DtOperator::new(&UnimodalMap::quadratic(DomainConfig::default(), 1.4)).unwrap()
    }

    fn pair(a: f64, b: f64) -> PairFn {
        let d = DomainConfig::default();
        PairFn::new(AnalyticFn::polynomial(d, &[a, 0.0, 0.3]), AnalyticFn::polynomial(d, &[b, 0.1]))
    }

    #[test]
    fn h5_is_homogeneous() {
        let (o, w) = (op(), RotationNumber::golden());
        let r = check_h5(&o, &w, &pair(1.0, 0.2), &pair(0.4, -0.3), 10).unwrap();
        let s = check_h5(&o, &w, &pair(1.0, 0.2), &pair(0.4, -0.3).scale(2.0), 10).unwrap();
        assert_eq!(s.band.0, 2.0 * r.band.0);
        assert_eq!(s.band.1, 2.0 * r.band.1);
        assert_eq!((s.c1, s.c2), (r.c1, r.c2));
        assert!(r.c1 <= r.c2 && r.ratios.len() == 11);
    }

    #[test]
    fn h5_rejects_rationals_and_zero() {
        let third = RotationNumber::from_ratio(1, 3).unwrap();
        assert!(matches!(check_h5(&op(), &third, &pair(1.0, 0.0), &pair(1.0, 0.0), 4), Err(Error::NotDiophantine { .. })));
        let z = PairFn::zeros(DomainConfig::default());
        assert!(check_h5(&op(), &RotationNumber::golden(), &pair(1.0, 0.0), &z, 4).is_err());
    }

    #[test]
    fn identical_pair_has_zero_ratio() {
        let (o, s) = (op(), SectionConfig::default());
        let u = pair(1.0, 0.2);
        for w in omega_grid(8) {
            assert_eq!(pair_ratio(&o, &w, &u, &u, &s, PairNorm::L2).unwrap(), 0.0);
            assert_eq!(pair_ratio(&o, &w, &u, &u, &s, PairNorm::GridSup).unwrap(), 0.0);
        }
        assert!(pair_ratio(&o, &omega_grid(8)[3], &u, &pair(0.9, 0.25), &s, PairNorm::L2).unwrap() > 0.0);
    }

    #[test]
    fn grid_sup_norm_of_a_mode() {
        let d = DomainConfig::default();
        let p = PairFn::new(AnalyticFn::constant(d, 3.0), AnalyticFn::constant(d, 4.0));
        assert!((pair_norm(&p, PairNorm::GridSup) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn h4_pass_follows_the_sup_norm() {
        let opts = H4Options { n_pairs: 6, ..H4Options::default() };
        let r = check_h4(&op(), &omega_grid(4), &opts).unwrap();
        assert_eq!(r.pass, r.pass_sup);
        assert_eq!(r.pass_sup, r.max_ratio_sup < 1.0);
        assert_eq!(r.multi_step.is_some(), !r.pass_sup);
        assert!(r.centre_residual < 1e-10);
        let again = check_h4(&op(), &omega_grid(4), &opts).unwrap();
        assert_eq!(r.max_ratio_l2, again.max_ratio_l2);
    }
}

use serde::{Deserialize, Serialize};

use super::conjectures::check_h5;
use super::fit::{alpha_primes, diophantine_gate, slope_runs, EquivalenceFit, QuotientSequence};
use crate::curvedyn::{slope_formula, FixedPointTail, SlopeMode, SlopeOptions};
use crate::error::{Error, Result};
use crate::qprenorm::{l_coords, DtOperator};
use crate::renorm1d::{FamilySpec, Forcing, Trig};
use crate::rotation::RotationNumber;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Observation1Report {
    pub q1: QuotientSequence,
    pub q2: QuotientSequence,
    pub differences: Vec<(usize, f64)>,
    pub fit: EquivalenceFit,
    pub pass: bool,
}

/// Slope quotients of two families in fixed-point mode and the geometric fit
/// of their difference over `n = 2..=n_max`.
pub fn observation1(
    c1: &FamilySpec,
    c2: &FamilySpec,
    omega0: &RotationNumber,
    n_max: usize,
    tail: &FixedPointTail,
    opts: &SlopeOptions,
) -> Result<Observation1Report> {
    diophantine_gate(omega0)?;
    let mode = SlopeMode::FixedPoint;
    let (t1, t2) = rayon::join(|| tail.retarget(c1, opts.domain), || tail.retarget(c2, opts.domain));
    let (t1, t2) = (t1?, t2?);
    let a1 = alpha_primes(&slope_runs(c1, omega0, 1..=n_max, mode, Some(&t1), opts)?);
    let a2 = alpha_primes(&slope_runs(c2, omega0, 1..=n_max, mode, Some(&t2), opts)?);
    let w = omega0.to_f64();
    let q1 = QuotientSequence::from_slopes(&a1, &a1, &c1.name, w, mode)?;
    let q2 = QuotientSequence::from_slopes(&a2, &a2, &c2.name, w, mode)?;
    let differences = q1.differences(&q2);
    let fit = EquivalenceFit::from_differences(&differences)?;
    let pass = fit.passes();
    Ok(Observation1Report { q1, q2, differences, fit, pass })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Observation2Report {
    /// `r_n = alpha'_n(omega) / alpha'_{n-1}(2 omega)`.
    pub mixed: QuotientSequence,
    /// `(n, |r_n - r_{n-1}|)`.
    pub cauchy: Vec<(usize, f64)>,
    pub cauchy_fit: EquivalenceFit,
    /// `|r_n - r_{n-1}|` strictly decreasing from `n = 4`.
    pub decreasing: bool,
    pub limit: f64,
    /// Same extrapolation with the last term dropped.
    pub limit_prev: f64,
    pub limit_stable: bool,
    /// Range of `alpha'_n(omega) / alpha'_n(2 omega)`.
    pub boundedness: (f64, f64),
    /// Range of `||v_{n-1}(2 omega)|| / ||v_{n-1}(omega)||`.
    pub norm_band: (f64, f64),
    pub pass: bool,
}

/// Geometric extrapolation of a Cauchy sequence from its last two terms and
/// the fitted contraction of its increments.
pub fn extrapolate_limit(r: &[(usize, f64)]) -> Result<f64> {
    if r.len() < 3 {
        return Err(Error::Invalid("need three terms to extrapolate".into()));
    }
    let inc: Vec<(usize, f64)> = r.windows(2).map(|w| (w[1].0, (w[1].1 - w[0].1).abs())).collect();
    let fit = EquivalenceFit::from_differences(&inc)?;
    let (last, prev) = (r[r.len() - 1].1, r[r.len() - 2].1);
    if fit.identical || !(fit.rho_hat < 1.0) {
        return Ok(last);
    }
    Ok(last + (last - prev) * fit.rho_hat / (1.0 - fit.rho_hat))
}

/// Agreement to `digits` significant digits of `b`.
pub fn agree_to_digits(a: f64, b: f64, digits: i32) -> bool {
    if b == 0.0 {
        return a == 0.0;
    }
    let unit = 10f64.powi(b.abs().log10().floor() as i32 - (digits - 1));
    (a - b).abs() <= 0.5 * unit
}

pub fn observation2(
    c: &FamilySpec,
    omega0: &RotationNumber,
    n_max: usize,
    mode: SlopeMode,
    tail: Option<&FixedPointTail>,
    opts: &SlopeOptions,
) -> Result<Observation2Report> {
    diophantine_gate(omega0)?;
    if n_max < 5 {
        return Err(Error::Invalid("observation 2 needs n_max >= 5".into()));
    }
    let w2 = omega0.double_mod1()?;
    diophantine_gate(&w2)?;
    let (ra, rb) = rayon::join(
        || slope_runs(c, omega0, 1..=n_max, mode, tail, opts),
        || slope_runs(c, &w2, 1..=n_max, mode, tail, opts),
    );
    let (ra, rb) = (ra?, rb?);
    let (a, b) = (alpha_primes(&ra), alpha_primes(&rb));
    let mixed = QuotientSequence::from_slopes(&a, &b, &c.name, omega0.to_f64(), mode)?;
    let r = &mixed.entries;
    let cauchy: Vec<(usize, f64)> = r.windows(2).map(|w| (w[1].0, (w[1].1 - w[0].1).abs())).collect();
    let cauchy_fit = EquivalenceFit::from_differences(&cauchy)?;
    let tail_inc: Vec<f64> = cauchy.iter().filter(|d| d.0 >= 4).map(|d| d.1).collect();
    let decreasing = tail_inc.windows(2).all(|w| w[1] < w[0]);
    let limit = extrapolate_limit(r)?;
    let limit_prev = extrapolate_limit(&r[..r.len() - 1])?;
    let limit_stable = agree_to_digits(limit_prev, limit, 3);
    let ratios: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.1 / y.1).collect();
    let norms: Vec<f64> = ra.iter().zip(&rb).map(|(x, y)| y.v_last().norm_l2() / x.v_last().norm_l2()).collect();
    let range = |v: &[f64]| v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, &x| (acc.0.min(x), acc.1.max(x)));
    Ok(Observation2Report {
        pass: decreasing && limit_stable,
        boundedness: range(&ratios),
        norm_band: range(&norms),
        mixed,
        cauchy,
        cauchy_fit,
        decreasing,
        limit,
        limit_prev,
        limit_stable,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub i: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub rel: f64,
}

/// `alpha'_i(omega, c)` against `alpha'_{i-1}(2 omega, T_omega(c))`, both
/// along the exact orbit.
pub fn renormalized_identity(c: &FamilySpec, omega0: &RotationNumber, i: usize, opts: &SlopeOptions) -> Result<IdentityCheck> {
    if i < 2 {
        return Err(Error::Invalid("identity needs i >= 2".into()));
    }
    let lhs = slope_formula(c, omega0, i, SlopeMode::ExactOrbit, None, opts)?.alpha_prime;
    let rc = FamilySpec::renormalized(c.clone(), *omega0);
    let rhs = slope_formula(&rc, &omega0.double_mod1()?, i - 1, SlopeMode::ExactOrbit, None, opts)?.alpha_prime;
    Ok(IdentityCheck { i, lhs, rhs, rel: ((lhs - rhs) / lhs).abs() })
}

/// Slack for the normalized-vector bound at the level of representation error.
const ROUNDOFF: f64 = 1e-14;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EtaRow {
    pub eta: f64,
    pub quotients: QuotientSequence,
    /// `(n, |q_n(eta) - q_n(0)|)`.
    pub deviations: Vec<(usize, f64)>,
    pub deviation: f64,
    pub fit: Option<EquivalenceFit>,
    /// `max_k ||pi_2 v_k|| / (eta ||pi_1 v_k||)` along the run.
    pub c_chain: f64,
    /// The same ratio from the linear chain at `Phi`.
    pub c_h5: f64,
    /// `2 C eta / (1 - C eta)` with `C = max(c_chain, c_h5)`.
    pub bound: f64,
    /// `max_k || v_k / ||v_k|| - pi_1 v_k / ||pi_1 v_k|| ||`.
    pub normalized_gap: f64,
    pub bound_ok: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Observation3Report {
    pub baseline: QuotientSequence,
    pub rows: Vec<EtaRow>,
    /// `(eta_a, eta_b, deviation ratio, eta ratio)` for consecutive etas.
    pub scaling: Vec<(f64, f64, f64, f64)>,
    pub linear_ok: bool,
    pub pass: bool,
}

/// `f1(x) cos(2 pi theta) + eta f2(x) cos(4 pi theta)`.
pub fn eta_family(f1: &[f64], f2: &[f64], eta: f64) -> FamilySpec {
    let mut forcing = Forcing::default().term(f1.to_vec(), Trig::Cos, 1);
    if eta != 0.0 {
        forcing = forcing.term(f2.iter().map(|c| eta * c).collect(), Trig::Cos, 2);
    }
    FamilySpec::forced_logistic(&format!("eta={eta}"), forcing)
}

pub fn observation3(
    f1: &[f64],
    f2: &[f64],
    omega0: &RotationNumber,
    etas: &[f64],
    n_max: usize,
    tail: &FixedPointTail,
    opts: &SlopeOptions,
) -> Result<Observation3Report> {
    diophantine_gate(omega0)?;
    let mode = SlopeMode::FixedPoint;
    let w = omega0.to_f64();
    let base = eta_family(f1, f2, 0.0);
    let tail = tail.retarget(&base, opts.domain)?;
    let a0 = alpha_primes(&slope_runs(&base, omega0, 1..=n_max, mode, Some(&tail), opts)?);
    let baseline = QuotientSequence::from_slopes(&a0, &a0, &base.name, w, mode)?;
    let op = DtOperator::new(&tail.fp.phi)?;

    let mut rows = Vec::with_capacity(etas.len());
    for &eta in etas {
        let fam = eta_family(f1, f2, eta);
        let runs = slope_runs(&fam, omega0, 1..=n_max, mode, Some(&tail), opts)?;
        let a = alpha_primes(&runs);
        let quotients = QuotientSequence::from_slopes(&a, &a, &fam.name, w, mode)?;
        let deviations = quotients.differences(&baseline);
        let deviation = deviations.iter().fold(0.0f64, |m, d| m.max(d.1));
        let fit = EquivalenceFit::from_differences(&deviations).ok();

        let vs = &runs.last().expect("n_max >= 1").vs;
        let (mut ratio, mut gap) = (0.0f64, 0.0f64);
        for v in vs {
            let x = v.restrict_to_mode(1);
            let y = v.sub(&x);
            let (nx, nv) = (x.norm_l2(), v.norm_l2());
            ratio = ratio.max(y.norm_l2() / nx);
            gap = gap.max(v.scale(1.0 / nv).sub(&x.scale(1.0 / nx)).norm_l2());
        }
        let (c_chain, c_h5) = if eta == 0.0 {
            (0.0, 0.0)
        } else {
            let v0 = &vs[0];
            let h5 = check_h5(&op, omega0, &l_coords(v0, 1), &l_coords(v0, 2), n_max)?;
            (ratio / eta, h5.band.1 / eta)
        };
        let ce = c_chain.max(c_h5) * eta;
        let bound = if ce < 1.0 { 2.0 * ce / (1.0 - ce) } else { f64::INFINITY };
        rows.push(EtaRow {
            eta,
            quotients,
            deviations,
            deviation,
            fit,
            c_chain,
            c_h5,
            bound,
            normalized_gap: gap,
            bound_ok: ce < 1.0 && gap <= bound + ROUNDOFF,
        });
    }
    let mut sorted: Vec<&EtaRow> = rows.iter().filter(|r| r.eta > 0.0).collect();
    sorted.sort_by(|a, b| a.eta.total_cmp(&b.eta));
    let scaling: Vec<(f64, f64, f64, f64)> =
        sorted.windows(2).map(|p| (p[0].eta, p[1].eta, p[1].deviation / p[0].deviation, p[1].eta / p[0].eta)).collect();
    let linear_ok = scaling.iter().all(|s| {
        let f = s.2 / s.3;
        (1.0 / 3.0..=3.0).contains(&f)
    });
    let pass = linear_ok && rows.iter().all(|r| r.bound_ok);
    Ok(Observation3Report { baseline, rows, scaling, linear_ok, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits() {
        assert!(agree_to_digits(1.2344, 1.2341, 3));
        assert!(!agree_to_digits(1.239, 1.231, 3));
        assert!(agree_to_digits(-4521.0, -4518.0, 3));
    }

    #[test]
    fn extrapolation_of_geometric_sequence() {
        let r: Vec<(usize, f64)> = (2..=10).map(|n| (n, 1.7 - 0.3 * 0.5f64.powi(n as i32))).collect();
        assert!((extrapolate_limit(&r).unwrap() - 1.7).abs() < 1e-12);
    }

    #[test]
    fn eta_zero_family_has_one_mode() {
        let f = eta_family(&[1.0], &[1.0], 0.0);
        assert_eq!(f.forcing().unwrap().max_k(), 1);
        assert_eq!(eta_family(&[1.0], &[1.0], 1e-3).forcing().unwrap().max_k(), 2);
    }
}

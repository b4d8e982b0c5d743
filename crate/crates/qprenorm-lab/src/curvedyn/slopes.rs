use serde::{Deserialize, Serialize};

use super::curve::{derivative_product, solve_invariant_curve, CurveOptions};
use super::dg1::{dg1_hat_with, dg1_with, TOL_SIGMA1};
use super::trig::{extremum, extremum_big_m, extremum_m, Extremum, ExtremumKind};
use crate::error::{Error, Result};
use crate::funcspace::{DomainConfig, QPFn};
use crate::qprenorm::{apply_dt, gamma_normalize, SectionConfig};
use crate::renorm1d::{
    d_renormalize, renormalize_1d, solve_fixed_point, stable_manifold_param, superstable_params,
    unstable_manifold_points, FamilySpec, FixedPointData, UnimodalMap, UnstableManifold,
};
use crate::rotation::RotationNumber;

const DELTA_FEIG: f64 = 4.669201609102990;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlopeMode {
    /// Renormalize the actual orbit `R^k(c(s_n, 0))`.
    ExactOrbit,
    /// Linearize at `Phi` and the unstable-manifold points `f*_j`.
    FixedPoint,
}

/// Which `f*_j` drives tail step `k` of the fixed-point recurrences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailConvention {
    /// `f*_{n-k+1}`: last step at `f*_2`, `DG_1` at `f*_1`.
    Theorem,
    /// `f*_{n-k}`: last step at `f*_1`, where the scaling vanishes.
    Literal,
}

#[derive(Clone, Debug)]
pub struct SlopeOptions {
    pub domain: DomainConfig,
    pub section: SectionConfig,
    pub tail: TailConvention,
    pub tol_sigma: f64,
}

impl Default for SlopeOptions {
    fn default() -> Self {
        SlopeOptions {
            domain: DomainConfig::default(),
            section: SectionConfig::default(),
            tail: TailConvention::Theorem,
            tol_sigma: TOL_SIGMA1,
        }
    }
}

/// Data shared by every fixed-point mode run of one family.
#[derive(Clone, Debug)]
pub struct FixedPointTail {
    pub fp: FixedPointData,
    pub alpha_star: f64,
    pub manifold: UnstableManifold,
}

impl FixedPointTail {
    /// Supports runs up to `n_max`.
    pub fn new(family: &FamilySpec, n_max: usize, domain: DomainConfig) -> Result<Self> {
        let fp = solve_fixed_point(&UnimodalMap::quadratic(domain, 1.4), domain.n_cheb).map_err(|e| e.at("fixed point"))?;
        let alpha_star = stable_manifold_param(family, 10, domain).map_err(|e| e.at("alpha*"))?.alpha_star;
        let manifold = unstable_manifold_points(&fp, (n_max / 2 + 2).max(2)).map_err(|e| e.at("unstable manifold"))?;
        Ok(FixedPointTail { fp, alpha_star, manifold })
    }

    pub fn with_parts(fp: FixedPointData, alpha_star: f64, manifold: UnstableManifold) -> Self {
        FixedPointTail { fp, alpha_star, manifold }
    }

    /// Same `Phi` and `f*_j`, with `alpha*` of another family.
    pub fn retarget(&self, family: &FamilySpec, domain: DomainConfig) -> Result<Self> {
        let alpha_star = stable_manifold_param(family, 10, domain).map_err(|e| e.at("alpha*"))?.alpha_star;
        Ok(FixedPointTail { fp: self.fp.clone(), alpha_star, manifold: self.manifold.clone() })
    }
}

/// `q_n ~ delta^-1 * m_ratio * step_norm`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeFactors {
    pub inv_delta: f64,
    pub m_ratio: f64,
    pub step_norm: f64,
    pub product: f64,
}

#[derive(Clone, Debug)]
pub struct SlopeReport {
    pub n: usize,
    pub mode: SlopeMode,
    /// `s_n` in exact-orbit mode, `alpha*` in fixed-point mode.
    pub alpha_base: f64,
    pub alpha_prime: f64,
    pub beta_prime: f64,
    pub min: Extremum,
    pub max: Extremum,
    pub denominator: f64,
    /// `|psi(1)|` of the map carrying `DG_1`.
    pub sigma_residual: f64,
    pub gammas: Vec<f64>,
    /// `||v_k||` for `k = 0..n-1`.
    pub v_norms: Vec<f64>,
    /// Section-normalized `v_k` for `k = 0..n-1`.
    pub vs: Vec<QPFn>,
    pub factors: Option<ThreeFactors>,
    pub omega_last: RotationNumber,
}

impl SlopeReport {
    pub fn v_last(&self) -> &QPFn {
        self.vs.last().expect("n >= 1")
    }

    pub fn v_prev(&self) -> Option<&QPFn> {
        self.vs.len().checked_sub(2).map(|i| &self.vs[i])
    }

    /// `m(DG_1(omega_{n-1}, ., v_{n-1} / ||v_{n-1}||))`.
    pub fn normalized_min(&self) -> f64 {
        self.min.value / self.v_last().norm_l2()
    }
}

/// `DG_1` checks along an exact orbit see the roundoff of `s_n` amplified by
/// `DR` along `n - 1` steps.
fn exact_sigma_tol(tol: f64, n: usize, delta: f64) -> f64 {
    tol.max(128.0 * f64::EPSILON * delta.powi(n as i32 - 1))
}

fn normalize(v: QPFn, section: &SectionConfig) -> Result<(f64, QPFn)> {
    match gamma_normalize(&v, section) {
        Ok(p) => Ok(p),
        // no first-mode content: nothing to quotient
        Err(Error::NoSection { .. }) => Ok((0.0, v)),
        Err(e) => Err(e),
    }
}

struct Chain {
    steps: Vec<UnimodalMap>,
    last: UnimodalMap,
    alpha: f64,
    u0: crate::funcspace::AnalyticFn,
    v0: QPFn,
    delta: Option<f64>,
}

fn exact_chain(family: &FamilySpec, n: usize, opts: &SlopeOptions) -> Result<Chain> {
    let s = superstable_params(family, n).map_err(|e| e.at("superstable"))?;
    let alpha = s[n];
    let mut f = family.uncoupled(alpha, opts.domain)?;
    let mut steps = Vec::with_capacity(n.saturating_sub(1));
    for k in 1..n {
        let next = renormalize_1d(&f).map_err(|e| e.at(if k + 1 == n { "orbit to Sigma_1" } else { "orbit" }))?;
        steps.push(f);
        f = next;
    }
    Ok(Chain {
        steps,
        last: f,
        alpha,
        u0: family.d_alpha(alpha, opts.domain)?,
        v0: family.d_eps(alpha, opts.domain)?,
        delta: None,
    })
}

fn fixed_chain(family: &FamilySpec, n: usize, tail: &FixedPointTail, opts: &SlopeOptions) -> Result<Chain> {
    let phi = &tail.fp.phi;
    let fstar = |j: usize| tail.manifold.fstar(j).cloned();
    let mut steps = Vec::with_capacity(n.saturating_sub(1));
    for k in 1..n {
        if k + 1 <= n / 2 {
            steps.push(phi.clone());
        } else {
            let j = match opts.tail {
                TailConvention::Theorem => n - k + 1,
                TailConvention::Literal => n - k,
            };
            steps.push(fstar(j)?);
        }
    }
    let alpha = tail.alpha_star;
    Ok(Chain {
        steps,
        last: fstar(1)?,
        alpha,
        u0: family.d_alpha(alpha, opts.domain)?,
        v0: family.d_eps(alpha, opts.domain)?,
        delta: Some(tail.fp.delta_feig),
    })
}

/// Reducibility-loss slopes `(alpha'_n, beta'_n)` from the renormalization recurrences.
pub fn slope_formula(
    family: &FamilySpec,
    omega0: &RotationNumber,
    n: usize,
    mode: SlopeMode,
    tail: Option<&FixedPointTail>,
    opts: &SlopeOptions,
) -> Result<SlopeReport> {
    if n == 0 {
        return Err(Error::Invalid("slopes need n >= 1".into()));
    }
    let chain = match mode {
        SlopeMode::ExactOrbit => exact_chain(family, n, opts)?,
        SlopeMode::FixedPoint => {
            let t = tail.ok_or(Error::Invalid("fixed-point mode needs the fixed-point tail data".into()))?;
            fixed_chain(family, n, t, opts)?
        }
    };
    let (g0, mut v) = normalize(chain.v0.clone(), &opts.section).map_err(|e| e.at("initial section"))?;
    let mut u = chain.u0.clone();
    let mut omega = *omega0;
    let mut gammas = vec![g0];
    let mut v_norms = vec![v.norm_l2()];
    let mut vs = vec![v.clone()];
    let mut omega_prev = omega;
    for base in &chain.steps {
        let w = apply_dt(&QPFn::from_analytic(base.psi()), &omega, &v).map_err(|e| e.at("DT step"))?;
        u = d_renormalize(base, &u).map_err(|e| e.at("DR step"))?;
        let (g, w) = normalize(w, &opts.section).map_err(|e| e.at("section"))?;
        gammas.push(g);
        v_norms.push(w.norm_l2());
        vs.push(w.clone());
        v = w;
        omega_prev = omega;
        omega = omega.double_mod1()?;
    }
    let last = &chain.last;
    let tol = match mode {
        SlopeMode::ExactOrbit => exact_sigma_tol(opts.tol_sigma, n, DELTA_FEIG),
        SlopeMode::FixedPoint => opts.tol_sigma,
    };
    let dg = dg1_with(last, &omega, &v, tol).map_err(|e| e.at("DG1"))?;
    let min = extremum(&dg, ExtremumKind::Min);
    let max = extremum(&dg, ExtremumKind::Max);
    let denominator = dg1_hat_with(last, &u, tol).map_err(|e| e.at("DG1 hat"))?;

    let v_prev = vs.len().checked_sub(2).map(|i| &vs[i]);
    let factors = match (v_prev, chain.delta) {
        (Some(vp), Some(delta)) => {
            let np = vp.norm_l2();
            let m1 = extremum(&dg.scale(1.0 / v.norm_l2()), ExtremumKind::Min).value;
            let m2 = extremum(&dg1_with(last, &omega_prev, vp, tol)?.scale(1.0 / np), ExtremumKind::Min).value;
            let inv_delta = 1.0 / delta;
            let m_ratio = m1 / m2;
            let step_norm = v.norm_l2() / np;
            Some(ThreeFactors { inv_delta, m_ratio, step_norm, product: inv_delta * m_ratio * step_norm })
        }
        _ => None,
    };

    Ok(SlopeReport {
        n,
        mode,
        alpha_base: chain.alpha,
        alpha_prime: -min.value / denominator,
        beta_prime: -max.value / denominator,
        min,
        max,
        denominator,
        sigma_residual: last.a().abs(),
        gammas,
        v_norms,
        vs,
        factors,
        omega_last: omega,
    })
}

#[derive(Clone, Debug)]
pub struct DirectOptions {
    pub curve: CurveOptions,
    pub eps: f64,
    pub width: f64,
}

impl Default for DirectOptions {
    fn default() -> Self {
        DirectOptions { curve: CurveOptions::default(), eps: 1e-4, width: 1e-12 }
    }
}

fn criterion(
    family: &FamilySpec,
    omega: &RotationNumber,
    n: u32,
    alpha: f64,
    eps: f64,
    kind: ExtremumKind,
    opts: &DirectOptions,
) -> Result<f64> {
    let f = family.physical_fiber(alpha, eps)?;
    let c = solve_invariant_curve(&f, omega, n, &[0.5], &opts.curve)?;
    let p = derivative_product(&f, omega, &c)?;
    Ok(match kind {
        ExtremumKind::Min => extremum_m(&p.values).value,
        ExtremumKind::Max => extremum_big_m(&p.values).value,
    })
}

/// Parameter where the extremum of the `2^n`-step derivative product along the
/// invariant curve crosses zero, near `s_n` at forcing size `eps`.
pub fn locate_reducibility_loss(
    family: &FamilySpec,
    omega0: &RotationNumber,
    n: u32,
    eps: f64,
    kind: ExtremumKind,
    opts: &DirectOptions,
) -> Result<f64> {
    let s = superstable_params(family, n as usize)?[n as usize];
    if eps == 0.0 {
        // the criterion reduces to superstability
        return Ok(s);
    }
    let crit = |a: f64| criterion(family, omega0, n, a, eps, kind, opts);
    let c0 = crit(s)?;
    if c0 == 0.0 {
        return Ok(s);
    }
    let mut bracket = None;
    let mut prev = 0.0;
    'outer: for j in 0..48 {
        let h = 0.25 * eps * 2f64.powi(j);
        for sign in [1.0, -1.0] {
            if let Ok(c) = crit(s + sign * h) {
                if (c > 0.0) != (c0 > 0.0) {
                    bracket = Some((s + sign * prev, s + sign * h));
                    break 'outer;
                }
            }
        }
        prev = h;
    }
    let (mut inside, mut outside) = bracket.ok_or(Error::NotFound)?;
    while (outside - inside).abs() > opts.width {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        let c = crit(mid)?;
        if (c > 0.0) == (c0 > 0.0) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(0.5 * (inside + outside))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectSlope {
    pub s_n: f64,
    pub eps: f64,
    pub slope_eps: f64,
    pub slope_half: f64,
    /// `2 slope(eps / 2) - slope(eps)`.
    pub richardson: f64,
}

pub fn direct_slope(
    family: &FamilySpec,
    omega0: &RotationNumber,
    n: u32,
    kind: ExtremumKind,
    opts: &DirectOptions,
) -> Result<DirectSlope> {
    let s = superstable_params(family, n as usize)?[n as usize];
    let e = opts.eps;
    let a1 = locate_reducibility_loss(family, omega0, n, e, kind, opts)?;
    let a2 = locate_reducibility_loss(family, omega0, n, 0.5 * e, kind, opts)?;
    let slope_eps = (a1 - s) / e;
    let slope_half = (a2 - s) / (0.5 * e);
    Ok(DirectSlope { s_n: s, eps: e, slope_eps, slope_half, richardson: 2.0 * slope_half - slope_eps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renorm1d::Forcing;

    fn flm() -> FamilySpec {
        FamilySpec::forced_logistic("flm", Forcing::cos(1))
    }

    #[test]
    fn zero_forcing_gives_superstable() {
        let s = superstable_params(&flm(), 1).unwrap()[1];
        let a = locate_reducibility_loss(&flm(), &RotationNumber::golden(), 1, 0.0, ExtremumKind::Min, &DirectOptions::default()).unwrap();
        assert_eq!(a, s);
    }

    #[test]
    fn formula_matches_direct_bisection_n1() {
        let w = RotationNumber::golden();
        let r = slope_formula(&flm(), &w, 1, SlopeMode::ExactOrbit, None, &SlopeOptions::default()).unwrap();
        let d = direct_slope(&flm(), &w, 1, ExtremumKind::Min, &DirectOptions::default()).unwrap();
        let b = direct_slope(&flm(), &w, 1, ExtremumKind::Max, &DirectOptions::default()).unwrap();
        assert!(((r.alpha_prime - d.richardson) / d.richardson).abs() < 0.02, "{} {:?}", r.alpha_prime, d);
        assert!(((r.beta_prime - b.richardson) / b.richardson).abs() < 0.02, "{} {:?}", r.beta_prime, b);
        assert!(((r.beta_prime + r.alpha_prime) / r.alpha_prime).abs() < 0.02);
        assert!(d.richardson * b.richardson < 0.0);
    }

    fn root(mut e: &Error) -> &Error {
        while let Error::Stage { source, .. } = e {
            e = source;
        }
        e
    }

    fn tail() -> FixedPointTail {
        FixedPointTail::new(&flm(), 8, DomainConfig::default()).unwrap()
    }

    #[test]
    fn three_factors_reassemble() {
        let t = tail();
        let w = RotationNumber::golden();
        let opts = SlopeOptions::default();
        let r = slope_formula(&flm(), &w, 6, SlopeMode::FixedPoint, Some(&t), &opts).unwrap();
        let f = r.factors.unwrap();
        let (vl, vp) = (r.v_last(), r.v_prev().unwrap());
        let mut w4 = w;
        for _ in 0..4 {
            w4 = w4.double_mod1().unwrap();
        }
        let f1 = t.manifold.fstar(1).unwrap();
        let m2 = extremum(&dg1_with(f1, &w4, &vp.scale(1.0 / vp.norm_l2()), 1e-9).unwrap(), ExtremumKind::Min).value;
        let want = (1.0 / t.fp.delta_feig) * (r.normalized_min() / m2) * (vl.norm_l2() / vp.norm_l2());
        assert!((f.product - want).abs() <= 1e-12 * want.abs(), "{f:?} {want}");
        assert!((f.product - f.inv_delta * f.m_ratio * f.step_norm).abs() <= 1e-12 * f.product.abs());
        assert_eq!(r.vs.len(), 6);
        assert!(r.gammas.iter().all(|g| (0.0..1.0).contains(g)));
    }

    #[test]
    fn literal_tail_hits_the_degenerate_scaling() {
        let t = tail();
        let opts = SlopeOptions { tail: TailConvention::Literal, ..SlopeOptions::default() };
        let e = slope_formula(&flm(), &RotationNumber::golden(), 4, SlopeMode::FixedPoint, Some(&t), &opts).unwrap_err();
        assert!(matches!(root(&e), Error::DegenerateScaling { .. }), "{e:?}");
    }

    #[test]
    fn exact_and_fixed_quotients_converge() {
        let t = tail();
        let w = RotationNumber::golden();
        let opts = SlopeOptions::default();
        let a = |n, m| slope_formula(&flm(), &w, n, m, Some(&t), &opts).unwrap().alpha_prime;
        let gap = |n| {
            let qe = a(n, SlopeMode::ExactOrbit) / a(n - 1, SlopeMode::ExactOrbit);
            let qf = a(n, SlopeMode::FixedPoint) / a(n - 1, SlopeMode::FixedPoint);
            (qe - qf).abs()
        };
        assert!(gap(8) < 1e-2 * gap(2), "{} {}", gap(2), gap(8));
    }

    #[test]
    fn fixed_point_mode_needs_tail() {
        let e = slope_formula(&flm(), &RotationNumber::golden(), 2, SlopeMode::FixedPoint, None, &SlopeOptions::default());
        assert!(matches!(e, Err(Error::Invalid(_))));
        assert!(slope_formula(&flm(), &RotationNumber::golden(), 0, SlopeMode::ExactOrbit, None, &SlopeOptions::default()).is_err());
    }
}

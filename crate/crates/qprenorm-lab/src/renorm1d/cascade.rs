use rayon::prelude::*;

use super::{in_domain_r, renormalize_1d, FamilyKind, FamilySpec, FixedPointData, UnimodalMap};
use crate::error::{Error, Result};
use crate::funcspace::DomainConfig;

const DELTA_GUESS: f64 = 4.669;

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// First sign change of `f` on the ordered sample points, refined by bisection.
fn first_root(points: impl Iterator<Item = f64>, f: &impl Fn(f64) -> f64) -> Option<f64> {
    let mut prev: Option<(f64, f64)> = None;
    for x in points {
        let fx = f(x);
        if !fx.is_finite() {
            return None;
        }
        if let Some((px, pf)) = prev {
            if (pf > 0.0) != (fx > 0.0) || fx == 0.0 {
                return Some(bisect(px, x, f));
            }
        }
        prev = Some((x, fx));
    }
    None
}

/// Parameters `s_0 < s_1 < ... < s_{n_max}` where the critical point of the
/// uncoupled map is periodic with period `2^n`.
pub fn superstable_params(family: &FamilySpec, n_max: usize) -> Result<Vec<f64>> {
    if n_max > 14 {
        return Err(Error::Invalid(format!("n_max = {n_max} exceeds 14")));
    }
    if let FamilyKind::Renormalized { base, .. } = &family.kind {
        // R maps Sigma_{n+1} onto Sigma_n
        let s = superstable_params(base, n_max + 1)?;
        return Ok(s[1..].to_vec());
    }
    let (lo, hi, _) = family.param_box;
    let mut s: Vec<f64> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let steps = 1usize << n;
        let g = |alpha: f64| -> f64 {
            let (f, xc) = family.uncoupled_physical(alpha).expect("physical family");
            let mut x = xc;
            for _ in 0..steps {
                x = f(x);
            }
            x - xc
        };
        let root = match n {
            0 => first_root((0..=400).map(|i| lo + (hi - lo) * i as f64 / 400.0), &g),
            1 => {
                let h = (hi - s[0]) / 400.0;
                first_root((1..=400).map(|i| s[0] + h * i as f64), &g)
            }
            _ => {
                let d = (s[n - 1] - s[n - 2]) / DELTA_GUESS;
                first_root((5..=60).map(|i| s[n - 1] + d * i as f64 / 20.0), &g)
            }
        };
        match root {
            Some(r) if s.last().is_none_or(|&p| r > p) => s.push(r),
            _ => return Err(Error::Search { n }),
        }
    }
    Ok(s)
}

/// Outcome of iterating `R` on the uncoupled map at one parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Escape {
    /// `a >= 0` reached: the parameter lies below the accumulation point.
    Below(usize),
    /// Another domain clause failed: the parameter lies above it.
    Above(usize),
    Undecided,
}

pub fn classify_escape(family: &FamilySpec, alpha: f64, domain: DomainConfig, max_steps: usize) -> Escape {
    let mut psi = match family.uncoupled(alpha, domain) {
        Ok(p) => p,
        Err(_) => return Escape::Above(0),
    };
    for k in 0..max_steps {
        let rep = in_domain_r(&psi);
        if rep.a >= -super::TOL_A {
            return Escape::Below(k);
        }
        if !rep.passes() {
            return Escape::Above(k);
        }
        psi = match renormalize_1d(&psi) {
            Ok(p) => p,
            Err(_) => return Escape::Above(k),
        };
    }
    Escape::Undecided
}

#[derive(Clone, Debug, PartialEq)]
pub struct StableManifoldParam {
    pub alpha_star: f64,
    pub extrapolated: f64,
    pub bisected: f64,
    pub superstable: Vec<f64>,
}

/// `alpha*` by Aitken extrapolation of `s_n`, cross-checked by escape-time bisection.
pub fn stable_manifold_param(family: &FamilySpec, n_max: usize, domain: DomainConfig) -> Result<StableManifoldParam> {
    let s = superstable_params(family, n_max)?;
    if s.len() < 3 {
        return Err(Error::Invalid("need at least three superstable parameters".into()));
    }
    let n = s.len() - 1;
    let (s0, s1, s2) = (s[n - 2], s[n - 1], s[n]);
    let extrapolated = s2 - (s2 - s1).powi(2) / ((s2 - s1) - (s1 - s0));
    let mut lo = 0.5 * (s1 + s2);
    let mut hi = extrapolated + 4.0 * (extrapolated - s2);
    if !matches!(classify_escape(family, lo, domain, 80), Escape::Below(_))
        || !matches!(classify_escape(family, hi, domain, 80), Escape::Above(_))
    {
        return Err(Error::Inconsistency { what: "escape bracket", a: lo, b: hi });
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        match classify_escape(family, mid, domain, 80) {
            Escape::Below(_) => lo = mid,
            Escape::Above(_) => hi = mid,
            Escape::Undecided => {
                lo = mid;
                hi = mid;
            }
        }
    }
    let bisected = 0.5 * (lo + hi);
    if (bisected - extrapolated).abs() > 1e-8 {
        return Err(Error::Inconsistency { what: "alpha* estimates", a: extrapolated, b: bisected });
    }
    Ok(StableManifoldParam { alpha_star: bisected, extrapolated, bisected, superstable: s })
}

/// Points `f*_j` of the unstable manifold of `Phi` on `Sigma_j`.
#[derive(Clone, Debug)]
pub struct UnstableManifold {
    /// `points[j - 1] = f*_j`.
    pub points: Vec<UnimodalMap>,
    pub params: Vec<f64>,
    pub residuals: Vec<f64>,
    pub growth_steps: usize,
}

impl UnstableManifold {
    pub fn fstar(&self, j: usize) -> Result<&UnimodalMap> {
        self.points.get(j.wrapping_sub(1)).ok_or(Error::MeshExhausted { j })
    }
}

/// Grows `W^u` as `R^m(Phi + (t / delta^m) e_u)` and locates `f*_j` where the
/// critical point becomes `2^j`-periodic.
pub fn unstable_manifold_points(fp: &FixedPointData, j_max: usize) -> Result<UnstableManifold> {
    let m = 5usize;
    let scale = fp.delta_feig.powi(m as i32);
    let grow = |t: f64| -> Option<UnimodalMap> {
        let mut psi = UnimodalMap::from_fn_unchecked(fp.phi.psi().axpy(t / scale, &fp.e_unstable));
        for _ in 0..m {
            psi = renormalize_1d(&psi).ok()?;
        }
        Some(psi)
    };
    let n_mesh = 900;
    let (t_min, t_max): (f64, f64) = (1e-7, 8.0);
    let ratio = (t_max / t_min).powf(1.0 / n_mesh as f64);
    let mesh: Vec<f64> = (0..=n_mesh).map(|i| t_min * ratio.powi(i as i32)).collect();
    let samples: Vec<Option<Vec<f64>>> = mesh
        .par_iter()
        .map(|&t| grow(t).map(|w| (1..=j_max).map(|j| w.sigma_residual(j)).collect()))
        .collect();

    let mut points = Vec::with_capacity(j_max);
    let mut params = Vec::with_capacity(j_max);
    let mut residuals = Vec::with_capacity(j_max);
    for j in 1..=j_max {
        let mut bracket = None;
        for i in 1..mesh.len() {
            match (&samples[i - 1], &samples[i]) {
                (Some(p), Some(q)) => {
                    if (p[j - 1] > 0.0) != (q[j - 1] > 0.0) {
                        bracket = Some((mesh[i - 1], mesh[i]));
                        break;
                    }
                }
                _ => break,
            }
        }
        let (lo, hi) = bracket.ok_or(Error::MeshExhausted { j })?;
        let s = |t: f64| grow(t).map_or(f64::NAN, |w| w.sigma_residual(j));
        let t = bisect(lo, hi, s);
        let w = grow(t).ok_or(Error::MeshExhausted { j })?;
        residuals.push(w.sigma_residual(j).abs());
        params.push(t);
        points.push(w);
    }
    Ok(UnstableManifold { points, params, residuals, growth_steps: m })
}

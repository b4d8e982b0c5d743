use std::f64::consts::PI;

use super::{d_renormalize, UnimodalMap};
use crate::error::{Error, Result};
use crate::funcspace::{AnalyticFn, DomainConfig, QPFn};
use crate::qprenorm::{apply_dt, apply_t};
use crate::rotation::RotationNumber;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

/// `p(x) * trig(2 pi k theta)` with `p` given by monomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ForcingTerm {
    pub poly: Vec<f64>,
    pub trig: Trig,
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Forcing {
    pub terms: Vec<ForcingTerm>,
}

impl Forcing {
    pub fn cos(k: usize) -> Self {
        Forcing { terms: vec![ForcingTerm { poly: vec![1.0], trig: Trig::Cos, k }] }
    }

    pub fn term(mut self, poly: Vec<f64>, trig: Trig, k: usize) -> Self {
        self.terms.push(ForcingTerm { poly, trig, k });
        self
    }

    pub fn max_k(&self) -> usize {
        self.terms.iter().map(|t| t.k).max().unwrap_or(0)
    }

    /// Value and `d/dx` of `g(theta, x)`.
    pub fn eval_dx(&self, theta: f64, x: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut d = 0.0;
        for t in &self.terms {
            let (mut p, mut dp) = (0.0, 0.0);
            for &c in t.poly.iter().rev() {
                dp = dp * x + p;
                p = p * x + c;
            }
            let arg = 2.0 * PI * t.k as f64 * theta;
            let w = match t.trig {
                Trig::Cos => arg.cos(),
                Trig::Sin => arg.sin(),
            };
            v += p * w;
            d += dp * w;
        }
        (v, d)
    }

    pub fn eval(&self, theta: f64, x: f64) -> f64 {
        self.eval_dx(theta, x).0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FamilyKind {
    /// `alpha x (1 - x) + eps g(theta, x)`.
    ForcedLogistic { forcing: Forcing },
    /// The base family read at `alpha = scale * beta + shift`.
    Affine { base: Box<FamilySpec>, scale: f64, shift: f64 },
    /// `T_omega(c(alpha, eps))`.
    Renormalized { base: Box<FamilySpec>, omega: RotationNumber },
}

/// Two-parameter family `c(alpha, eps)`, uncoupled at `eps = 0`, with the
/// parameter box `[a, b] x [0, d]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilySpec {
    pub name: String,
    pub kind: FamilyKind,
    pub param_box: (f64, f64, f64),
}

/// Physical fiber map of a forced logistic family at fixed parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalFiber {
    pub alpha: f64,
    pub eps: f64,
    pub forcing: Forcing,
}

impl PhysicalFiber {
    pub fn eval_dx(&self, theta: f64, x: f64) -> (f64, f64) {
        let (g, dg) = self.forcing.eval_dx(theta, x);
        (self.alpha * x * (1.0 - x) + self.eps * g, self.alpha * (1.0 - 2.0 * x) + self.eps * dg)
    }
}

impl FamilySpec {
    pub fn forced_logistic(name: &str, forcing: Forcing) -> Self {
        FamilySpec { name: name.into(), kind: FamilyKind::ForcedLogistic { forcing }, param_box: (1.0, 4.0, 1.0) }
    }

    /// `alpha = scale * beta + shift`; requires `scale > 0`.
    pub fn affine(base: FamilySpec, scale: f64, shift: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::Invalid("affine reparametrization needs a positive scale".into()));
        }
        let (a, b, d) = base.param_box;
        Ok(FamilySpec {
            name: format!("{}-affine", base.name),
            param_box: ((a - shift) / scale, (b - shift) / scale, d),
            kind: FamilyKind::Affine { base: Box::new(base), scale, shift },
        })
    }

    pub fn renormalized(base: FamilySpec, omega: RotationNumber) -> Self {
        FamilySpec {
            name: format!("T({})", base.name),
            param_box: base.param_box,
            kind: FamilyKind::Renormalized { base: Box::new(base), omega },
        }
    }

    /// Dynamical coordinate of the uncoupled map and its critical point, if
    /// the family has a physical form.
    pub fn uncoupled_physical(&self, alpha: f64) -> Option<(impl Fn(f64) -> f64, f64)> {
        let a = self.physical_alpha(alpha)?;
        Some((move |x: f64| a * x * (1.0 - x), 0.5))
    }

    fn physical_alpha(&self, alpha: f64) -> Option<f64> {
        match &self.kind {
            FamilyKind::ForcedLogistic { .. } => Some(alpha),
            FamilyKind::Affine { base, scale, shift } => base.physical_alpha(scale * alpha + shift),
            FamilyKind::Renormalized { .. } => None,
        }
    }

    pub fn forcing(&self) -> Option<&Forcing> {
        match &self.kind {
            FamilyKind::ForcedLogistic { forcing } => Some(forcing),
            FamilyKind::Affine { base, .. } => base.forcing(),
            FamilyKind::Renormalized { .. } => None,
        }
    }

    pub fn physical_fiber(&self, alpha: f64, eps: f64) -> Result<PhysicalFiber> {
        let a = self.physical_alpha(alpha).ok_or(Error::Invalid(format!("family {} has no physical form", self.name)))?;
        Ok(PhysicalFiber { alpha: a, eps, forcing: self.forcing().cloned().unwrap_or_default() })
    }

    /// Normalized uncoupled map `psi_alpha`.
    pub fn uncoupled(&self, alpha: f64, domain: DomainConfig) -> Result<UnimodalMap> {
        match &self.kind {
            FamilyKind::ForcedLogistic { .. } | FamilyKind::Affine { .. } => {
                let a = self.physical_alpha(alpha).expect("physical");
                let lam = scale_lambda(a)?;
                Ok(UnimodalMap::quadratic(domain, a * lam))
            }
            FamilyKind::Renormalized { base, .. } => {
                let inner = base.uncoupled(alpha, domain)?;
                super::renormalize_1d(&inner)
            }
        }
    }

    /// `c(alpha, eps)` in normalized coordinates `x = 1/2 + lambda y`.
    pub fn normalized(&self, alpha: f64, eps: f64, domain: DomainConfig) -> Result<QPFn> {
        match &self.kind {
            FamilyKind::ForcedLogistic { .. } | FamilyKind::Affine { .. } => {
                let a = self.physical_alpha(alpha).expect("physical");
                let lam = scale_lambda(a)?;
                let forcing = self.forcing().expect("physical").clone();
                check_modes(&forcing, &domain)?;
                Ok(QPFn::from_fn(domain, move |t, y| {
                    1.0 - a * lam * y * y + eps * forcing.eval(t, 0.5 + lam * y) / lam
                }))
            }
            FamilyKind::Renormalized { base, omega } => apply_t(&base.normalized(alpha, eps, domain)?, omega),
        }
    }

    /// `d/d alpha c(alpha, 0)`.
    pub fn d_alpha(&self, alpha: f64, domain: DomainConfig) -> Result<AnalyticFn> {
        match &self.kind {
            FamilyKind::ForcedLogistic { .. } => {
                let lam = scale_lambda(alpha)?;
                Ok(AnalyticFn::polynomial(domain, &[0.0, 0.0, -(lam + alpha / 4.0)]))
            }
            FamilyKind::Affine { base, scale, shift } => Ok(base.d_alpha(scale * alpha + shift, domain)?.scale(*scale)),
            FamilyKind::Renormalized { base, .. } => {
                let psi = base.uncoupled(alpha, domain)?;
                d_renormalize(&psi, &base.d_alpha(alpha, domain)?)
            }
        }
    }

    /// `d/d eps c(alpha, 0)`.
    pub fn d_eps(&self, alpha: f64, domain: DomainConfig) -> Result<QPFn> {
        match &self.kind {
            FamilyKind::ForcedLogistic { forcing } => {
                let lam = scale_lambda(alpha)?;
                check_modes(forcing, &domain)?;
                let g = forcing.clone();
                Ok(QPFn::from_fn(domain, move |t, y| g.eval(t, 0.5 + lam * y) / lam))
            }
            FamilyKind::Affine { base, scale, shift } => base.d_eps(scale * alpha + shift, domain),
            FamilyKind::Renormalized { base, omega } => {
                let psi = base.uncoupled(alpha, domain)?;
                apply_dt(&QPFn::from_analytic(psi.psi()), omega, &base.d_eps(alpha, domain)?)
            }
        }
    }
}

fn check_modes(forcing: &Forcing, domain: &DomainConfig) -> Result<()> {
    if forcing.max_k() > domain.n_fourier {
        return Err(Error::Truncation { k: forcing.max_k(), max: domain.n_fourier });
    }
    Ok(())
}

/// `lambda = alpha / 4 - 1/2`, the half-width of the physical interval that
/// the normalized coordinate `y in [-1, 1]` covers.
fn scale_lambda(alpha: f64) -> Result<f64> {
    let lam = alpha / 4.0 - 0.5;
    if lam <= super::TOL_A {
        return Err(Error::DegenerateScaling { a: lam });
    }
    Ok(lam)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_logistic_is_conjugate() {
        let fam = FamilySpec::forced_logistic("flm", Forcing::cos(1).term(vec![0.0, 1.0], Trig::Sin, 2));
        let d = DomainConfig::default();
        let (alpha, eps) = (3.3, 1e-3);
        let c = fam.normalized(alpha, eps, d).unwrap();
        let lam = alpha / 4.0 - 0.5;
        let fib = fam.physical_fiber(alpha, eps).unwrap();
        for (t, y) in [(0.1, 0.4), (0.77, -0.95)] {
            let x = 0.5 + lam * y;
            let want = (fib.eval_dx(t, x).0 - 0.5) / lam;
            assert!((c.eval(t, y).unwrap() - want).abs() < 1e-13);
        }
    }

    #[test]
    fn parameter_derivatives() {
        let fam = FamilySpec::forced_logistic("flm", Forcing::cos(1));
        let d = DomainConfig::default();
        let h = 1e-6;
        let u = fam.d_alpha(3.4, d).unwrap();
        let fd = fam
            .normalized(3.4 + h, 0.0, d)
            .unwrap()
            .project_p0()
            .sub(&fam.normalized(3.4 - h, 0.0, d).unwrap().project_p0())
            .scale(0.5 / h);
        assert!(fd.sub(&u).sup_norm() < 1e-8);
        let v = fam.d_eps(3.4, d).unwrap();
        let lam = 3.4 / 4.0 - 0.5;
        assert!((v.eval(0.0, 0.3).unwrap() - 1.0 / lam).abs() < 1e-13);
    }

    #[test]
    fn forcing_derivative() {
        let f = Forcing::default().term(vec![1.0, 2.0, 3.0], Trig::Cos, 0);
        let (v, d) = f.eval_dx(0.0, 0.5);
        assert!((v - 2.75).abs() < 1e-15 && (d - 5.0).abs() < 1e-15);
    }
}

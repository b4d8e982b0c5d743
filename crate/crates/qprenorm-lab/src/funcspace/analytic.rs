use num_complex::Complex;

use super::{cheb, DomainConfig, Real};
use crate::error::{Error, Result};

/// Real-analytic function of `x` on `I`, stored as Chebyshev-T coefficients
/// in the scaled variable `t = x / (1 + delta_dom)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticFn<T: Real = f64> {
    coeffs: Vec<T>,
    domain: DomainConfig,
}

impl<T: Real> AnalyticFn<T> {
    pub fn zeros(domain: DomainConfig) -> Self {
        AnalyticFn { coeffs: vec![T::zero(); domain.n_cheb], domain }
    }

    /// Build from coefficients; shorter vectors are zero padded.
    pub fn from_coeffs(domain: DomainConfig, mut coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() > domain.n_cheb {
            return Err(Error::Invalid(format!(
                "{} coefficients for n_cheb = {}",
                coeffs.len(),
                domain.n_cheb
            )));
        }
        coeffs.resize(domain.n_cheb, T::zero());
        Ok(AnalyticFn { coeffs, domain })
    }

    pub fn from_node_values(domain: DomainConfig, vals: &[T]) -> Self {
        assert_eq!(vals.len(), domain.n_cheb, "node count mismatch");
        AnalyticFn { coeffs: cheb::values_to_coeffs(vals), domain }
    }

    pub fn from_fn(domain: DomainConfig, f: impl Fn(T) -> T) -> Self {
        let vals: Vec<T> = Self::node_points(&domain).into_iter().map(f).collect();
        Self::from_node_values(domain, &vals)
    }

    pub fn try_from_fn(domain: DomainConfig, mut f: impl FnMut(T) -> Result<T>) -> Result<Self> {
        let mut vals = Vec::with_capacity(domain.n_cheb);
        for x in Self::node_points(&domain) {
            vals.push(f(x)?);
        }
        Ok(Self::from_node_values(domain, &vals))
    }

    /// Polynomial `sum_i m[i] x^i`.
    pub fn polynomial(domain: DomainConfig, monomials: &[T]) -> Self {
        Self::from_fn(domain, |x| monomials.iter().rev().fold(T::zero(), |acc, &c| acc * x + c))
    }

    pub fn constant(domain: DomainConfig, c: T) -> Self {
        let mut f = Self::zeros(domain);
        f.coeffs[0] = c;
        f
    }

    /// Interpolation nodes in `x`.
    pub fn node_points(domain: &DomainConfig) -> Vec<T> {
        let l = T::lit(domain.half_width());
        cheb::nodes::<T>(domain.n_cheb).into_iter().map(|t| t * l).collect()
    }

    pub fn nodes(&self) -> Vec<T> {
        Self::node_points(&self.domain)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn domain(&self) -> &DomainConfig {
        &self.domain
    }

    pub fn half_width(&self) -> T {
        T::lit(self.domain.half_width())
    }

    pub fn eval(&self, x: T) -> Result<T> {
        let xf = x.to_f64().unwrap_or(f64::NAN);
        if !self.domain.contains(xf) {
            return Err(Error::Domain { x: xf, half_width: self.domain.half_width() });
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation without the domain check (extrapolates the series).
    pub fn eval_unchecked(&self, x: T) -> T {
        cheb::clenshaw(&self.coeffs, x / self.half_width())
    }

    /// Evaluation of the series continued to the complex plane.
    pub fn eval_complex(&self, z: Complex<T>) -> Complex<T> {
        cheb::clenshaw_complex(&self.coeffs, z / self.half_width())
    }

    pub fn node_values(&self) -> Vec<T> {
        self.nodes().into_iter().map(|x| self.eval_unchecked(x)).collect()
    }

    pub fn derivative(&self) -> Self {
        let mut d = cheb::derivative_coeffs(&self.coeffs);
        let inv_l = T::one() / self.half_width();
        d.iter_mut().for_each(|c| *c = *c * inv_l);
        AnalyticFn { coeffs: d, domain: self.domain }
    }

    /// `|c_last| / max |c_k|`, the truncation diagnostic.
    pub fn tail_ratio(&self) -> T {
        let max = self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()));
        if max == T::zero() {
            return T::zero();
        }
        let last = self.coeffs.iter().rev().take(2).fold(T::zero(), |m, c| m.max(c.abs()));
        last / max
    }

    /// Largest mismatch between the series at the nodes and supplied node values.
    pub fn interpolation_residual(&self, vals: &[T]) -> T {
        self.node_values()
            .iter()
            .zip(vals)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    pub fn norm_l2(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |s, c| s + *c * *c).sqrt()
    }

    /// Maximum of `|f|` over `4 n_cheb` Chebyshev-Lobatto points of `I`.
    pub fn sup_norm(&self) -> T {
        let l = self.half_width();
        cheb::lobatto::<T>(4 * self.domain.n_cheb)
            .into_iter()
            .fold(T::zero(), |m, t| m.max(self.eval_unchecked(t * l).abs()))
    }

    pub fn scale(&self, s: T) -> Self {
        self.map_coeffs(|c| c * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_coeffs(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_coeffs(other, |a, b| a - b)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: T, other: &Self) -> Self {
        self.zip_coeffs(other, |a, b| a + s * b)
    }

    /// Zero every coefficient below `rel_tol * max |c_k|`. Used before
    /// evaluating off the real axis, where rounding noise in the tail is amplified.
    pub fn chopped(&self, rel_tol: T) -> Self {
        let max = self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()));
        self.map_coeffs(|c| if c.abs() < rel_tol * max { T::zero() } else { c })
    }

    /// Even part, obtained by pinning odd coefficients to zero.
    pub fn even_part(&self) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().skip(1).step_by(2).for_each(|c| *c = T::zero());
        out
    }

    pub fn map_coeffs(&self, f: impl Fn(T) -> T) -> Self {
        AnalyticFn { coeffs: self.coeffs.iter().map(|&c| f(c)).collect(), domain: self.domain }
    }

    fn zip_coeffs(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(self.coeffs.len(), other.coeffs.len(), "mixed Chebyshev orders");
        AnalyticFn {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f(a, b)).collect(),
            domain: self.domain,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom() -> DomainConfig {
        DomainConfig::default()
    }

    #[test]
    fn polynomial_evaluation_and_derivative() {
        let f = AnalyticFn::<f64>::polynomial(dom(), &[1.0, 0.0, -1.5, 0.0, 0.1]);
        for x in [-1.1f64, -0.4, 0.0, 0.9, 1.1] {
            let exact = 1.0 - 1.5 * x * x + 0.1 * x.powi(4);
            assert!((f.eval(x).unwrap() - exact).abs() < 1e-14);
            let dexact = -3.0 * x + 0.4 * x.powi(3);
            let err = (f.derivative().eval(x).unwrap() - dexact).abs();
            assert!(err < 5e-13, "x = {x}: derivative error {err:e}");
        }
    }

    #[test]
    fn eval_outside_domain_is_an_error() {
        let f = AnalyticFn::<f64>::constant(dom(), 1.0);
        assert!(matches!(f.eval(1.2), Err(Error::Domain { .. })));
        assert!(f.eval(-1.1).is_ok());
    }

    #[test]
    fn nodes_reproduce_interpolated_values() {
        let f = AnalyticFn::from_fn(dom(), |x: f64| (0.7 * x).sin() + x.cosh());
        let vals: Vec<f64> = f.nodes().iter().map(|&x| (0.7 * x).sin() + x.cosh()).collect();
        assert!(f.interpolation_residual(&vals) < super::super::TOL_INTERP);
        assert!(f.tail_ratio() < 1e-14);
    }

    #[test]
    fn sup_norm_attains_endpoint() {
        let f = AnalyticFn::<f64>::polynomial(dom(), &[0.0, 1.0]);
        assert!((f.sup_norm() - 1.1).abs() < 1e-15);
    }

    #[test]
    fn generic_f32_instance() {
        let f = AnalyticFn::<f32>::polynomial(dom().with_n_cheb(12), &[0.5, 0.0, 2.0]);
        assert!((f.eval(0.5f32).unwrap() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn complex_evaluation_matches_polynomial() {
        let f = AnalyticFn::polynomial(dom(), &[1.0, 0.0, -2.0]);
        let z = Complex::new(0.3, 0.8);
        let exact = Complex::new(1.0, 0.0) - z * z * 2.0;
        let err = (f.chopped(1e-14).eval_complex(z) - exact).norm();
        assert!(err < 1e-13, "complex error {err:e}");
    }
}

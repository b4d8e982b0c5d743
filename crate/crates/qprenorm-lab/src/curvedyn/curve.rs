use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::funcspace::{cheb, QPFn};
use crate::renorm1d::{PhysicalFiber, UnimodalMap};
use crate::rotation::RotationNumber;

/// Fiber map `x -> f(theta, x)` of a skew product over the rotation.
pub trait FiberMap: Sync {
    /// Value and `d/dx`.
    fn eval_dx(&self, theta: f64, x: f64) -> (f64, f64);
    fn in_range(&self, x: f64) -> bool;
}

/// Cached evaluator of a [`QPFn`] with its `x`-derivative.
#[derive(Clone, Debug)]
pub struct QPFiber {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
    dre: Vec<Vec<f64>>,
    dim: Vec<Vec<f64>>,
    l: f64,
}

impl QPFiber {
    pub fn new(f: &QPFn) -> Self {
        let l = f.domain().half_width();
        let re: Vec<Vec<f64>> = f.modes().iter().map(|m| m.iter().map(|c| c.re).collect()).collect();
        let im: Vec<Vec<f64>> = f.modes().iter().map(|m| m.iter().map(|c| c.im).collect()).collect();
        let d = |v: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            v.iter().map(|c| cheb::derivative_coeffs(c).into_iter().map(|a| a / l).collect()).collect()
        };
        QPFiber { dre: d(&re), dim: d(&im), re, im, l }
    }
}

impl FiberMap for QPFiber {
    fn eval_dx(&self, theta: f64, x: f64) -> (f64, f64) {
        let t = x / self.l;
        let step = Complex64::from_polar(1.0, 2.0 * PI * theta);
        let mut e = Complex64::new(1.0, 0.0);
        let (mut v, mut d) = (0.0, 0.0);
        for k in 0..self.re.len() {
            let w = if k == 0 { 1.0 } else { 2.0 };
            let cv = Complex64::new(cheb::clenshaw(&self.re[k], t), cheb::clenshaw(&self.im[k], t));
            let cd = Complex64::new(cheb::clenshaw(&self.dre[k], t), cheb::clenshaw(&self.dim[k], t));
            v += w * (cv * e).re;
            d += w * (cd * e).re;
            e *= step;
        }
        (v, d)
    }

    fn in_range(&self, x: f64) -> bool {
        x.abs() <= self.l * (1.0 + 1e-13)
    }
}

impl FiberMap for UnimodalMap {
    fn eval_dx(&self, _theta: f64, x: f64) -> (f64, f64) {
        let t = x / self.domain().half_width();
        let c = self.psi().coeffs();
        let d = cheb::derivative_coeffs(c);
        (cheb::clenshaw(c, t), cheb::clenshaw(&d, t) / self.domain().half_width())
    }

    fn in_range(&self, x: f64) -> bool {
        self.domain().contains(x)
    }
}

impl FiberMap for PhysicalFiber {
    fn eval_dx(&self, theta: f64, x: f64) -> (f64, f64) {
        PhysicalFiber::eval_dx(self, theta, x)
    }

    /// Physical maps act on `[0, 1]`; a unit margin is tolerated.
    fn in_range(&self, x: f64) -> bool {
        (x - 0.5).abs() <= 1.5
    }
}

const LOG_FLOOR: f64 = -1e3;

fn log_abs(d: f64) -> f64 {
    if d == 0.0 {
        LOG_FLOOR
    } else {
        d.abs().ln().max(LOG_FLOOR)
    }
}

/// End point, derivative product and `log |product|` of `n` steps from `(theta, x)`.
pub(crate) fn orbit(f: &impl FiberMap, omega: &RotationNumber, n: u64, theta: f64, x: f64) -> Result<(f64, f64, f64)> {
    let mut x = x;
    let mut prod = 1.0;
    let mut logp = 0.0;
    for j in 0..n {
        let th = theta + omega.multiple(j);
        if !x.is_finite() || !f.in_range(x) {
            return Err(Error::Escape { step: j as usize, x });
        }
        let (y, d) = f.eval_dx(th, x);
        prod *= d;
        logp += log_abs(d);
        x = y;
    }
    if !x.is_finite() || !f.in_range(x) {
        return Err(Error::Escape { step: n as usize, x });
    }
    Ok((x, prod, logp))
}

/// `f^n(theta, x)` by forward recursion.
pub fn iterate_fiber(f: &impl FiberMap, omega: &RotationNumber, n: u64, theta: f64, x: f64) -> Result<f64> {
    orbit(f, omega, n, theta, x).map(|o| o.0)
}

#[derive(Clone, Debug)]
pub struct CurveOptions {
    pub m: usize,
    pub tol: f64,
    pub max_picard: usize,
    pub max_newton: usize,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions { m: 512, tol: 1e-11, max_picard: 60, max_newton: 20 }
    }
}

/// `2^n`-periodic invariant curve on the uniform grid `theta_i = i / M`.
#[derive(Clone, Debug)]
pub struct InvariantCurve {
    pub period_log2: u32,
    pub omega: RotationNumber,
    pub samples: Vec<f64>,
    pub lyapunov: f64,
    pub residual: f64,
    /// `log |prod D_x f|` over one period from each grid point.
    pub log_products: Vec<f64>,
}

impl InvariantCurve {
    pub fn thetas(&self) -> Vec<f64> {
        let m = self.samples.len();
        (0..m).map(|i| i as f64 / m as f64).collect()
    }
}

/// `x(theta_i - s)` for the trigonometric interpolant of the samples.
fn shift(x: &[f64], s: f64) -> Vec<f64> {
    let m = x.len();
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(m).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        if 2 * k == m {
            *c *= (PI * m as f64 * s).cos();
        } else {
            let kk = if 2 * k < m { k as f64 } else { k as f64 - m as f64 };
            *c *= Complex64::from_polar(1.0, -2.0 * PI * kk * s);
        }
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    buf.iter().map(|c| c.re / m as f64).collect()
}

/// Solves `x(theta + N omega) = f^N(theta, x(theta))`, `N = 2^n`, by
/// fixed-point iteration followed by Newton on the grid values.
pub fn solve_invariant_curve(
    f: &impl FiberMap,
    omega: &RotationNumber,
    n: u32,
    guess: &[f64],
    opts: &CurveOptions,
) -> Result<InvariantCurve> {
    let m = opts.m;
    if guess.len() != m && guess.len() != 1 {
        return Err(Error::Mismatch("guess length differs from the grid size"));
    }
    let big_n = 1u64 << n;
    let s = omega.multiple(big_n);
    let start: Vec<f64> = (0..m).map(|i| i as f64 / m as f64 - s).collect();
    let mut x: Vec<f64> = if guess.len() == 1 { vec![guess[0]; m] } else { guess.to_vec() };

    let image = |x: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
        let sx = shift(x, s);
        let mut y = vec![0.0; m];
        let mut p = vec![0.0; m];
        for i in 0..m {
            let (v, d, _) = orbit(f, omega, big_n, start[i], sx[i])?;
            y[i] = v;
            p[i] = d;
        }
        Ok((y, p))
    };
    let max_diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);

    let mut res = f64::INFINITY;
    for _ in 0..opts.max_picard {
        let (y, _) = image(&x)?;
        res = max_diff(&x, &y);
        x = y;
        if res <= 0.1 * opts.tol {
            break;
        }
    }
    if res > 0.1 * opts.tol {
        let sigma = shift(&{
            let mut e = vec![0.0; m];
            e[0] = 1.0;
            e
        }, s);
        for _ in 0..opts.max_newton {
            let (y, p) = image(&x)?;
            let rhs: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            res = rhs.iter().fold(0.0, |a: f64, r| a.max(r.abs()));
            if res <= 0.1 * opts.tol {
                break;
            }
            let jac = DMatrix::from_fn(m, m, |i, j| {
                let id = if i == j { 1.0 } else { 0.0 };
                id - p[i] * sigma[(i + m - j) % m]
            });
            let step = jac
                .lu()
                .solve(&nalgebra::DVector::from_vec(rhs))
                .ok_or(Error::Basin { residual: res })?;
            for (xi, si) in x.iter_mut().zip(step.iter()) {
                *xi -= si;
            }
        }
    }

    // invariance measured forward: f^N(theta_i, x_i) against x(theta_i + s)
    let ahead = shift(&x, -s);
    let mut residual: f64 = 0.0;
    let mut log_products = vec![0.0; m];
    for i in 0..m {
        let (v, _, lp) = orbit(f, omega, big_n, i as f64 / m as f64, x[i])?;
        residual = residual.max((v - ahead[i]).abs());
        log_products[i] = lp;
    }
    if !(residual <= opts.tol) {
        return Err(Error::Basin { residual });
    }
    let lyapunov = log_products.iter().sum::<f64>() / (m as f64 * big_n as f64);
    Ok(InvariantCurve { period_log2: n, omega: *omega, samples: x, lyapunov, residual, log_products })
}

/// Fiber-derivative products `G(theta_i)` along one period of a curve.
#[derive(Clone, Debug)]
pub struct DerivativeProduct {
    pub values: Vec<f64>,
}

impl DerivativeProduct {
    pub fn geometric_mean(&self) -> f64 {
        (self.values.iter().map(|v| log_abs(*v)).sum::<f64>() / self.values.len() as f64).exp()
    }
}

pub fn derivative_product(f: &impl FiberMap, omega: &RotationNumber, curve: &InvariantCurve) -> Result<DerivativeProduct> {
    if curve.omega != *omega {
        return Err(Error::Mismatch("curve was computed for another rotation number"));
    }
    let m = curve.samples.len();
    let big_n = 1u64 << curve.period_log2;
    let values = (0..m)
        .map(|i| orbit(f, omega, big_n, i as f64 / m as f64, curve.samples[i]).map(|o| o.1))
        .collect::<Result<Vec<f64>>>()?;
    Ok(DerivativeProduct { values })
}

/// `G_1`: two-step product along a period-2 curve.
pub fn g1(f: &impl FiberMap, omega: &RotationNumber, curve: &InvariantCurve) -> Result<DerivativeProduct> {
    if curve.period_log2 != 1 {
        return Err(Error::Mismatch("G1 needs a period-2 curve"));
    }
    derivative_product(f, omega, curve)
}

/// Multiplier of the 2-cycle through the critical point's basin.
pub fn g1_hat(psi: &UnimodalMap) -> Result<f64> {
    let f = |x: f64| psi.eval(x);
    let df = |x: f64| psi.psi().derivative().eval_unchecked(x);
    let mut x = 0.0;
    for _ in 0..400 {
        x = f(f(x));
        if !x.is_finite() || !psi.domain().contains(x) {
            return Err(Error::Existence("critical orbit escapes"));
        }
    }
    for _ in 0..8 {
        let g = f(f(x)) - x;
        let dg = df(f(x)) * df(x) - 1.0;
        if dg == 0.0 {
            break;
        }
        x -= g / dg;
    }
    if (f(f(x)) - x).abs() > 1e-10 {
        return Err(Error::Existence("no attracting 2-cycle"));
    }
    if (f(x) - x).abs() < 1e-8 {
        return Err(Error::Existence("orbit collapses to a fixed point"));
    }
    Ok(df(f(x)) * df(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::DomainConfig;
    use crate::renorm1d::{FamilySpec, Forcing};

    struct Additive(f64);
    impl FiberMap for Additive {
        fn eval_dx(&self, theta: f64, x: f64) -> (f64, f64) {
            (x + self.0 * (2.0 * PI * theta).cos(), 1.0)
        }
        fn in_range(&self, _x: f64) -> bool {
            true
        }
    }

    fn flm(alpha: f64, eps: f64) -> PhysicalFiber {
        FamilySpec::forced_logistic("flm", Forcing::cos(1)).physical_fiber(alpha, eps).unwrap()
    }

    #[test]
    fn iteration_examples() {
        let w = RotationNumber::golden();
        let e = 0.3;
        let f = Additive(e);
        for th in [0.0, 0.2, 0.71] {
            let want = 0.4 + e * (2.0 * PI * th).cos() + e * (2.0 * PI * (th + w.to_f64())).cos();
            assert!((iterate_fiber(&f, &w, 2, th, 0.4).unwrap() - want).abs() < 1e-15);
            assert_eq!(iterate_fiber(&f, &w, 1, th, 0.4).unwrap(), f.eval_dx(th, 0.4).0);
        }
        assert_eq!(iterate_fiber(&flm(2.0, 0.0), &w, 2, 0.3, 0.5).unwrap(), 0.5);
        assert!(matches!(iterate_fiber(&flm(4.5, 0.0), &w, 30, 0.0, 0.5), Err(Error::Escape { .. })));
    }

    #[test]
    fn uncoupled_two_cycle() {
        let a: f64 = 3.1;
        let w = RotationNumber::golden();
        let c = solve_invariant_curve(&flm(a, 0.0), &w, 1, &[0.5], &CurveOptions::default()).unwrap();
        let disc = ((a + 1.0) * (a - 3.0)).sqrt();
        let (x1, x2) = ((a + 1.0 + disc) / (2.0 * a), (a + 1.0 - disc) / (2.0 * a));
        assert!(c.samples.iter().all(|&x| (x - x1).abs() < 1e-10 || (x - x2).abs() < 1e-10));
        let g = g1(&flm(a, 0.0), &w, &c).unwrap();
        let want = -a * a + 2.0 * a + 4.0;
        assert!(g.values.iter().all(|v| (v - want).abs() < 1e-10));
        assert!((want - 0.59).abs() < 1e-12);
        assert!((g.geometric_mean() - (2.0 * c.lyapunov).exp()).abs() < 1e-8);

        let psi = FamilySpec::forced_logistic("flm", Forcing::cos(1)).uncoupled(a, DomainConfig::default()).unwrap();
        assert!((g1_hat(&psi).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn superstable_log_floor() {
        let s1 = 1.0 + 5f64.sqrt();
        let c = solve_invariant_curve(&flm(s1, 0.0), &RotationNumber::golden(), 1, &[0.5], &CurveOptions::default()).unwrap();
        assert!(c.log_products.iter().cloned().fold(f64::INFINITY, f64::min) < -30.0);
    }

    #[test]
    fn forced_curve_is_close_to_the_cycle() {
        let a: f64 = 3.1;
        let eps = 1e-5;
        let w = RotationNumber::golden();
        let opts = CurveOptions::default();
        let c0 = solve_invariant_curve(&flm(a, 0.0), &w, 1, &[0.5], &opts).unwrap();
        let c = solve_invariant_curve(&flm(a, eps), &w, 1, &[0.5], &opts).unwrap();
        let dev = c.samples.iter().zip(&c0.samples).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(dev > 0.0 && dev <= 10.0 * eps, "{dev}");
        assert!(c.residual <= 1e-11);
        assert!(c.lyapunov < 0.0);
        let g = derivative_product(&flm(a, eps), &w, &c).unwrap();
        assert!((g.geometric_mean() - (2.0 * c.lyapunov).exp()).abs() < 1e-8);
    }

    #[test]
    fn fft_shift_is_exact_for_trig_data() {
        let m = 64;
        let x: Vec<f64> = (0..m).map(|i| (2.0 * PI * 3.0 * i as f64 / m as f64).sin()).collect();
        let y = shift(&x, 0.123);
        for i in 0..m {
            let want = (2.0 * PI * 3.0 * (i as f64 / m as f64 - 0.123)).sin();
            assert!((y[i] - want).abs() < 1e-13);
        }
    }
}

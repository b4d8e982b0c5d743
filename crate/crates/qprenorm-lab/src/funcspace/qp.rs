use num_complex::Complex;
use rustfft::FftPlanner;

use super::{cheb, AnalyticFn, DomainConfig, Real};
use crate::error::{Error, Result};

/// Pair `(u, v)` of interval functions.
#[derive(Clone, Debug, PartialEq)]
pub struct PairFn<T: Real = f64> {
    pub u: AnalyticFn<T>,
    pub v: AnalyticFn<T>,
}

impl<T: Real> PairFn<T> {
    pub fn new(u: AnalyticFn<T>, v: AnalyticFn<T>) -> Self {
        assert_eq!(u.domain(), v.domain(), "pair components on different domains");
        PairFn { u, v }
    }

    pub fn zeros(domain: DomainConfig) -> Self {
        PairFn { u: AnalyticFn::zeros(domain), v: AnalyticFn::zeros(domain) }
    }

    pub fn domain(&self) -> &DomainConfig {
        self.u.domain()
    }

    pub fn norm_l2(&self) -> T {
        let a = self.u.norm_l2();
        let b = self.v.norm_l2();
        (a * a + b * b).sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        PairFn { u: self.u.scale(s), v: self.v.scale(s) }
    }

    pub fn add(&self, o: &Self) -> Self {
        PairFn { u: self.u.add(&o.u), v: self.v.add(&o.v) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        PairFn { u: self.u.sub(&o.u), v: self.v.sub(&o.v) }
    }

    /// `(u, v) -> (u cos phi - v sin phi, u sin phi + v cos phi)`.
    pub fn rotate(&self, phi: T) -> Self {
        let (s, c) = phi.sin_cos();
        PairFn { u: self.u.scale(c).axpy(-s, &self.v), v: self.u.scale(s).axpy(c, &self.v) }
    }

    /// Flat coefficient vector `[u; v]`.
    pub fn to_vec(&self) -> Vec<T> {
        self.u.coeffs().iter().chain(self.v.coeffs()).copied().collect()
    }

    pub fn from_vec(domain: DomainConfig, x: &[T]) -> Self {
        let n = domain.n_cheb;
        assert_eq!(x.len(), 2 * n);
        PairFn {
            u: AnalyticFn::from_coeffs(domain, x[..n].to_vec()).expect("length checked"),
            v: AnalyticFn::from_coeffs(domain, x[n..].to_vec()).expect("length checked"),
        }
    }
}

/// Real function on the cylinder, `f(theta, x) = sum_{|k| <= K} c_k(x) e^{2 pi i k theta}`.
/// Only `k >= 0` is stored; `c_{-k} = conj(c_k)` is implied and `c_0` is real.
#[derive(Clone, Debug, PartialEq)]
pub struct QPFn<T: Real = f64> {
    modes: Vec<Vec<Complex<T>>>,
    domain: DomainConfig,
}

fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

fn cis<T: Real>(turns: T) -> Complex<T> {
    let (s, c) = (T::lit(2.0) * T::PI() * turns).sin_cos();
    Complex::new(c, s)
}

impl<T: Real> QPFn<T> {
    pub fn zeros(domain: DomainConfig) -> Self {
        QPFn { modes: vec![vec![czero(); domain.n_cheb]; domain.n_fourier + 1], domain }
    }

    pub fn domain(&self) -> &DomainConfig {
        &self.domain
    }

    pub fn n_fourier(&self) -> usize {
        self.modes.len() - 1
    }

    /// Chebyshev coefficients (complex) of `c_k`, `0 <= k <= K`.
    pub fn mode(&self, k: usize) -> &[Complex<T>] {
        &self.modes[k]
    }

    pub fn modes(&self) -> &[Vec<Complex<T>>] {
        &self.modes
    }

    /// Build from complex mode coefficients; the imaginary part of mode 0 is dropped.
    pub fn from_modes(domain: DomainConfig, mut modes: Vec<Vec<Complex<T>>>) -> Result<Self> {
        if modes.len() > domain.n_fourier + 1 {
            return Err(Error::Truncation { k: modes.len() - 1, max: domain.n_fourier });
        }
        modes.resize(domain.n_fourier + 1, vec![czero(); domain.n_cheb]);
        for m in modes.iter_mut() {
            if m.len() > domain.n_cheb {
                return Err(Error::Invalid("mode longer than n_cheb".into()));
            }
            m.resize(domain.n_cheb, czero());
        }
        for c in modes[0].iter_mut() {
            c.im = T::zero();
        }
        Ok(QPFn { modes, domain })
    }

    /// Embedding of a theta-independent function.
    pub fn from_analytic(f: &AnalyticFn<T>) -> Self {
        let mut out = Self::zeros(*f.domain());
        for (c, &a) in out.modes[0].iter_mut().zip(f.coeffs()) {
            *c = Complex::new(a, T::zero());
        }
        out
    }

    /// `p.u(x) cos(2 pi k theta) + p.v(x) sin(2 pi k theta)`.
    pub fn from_pair(k: usize, p: &PairFn<T>) -> Result<Self> {
        let domain = *p.domain();
        if k > domain.n_fourier {
            return Err(Error::Truncation { k, max: domain.n_fourier });
        }
        let mut out = Self::zeros(domain);
        let half = T::lit(0.5);
        for (j, c) in out.modes[k].iter_mut().enumerate() {
            let (u, v) = (p.u.coeffs()[j], p.v.coeffs()[j]);
            *c = if k == 0 { Complex::new(u, T::zero()) } else { Complex::new(u * half, -v * half) };
        }
        Ok(out)
    }

    /// Spectral re-expansion of `f` sampled on `(2K+1)` uniform angles times the Chebyshev nodes.
    pub fn from_fn(domain: DomainConfig, f: impl Fn(T, T) -> T) -> Self {
        Self::try_from_fn(domain, |t, x| Ok(f(t, x))).expect("infallible")
    }

    pub fn try_from_fn(domain: DomainConfig, mut f: impl FnMut(T, T) -> Result<T>) -> Result<Self> {
        let p = domain.n_theta();
        let xs = AnalyticFn::<T>::node_points(&domain);
        let mut grid = vec![vec![T::zero(); p]; xs.len()];
        for j in 0..p {
            let theta = T::lit(j as f64) / T::lit(p as f64);
            for (i, &x) in xs.iter().enumerate() {
                grid[i][j] = f(theta, x)?;
            }
        }
        Ok(Self::from_samples(domain, &grid))
    }

    /// `grid[i][j]` holds the value at node `x_i` and angle `j / (2K+1)`.
    pub fn from_samples(domain: DomainConfig, grid: &[Vec<T>]) -> Self {
        let p = domain.n_theta();
        let kmax = domain.n_fourier;
        let fft = FftPlanner::<T>::new().plan_fft_forward(p);
        let inv_p = T::one() / T::lit(p as f64);
        // node_modes[k][i] = c_k(x_i)
        let mut node_modes = vec![vec![czero::<T>(); grid.len()]; kmax + 1];
        let mut buf = vec![czero::<T>(); p];
        for (i, row) in grid.iter().enumerate() {
            for (b, &v) in buf.iter_mut().zip(row) {
                *b = Complex::new(v, T::zero());
            }
            fft.process(&mut buf);
            for k in 0..=kmax {
                node_modes[k][i] = buf[k] * inv_p;
            }
        }
        let modes = node_modes
            .iter()
            .enumerate()
            .map(|(k, vals)| {
                let re: Vec<T> = vals.iter().map(|c| c.re).collect();
                let cr = cheb::values_to_coeffs(&re);
                let ci = if k == 0 {
                    vec![T::zero(); re.len()]
                } else {
                    let im: Vec<T> = vals.iter().map(|c| c.im).collect();
                    cheb::values_to_coeffs(&im)
                };
                cr.into_iter().zip(ci).map(|(a, b)| Complex::new(a, b)).collect()
            })
            .collect();
        QPFn { modes, domain }
    }

    /// `c_k(x)` for every stored `k`.
    pub fn mode_values(&self, x: T) -> Vec<Complex<T>> {
        let t = x / T::lit(self.domain.half_width());
        self.modes
            .iter()
            .map(|m| {
                let re: Vec<T> = m.iter().map(|c| c.re).collect();
                let im: Vec<T> = m.iter().map(|c| c.im).collect();
                Complex::new(cheb::clenshaw(&re, t), cheb::clenshaw(&im, t))
            })
            .collect()
    }

    fn sum_modes(vals: &[Complex<T>], theta: T) -> T {
        let mut acc = vals[0].re;
        let step = cis(theta);
        let mut e = step;
        for c in &vals[1..] {
            acc += T::lit(2.0) * (*c * e).re;
            e = e * step;
        }
        acc
    }

    pub fn eval(&self, theta: T, x: T) -> Result<T> {
        let xf = x.to_f64().unwrap_or(f64::NAN);
        if !self.domain.contains(xf) {
            return Err(Error::Domain { x: xf, half_width: self.domain.half_width() });
        }
        Ok(self.eval_unchecked(theta, x))
    }

    pub fn eval_unchecked(&self, theta: T, x: T) -> T {
        Self::sum_modes(&self.mode_values(x), theta)
    }

    /// Value and `d/dx` at `(theta, x)`.
    pub fn eval_with_dx(&self, theta: T, x: T) -> (T, T) {
        let t = x / T::lit(self.domain.half_width());
        let inv_l = T::one() / T::lit(self.domain.half_width());
        let mut v = Vec::with_capacity(self.modes.len());
        let mut d = Vec::with_capacity(self.modes.len());
        for m in &self.modes {
            let re: Vec<T> = m.iter().map(|c| c.re).collect();
            let im: Vec<T> = m.iter().map(|c| c.im).collect();
            v.push(Complex::new(cheb::clenshaw(&re, t), cheb::clenshaw(&im, t)));
            let dre = cheb::derivative_coeffs(&re);
            let dim = cheb::derivative_coeffs(&im);
            d.push(Complex::new(cheb::clenshaw(&dre, t), cheb::clenshaw(&dim, t)) * inv_l);
        }
        (Self::sum_modes(&v, theta), Self::sum_modes(&d, theta))
    }

    /// The interval function carried by mode `k` (real and imaginary parts).
    pub fn mode_parts(&self, k: usize) -> (AnalyticFn<T>, AnalyticFn<T>) {
        let re = self.modes[k].iter().map(|c| c.re).collect();
        let im = self.modes[k].iter().map(|c| c.im).collect();
        (
            AnalyticFn::from_coeffs(self.domain, re).expect("length"),
            AnalyticFn::from_coeffs(self.domain, im).expect("length"),
        )
    }

    /// `x`-derivative of every mode.
    pub fn dx(&self) -> Self {
        let inv_l = T::one() / T::lit(self.domain.half_width());
        let modes = self
            .modes
            .iter()
            .map(|m| {
                let re: Vec<T> = m.iter().map(|c| c.re).collect();
                let im: Vec<T> = m.iter().map(|c| c.im).collect();
                let dr = cheb::derivative_coeffs(&re);
                let di = cheb::derivative_coeffs(&im);
                dr.into_iter().zip(di).map(|(a, b)| Complex::new(a * inv_l, b * inv_l)).collect()
            })
            .collect();
        QPFn { modes, domain: self.domain }
    }

    /// Largest coefficient modulus among the modes `k >= 1`.
    pub fn theta_dependence(&self) -> T {
        self.modes[1..]
            .iter()
            .flatten()
            .fold(T::zero(), |m, c| m.max(c.norm()))
    }

    pub fn is_theta_independent(&self, tol: T) -> bool {
        self.theta_dependence() <= tol
    }

    /// Mean over the angle, `int_0^1 f(theta, x) d theta`.
    pub fn project_p0(&self) -> AnalyticFn<T> {
        self.mode_parts(0).0
    }

    /// Cosine/sine coefficients of mode `k`, `u = 2 Re c_k`, `v = -2 Im c_k`.
    pub fn project_pik(&self, k: usize) -> Result<PairFn<T>> {
        if k == 0 || k > self.n_fourier() {
            return Err(Error::Truncation { k, max: self.n_fourier() });
        }
        let (re, im) = self.mode_parts(k);
        Ok(PairFn { u: re.scale(T::lit(2.0)), v: im.scale(T::lit(-2.0)) })
    }

    /// Keep only mode `k` (and its conjugate).
    pub fn restrict_to_mode(&self, k: usize) -> Self {
        let mut out = Self::zeros(self.domain);
        out.modes[k] = self.modes[k].clone();
        out
    }

    /// `f(theta + gamma, x)`.
    pub fn shift_tgamma(&self, gamma: T) -> Self {
        let step = cis(gamma);
        let mut e = Complex::new(T::one(), T::zero());
        let modes = self
            .modes
            .iter()
            .map(|m| {
                let out = m.iter().map(|c| *c * e).collect();
                e = e * step;
                out
            })
            .collect();
        QPFn { modes, domain: self.domain }
    }

    /// Coefficient l2 norm over all modes `-K..=K`.
    pub fn norm_l2(&self) -> T {
        let mut s = T::zero();
        for (k, m) in self.modes.iter().enumerate() {
            let w = if k == 0 { T::one() } else { T::lit(2.0) };
            s += w * m.iter().fold(T::zero(), |a, c| a + c.norm_sqr());
        }
        s.sqrt()
    }

    /// Maximum of `|f|` on `4(2K+1)` uniform angles times `4 n_cheb`
    /// Chebyshev-Lobatto points of `I`.
    pub fn sup_norm(&self) -> T {
        let l = T::lit(self.domain.half_width());
        let nt = 4 * self.domain.n_theta();
        let thetas: Vec<Complex<T>> =
            (0..nt).map(|j| cis(T::lit(j as f64) / T::lit(nt as f64))).collect();
        let mut best = T::zero();
        for t in cheb::lobatto::<T>(4 * self.domain.n_cheb) {
            let vals = self.mode_values(t * l);
            for step in &thetas {
                let mut acc = vals[0].re;
                let mut e = *step;
                for c in &vals[1..] {
                    acc += T::lit(2.0) * (*c * e).re;
                    e = e * *step;
                }
                best = best.max(acc.abs());
            }
        }
        best
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|c| c * s)
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a - b)
    }

    pub fn axpy(&self, s: T, o: &Self) -> Self {
        self.zip(o, |a, b| a + b * s)
    }

    fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        QPFn {
            modes: self.modes.iter().map(|m| m.iter().map(|&c| f(c)).collect()).collect(),
            domain: self.domain,
        }
    }

    fn zip(&self, o: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Self {
        assert_eq!(self.modes.len(), o.modes.len(), "mixed Fourier truncations");
        QPFn {
            modes: self
                .modes
                .iter()
                .zip(&o.modes)
                .map(|(a, b)| {
                    assert_eq!(a.len(), b.len(), "mixed Chebyshev orders");
                    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
                })
                .collect(),
            domain: self.domain,
        }
    }
}

/// `h(theta, x) = g(theta + shift, inner(theta, scale x))`, re-expanded spectrally.
pub fn compose_fiber<T: Real>(g: &QPFn<T>, shift: T, inner: &QPFn<T>, scale: T) -> Result<QPFn<T>> {
    let domain = *g.domain();
    QPFn::try_from_fn(domain, |theta, x| {
        let sx = scale * x;
        let sxf = sx.to_f64().unwrap_or(f64::NAN);
        if !domain.contains(sxf) {
            return Err(Error::CompositionDomain {
                theta: theta.to_f64().unwrap_or(f64::NAN),
                x: x.to_f64().unwrap_or(f64::NAN),
                value: sxf,
            });
        }
        let y = inner.eval_unchecked(theta, sx);
        let yf = y.to_f64().unwrap_or(f64::NAN);
        if !domain.contains(yf) {
            return Err(Error::CompositionDomain {
                theta: theta.to_f64().unwrap_or(f64::NAN),
                x: x.to_f64().unwrap_or(f64::NAN),
                value: yf,
            });
        }
        Ok(g.eval_unchecked(theta + shift, y))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dom() -> DomainConfig {
        DomainConfig::default()
    }

    #[test]
    fn eval_examples() {
        let id = QPFn::from_fn(dom(), |_, x| x);
        assert!((id.eval(0.3, 0.5).unwrap() - 0.5f64).abs() < 1e-15);
        let c = QPFn::from_fn(dom(), |t: f64, _| (2.0 * PI * t).cos());
        assert!(c.eval(0.25, 0.0).unwrap().abs() < 1e-15);
        let f = QPFn::from_fn(dom(), |t: f64, x| x * x + (2.0 * PI * t).sin());
        let oracle = 0.25 + 2f64.sqrt() / 2.0;
        assert!((f.eval(0.125, 0.5).unwrap() - oracle).abs() < 1e-14);
        assert!(matches!(f.eval(0.0, 1.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn compose_examples() {
        let d = dom();
        let g = QPFn::from_fn(d, |t: f64, x| x + (2.0 * PI * t).cos());
        let inner = QPFn::from_fn(d, |_, x| x);
        let h = compose_fiber(&g, 0.5, &inner, 0.5).unwrap();
        for (t, x) in [(0.1, 0.3), (0.7, -0.9)] {
            let want = 0.5 * x - (2.0 * PI * t).cos();
            assert!((h.eval(t, x).unwrap() - want).abs() < 1e-13);
        }
        let err = compose_fiber(&g, 0.5, &inner, 2.0).unwrap_err();
        assert!(matches!(err, Error::CompositionDomain { .. }));

        let f = QPFn::from_fn(d, |t: f64, x| 0.5 * x + 0.2 * (2.0 * PI * t).sin());
        let same = compose_fiber(&inner, 0.618, &f, 1.0).unwrap();
        assert!(same.sub(&f).norm_l2() < 1e-14);

        let a = QPFn::from_fn(d, |_, x: f64| 1.0 - 1.4 * x * x);
        let b = QPFn::from_fn(d, |_, x: f64| (0.8 * x).sin());
        let ab = compose_fiber(&a, 0.3, &b, -0.4).unwrap();
        for x in [-1.1f64, -0.2, 0.5, 1.1] {
            let y = (0.8 * -0.4 * x).sin();
            assert!((ab.eval(0.77, x).unwrap() - (1.0 - 1.4 * y * y)).abs() < 1e-14);
        }
    }

    #[test]
    fn compose_half_shift_flips_the_forcing() {
        // inner(theta, x/2) = x keeps both the argument and the value inside I.
        let d = dom();
        let g = QPFn::from_fn(d, |t: f64, x| x + (2.0 * PI * t).cos());
        let inner = QPFn::from_fn(d, |_, x| 2.0 * x);
        let h = compose_fiber(&g, 0.5, &inner, 0.5).unwrap();
        for (t, x) in [(0.2, 0.4), (0.9, -1.05)] {
            let want = x - (2.0 * PI * t).cos();
            assert!((h.eval(t, x).unwrap() - want).abs() < 1e-13);
        }
    }

    #[test]
    fn projections() {
        let d = dom();
        let f = QPFn::from_fn(d, |t: f64, x| (1.0 + (2.0 * PI * t).cos()).powi(2) * x);
        let p0 = f.project_p0();
        for x in [-1.0, 0.2, 0.8] {
            assert!((p0.eval(x).unwrap() - 1.5 * x).abs() < 1e-14);
        }
        let g = QPFn::from_fn(d, |t: f64, x| x * (4.0 * PI * t).sin());
        let p2 = g.project_pik(2).unwrap();
        let p1 = g.project_pik(1).unwrap();
        for x in [-0.5, 0.6] {
            assert!(p2.u.eval(x).unwrap().abs() < 1e-14);
            assert!((p2.v.eval(x).unwrap() - x).abs() < 1e-14);
            assert!(p1.u.eval(x).unwrap().abs() < 1e-14 && p1.v.eval(x).unwrap().abs() < 1e-14);
        }
        assert!(matches!(g.project_pik(17), Err(Error::Truncation { .. })));
    }

    #[test]
    fn shift_examples() {
        let d = dom();
        let s = QPFn::from_fn(d, |t: f64, x| (2.0 * PI * t).sin() * (1.0 + x));
        let c = QPFn::from_fn(d, |t: f64, x| (2.0 * PI * t).cos() * (1.0 + x));
        let shifted = s.shift_tgamma(0.25);
        assert!(shifted.sub(&c).norm_l2() < 1e-14);
        assert!(c.shift_tgamma(0.5).add(&c).norm_l2() < 1e-14);
        assert_eq!(c.shift_tgamma(0.0), c);
    }

    #[test]
    fn sup_norm_examples() {
        let d = dom();
        assert_eq!(QPFn::<f64>::zeros(d).sup_norm(), 0.0);
        let c = QPFn::from_fn(d, |t: f64, _| (2.0 * PI * t).cos());
        assert!((c.sup_norm() - 1.0).abs() < 1e-14);
        let f = QPFn::from_fn(d, |t: f64, x| x * (2.0 * PI * t).sin());
        // separable: max|x| * max|sin| = 1.1 * 1, attained at theta = 1/4 on the grid
        assert!((f.sup_norm() - 1.1).abs() < 1e-14);
    }

    #[test]
    fn pair_roundtrip() {
        let d = dom();
        let p = PairFn::new(AnalyticFn::polynomial(d, &[0.0, 1.0]), AnalyticFn::polynomial(d, &[1.0, 0.0, 1.0]));
        let f = QPFn::from_pair(3, &p).unwrap();
        let q = f.project_pik(3).unwrap();
        assert!(q.sub(&p).norm_l2() < 1e-15);
        let t = 0.13;
        let x = 0.4;
        let want = x * (6.0 * PI * t).cos() + (1.0 + x * x) * (6.0 * PI * t).sin();
        assert!((f.eval(t, x).unwrap() - want).abs() < 1e-14);
    }
}

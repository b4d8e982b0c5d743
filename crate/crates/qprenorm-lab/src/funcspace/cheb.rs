//! Chebyshev kernels on the reference interval [-1, 1].

use num_complex::Complex;

use super::Real;

/// Chebyshev points of the first kind, `t_j = cos(pi (j + 1/2) / n)`.
pub fn nodes<T: Real>(n: usize) -> Vec<T> {
    let pi = T::PI();
    (0..n)
        .map(|j| (pi * (T::lit(j as f64) + T::lit(0.5)) / T::lit(n as f64)).cos())
        .collect()
}

/// Chebyshev-Lobatto points `cos(pi j / (m - 1))`; both endpoints included.
pub fn lobatto<T: Real>(m: usize) -> Vec<T> {
    assert!(m >= 2);
    let pi = T::PI();
    (0..m)
        .map(|j| (pi * T::lit(j as f64) / T::lit((m - 1) as f64)).cos())
        .collect()
}

/// Coefficients of the interpolant through values at [`nodes`].
pub fn values_to_coeffs<T: Real>(vals: &[T]) -> Vec<T> {
    let n = vals.len();
    // cos(pi k (2j+1) / 2n) = table[(k (2j+1)) mod 4n]
    let four_n = 4 * n;
    let table: Vec<T> = (0..four_n)
        .map(|m| (T::PI() * T::lit(m as f64) / T::lit((2 * n) as f64)).cos())
        .collect();
    let scale = T::lit(2.0) / T::lit(n as f64);
    let mut out = vec![T::zero(); n];
    for (k, ck) in out.iter_mut().enumerate() {
        let mut acc = T::zero();
        for (j, &v) in vals.iter().enumerate() {
            acc += v * table[(k * (2 * j + 1)) % four_n];
        }
        *ck = acc * scale;
    }
    out[0] = out[0] * T::lit(0.5);
    out
}

/// Row-major `n x n` matrix of [`values_to_coeffs`].
pub fn transform_matrix(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let c = values_to_coeffs(&e);
        for k in 0..n {
            m[k * n + j] = c[k];
        }
    }
    m
}

pub fn clenshaw<T: Real>(c: &[T], t: T) -> T {
    let mut b1 = T::zero();
    let mut b2 = T::zero();
    let two_t = t + t;
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + two_t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    match c.first() {
        Some(&c0) => c0 + t * b1 - b2,
        None => T::zero(),
    }
}

pub fn clenshaw_complex<T: Real>(c: &[T], t: Complex<T>) -> Complex<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let mut b1 = zero;
    let mut b2 = zero;
    let two_t = t + t;
    for &ck in c.iter().skip(1).rev() {
        let b0 = two_t * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    match c.first() {
        Some(&c0) => t * b1 - b2 + c0,
        None => zero,
    }
}

/// Coefficients of d/dt of the series, same length (last entry zero).
pub fn derivative_coeffs<T: Real>(c: &[T]) -> Vec<T> {
    let n = c.len();
    let mut d = vec![T::zero(); n];
    if n < 2 {
        return d;
    }
    for k in (1..n).rev() {
        let dk1 = if k + 1 < n { d[k + 1] } else { T::zero() };
        d[k - 1] = dk1 + T::lit(2.0 * k as f64) * c[k];
    }
    d[0] = d[0] * T::lit(0.5);
    d
}

/// Value of `T_k(t)` for all `k < n`.
pub fn basis_values<T: Real>(n: usize, t: T) -> Vec<T> {
    let mut out = vec![T::zero(); n];
    if n == 0 {
        return out;
    }
    out[0] = T::one();
    if n > 1 {
        out[1] = t;
    }
    for k in 2..n {
        out[k] = T::lit(2.0) * t * out[k - 1] - out[k - 2];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_reproduces_polynomial() {
        let t = nodes::<f64>(12);
        let vals: Vec<f64> = t.iter().map(|&x| 3.0 * x * x * x - x + 0.5).collect();
        let c = values_to_coeffs(&vals);
        // 3t^3 - t + 1/2 = 0.75 T3 + 1.25 T1 + 0.5 T0
        assert!((c[0] - 0.5).abs() < 1e-15);
        assert!((c[1] - 1.25).abs() < 1e-15);
        assert!((c[3] - 0.75).abs() < 1e-15);
        for x in [-1.0, -0.3, 0.7, 1.0] {
            assert!((clenshaw(&c, x) - (3.0 * x * x * x - x + 0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_of_t4() {
        let mut c = vec![0.0; 6];
        c[4] = 1.0;
        let d = derivative_coeffs(&c);
        // T4' = 8 T3 + 8 T1
        assert_eq!(d, vec![0.0, 8.0, 0.0, 8.0, 0.0, 0.0]);
    }

    #[test]
    fn complex_clenshaw_agrees_on_real_axis() {
        let c = [0.3f64, -0.2, 0.7, 0.1];
        let z = clenshaw_complex(&c, Complex::new(0.4, 0.0));
        assert!((z.re - clenshaw(&c, 0.4)).abs() < 1e-15 && z.im == 0.0);
    }

    #[test]
    fn lobatto_has_endpoints() {
        let p = lobatto::<f64>(9);
        assert_eq!(p[0], 1.0);
        assert_eq!(p[8], -1.0);
    }
}

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Real trigonometric polynomial `c_0 + 2 Re sum_{k >= 1} c_k e^{2 pi i k theta}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    pub coeffs: Vec<Complex64>,
}

impl TrigPoly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        coeffs[0].im = 0.0;
        TrigPoly { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        TrigPoly::new(vec![Complex64::new(c, 0.0)])
    }

    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| c.norm() > 0.0)
            .unwrap_or(0)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let step = Complex64::from_polar(1.0, 2.0 * PI * theta);
        let mut e = step;
        let mut acc = self.coeffs[0].re;
        for c in &self.coeffs[1..] {
            acc += 2.0 * (c * e).re;
            e *= step;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * Complex64::new(0.0, 2.0 * PI * k as f64))
            .collect();
        TrigPoly { coeffs }
    }

    /// `p(theta + gamma)`.
    pub fn shift(&self, gamma: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * Complex64::from_polar(1.0, 2.0 * PI * k as f64 * gamma))
            .collect();
        TrigPoly { coeffs }
    }

    pub fn scale(&self, s: f64) -> Self {
        TrigPoly { coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn sample(&self, m: usize) -> Vec<f64> {
        (0..m).map(|i| self.eval(i as f64 / m as f64)).collect()
    }

    /// Trigonometric interpolant of samples on the uniform grid `theta_i = i / M`.
    pub fn from_grid(values: &[f64]) -> Self {
        let m = values.len();
        assert!(m > 0);
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(m).process(&mut buf);
        let half = m / 2;
        let mut coeffs: Vec<Complex64> = buf[..=half.min(m - 1)].iter().map(|c| c / m as f64).collect();
        if m % 2 == 0 && half > 0 {
            // Nyquist term enters as a real cosine
            coeffs[half] = Complex64::new(coeffs[half].re / 2.0, 0.0);
        }
        TrigPoly::new(coeffs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtremumKind {
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extremum {
    pub value: f64,
    pub theta: f64,
    /// Second derivative of the interpolant at `theta`.
    pub curvature: f64,
    /// Plateau, flat or non-unique extremum.
    pub degenerate: bool,
}

const GRID_MIN: usize = 512;

/// Extremum of a trigonometric polynomial: grid search, three-point
/// quadratic refinement, then Newton on `p' = 0`.
pub fn extremum(p: &TrigPoly, kind: ExtremumKind) -> Extremum {
    let m = GRID_MIN.max(8 * p.coeffs.len());
    let grid = p.sample(m);
    extremum_on(p, &grid, kind)
}

/// Minimum of a grid function on `theta_i = i / M`.
pub fn extremum_m(g: &[f64]) -> Extremum {
    extremum_on(&TrigPoly::from_grid(g), g, ExtremumKind::Min)
}

/// Maximum of a grid function on `theta_i = i / M`.
pub fn extremum_big_m(g: &[f64]) -> Extremum {
    extremum_on(&TrigPoly::from_grid(g), g, ExtremumKind::Max)
}

fn extremum_on(p: &TrigPoly, grid: &[f64], kind: ExtremumKind) -> Extremum {
    let sgn = match kind {
        ExtremumKind::Min => 1.0,
        ExtremumKind::Max => -1.0,
    };
    let m = grid.len();
    let h = 1.0 / m as f64;
    let g = |i: usize| sgn * grid[i % m];
    let i0 = (0..m).min_by(|&a, &b| g(a).total_cmp(&g(b))).unwrap_or(0);
    let lo = g(i0);
    let hi = (0..m).map(g).fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    let scale = hi.abs().max(lo.abs()).max(1e-300);
    if range <= 1e-12 * scale {
        return Extremum { value: sgn * lo, theta: i0 as f64 * h, curvature: 0.0, degenerate: true };
    }

    let (gm, g0, gp) = (g(i0 + m - 1), g(i0), g(i0 + 1));
    let denom = gm - 2.0 * g0 + gp;
    let off = if denom > 0.0 { 0.5 * h * (gm - gp) / denom } else { 0.0 };
    let mut theta = i0 as f64 * h + off.clamp(-h, h);

    let dp = p.derivative();
    let ddp = dp.derivative();
    let anchor = theta;
    for _ in 0..30 {
        let d2 = ddp.eval(theta);
        if d2 * sgn <= 0.0 {
            break;
        }
        let step = dp.eval(theta) / d2;
        let next = theta - step;
        if (next - anchor).abs() > 2.0 * h {
            break;
        }
        theta = next;
        if step.abs() < 1e-15 {
            break;
        }
    }
    let curvature = ddp.eval(theta);
    let value = p.eval(theta);

    // another well separated grid extremum at the same level
    let tol = 1e-9 * range;
    let rival = (0..m).any(|i| {
        let dist = (i as isize - i0 as isize).rem_euclid(m as isize).min((i0 as isize - i as isize).rem_euclid(m as isize));
        dist > 2 && g(i) <= g(i + m - 1) && g(i) <= g(i + 1) && g(i) - lo <= tol
    });
    let flat = (curvature * sgn) <= 1e-6 * range;
    Extremum { value, theta: theta.rem_euclid(1.0), curvature, degenerate: rival || flat }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos_poly(c: &[(usize, f64)]) -> TrigPoly {
        let n = c.iter().map(|p| p.0).max().unwrap_or(0);
        let mut v = vec![Complex64::new(0.0, 0.0); n + 1];
        for &(k, a) in c {
            if k == 0 {
                v[0].re += a;
            } else {
                v[k].re += a / 2.0;
            }
        }
        TrigPoly::new(v)
    }

    #[test]
    fn simple_extrema() {
        let g = cos_poly(&[(0, 2.0), (1, 1.0)]).sample(512);
        let m = extremum_m(&g);
        let big = extremum_big_m(&g);
        assert!((m.value - 1.0).abs() < 1e-14 && !m.degenerate);
        assert!((m.theta - 0.5).abs() < 1e-12);
        assert!((big.value - 3.0).abs() < 1e-14 && !big.degenerate);

        let flat = vec![0.7; 512];
        let m = extremum_m(&flat);
        assert_eq!(m.value, 0.7);
        assert!(m.degenerate);
        assert_eq!(extremum_big_m(&flat).value, 0.7);
    }

    #[test]
    fn refinement_beats_grid() {
        let p = cos_poly(&[(1, 1.0), (2, 0.3)]);
        let g = p.sample(64);
        let grid_min = g.iter().cloned().fold(f64::INFINITY, f64::min);
        let m = extremum_m(&g);
        assert!(m.value < grid_min);
        // cos(2 pi theta) = -5/6 at the minimum
        assert!((m.value + 0.7166666666666667).abs() < 1e-13);

        // dense-grid oracle with the same quadratic polish, no interpolant
        let n = 1 << 16;
        let dense = p.sample(n);
        let i = (0..n).min_by(|&a, &b| dense[a].total_cmp(&dense[b])).unwrap();
        let (a, b, c) = (dense[(i + n - 1) % n], dense[i], dense[(i + 1) % n]);
        let oracle = b - (a - c).powi(2) / (8.0 * (a - 2.0 * b + c));
        assert!((m.value - oracle).abs() < 1e-9);
    }

    #[test]
    fn double_well_is_degenerate() {
        let p = cos_poly(&[(2, 1.0)]);
        assert!(extremum(&p, ExtremumKind::Min).degenerate);
        assert!(extremum(&cos_poly(&[(1, 1.0), (2, 0.3)]), ExtremumKind::Min).degenerate);
        assert!(!extremum(&cos_poly(&[(1, 1.0), (2, 0.2)]), ExtremumKind::Min).degenerate);
    }

    #[test]
    fn grid_roundtrip_and_shift() {
        let p = TrigPoly::new(vec![Complex64::new(0.2, 0.0), Complex64::new(0.3, -0.1), Complex64::new(0.0, 0.05)]);
        let q = TrigPoly::from_grid(&p.sample(16));
        for t in [0.0, 0.13, 0.77] {
            assert!((p.eval(t) - q.eval(t)).abs() < 1e-14);
            assert!((p.shift(0.31).eval(t) - p.eval(t + 0.31)).abs() < 1e-14);
        }
        let a = extremum(&p, ExtremumKind::Min);
        let b = extremum(&p.shift(0.31), ExtremumKind::Min);
        assert!((a.value - b.value).abs() < 1e-14);
    }
}

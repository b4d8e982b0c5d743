use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvedyn::{slope_formula, FixedPointTail, SlopeMode, SlopeOptions, SlopeReport};
use crate::error::{Error, Result};
use crate::renorm1d::FamilySpec;
use crate::rotation::RotationNumber;

/// Least-squares fit of `log e_n = log k0 + n log rho` to the tail envelope
/// `e_n = max_{m >= n} |r_m - s_m|`. The envelope obeys `e_n <= k0 rho^n` exactly
/// when the differences do, and isolated near-cancellations do not bias it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceFit {
    pub rho_hat: f64,
    pub k0_hat: f64,
    /// `(n, log10 residual)` of each fitted envelope point.
    pub residuals: Vec<(usize, f64)>,
    /// Decades of fitted decay across the window.
    pub decades: f64,
    /// Every difference vanished.
    pub identical: bool,
}

/// Largest allowed spread of the log residuals, and smallest fitted decay, in decades.
pub const MAX_SPREAD: f64 = 1.0;

impl EquivalenceFit {
    pub fn from_differences(diffs: &[(usize, f64)]) -> Result<Self> {
        if diffs.iter().any(|d| !d.1.is_finite()) {
            return Err(Error::Invalid("non-finite difference".into()));
        }
        let mut sorted: Vec<(usize, f64)> = diffs.iter().map(|&(n, d)| (n, d.abs())).collect();
        sorted.sort_by_key(|d| d.0);
        let mut env = sorted.clone();
        for i in (0..env.len().saturating_sub(1)).rev() {
            env[i].1 = env[i].1.max(env[i + 1].1);
        }
        let pts: Vec<(usize, f64)> = env.into_iter().filter(|d| d.1 > 0.0).collect();
        if pts.is_empty() && !diffs.is_empty() {
            return Ok(EquivalenceFit { rho_hat: 0.0, k0_hat: 0.0, residuals: vec![], decades: f64::INFINITY, identical: true });
        }
        if pts.len() < 2 {
            return Err(Error::Invalid("need at least two nonzero differences".into()));
        }
        let m = pts.len() as f64;
        let xy: Vec<(f64, f64)> = pts.iter().map(|&(n, d)| (n as f64, d.ln())).collect();
        let (sx, sy) = xy.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mx, my) = (sx / m, sy / m);
        let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        let icpt = my - slope * mx;
        let residuals = pts
            .iter()
            .zip(&xy)
            .map(|(&(n, _), &(x, y))| (n, (y - icpt - slope * x) / std::f64::consts::LN_10))
            .collect();
        let width = (pts[pts.len() - 1].0 - pts[0].0) as f64;
        Ok(EquivalenceFit {
            rho_hat: slope.exp(),
            k0_hat: icpt.exp(),
            residuals,
            decades: -slope * width / std::f64::consts::LN_10,
            identical: false,
        })
    }

    pub fn spread(&self) -> f64 {
        let (lo, hi) = self.residuals.iter().fold((0.0f64, 0.0f64), |a, r| (a.0.min(r.1), a.1.max(r.1)));
        hi - lo
    }

    /// `0 < rho_hat < 1`, residual spread under a decade, and at least a
    /// decade of fitted decay so that a flat floor is not read as convergence.
    pub fn passes(&self) -> bool {
        self.identical
            || (self.rho_hat > 0.0 && self.rho_hat < 1.0 && self.spread() < MAX_SPREAD && self.decades >= MAX_SPREAD)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientSequence {
    pub entries: Vec<(usize, f64)>,
    pub family: String,
    pub omega0: f64,
    pub mode: SlopeMode,
}

impl QuotientSequence {
    /// `q_n = num(n) / den(n - 1)` over the common range.
    pub fn from_slopes(num: &[(usize, f64)], den: &[(usize, f64)], family: &str, omega0: f64, mode: SlopeMode) -> Result<Self> {
        let mut entries = Vec::new();
        for &(n, a) in num {
            if let Some(&(_, b)) = den.iter().find(|d| d.0 + 1 == n) {
                let q = a / b;
                if !q.is_finite() {
                    return Err(Error::Inconsistency { what: "quotient", a, b });
                }
                entries.push((n, q));
            }
        }
        Ok(QuotientSequence { entries, family: family.into(), omega0, mode })
    }

    pub fn get(&self, n: usize) -> Option<f64> {
        self.entries.iter().find(|e| e.0 == n).map(|e| e.1)
    }

    /// `|q_n - p_n|` over the common range.
    pub fn differences(&self, other: &QuotientSequence) -> Vec<(usize, f64)> {
        self.entries.iter().filter_map(|&(n, q)| other.get(n).map(|p| (n, (q - p).abs()))).collect()
    }
}

/// Rejects rotation numbers that fail the stored Diophantine condition.
pub fn diophantine_gate(omega: &RotationNumber) -> Result<()> {
    omega.verify_diophantine()
}

/// Slope reports for `n in ns`, computed in parallel and returned in order.
pub fn slope_runs(
    family: &FamilySpec,
    omega0: &RotationNumber,
    ns: std::ops::RangeInclusive<usize>,
    mode: SlopeMode,
    tail: Option<&FixedPointTail>,
    opts: &SlopeOptions,
) -> Result<Vec<SlopeReport>> {
    let ns: Vec<usize> = ns.collect();
    ns.par_iter().map(|&n| slope_formula(family, omega0, n, mode, tail, opts)).collect()
}

pub fn alpha_primes(reports: &[SlopeReport]) -> Vec<(usize, f64)> {
    reports.iter().map(|r| (r.n, r.alpha_prime)).collect()
}

/// `alpha'_n / alpha'_{n-1}` for `n = 2..=n_max`.
pub fn slope_quotients(
    family: &FamilySpec,
    omega0: &RotationNumber,
    n_max: usize,
    mode: SlopeMode,
    tail: Option<&FixedPointTail>,
    opts: &SlopeOptions,
) -> Result<QuotientSequence> {
    let a = alpha_primes(&slope_runs(family, omega0, 1..=n_max, mode, tail, opts)?);
    QuotientSequence::from_slopes(&a, &a, &family.name, omega0.to_f64(), mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_planted_rate() {
        let d: Vec<(usize, f64)> = (2..=12).map(|n| (n, 0.7 * 0.45f64.powi(n as i32))).collect();
        let f = EquivalenceFit::from_differences(&d).unwrap();
        assert!((f.rho_hat - 0.45).abs() < 1e-12 && (f.k0_hat - 0.7).abs() < 1e-10);
        assert!(f.passes() && f.spread() < 1e-10);
    }

    #[test]
    fn growth_and_flat_floor_fail() {
        let grow: Vec<(usize, f64)> = (2..=10).map(|n| (n, 1.3f64.powi(n as i32))).collect();
        assert!(!EquivalenceFit::from_differences(&grow).unwrap().passes());
        let flat: Vec<(usize, f64)> = (2..=10).map(|n| (n, 1e-2 * (1.0 + 0.3 * (n as f64).sin()))).collect();
        let f = EquivalenceFit::from_differences(&flat).unwrap();
        assert!(!f.passes(), "{f:?}");
        let rising: Vec<(usize, f64)> = (2..=10).map(|n| (n, 1e-2 * (1.0 + 0.01 * n as f64))).collect();
        assert!(!EquivalenceFit::from_differences(&rising).unwrap().passes());
    }

    #[test]
    fn isolated_cancellation_does_not_break_the_envelope() {
        let mut d: Vec<(usize, f64)> = (2..=10).map(|n| (n, 0.3f64.powi(n as i32))).collect();
        d[4].1 = 1e-14;
        let f = EquivalenceFit::from_differences(&d).unwrap();
        assert!(f.passes() && (f.rho_hat - 0.3).abs() < 0.05, "{f:?}");
    }

    #[test]
    fn identical_sequences_pass() {
        let f = EquivalenceFit::from_differences(&[(2, 0.0), (3, 0.0)]).unwrap();
        assert!(f.identical && f.passes());
    }

    #[test]
    fn quotient_alignment() {
        let a = [(1, 2.0), (2, 6.0), (3, 12.0)];
        let q = QuotientSequence::from_slopes(&a, &a, "x", 0.5, SlopeMode::ExactOrbit).unwrap();
        assert_eq!(q.entries, vec![(2, 3.0), (3, 2.0)]);
    }

    #[test]
    fn gate_rejects_rationals() {
        assert!(diophantine_gate(&RotationNumber::golden()).is_ok());
        let third = RotationNumber::from_ratio(1, 3).unwrap();
        assert!(matches!(diophantine_gate(&third), Err(Error::NotDiophantine { q: 3 })));
    }
}

//! Rotation numbers as 128-bit fixed-point fractions of a turn.

use std::fmt;

use crate::error::{Error, Result};

/// `floor(2^128 (sqrt(5) - 1) / 2)`.
pub const GOLDEN_FRAC: u128 = 0x9E37_79B9_7F4A_7C15_F39C_C060_5CED_C834;

/// Deepest admissible doubling chain.
pub const MAX_DEPTH: u32 = 100;

const TWO_POW_128: f64 = 340_282_366_920_938_463_463_374_607_431_768_211_456.0;

/// `frac(omega)` stored as a 128-bit fraction, with Diophantine constants
/// `|q omega - p| >= dio_gamma / q^dio_tau` checked up to `q_max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationNumber {
    frac: u128,
    depth: u32,
    pub dio_gamma: f64,
    pub dio_tau: f64,
    pub q_max: u64,
}

impl RotationNumber {
    pub fn from_bits(frac: u128) -> Self {
        RotationNumber { frac, depth: 0, dio_gamma: 0.3, dio_tau: 1.0, q_max: 4096 }
    }

    pub fn golden() -> Self {
        Self::from_bits(GOLDEN_FRAC)
    }

    /// `frac(p / q)`; `q` must be below `2^127`.
    pub fn from_ratio(p: u128, q: u128) -> Result<Self> {
        if q == 0 || q >= 1u128 << 127 {
            return Err(Error::Invalid(format!("denominator {q} out of range")));
        }
        // long division of (p mod q) / q, one bit at a time
        let mut r = p % q;
        let mut frac = 0u128;
        for _ in 0..128 {
            r <<= 1;
            frac <<= 1;
            if r >= q {
                r -= q;
                frac |= 1;
            }
        }
        Ok(Self::from_bits(frac))
    }

    pub fn from_f64(x: f64) -> Self {
        let f = x - x.floor();
        let hi = (f * 2f64.powi(64)).floor();
        let lo = ((f * 2f64.powi(64) - hi) * 2f64.powi(64)).floor();
        Self::from_bits(((hi as u128) << 64) | lo as u128)
    }

    /// Accepts `golden`, `p/q`, a decimal such as `0.25`, or a continued
    /// fraction `[a0;a1,a2,...]`.
    pub fn parse(spec: &str) -> Result<Self> {
        let s = spec.trim();
        if s.eq_ignore_ascii_case("golden") {
            return Ok(Self::golden());
        }
        let bad = || Error::Invalid(format!("cannot parse rotation number `{spec}`"));
        if let Some(body) = s.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
            let terms: Vec<u128> = body
                .split([';', ','])
                .map(|t| t.trim().parse::<u128>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad())?;
            if terms.is_empty() {
                return Err(bad());
            }
            let (mut p0, mut q0, mut p1, mut q1) = (1u128, 0u128, terms[0], 1u128);
            for &a in &terms[1..] {
                let p2 = a.checked_mul(p1).and_then(|v| v.checked_add(p0)).ok_or_else(bad)?;
                let q2 = a.checked_mul(q1).and_then(|v| v.checked_add(q0)).ok_or_else(bad)?;
                (p0, q0, p1, q1) = (p1, q1, p2, q2);
            }
            return Self::from_ratio(p1, q1);
        }
        if let Some((p, q)) = s.split_once('/') {
            let p = p.trim().parse::<u128>().map_err(|_| bad())?;
            let q = q.trim().parse::<u128>().map_err(|_| bad())?;
            return Self::from_ratio(p, q);
        }
        let (int, dec) = s.split_once('.').unwrap_or((s, ""));
        if dec.len() > 38 || !dec.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let int: u128 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let q = 10u128.pow(dec.len() as u32);
        let p: u128 = if dec.is_empty() { 0 } else { dec.parse().map_err(|_| bad())? };
        let _ = int;
        Self::from_ratio(p, q)
    }

    pub fn with_diophantine(mut self, gamma: f64, tau: f64, q_max: u64) -> Self {
        self.dio_gamma = gamma;
        self.dio_tau = tau;
        self.q_max = q_max;
        self
    }

    pub fn bits(&self) -> u128 {
        self.frac
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Fraction bits that are still exact.
    pub fn exact_bits(&self) -> u32 {
        128 - self.depth
    }

    pub fn to_f64(&self) -> f64 {
        self.frac as f64 / TWO_POW_128
    }

    /// `frac(k omega)` as a double, computed exactly in 128 bits first.
    pub fn multiple(&self, k: u64) -> f64 {
        (self.frac.wrapping_mul(k as u128)) as f64 / TWO_POW_128
    }

    /// Exact `2 omega mod 1`.
    pub fn double_mod1(&self) -> Result<Self> {
        if self.depth >= MAX_DEPTH {
            return Err(Error::PrecisionExhausted { depth: self.depth + 1 });
        }
        Ok(RotationNumber {
            frac: self.frac << 1,
            depth: self.depth + 1,
            dio_gamma: self.dio_gamma / 2f64.powf(self.dio_tau),
            ..*self
        })
    }

    /// `omega_k = 2^k omega` for `k = 0..n`.
    pub fn doubling_chain(&self, n: usize) -> Result<Vec<Self>> {
        let mut out = Vec::with_capacity(n);
        let mut w = *self;
        for k in 0..n {
            if k > 0 {
                w = w.double_mod1()?;
            }
            out.push(w);
        }
        Ok(out)
    }

    /// Distance from `q omega` to the nearest integer.
    pub fn dist_to_int(&self, q: u64) -> f64 {
        let x = self.frac.wrapping_mul(q as u128);
        let d = x.min(x.wrapping_neg());
        d as f64 / TWO_POW_128
    }

    /// Checks `|q omega - p| >= dio_gamma / q^dio_tau` for `0 < q <= q_max`.
    pub fn verify_diophantine(&self) -> Result<()> {
        // rounding of the stored fraction contributes at most q 2^-(exact bits)
        let ulp = 2f64.powi(-(self.exact_bits() as i32));
        for q in 1..=self.q_max {
            let bound = self.dio_gamma / (q as f64).powf(self.dio_tau);
            if self.dist_to_int(q) + q as f64 * ulp < bound {
                return Err(Error::NotDiophantine { q });
            }
        }
        Ok(())
    }
}

impl fmt::Display for RotationNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.17}", self.to_f64())
    }
}

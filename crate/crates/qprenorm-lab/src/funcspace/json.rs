//! JSON wire format shared by interval and cylinder functions:
//! `{"delta_dom": .., "n_cheb": .., "modes": [{"k": .., "re": [..], "im": [..]}]}`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{AnalyticFn, DomainConfig, QPFn, Real};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct Wire<T> {
    delta_dom: f64,
    n_cheb: usize,
    modes: Vec<WireMode<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct WireMode<T> {
    k: i64,
    re: Vec<T>,
    im: Vec<T>,
}

fn decode<T: Real>(s: &str) -> Result<(DomainConfig, Vec<Vec<Complex<T>>>)> {
    let w: Wire<T> = serde_json::from_str(s).map_err(|e| Error::Invalid(e.to_string()))?;
    let kmax = w.modes.iter().map(|m| m.k.unsigned_abs() as usize).max().unwrap_or(0);
    let domain = DomainConfig {
        delta_dom: w.delta_dom,
        n_cheb: w.n_cheb,
        n_fourier: kmax.max(1),
        ..DomainConfig::default()
    };
    let mut modes = vec![vec![Complex::new(T::zero(), T::zero()); w.n_cheb]; domain.n_fourier + 1];
    let mut seen = vec![false; domain.n_fourier + 1];
    for m in &w.modes {
        if m.re.len() != w.n_cheb || m.im.len() != w.n_cheb {
            return Err(Error::Invalid(format!("mode {} has the wrong length", m.k)));
        }
        let k = m.k.unsigned_abs() as usize;
        // c_{-k} = conj(c_k)
        let sign = if m.k < 0 { -T::one() } else { T::one() };
        let c: Vec<Complex<T>> =
            m.re.iter().zip(&m.im).map(|(&a, &b)| Complex::new(a, sign * b)).collect();
        if seen[k] {
            if modes[k] != c {
                return Err(Error::Invalid(format!("modes +-{k} are not conjugate")));
            }
        } else {
            modes[k] = c;
            seen[k] = true;
        }
    }
    if modes[0].iter().any(|c| c.im != T::zero()) {
        return Err(Error::Invalid("mode 0 must be real".into()));
    }
    Ok((domain, modes))
}

fn encode<T: Real>(domain: &DomainConfig, modes: &[Vec<Complex<T>>]) -> String {
    let w = Wire {
        delta_dom: domain.delta_dom,
        n_cheb: domain.n_cheb,
        modes: modes
            .iter()
            .enumerate()
            .map(|(k, m)| WireMode {
                k: k as i64,
                re: m.iter().map(|c| c.re).collect(),
                im: m.iter().map(|c| c.im).collect(),
            })
            .collect(),
    };
    serde_json::to_string(&w).expect("plain data serializes")
}

impl<T: Real> AnalyticFn<T> {
    pub fn to_json(&self) -> String {
        let m: Vec<Complex<T>> = self.coeffs().iter().map(|&c| Complex::new(c, T::zero())).collect();
        encode(self.domain(), &[m])
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let (mut domain, modes) = decode::<T>(s)?;
        if modes[1..].iter().flatten().any(|c| c.re != T::zero() || c.im != T::zero()) {
            return Err(Error::Invalid("interval function with angular modes".into()));
        }
        domain.n_fourier = DomainConfig::default().n_fourier;
        AnalyticFn::from_coeffs(domain, modes[0].iter().map(|c| c.re).collect())
    }
}

impl<T: Real> QPFn<T> {
    pub fn to_json(&self) -> String {
        encode(self.domain(), self.modes())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let (domain, modes) = decode::<T>(s)?;
        QPFn::from_modes(domain, modes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn qp_roundtrip_bit_exact() {
        let d = DomainConfig::default();
        let f = QPFn::from_fn(d, |t: f64, x| (x * 1.7).exp() * (2.0 * PI * t).sin() + x / 3.0);
        let s = f.to_json();
        let g = QPFn::<f64>::from_json(&s).unwrap();
        for (a, b) in f.modes().iter().flatten().zip(g.modes().iter().flatten()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        assert_eq!(g.n_fourier(), 16);
    }

    #[test]
    fn analytic_roundtrip_and_negative_modes() {
        let d = DomainConfig::default();
        let f = AnalyticFn::from_fn(d, |x: f64| (x + 0.3).sin() / 7.0);
        let g = AnalyticFn::<f64>::from_json(&f.to_json()).unwrap();
        assert_eq!(f, g);
        let txt = r#"{"delta_dom":0.1,"n_cheb":8,"modes":[{"k":-1,"re":[1,0,0,0,0,0,0,0],"im":[0.5,0,0,0,0,0,0,0]}]}"#;
        let h = QPFn::<f64>::from_json(txt).unwrap();
        assert_eq!(h.mode(1)[0], Complex::new(1.0, -0.5));
        assert!(QPFn::<f64>::from_json(r#"{"delta_dom":0.1}"#).is_err());
    }
}

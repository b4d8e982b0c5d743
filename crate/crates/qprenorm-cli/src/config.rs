//! Run configuration: flat `key = value` lines grouped under `[section]`
//! headers, `#` or `;` comments.
//!
//! ```text
//! [domain]   delta_dom w_center w_radius rho_strip n_cheb n_fourier
//! [section]  theta0 x0 degenerate_scan
//! [run]      omega nmax seed forcing forcing2 f1 f2 etas mode tail
//!            direct_nmax pairs radius grid
//! [tolerances] tol_sigma curve_tol bisect_width eps
//! ```

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use qprenorm_lab::curvedyn::{CurveOptions, DirectOptions, SlopeOptions, TailConvention, TOL_SIGMA1};
use qprenorm_lab::qprenorm::SectionConfig;
use qprenorm_lab::renorm1d::{FamilySpec, Forcing};
use qprenorm_lab::{DomainConfig, RotationNumber};

use crate::error::CliError;
use crate::forcing::parse_forcing;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub section: SectionConfig,
    pub omega: String,
    pub nmax: usize,
    pub seed: u64,
    pub forcing: String,
    /// Second family of observation 1.
    pub forcing2: String,
    /// Polynomials of the eta family `f1 cos(2 pi theta) + eta f2 cos(4 pi theta)`.
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub etas: Vec<f64>,
    /// `exact`, `fixed` or `both`.
    pub mode: String,
    /// `theorem` or `literal`.
    pub tail: String,
    /// Largest n at which `slopes` runs the direct bisection.
    pub direct_nmax: usize,
    pub pairs: usize,
    pub radius: f64,
    pub grid: usize,
    pub tol_sigma: f64,
    pub curve_tol: f64,
    pub bisect_width: f64,
    pub eps: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: DomainConfig::default(),
            section: SectionConfig::default(),
            omega: "golden".into(),
            nmax: 8,
            seed: 0,
            forcing: "[1]*cos(1w)".into(),
            forcing2: "[0.5,0,0.5]*sin(1w)".into(),
            f1: vec![1.0],
            f2: vec![1.0],
            etas: vec![1e-3, 1e-2],
            mode: "exact".into(),
            tail: "theorem".into(),
            direct_nmax: 2,
            pairs: 100,
            radius: 0.5,
            grid: 16,
            tol_sigma: TOL_SIGMA1,
            curve_tol: CurveOptions::default().tol,
            bisect_width: DirectOptions::default().width,
            eps: DirectOptions::default().eps,
        }
    }
}

fn list(field: &str, v: &str) -> Result<Vec<f64>, CliError> {
    v.split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Field { field: field.into(), msg: e.to_string() })
}

fn scalar<T: std::str::FromStr>(field: &str, v: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| CliError::Field { field: field.into(), msg: format!("`{v}`: {e}") })
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') || s.starts_with(';') {
                continue;
            }
            if let Some(name) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                section = name.trim().to_string();
                if !["domain", "section", "run", "tolerances"].contains(&section.as_str()) {
                    return Err(CliError::Config { line, msg: format!("unknown section `{section}`") });
                }
                continue;
            }
            let (key, value) =
                s.split_once('=').ok_or_else(|| CliError::Config { line, msg: format!("expected `key = value`, got `{s}`") })?;
            cfg.set(&section, key.trim(), value.trim()).map_err(|e| match e {
                CliError::Field { field, msg } => CliError::Config { line, msg: format!("`{field}`: {msg}") },
                e => e,
            })?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, section: &str, key: &str, v: &str) -> Result<(), CliError> {
        let field = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
        let f = field.as_str();
        match (section, key) {
            ("domain", "delta_dom") => self.domain.delta_dom = scalar(f, v)?,
            ("domain", "w_center") => self.domain.w_center = scalar(f, v)?,
            ("domain", "w_radius") => self.domain.w_radius = scalar(f, v)?,
            ("domain", "rho_strip") => self.domain.rho_strip = scalar(f, v)?,
            ("domain", "n_cheb") => self.domain.n_cheb = scalar(f, v)?,
            ("domain", "n_fourier") => self.domain.n_fourier = scalar(f, v)?,
            ("section", "theta0") => self.section.theta0 = scalar(f, v)?,
            ("section", "x0") => self.section.x0 = scalar(f, v)?,
            ("section", "degenerate_scan") => self.section.degenerate_scan = list(f, v)?,
            ("run", "omega") => self.omega = v.to_string(),
            ("run", "nmax") => self.nmax = scalar(f, v)?,
            ("run", "seed") => self.seed = scalar(f, v)?,
            ("run", "forcing") => self.forcing = v.to_string(),
            ("run", "forcing2") => self.forcing2 = v.to_string(),
            ("run", "f1") => self.f1 = list(f, v)?,
            ("run", "f2") => self.f2 = list(f, v)?,
            ("run", "etas") => self.etas = list(f, v)?,
            ("run", "mode") => self.mode = v.to_string(),
            ("run", "tail") => self.tail = v.to_string(),
            ("run", "direct_nmax") => self.direct_nmax = scalar(f, v)?,
            ("run", "pairs") => self.pairs = scalar(f, v)?,
            ("run", "radius") => self.radius = scalar(f, v)?,
            ("run", "grid") => self.grid = scalar(f, v)?,
            ("tolerances", "tol_sigma") => self.tol_sigma = scalar(f, v)?,
            ("tolerances", "curve_tol") => self.curve_tol = scalar(f, v)?,
            ("tolerances", "bisect_width") => self.bisect_width = scalar(f, v)?,
            ("tolerances", "eps") => self.eps = scalar(f, v)?,
            ("", _) => return Err(CliError::Field { field, msg: "key outside any section".into() }),
            _ => return Err(CliError::Field { field, msg: "unknown key".into() }),
        }
        Ok(())
    }

    /// Checks every field that a later stage would otherwise reject halfway through a run.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, msg: &str| Err(CliError::Field { field: field.into(), msg: msg.into() });
        self.domain.validate()?;
        if !self.domain.contains(self.section.x0) {
            return bad("section.x0", "outside the interval");
        }
        self.rotation()?;
        self.family()?;
        parse_forcing(&self.forcing2, self.domain.n_fourier)?;
        if !["exact", "fixed", "both"].contains(&self.mode.as_str()) {
            return bad("run.mode", "expected exact, fixed or both");
        }
        if !["theorem", "literal"].contains(&self.tail.as_str()) {
            return bad("run.tail", "expected theorem or literal");
        }
        if self.nmax == 0 || self.nmax > 14 {
            return bad("run.nmax", "expected 1..=14");
        }
        if self.domain.n_fourier < 2 {
            return bad("domain.n_fourier", "the eta family needs two modes");
        }
        if !(self.eps > 0.0 && self.bisect_width > 0.0 && self.curve_tol > 0.0 && self.tol_sigma > 0.0) {
            return bad("tolerances", "must be positive");
        }
        if self.grid == 0 || self.pairs == 0 {
            return bad("run.grid", "grid and pairs must be positive");
        }
        Ok(())
    }

    pub fn rotation(&self) -> Result<RotationNumber, CliError> {
        RotationNumber::parse(&self.omega).map_err(|e| CliError::Field { field: "run.omega".into(), msg: e.to_string() })
    }

    pub fn family_forcing(&self, expr: &str) -> Result<Forcing, CliError> {
        parse_forcing(expr, self.domain.n_fourier)
    }

    pub fn family(&self) -> Result<FamilySpec, CliError> {
        Ok(FamilySpec::forced_logistic(&self.forcing, self.family_forcing(&self.forcing)?))
    }

    pub fn family2(&self) -> Result<FamilySpec, CliError> {
        Ok(FamilySpec::forced_logistic(&self.forcing2, self.family_forcing(&self.forcing2)?))
    }

    pub fn slope_options(&self) -> SlopeOptions {
        SlopeOptions {
            domain: self.domain,
            section: self.section.clone(),
            tail: if self.tail == "literal" { TailConvention::Literal } else { TailConvention::Theorem },
            tol_sigma: self.tol_sigma,
        }
    }

    pub fn direct_options(&self) -> DirectOptions {
        DirectOptions {
            curve: CurveOptions { tol: self.curve_tol, ..CurveOptions::default() },
            eps: self.eps,
            width: self.bisect_width,
        }
    }

    /// SHA-256 of the canonical JSON form of the effective configuration.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("plain data serializes");
        hex(&Sha256::digest(canon.as_bytes()))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_overrides() {
        let c = RunConfig::parse(
            "# demo\n[domain]\nn_cheb = 32\n\n[run]\nomega = 1/3\netas = 0.001, 0.01 ,0.1\nforcing = [0,1]*sin(2w)\n[section]\ndegenerate_scan=0.5\n",
        )
        .unwrap();
        assert_eq!(c.domain.n_cheb, 32);
        assert_eq!(c.omega, "1/3");
        assert_eq!(c.etas, vec![0.001, 0.01, 0.1]);
        assert_eq!(c.section.degenerate_scan, vec![0.5]);
        assert_eq!(c.forcing, "[0,1]*sin(2w)");
        c.validate().unwrap();
    }

    #[test]
    fn diagnostics_name_the_line() {
        let e = RunConfig::parse("[run]\nnmax = 4\nnmax = four\n").unwrap_err();
        assert!(matches!(e, CliError::Config { line: 3, .. }), "{e}");
        let e = RunConfig::parse("[run]\ncolour = blue\n").unwrap_err();
        assert!(e.to_string().contains("line 2") && e.to_string().contains("run.colour"), "{e}");
        assert!(matches!(RunConfig::parse("[plot]\n").unwrap_err(), CliError::Config { line: 1, .. }));
        assert!(matches!(RunConfig::parse("nmax = 3\n").unwrap_err(), CliError::Config { line: 1, .. }));
        assert!(matches!(RunConfig::parse("[run]\nnmax 3\n").unwrap_err(), CliError::Config { line: 2, .. }));
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::default();
        c.validate().unwrap();
        c.forcing = "[1]*cos(17w)".into();
        assert!(matches!(c.validate(), Err(CliError::Forcing { .. })));
        let mut c = RunConfig::default();
        c.mode = "fast".into();
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.omega = "x".into();
        assert!(c.validate().is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }
}

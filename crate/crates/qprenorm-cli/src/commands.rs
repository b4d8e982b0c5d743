use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use qprenorm_lab::asymptotics::*;
use qprenorm_lab::curvedyn::{
    derivative_product, direct_slope, solve_invariant_curve, ExtremumKind, FixedPointTail, SlopeMode, SlopeReport,
};
use qprenorm_lab::qprenorm::{apply_dt, build_l_omega, embed_l, DtOperator};
use qprenorm_lab::renorm1d::{
    check_h0, renormalize_1d, solve_fixed_point, superstable_params, unstable_manifold_points, FixedPointData, UnimodalMap,
};
use qprenorm_lab::{DomainConfig, PairFn, QPFn};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{fmt17, Artifacts};

/// Result of a command that ran to completion.
#[derive(Debug, PartialEq)]
pub enum Status {
    Ok,
    /// An invariant or pass criterion of the report failed.
    Violation(String),
}

impl Status {
    fn unless(ok: bool, what: impl FnOnce() -> String) -> Self {
        if ok {
            Status::Ok
        } else {
            Status::Violation(what())
        }
    }
}

type Cmd = Result<Status, CliError>;

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn fixed_point(d: DomainConfig) -> Result<FixedPointData, CliError> {
    Ok(solve_fixed_point(&UnimodalMap::quadratic(d, 1.4), d.n_cheb)?)
}

fn random_pair(rng: &mut ChaCha8Rng, d: DomainConfig) -> PairFn {
    let n = d.n_cheb;
    let x: Vec<f64> = (0..2 * n).map(|j| rng.random_range(-1.0..1.0) * 0.5f64.powi((j % n) as i32)).collect();
    PairFn::from_vec(d, &x)
}

pub fn fixed_point_cmd(cfg: &RunConfig, art: &mut Artifacts) -> Cmd {
    let fp = fixed_point(cfg.domain)?;
    let residual = renormalize_1d(&fp.phi)?.sub_sup(&fp.phi);
    let h0 = check_h0(&fp, 512);
    let mut v: Value = serde_json::from_str(&fp.to_json()).expect("fixed point json");
    if let Value::Object(m) = &mut v {
        m.insert("renorm_residual".into(), json!(residual));
        m.insert("spectral_gap".into(), json!(fp.spectral_gap()));
        m.insert("n_unstable".into(), json!(fp.n_unstable()));
        m.insert("h0".into(), to_value(&h0));
    }
    art.json("fixed_point.json", v)?;
    println!("delta_feig = {}", fmt17(fp.delta_feig));
    println!("a_star = {}", fmt17(fp.a_star));
    println!("|R(Phi) - Phi| = {residual:.3e}");
    println!("H0 margins = {:.4e} / {:.4e}", h0.margin_scaled, h0.margin_image);
    Ok(Status::unless(residual <= 1e-10 && h0.passes() && fp.n_unstable() == 1, || {
        format!("fixed point: residual {residual:e}, H0 pass {}, {} unstable eigenvalues", h0.passes(), fp.n_unstable())
    }))
}

pub fn delta_cmd(cfg: &RunConfig, art: &mut Artifacts) -> Cmd {
    let fp = fixed_point(cfg.domain)?;
    art.json(
        "delta.json",
        json!({ "delta_feig": fp.delta_feig, "n_cheb": cfg.domain.n_cheb, "spectral_gap": fp.spectral_gap() }),
    )?;
    println!("{}", fmt17(fp.delta_feig));
    Ok(Status::Ok)
}

pub fn superstable_cmd(cfg: &RunConfig, art: &mut Artifacts) -> Cmd {
    let s = superstable_params(&cfg.family()?, cfg.nmax)?;
    let mut rows = Vec::new();
    let mut plot = Vec::new();
    for (n, &sn) in s.iter().enumerate() {
        let ratio = (n >= 2).then(|| (s[n - 1] - s[n - 2]) / (sn - s[n - 1]));
        println!("n = {n:>2}  s_n = {}{}", fmt17(sn), ratio.map_or(String::new(), |r| format!("  ratio = {r:.10}")));
        rows.push(vec![n.to_string(), fmt17(sn), ratio.map_or(String::new(), fmt17)]);
        plot.push((n as f64, sn));
    }
    art.csv("superstable.csv", &["n", "s_n", "ratio"], &rows)?;
    art.plot("superstable.dat", &plot)?;
    Ok(Status::Ok)
}

/// `phi` or `fstar:j`.
fn psi_from_spec(spec: &str, fp: &FixedPointData) -> Result<UnimodalMap, CliError> {
    if spec == "phi" {
        return Ok(fp.phi.clone());
    }
    let bad = || CliError::Field { field: "--psi".into(), msg: format!("expected `phi` or `fstar:j`, got `{spec}`") };
    let j: usize = spec.strip_prefix("fstar:").ok_or_else(bad)?.parse().map_err(|_| bad())?;
    if j == 0 {
        return Err(bad());
    }
    Ok(unstable_manifold_points(fp, j)?.fstar(j)?.clone())
}

pub fn spectrum_cmd(cfg: &RunConfig, art: &mut Artifacts, k: usize, psi: &str) -> Cmd {
    let fp = fixed_point(cfg.domain)?;
    let psi = psi_from_spec(psi, &fp)?;
    let w = cfg.rotation()?;
    let s = build_l_omega(&psi, &w, k)?.spectrum();
    let rows: Vec<Vec<String>> = s.eigenvalues.iter().map(|z| vec![fmt17(z.re), fmt17(z.im), fmt17(z.norm())]).collect();
    art.csv("spectrum.csv", &["re", "im", "modulus"], &rows)?;
    art.plot("spectrum.dat", &s.eigenvalues.iter().map(|z| (z.re, z.im)).collect::<Vec<_>>())?;
    art.json(
        "spectrum.json",
        json!({
            "omega": w.to_f64(),
            "k": k,
            "spectral_radius": s.spectral_radius,
            "worst_pair_defect": s.worst_pair_defect,
            "unmatched": s.unmatched,
            "pairing_ok": s.pairing_ok,
        }),
    )?;
    println!("spectral radius = {:.10}, worst pair defect = {:.3e}, pairing ok = {}", s.spectral_radius, s.worst_pair_defect, s.pairing_ok);
    Ok(Status::unless(s.pairing_ok, || format!("spectrum pairing: {} unmatched eigenvalues", s.unmatched)))
}

pub const DT_TOL: f64 = 1e-10;

pub fn dt_check_cmd(cfg: &RunConfig, art: &mut Artifacts) -> Cmd {
    let fp = fixed_point(cfg.domain)?;
    let d = cfg.domain;
    let w = cfg.rotation()?;
    let base = QPFn::from_analytic(fp.phi.psi());
    let k_max = d.n_fourier.min(8);
    let per_k: Vec<f64> = (1..=k_max)
        .into_par_iter()
        .map(|k| -> Result<f64, CliError> {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(k as u64));
            let l = build_l_omega(&fp.phi, &w, k)?;
            let mut worst = 0.0f64;
            for _ in 0..20 {
                let p = random_pair(&mut rng, d);
                let v = embed_l(k, &p)?;
                let lhs = apply_dt(&base, &w, &v)?;
                let rhs = embed_l(k, &l.apply(&p))?;
                worst = worst.max(lhs.sub(&rhs).sup_norm());
            }
            Ok(worst)
        })
        .collect::<Result<_, _>>()?;
    let worst = per_k.iter().copied().fold(0.0, f64::max);
    let rows: Vec<Vec<String>> = per_k.iter().enumerate().map(|(i, r)| vec![(i + 1).to_string(), fmt17(*r)]).collect();
    art.csv("dt_check.csv", &["k", "max_residual"], &rows)?;
    art.json("dt_check.json", json!({ "max_residual": worst, "tolerance": DT_TOL, "k_max": k_max, "directions": 20 }))?;
    println!("max residual = {worst:.3e}");
    Ok(Status::unless(worst <= DT_TOL, || format!("diagonalization residual {worst:e} exceeds {DT_TOL:e}")))
}

pub fn curve_cmd(cfg: &RunConfig, art: &mut Artifacts, alpha: f64, eps: f64, n: u32) -> Cmd {
    let fam = cfg.family()?;
    let w = cfg.rotation()?;
    let f = fam.physical_fiber(alpha, eps)?;
    let opts = cfg.direct_options().curve;
    let c = solve_invariant_curve(&f, &w, n, &[0.5], &opts)?;
    let p = derivative_product(&f, &w, &c)?;
    let thetas = c.thetas();
    let rows: Vec<Vec<String>> =
        (0..thetas.len()).map(|i| vec![fmt17(thetas[i]), fmt17(c.samples[i]), fmt17(p.values[i])]).collect();
    art.csv("curve.csv", &["theta", "x", "fiber_derivative"], &rows)?;
    art.plot("curve.dat", &thetas.iter().copied().zip(c.samples.iter().copied()).collect::<Vec<_>>())?;
    art.json("curve.json", json!({ "alpha": alpha, "eps": eps, "n": n, "lyapunov": c.lyapunov, "residual": c.residual }))?;
    println!("lyapunov = {:.10}, invariance residual = {:.3e}", c.lyapunov, c.residual);
    Ok(Status::Ok)
}

fn modes(cfg: &RunConfig) -> Vec<SlopeMode> {
    match cfg.mode.as_str() {
        "fixed" => vec![SlopeMode::FixedPoint],
        "both" => vec![SlopeMode::ExactOrbit, SlopeMode::FixedPoint],
        _ => vec![SlopeMode::ExactOrbit],
    }
}

fn mode_name(m: SlopeMode) -> &'static str {
    match m {
        SlopeMode::ExactOrbit => "exact",
        SlopeMode::FixedPoint => "fixed",
    }
}

fn tail_for(cfg: &RunConfig, mode: SlopeMode) -> Result<Option<FixedPointTail>, CliError> {
    Ok(match mode {
        SlopeMode::FixedPoint => Some(FixedPointTail::new(&cfg.family()?, cfg.nmax, cfg.domain)?),
        SlopeMode::ExactOrbit => None,
    })
}

pub fn slopes_cmd(cfg: &RunConfig, art: &mut Artifacts) -> Cmd {
    let fam = cfg.family()?;
    let w = cfg.rotation()?;
    let opts = cfg.slope_options();
    let s = superstable_params(&fam, cfg.nmax)?;
    let dnmax = cfg.direct_nmax.min(cfg.nmax);
    let direct: Vec<f64> = (1..=dnmax as u32)
        .into_par_iter()
        .map(|n| direct_slope(&fam, &w, n, ExtremumKind::Min, &cfg.direct_options()).map(|d| d.richardson))
        .collect::<Result<_, _>>()?;
    let mut worst_gap = 0.0f64;
    for mode in modes(cfg) {
        let tail = tail_for(cfg, mode)?;
        let runs: Vec<SlopeReport> = slope_runs(&fam, &w, 1..=cfg.nmax, mode, tail.as_ref(), &opts)?;
        let mut rows = Vec::new();
        let mut plot = Vec::new();
        for r in &runs {
            let d = direct.get(r.n - 1).copied();
            let gap = d.map(|d| ((r.alpha_prime - d) / d).abs());
            if mode == SlopeMode::ExactOrbit {
                worst_gap = worst_gap.max(gap.unwrap_or(0.0));
            }
            println!(
                "{} n = {:>2}  alpha' = {}  beta' = {}{}",
                mode_name(mode),
                r.n,
                fmt17(r.alpha_prime),
                fmt17(r.beta_prime),
                gap.map_or(String::new(), |g| format!("  rel gap = {g:.2e}"))
            );
            rows.push(vec![
                r.n.to_string(),
                fmt17(s[r.n]),
                fmt17(r.alpha_prime),
                fmt17(r.beta_prime),
                d.map_or(String::new(), fmt17),
                gap.map_or(String::new(), fmt17),
            ]);
            plot.push((r.n as f64, r.alpha_prime.abs().log10()));
        }
        let name = mode_name(mode);
        art.csv(
            &format!("slopes_{name}.csv"),
            &["n", "s_n", "alpha_prime", "beta_prime", "direct_slope", "rel_gap"],
            &rows,
        )?;
        art.plot(&format!("slopes_{name}.dat"), &plot)?;
    }
    // the exact-orbit formula and the bisection are independent paths to the same slope
    Ok(Status::unless(worst_gap < 0.02, || format!("slope formula and direct bisection differ by {worst_gap:.2e}")))
}

pub fn observe_cmd(cfg: &RunConfig, art: &mut Artifacts, which: u8) -> Cmd {
    let w = cfg.rotation()?;
    let opts = cfg.slope_options();
    let fam = cfg.family()?;
    match which {
        1 => {
            let tail = FixedPointTail::new(&fam, cfg.nmax, cfg.domain)?;
            let r = observation1(&fam, &cfg.family2()?, &w, cfg.nmax, &tail, &opts)?;
            let rows: Vec<Vec<String>> = r
                .differences
                .iter()
                .map(|&(n, d)| vec![n.to_string(), fmt17(r.q1.get(n).unwrap_or(f64::NAN)), fmt17(r.q2.get(n).unwrap_or(f64::NAN)), fmt17(d)])
                .collect();
            art.csv("quotients.csv", &["n", "q1", "q2", "difference"], &rows)?;
            art.plot("differences.dat", &log_points(&r.differences))?;
            art.json("report.json", to_value(&r))?;
            println!("rho_hat = {:.4}, spread = {:.3}, pass = {}", r.fit.rho_hat, r.fit.spread(), r.pass);
            Ok(Status::unless(r.pass, || "observation 1: quotient difference is not geometric".into()))
        }
        2 => {
            let mode = if cfg.mode == "fixed" { SlopeMode::FixedPoint } else { SlopeMode::ExactOrbit };
            let tail = tail_for(cfg, mode)?;
            let r = observation2(&fam, &w, cfg.nmax, mode, tail.as_ref(), &opts)?;
            let ids: Vec<IdentityCheck> = [2usize, 3]
                .iter()
                .filter(|&&i| i <= cfg.nmax)
                .map(|&i| renormalized_identity(&fam, &w, i, &opts))
                .collect::<Result<_, _>>()?;
            let id_ok = ids.iter().all(|c| c.rel <= 1e-6);
            let rows: Vec<Vec<String>> = r
                .mixed
                .entries
                .iter()
                .map(|&(n, q)| {
                    let inc = r.cauchy.iter().find(|c| c.0 == n).map_or(String::new(), |c| fmt17(c.1));
                    vec![n.to_string(), fmt17(q), inc]
                })
                .collect();
            art.csv("quotients.csv", &["n", "r_n", "cauchy_increment"], &rows)?;
            art.plot("cauchy.dat", &log_points(&r.cauchy))?;
            let mut v = to_value(&r);
            if let Value::Object(m) = &mut v {
                m.insert("identity".into(), to_value(&ids));
            }
            art.json("report.json", v)?;
            println!("limit = {:.8}, decreasing = {}, identity ok = {id_ok}, pass = {}", r.limit, r.decreasing, r.pass);
            Ok(Status::unless(r.pass && id_ok, || "observation 2: mixed quotient is not Cauchy".into()))
        }
        3 => {
            let tail = FixedPointTail::new(&fam, cfg.nmax, cfg.domain)?;
            let r = observation3(&cfg.f1, &cfg.f2, &w, &cfg.etas, cfg.nmax, &tail, &opts)?;
            let mut rows = Vec::new();
            for (n, q) in &r.baseline.entries {
                rows.push(vec![n.to_string(), fmt17(0.0), fmt17(*q), fmt17(0.0)]);
            }
            for row in &r.rows {
                for &(n, q) in &row.quotients.entries {
                    let dev = row.deviations.iter().find(|d| d.0 == n).map_or(String::new(), |d| fmt17(d.1));
                    rows.push(vec![n.to_string(), fmt17(row.eta), fmt17(q), dev]);
                }
            }
            art.csv("quotients.csv", &["n", "eta", "q_n", "deviation"], &rows)?;
            art.plot("deviation.dat", &r.rows.iter().map(|row| (row.eta, row.deviation)).collect::<Vec<_>>())?;
            art.json("report.json", to_value(&r))?;
            for s in &r.scaling {
                println!("eta {:e} -> {:e}: deviation ratio {:.4} (eta ratio {})", s.0, s.1, s.2, s.3);
            }
            println!("pass = {}", r.pass);
            Ok(Status::unless(r.pass, || "observation 3: deviation is not linear in eta".into()))
        }
        _ => Err(CliError::Field { field: "--which".into(), msg: format!("no observation {which}") }),
    }
}

fn log_points(d: &[(usize, f64)]) -> Vec<(f64, f64)> {
    d.iter().map(|&(n, v)| (n as f64, v.abs().log10())).collect()
}

pub fn conjecture_cmd(cfg: &RunConfig, art: &mut Artifacts, which: &str) -> Cmd {
    let w = cfg.rotation()?;
    match which {
        "h3" => {
            let fam = cfg.family()?;
            let tail = FixedPointTail::new(&fam, cfg.nmax, cfg.domain)?;
            let r = check_h3(&fam, &w, cfg.nmax, &tail, &cfg.slope_options())?;
            let rows: Vec<Vec<String>> = r
                .direction_gaps
                .iter()
                .map(|&(n, g)| {
                    let q = r.quotient_gaps.iter().find(|x| x.0 == n).map_or(String::new(), |x| fmt17(x.1));
                    vec![n.to_string(), fmt17(g), q]
                })
                .collect();
            art.csv("h3.csv", &["n", "direction_gap", "quotient_gap"], &rows)?;
            art.plot("h3.dat", &log_points(&r.direction_gaps))?;
            art.json("report.json", to_value(&r))?;
            println!("rho_hat = {:.4}, C = {:.4}, C0 = {:.4}, pass = {}", r.fit.rho_hat, r.c_floor, r.c0_floor, r.pass);
            Ok(Status::unless(r.pass, || "H3: fixed-point directions do not track the exact orbit".into()))
        }
        "h4" => {
            let fp = fixed_point(cfg.domain)?;
            let op = DtOperator::new(&fp.phi)?;
            let opts = H4Options {
                n_pairs: cfg.pairs,
                radius: cfg.radius,
                seed: cfg.seed,
                section: cfg.section.clone(),
                ..H4Options::default()
            };
            let r = check_h4(&op, &omega_grid(cfg.grid), &opts)?;
            art.json("report.json", to_value(&r))?;
            println!(
                "one-step ratio: sup {:.4}, l2 {:.4}; multi-step rho_hat = {}; pass = {}",
                r.max_ratio_sup,
                r.max_ratio_l2,
                r.multi_step.as_ref().map_or("n/a".into(), |f| format!("{:.4}", f.rho_hat)),
                r.pass
            );
            Ok(Status::unless(r.pass, || format!("H4: one-step ratio {:.4} is not below 1", r.max_ratio_sup)))
        }
        "h5" => {
            let fp = fixed_point(cfg.domain)?;
            let op = DtOperator::new(&fp.phi)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let (v1, v2) = (random_pair(&mut rng, cfg.domain), random_pair(&mut rng, cfg.domain));
            let r = check_h5(&op, &w, &v1, &v2, cfg.nmax)?;
            let rows: Vec<Vec<String>> = r.ratios.iter().map(|&(n, q)| vec![n.to_string(), fmt17(q)]).collect();
            art.csv("h5.csv", &["n", "norm_ratio"], &rows)?;
            art.plot("h5.dat", &r.ratios.iter().map(|&(n, q)| (n as f64, q)).collect::<Vec<_>>())?;
            art.json("report.json", to_value(&r))?;
            println!("C1 = {:.4}, C2 = {:.4}, band = [{:.4e}, {:.4e}]", r.c1, r.c2, r.band.0, r.band.1);
            Ok(Status::unless(r.within_two_decades, || "H5: norm ratio leaves a two-decade band".into()))
        }
        _ => Err(CliError::Field { field: "--which".into(), msg: format!("expected h3, h4 or h5, got `{which}`") }),
    }
}

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qprenorm-lab")).args(args).output().expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn delta_prints_the_constant() {
    let o = run(&["delta"]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let d: f64 = text(&o.stdout).trim().parse().unwrap();
    assert!((d - 4.66920).abs() < 5e-5, "{d}");
}

#[test]
fn malformed_forcing_reports_the_position() {
    let o = run(&["--forcing", "cos(3θ", "delta"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("position 5"), "{}", text(&o.stderr));
    let o = run(&["--forcing", "[1]*cos(40w)", "delta"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("exceeds the Fourier truncation"), "{}", text(&o.stderr));
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("run.ini");
    std::fs::write(&p, "[domain]\nn_cheb = 40\n[run]\nnmax = lots\n").unwrap();
    let o = run(&["--config", p.to_str().unwrap(), "delta"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("line 4"), "{}", text(&o.stderr));
    let o = run(&["--omega", "one half", "delta"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn identical_runs_give_identical_artifacts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = d.path().to_str().unwrap();
        let o = run(&["--out", out, "--plot-data", "--nmax", "6", "observe", "--which", "2"]);
        assert!(o.status.success(), "{}", text(&o.stderr));
        let o = run(&["--out", &format!("{out}/spec"), "--omega", "[0;2,1,1,1]", "spectrum", "--k", "2"]);
        assert!(o.status.success(), "{}", text(&o.stderr));
    }
    for sub in ["", "spec"] {
        let ma = json(&a.path().join(sub).join("manifest.json"));
        let mb = json(&b.path().join(sub).join("manifest.json"));
        assert_eq!(ma["artifacts"], mb["artifacts"]);
        assert_eq!(ma["config_hash"], mb["config_hash"]);
        for f in ma["artifacts"].as_array().unwrap() {
            let name = f["file"].as_str().unwrap();
            let x = std::fs::read(a.path().join(sub).join(name)).unwrap();
            assert_eq!(x, std::fs::read(b.path().join(sub).join(name)).unwrap(), "{name}");
            assert!(!x.contains(&b'\r'));
        }
    }
    let report = json(&a.path().join("report.json"));
    let manifest = json(&a.path().join("manifest.json"));
    assert_eq!(report["config_hash"], manifest["config_hash"]);
    let csv = std::fs::read_to_string(a.path().join("quotients.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("n,r_n,cauchy_increment"));
    assert!(a.path().join("cauchy.dat").exists());
}

#[test]
fn table_columns() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().to_str().unwrap();
    let o = run(&["--out", out, "--nmax", "2", "slopes", "--family", "flm", "--mode", "exact"]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let s = std::fs::read_to_string(d.path().join("slopes_exact.csv")).unwrap();
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("n,s_n,alpha_prime,beta_prime,direct_slope,rel_gap"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "1");
    assert!((row[1].parse::<f64>().unwrap() - (1.0 + 5f64.sqrt())).abs() < 1e-12);
    assert!(row[5].parse::<f64>().unwrap() < 0.02);

    let o = run(&["--out", out, "curve", "--alpha", "3.2", "--eps", "0.01", "--n", "1"]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let c = std::fs::read_to_string(d.path().join("curve.csv")).unwrap();
    assert_eq!(c.lines().next(), Some("theta,x,fiber_derivative"));
    assert_eq!(c.lines().count(), 513);
}

#[test]
fn failed_report_exits_with_two() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().join("h4.ini");
    std::fs::write(&p, "[run]\npairs = 6\ngrid = 4\nseed = 3\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qprenorm-lab"))
        .env("QPRENORM_THREADS", "2")
        .args(["--config", p.to_str().unwrap(), "--out", d.path().to_str().unwrap(), "conjecture", "--which", "h4"])
        .output()
        .unwrap();
    // the one-step contraction fails at the fixed point; the checker must say so
    assert_eq!(o.status.code(), Some(2), "{}", text(&o.stderr));
    let r = json(&d.path().join("report.json"));
    assert_eq!(r["pass"], Value::Bool(false));
    assert!(r["multi_step"].is_object());
}

#[test]
fn unknown_family_is_an_error() {
    let o = run(&["superstable", "--family", "tent"]);
    assert_eq!(o.status.code(), Some(1));
}

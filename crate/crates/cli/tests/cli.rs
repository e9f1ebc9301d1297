use std::path::Path;
use std::process::{Command, Output};

fn svine(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svine")).args(args).current_dir(dir).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn column(path: &Path, idx: usize) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().skip(1).map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--preset", "arma11", "--family", "clayton", "-n", "300", "--seed", "7"];
    let a = svine(&[&args[..], &["--out", "a.csv"]].concat(), dir.path());
    let b = svine(&[&args[..], &["--out", "b.csv"]].concat(), dir.path());
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(code(&b), 0);
    let (ta, tb) = (std::fs::read(dir.path().join("a.csv")).unwrap(), std::fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(ta, tb);
    let u = column(&dir.path().join("a.csv"), 0);
    assert_eq!(u.len(), 300);
    assert!(u.iter().all(|v| *v > 0.0 && *v < 1.0));

    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["outputs"][0]["sha256"], svine_cli::manifest::sha256_hex(&ta));

    let c = svine(&[&args[..7], &["--seed", "8", "--out", "c.csv"]].concat(), dir.path());
    assert_eq!(code(&c), 0);
    assert_ne!(std::fs::read(dir.path().join("c.csv")).unwrap(), ta);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, out: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_svine"))
            .args(["experiment", "--preset", "arma11", "--family", "gumbel", "-n", "60", "--out", out])
            .env("SVINE_THREADS", threads)
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        std::fs::read(dir.path().join(out).join("experiment_gumbel.csv")).unwrap()
    };
    assert_eq!(run("1", "one"), run("3", "three"));
}

#[test]
fn simulate_with_margin_writes_both_scales() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{"kpacf":{"kind":"fgn","theta":[0.8],"horizon":10},"copula":{"family":"frank"},
                  "margin":{"kind":"normal","params":[5.0,2.0]}}"#;
    std::fs::write(dir.path().join("m.json"), spec).unwrap();
    let o = svine(&["simulate", "--spec", "m.json", "-n", "50", "--out", "x.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("x.csv")).unwrap();
    assert!(text.starts_with("u,x\n"));
    let (u, x) = (column(&dir.path().join("x.csv"), 0), column(&dir.path().join("x.csv"), 1));
    assert!(u.iter().zip(&x).all(|(u, x)| (u - 0.5).signum() == (x - 5.0).signum()));
}

#[test]
fn fit_then_qq() {
    let dir = tempfile::tempdir().unwrap();
    let o = svine(
        &["simulate", "--preset", "arma11", "--family", "gauss", "-n", "400", "--seed", "2", "--out", "s.csv"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let u = column(&dir.path().join("s.csv"), 0);
    let data: String =
        std::iter::once("value".to_string()).chain(u.iter().map(|v| v.to_string())).collect::<Vec<_>>().join("\n");
    std::fs::write(dir.path().join("d.csv"), data).unwrap();

    let spec = r#"{"kpacf":{"kind":"arma(1,0)","horizon":5},"copula":{"family":"gauss"}}"#;
    std::fs::write(dir.path().join("ar1.json"), spec).unwrap();
    let o = svine(
        &["fit", "--data", "d.csv", "--spec", "ar1.json", "--kpacf-lags", "8", "--out", "fit/r.json"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("fit/r.json")).unwrap()).unwrap();
    assert_eq!(report["n_params"], 1);
    assert_eq!(report["converged"], true);
    assert!(report["theta_hat"][0].as_f64().unwrap() > 0.0);
    for f in ["r.residuals.csv", "r.kpacf.csv", "r.json.manifest.json"] {
        assert!(dir.path().join("fit").join(f).exists(), "{f}");
    }
    assert_eq!(column(&dir.path().join("fit/r.kpacf.csv"), 1).len(), 8);

    let o = svine(&["residual-qq", "--report", "fit/r.json", "--out", "qq.csv"], dir.path());
    assert_eq!(code(&o), 0);
    let (t, s) = (column(&dir.path().join("qq.csv"), 0), column(&dir.path().join("qq.csv"), 1));
    assert_eq!(t.len(), 400);
    assert!(t.windows(2).all(|w| w[0] < w[1]) && s.windows(2).all(|w| w[0] <= w[1]));
    assert!((t[199] + t[200]).abs() < 1e-12);
}

#[test]
fn input_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("one.csv"), "1.5\n").unwrap();
    std::fs::write(p.join("bad.csv"), "x\n1\nfoo\n").unwrap();
    std::fs::write(
        p.join("bad.json"),
        r#"{"kpacf":{"kind":"fgn","theta":[0.7]},"copula":{"family":"gauss"},"oops":1}"#,
    )
    .unwrap();
    std::fs::write(p.join("empty.json"), r#"{"residuals_normal":[]}"#).unwrap();
    let cases: [&[&str]; 6] = [
        &["fit", "--data", "one.csv", "--preset", "arma11", "--family", "gauss", "--out", "r.json"],
        &["fit", "--data", "bad.csv", "--preset", "arma11", "--family", "gauss", "--out", "r.json"],
        &["fit", "--data", "missing.csv", "--preset", "arma11", "--family", "gauss", "--out", "r.json"],
        &["simulate", "--spec", "bad.json", "-n", "5", "--out", "x.csv"],
        &["residual-qq", "--report", "empty.json", "--out", "q.csv"],
        &["kpacf", "--preset", "clayton-excursions"],
    ];
    for args in cases {
        let o = svine(args, p);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
    let o = svine(&["fit", "--data", "bad.csv", "--preset", "arma11", "--family", "gauss", "--out", "r.json"], p);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line(s) 3"));
}

#[test]
fn kpacf_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = svine(&["kpacf", "--preset", "arfima", "--lags", "5", "--out", "k.csv"], dir.path());
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().count(), 6);
    let tau = column(&dir.path().join("k.csv"), 2);
    let alpha = column(&dir.path().join("k.csv"), 1);
    for (t, a) in tau.iter().zip(&alpha) {
        assert!((t - 2.0 / std::f64::consts::PI * a.asin()).abs() < 1e-15);
    }
}

#[test]
fn experiment_writes_one_file_per_family() {
    let dir = tempfile::tempdir().unwrap();
    let o = svine(
        &[
            "experiment",
            "--preset",
            "arma11",
            "--family",
            "gauss,independence",
            "-n",
            "21",
            "--seed",
            "3",
            "--out",
            "e",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let e = dir.path().join("e");
    let k = column(&e.join("experiment_gauss.csv"), 0);
    assert_eq!(k, (1..=20).map(f64::from).collect::<Vec<_>>());
    let ind = column(&e.join("experiment_independence.csv"), 1);
    assert!(ind.iter().all(|v| *v == ind[0]));
    assert!(e.join("manifest.json").exists());
}

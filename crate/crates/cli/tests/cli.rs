use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tpqrm"))
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("tpqrm-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn validate_resolves_critical_delta_and_defaults() {
    let out = run(&["validate", "--for", "spectrum", "--r", "0.6", "--delta", "critical"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["ok"], true);
    assert_eq!(v["manifest"]["params"]["delta"], 0.25);
    assert_eq!(v["manifest"]["numerics"]["n_max"], 256);
    assert_eq!(v["manifest"]["command"], "spectrum");
}

#[test]
fn validate_rejects_supercritical_coupling() {
    let out = run(&["validate", "--for", "wigner", "--r", "0.6", "--g", "0.7"]);
    let v = json(&out);
    assert_eq!(v["ok"], false);
    let msg = v["diagnostics"][0].as_str().unwrap();
    assert!(msg.contains("0.625"), "{msg}");
}

#[test]
fn quench_endpoint_shorthand() {
    let v = json(&run(&["validate", "--for", "quench", "--gf", "1-1e-6"]));
    assert_eq!(v["manifest"]["quench"]["g_f_over_gc"].as_f64().unwrap(), 1.0 - 1e-6);
}

#[test]
fn unknown_config_keys_exit_1() {
    let d = scratch("unknown");
    let cfg = d.join("bad.json");
    std::fs::write(&cfg, r#"{"grid": {"x_min": 1, "nonsense": 2}}"#).unwrap();
    let out = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nonsense"));
}

#[test]
fn domain_errors_exit_1() {
    assert_eq!(run(&["gap-scan", "--r", "1.5"]).status.code(), Some(1));
    assert_eq!(run(&["gap-scan", "--x-range", "2", "1"]).status.code(), Some(1));
}

#[test]
fn bad_thread_count_exit_1() {
    let out = bin().env("TPQRM_THREADS", "many").args(["validate", "--for", "fit"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unconverged_points_exit_2_with_artifacts() {
    let d = scratch("unconverged");
    let prefix = d.join("s");
    let out = run(&[
        "spectrum", "--r", "0.6", "--x-range", "3", "3.5", "--points", "2", "--n-ceiling", "128", "--output",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let csv = std::fs::read_to_string(d.join("s.csv")).unwrap();
    assert!(csv.contains("false"));
}

#[test]
fn gap_scan_fit_and_determinism() {
    let d = scratch("gapscan");
    let p1 = d.join("a");
    let p2 = d.join("b");
    for p in [&p1, &p2] {
        let out = run(&[
            "gap-scan", "--r", "0.6", "--delta", "critical", "--x-range", "1.5", "3", "--points", "8", "--fit",
            "--output", p.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(d.join("a.csv")).unwrap();
    let b = std::fs::read(d.join("b.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header, "g_over_gc,x,beta,eps_sp,eps_dp,converged,n_max,aa_eps_sp,aa_eps_dp");
    // 17 significant digits
    let first = text.lines().nth(1).unwrap().split(',').nth(3).unwrap();
    assert_eq!(first.split('e').next().unwrap().replace('.', "").trim_start_matches('-').len(), 17);

    let fit: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("a.fit.json")).unwrap()).unwrap();
    for key in ["eps_sp", "eps_dp"] {
        for field in ["exponent", "amplitude", "r_squared", "window"] {
            assert!(!fit[key][field].is_null(), "{key}.{field}");
        }
    }
    let e = fit["eps_dp"]["exponent"].as_f64().unwrap();
    assert!((e - 1.25).abs() < 0.1, "{e}");
}

#[test]
fn manifest_reproduces_run() {
    let d = scratch("manifest");
    let p = d.join("first");
    let out = run(&["observables", "--r", "0.25", "--x-range", "1", "2", "--points", "5", "--output", p.to_str().unwrap()]);
    assert!(out.status.success());
    let manifest = d.join("first.manifest.json");
    let mut m: serde_json::Value = serde_json::from_slice(&std::fs::read(&manifest).unwrap()).unwrap();
    m["output"] = serde_json::Value::String(d.join("second").to_str().unwrap().into());
    let m2 = d.join("m2.json");
    std::fs::write(&m2, serde_json::to_string(&m).unwrap()).unwrap();
    let out = run(&["observables", "--config", m2.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(d.join("first.csv")).unwrap(), std::fs::read(d.join("second.csv")).unwrap());

    // a manifest for another command is refused
    let out = run(&["spectrum", "--config", manifest.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn quench_sweep_runs() {
    let d = scratch("quench");
    let p = d.join("q");
    let out = run(&["quench", "--r", "0.25", "--gf", "0.9", "--tau-range", "5", "20", "--tau-points", "2", "--output", p.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(d.join("q.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("tau_q,residual_energy,e_r_kz"));
    assert!(rows[1].contains("true"));
}

#[test]
fn fit_command_on_csv() {
    let d = scratch("fit");
    let input = d.join("data.csv");
    let mut text = String::from("s,y\n");
    for i in 0..10 {
        let s = 10f64.powf(-1.0 - 0.3 * i as f64);
        text += &format!("{s},{}\n", 2.0 * s.powf(-2.0));
    }
    std::fs::write(&input, text).unwrap();
    let p = d.join("f");
    let out = run(&[
        "fit", "--input", input.to_str().unwrap(), "--x-col", "s", "--y-col", "y", "--output", p.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fit: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("f.fit.json")).unwrap()).unwrap();
    assert!((fit["fit"]["exponent"].as_f64().unwrap() + 2.0).abs() < 1e-10);

    let out = run(&["fit", "--input", input.to_str().unwrap(), "--x-col", "nope", "--y-col", "y", "--output", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn collapse_and_wigner_artifacts() {
    let d = scratch("misc");
    let p = d.join("c");
    let out = run(&["collapse1d", "--deltas", "3", "--levels", "6", "--output", p.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("c.summary.json")).unwrap()).unwrap();
    assert_eq!(summary[0]["delta"], 3.0);

    let p = d.join("w");
    let out = run(&["wigner", "--r", "0.25", "--points", "41", "--conditioning", "qubit-down", "--output", p.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("w.summary.json")).unwrap()).unwrap();
    assert!((s["normalization"].as_f64().unwrap() - 1.0).abs() < 1e-2);
    assert_eq!(std::fs::read_to_string(d.join("w.csv")).unwrap().lines().count(), 41 * 41 + 1);
}

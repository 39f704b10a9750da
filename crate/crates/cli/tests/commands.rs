use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use hpl_core::csv_format::{parse_table, table_to_string};
use hpl_core::special::gaussian_pdf;

fn hpl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hpl")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn reproduce_passes_every_row() {
    let o = hpl(&["reproduce"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.matches("PASS").count(), 19, "{out}");
    assert!(!out.contains("FAIL"));
    assert!(out.contains("optimal_product"));
}

#[test]
fn reproduce_json_has_schema() {
    let o = hpl(&["reproduce", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["passed"], true);
    let rows = doc["rows"].as_array().unwrap();
    let eps = rows.iter().find(|r| r["name"] == "eps_star").unwrap();
    assert!((eps["computed"].as_f64().unwrap() - 0.605).abs() < 5e-3);
}

#[test]
fn reproduce_finite_horizon_has_no_verdicts() {
    let o = hpl(&["reproduce", "--beta", "0.9"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(!out.contains("PASS") && !out.contains("reference"), "{out}");
    assert_eq!(hpl(&["reproduce", "--beta", "1.5"]).status.code(), Some(2));
}

#[test]
fn density_ground_state_is_gaussian_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ground.csv");
    let o = hpl(&["density", "--which", "endpoint", "--preset", "ground", "--out", path_arg(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let table = parse_table(&text).unwrap();
    assert_eq!(table.rows.len(), 513);
    for row in &table.rows {
        assert!((row[1] - gaussian_pdf(row[0])).abs() < 1e-15);
    }
    assert_eq!(table_to_string(&table), text);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ground.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "density");
    for p in manifest["outputs"].as_array().unwrap() {
        assert!(Path::new(p.as_str().unwrap()).exists());
    }
}

#[test]
fn density_figure_presets() {
    let dir = tempfile::tempdir().unwrap();
    for (which, preset) in [("pointer_x", "plus_x"), ("pointer_z", "down_z"), ("pointer_z", "tracial")] {
        let out = dir.path().join(format!("{which}_{preset}.csv"));
        let o = hpl(&["density", "--which", which, "--preset", preset, "--n", "257", "--out", path_arg(&out)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let t = parse_table(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(t.rows.len(), 257);
        assert!(t.column("density").unwrap().iter().all(|v| *v >= 0.0));
    }
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let out = path_arg(&out);
    let cases: [&[&str]; 7] = [
        &["density", "--which", "endpoint", "--bloch", "1,1,0", "--out", out],
        &["density", "--which", "sideways", "--preset", "ground", "--out", out],
        &["density", "--which", "endpoint", "--out", out],
        &["density", "--which", "endpoint", "--preset", "ground", "--bloch", "0,0,0", "--out", out],
        &["density", "--which", "endpoint", "--preset", "ground", "--n", "10", "--out", out],
        &["simulate", "--method", "filter_paths", "--preset", "ground", "--n", "10", "--dt", "0.5", "--seed", "1", "--out", out],
        &["verify", "--level", "medium"],
    ];
    for args in cases {
        let o = hpl(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    assert!(!Path::new(out).exists());
}

#[test]
fn bloch_with_negative_components_parses() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("neg.csv");
    let o = hpl(&["density", "--which", "endpoint", "--bloch", "-0.6,0,-0.8", "--out", path_arg(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn simulate_is_deterministic_and_unbiased() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = hpl(&[
            "simulate", "--method", "endpoint_exact", "--preset", "plus_x", "--n", "200000", "--seed", seed, "--out",
            path_arg(&out),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        out
    };
    let a = run("a.csv", "9");
    let b = run("b.csv", "9");
    let c = run("c.csv", "10");
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
    assert_eq!(
        std::fs::read(dir.path().join("a.summary.json")).unwrap(),
        std::fs::read(dir.path().join("b.summary.json")).unwrap()
    );

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    let px = &summary["pointers"][0];
    assert_eq!(px["target"], "sigma_x");
    let mean = px["mean"].as_f64().unwrap();
    let se = px["standard_error"].as_f64().unwrap();
    assert!((mean - 1.0).abs() < 4.0 * se, "mean {mean} se {se}");
    assert!(summary["ks_p_value"].as_f64().unwrap() > 0.001);
    assert_eq!(parse_table(&std::fs::read_to_string(&a).unwrap()).unwrap().rows.len(), 200_000);
}

#[test]
fn simulate_filter_paths_reports_ks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.csv");
    let o = hpl(&[
        "simulate", "--method", "filter_paths", "--bloch", "0.2,0.1,0.4", "--n", "2000", "--t", "4", "--dt", "2e-3",
        "--seed", "3", "--out", path_arg(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("KS vs q"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("f.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 3);
    let outputs = manifest["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 2);
    for p in outputs {
        assert!(Path::new(p.as_str().unwrap()).exists());
    }
}

#[test]
fn thread_cap_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for threads in ["1", "3", "0"] {
        let out = dir.path().join(format!("t{threads}.csv"));
        let o = Command::new(env!("CARGO_BIN_EXE_hpl"))
            .env("HPL_THREADS", threads)
            .args(["simulate", "--method", "endpoint_exact", "--preset", "tracial", "--n", "5000", "--seed", "4", "--out"])
            .arg(&out)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        files.push(std::fs::read(&out).unwrap());
    }
    assert!(files.windows(2).all(|w| w[0] == w[1]));
    let o = Command::new(env!("CARGO_BIN_EXE_hpl")).env("HPL_THREADS", "many").args(["reproduce"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_fast_passes_quickly() {
    let start = Instant::now();
    let o = hpl(&["verify", "--level", "fast"]);
    assert_eq!(o.status.code(), Some(0), "{}\n{}", stdout(&o), stderr(&o));
    assert!(start.elapsed() < Duration::from_secs(30));
    let out = stdout(&o);
    for name in ["lemma_integrals_identity", "characteristic_function_ode", "frobenius_perron_consistency", "heisenberg_sweep"] {
        assert!(out.contains(&format!("PASS {name}")), "{out}");
    }
}

#[test]
fn verify_json() {
    let o = hpl(&["verify", "--level", "fast", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["level"], "fast");
    assert_eq!(doc["passed"], true);
}

#[test]
fn verify_full_catches_perturbed_integral() {
    let o = hpl(&["verify", "--level", "full", "--perturb-i", "1e-4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL lemma_integrals_identity"), "{}", stdout(&o));
    assert!(stderr(&o).contains("lemma_integrals_identity"));
    assert!(stdout(&o).contains("heisenberg_sweep"));
}

use std::path::Path;
use std::process::Command;

use serde_json::{json, Value};

fn run(dir: &Path, cfg: &Value, extra: &[&str]) -> (i32, String) {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hetero-bi"))
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_exact_example_writes_files_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({"command": "solve", "potential": {"builtin": "exact_example"}});
    let (code, err) = run(dir.path(), &cfg, &[]);
    assert_eq!(code, 0, "{err}");
    let out = dir.path().join("out");
    for f in ["profile.csv", "breakdown.json", "diagnostics.json", "verify.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert_eq!(read_json(&out.join("verify.json"))["pass"], json!(true));
    let p = hetero_bi::io::read_profile_csv(out.join("profile.csv")).unwrap();
    assert_eq!(p.len(), 2000);
}

#[test]
fn boundary_tolerance_above_one_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({"command": "solve", "solver": {"boundary_tol": 1.5}});
    let (code, err) = run(dir.path(), &cfg, &[]);
    assert_eq!(code, 4);
    assert!(err.contains("boundary_tol"), "{err}");
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (json!({"command": "solve", "solver": {"nodez": 10}}), "nodez"),
        (
            json!({"command": "solve", "potential": {"builtin": "nope"}}),
            "potential.builtin",
        ),
        (json!({"command": "fly"}), "command"),
        (json!({"solver": {}}), "command"),
        (json!({"command": "verify"}), "profile"),
        (
            json!({"command": "solve", "weight": {"kind": "periodic_sin", "mean": 1.0, "amplitude": 2.0, "period": 5.0}}),
            "weight",
        ),
    ];
    for (cfg, field) in cases {
        let (code, err) = run(dir.path(), &cfg, &[]);
        assert_eq!(code, 4, "{cfg}");
        assert!(err.contains(field), "{field}: {err}");
    }
    let missing = Command::new(env!("CARGO_BIN_EXE_hetero-bi"))
        .args(["--config", "/nonexistent/config.json"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(4));
}

#[test]
fn non_convergence_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({"command": "solve", "solver": {"nodes": 300, "max_iter": 1}});
    let (code, _) = run(dir.path(), &cfg, &[]);
    assert_eq!(code, 3);
    assert!(dir.path().join("out/best_iterate.csv").exists());
}

#[test]
fn verification_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    // A ramp is admissible but far from stationary.
    let ramp = hetero_bi::Profile::uniform(-10.0, 10.0, 201, |t| t / 10.0).unwrap();
    hetero_bi::io::write_profile_csv(dir.path().join("ramp.csv"), &ramp).unwrap();
    let cfg = json!({"command": "verify", "profile": "ramp.csv"});
    let (code, err) = run(dir.path(), &cfg, &[]);
    assert_eq!(code, 2, "{err}");
    let report = read_json(&dir.path().join("out/verify.json"));
    assert_eq!(report["pass"], json!(false));
}

#[test]
fn quadrature_then_verify_and_rearrange() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({"command": "quadrature", "potential": {"builtin": "allen_cahn"}, "quadrature_step": 0.01});
    let (code, err) = run(dir.path(), &cfg, &[]);
    assert_eq!(code, 0, "{err}");
    std::fs::rename(dir.path().join("out/profile.csv"), dir.path().join("q.csv")).unwrap();
    let (code, err) = run(dir.path(), &json!({"command": "verify", "profile": "q.csv"}), &[]);
    assert_eq!(code, 0, "{err}");
    let (code, err) = run(dir.path(), &json!({"command": "rearrange", "profile": "q.csv"}), &[]);
    assert_eq!(code, 0, "{err}");
    let r = read_json(&dir.path().join("out/rearrange.json"));
    assert_eq!(r["action_before"], r["action_after"]);
}

#[test]
fn odd_solve_and_json_format() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "command": "solve-odd",
        "potential": {"builtin": "allen_cahn", "compact": true},
        "weight": {"kind": "monotone_even_shifted", "rate": 1.0, "threshold": 1.0},
        "solver": {"half_length": 5.0, "nodes": 801}
    });
    let (code, err) = run(dir.path(), &cfg, &["--format", "json"]);
    // The weight is not constant, so only the non-autonomous checks run.
    assert_eq!(code, 0, "{err}");
    let half = read_json(&dir.path().join("out/half.json"));
    assert_eq!(half["nodes"].as_array().unwrap().len(), 401);
    let full = read_json(&dir.path().join("out/profile.json"));
    assert_eq!(full["nodes"].as_array().unwrap().len(), 801);
}

#[test]
fn strip_comparison_reports_a_margin() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        json!({"command": "gibbons2d", "potential": {"builtin": "exact_example"}, "strip": {"nx": 200, "ny": 20}});
    let (code, err) = run(dir.path(), &cfg, &[]);
    assert_eq!(code, 0, "{err}");
    let s = read_json(&dir.path().join("out/strip.json"));
    assert!(s["report"]["margin_vs_reference"].as_f64().unwrap() > 0.0);
}

#[test]
fn empty_sweep_is_an_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run(dir.path(), &json!({"command": "sweep", "runs": []}), &[]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(read_json(&dir.path().join("out/sweep.json")), json!([]));
}

#[test]
fn mixed_sweep_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({"command": "sweep", "runs": [{"command": "solve"}, {"command": "quadrature"}]});
    let (code, _) = run(dir.path(), &cfg, &[]);
    assert_eq!(code, 4);
}

#[test]
fn failing_row_fails_the_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "command": "sweep",
        "base": {"command": "solve", "solver": {"nodes": 300}},
        "runs": [{}, {"solver": {"max_iter": 1}}]
    });
    let (code, _) = run(dir.path(), &cfg, &[]);
    assert_eq!(code, 2);
    let table = read_json(&dir.path().join("out/sweep.json"));
    assert_eq!(table[0]["exit_code"], json!(0));
    assert_eq!(table[1]["exit_code"], json!(3));
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(dir).unwrap().display().to_string(),
                    std::fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn regularized_sweep_is_deterministic() {
    let cfg = json!({
        "command": "sweep",
        "base": {"command": "solve", "solver": {"nodes": 400, "multistart": 2}},
        "runs": [{"solver": {"regularization": 2}}, {"solver": {"regularization": 4}}, {"solver": {"regularization": 8}}]
    });
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (ca, ea) = run(a.path(), &cfg, &["--seed", "11", "--jobs", "3"]);
    let (cb, eb) = run(b.path(), &cfg, &["--seed", "11", "--jobs", "1"]);
    assert_eq!((ca, cb), (0, 0), "{ea}\n{eb}");
    for k in 0..3 {
        assert!(a.path().join(format!("out/row_{k:03}/profile.csv")).exists());
    }
    assert_eq!(tree(&a.path().join("out")), tree(&b.path().join("out")));
}

#[test]
fn truncation_sweep_converges() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Value> = [8.0, 10.0, 12.0, 14.0]
        .iter()
        .map(|&l: &f64| json!({"solver": {"half_length": l, "nodes": (200.0 * l) as usize + 1}}))
        .collect();
    let cfg = json!({"command": "sweep", "base": {"command": "solve"}, "runs": runs});
    let (code, err) = run(dir.path(), &cfg, &[]);
    assert_eq!(code, 0, "{err}");
    let table = read_json(&dir.path().join("out/sweep.json"));
    let actions: Vec<f64> = table
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["action"].as_f64().unwrap())
        .collect();
    let steps: Vec<f64> = actions.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    assert!(steps.windows(2).all(|s| s[1] <= s[0]), "{actions:?}");
    assert!(steps[2] <= 1e-5, "{actions:?}");
}

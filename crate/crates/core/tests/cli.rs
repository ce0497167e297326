use std::path::Path;
use std::process::{Command, Output};

fn steklov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steklov"))
        .args(args)
        .env_remove("STEKLOV_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn spectrum_of_ball() {
    let o = steklov(&[
        "spectrum",
        "--family",
        r#"{"family":"BALL","D":3,"r":2,"seed":0}"#,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], "steklov-trees/1");
    let ev = v["eigenvalues"].as_array().unwrap();
    assert_eq!(ev.len(), 6);
    assert!(ev[0].as_f64().unwrap().abs() < 1e-9);
    assert!((ev[1].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-9);
}

#[test]
fn spectrum_of_path_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "path4.txt", "# a path\n0 1\n1 2\n2 3\n3 4\n");
    let o = steklov(&["spectrum", "--input", &input, "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "index,eigenvalue");
    let lam2: f64 = rows[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!((lam2 - 0.5).abs() < 1e-12);
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    for body in ["0 1\n1 2\n2 0\n", "0 x\n", "0 1\n"] {
        let input = write(dir.path(), "bad.txt", body);
        assert_eq!(
            steklov(&["spectrum", "--input", &input]).status.code(),
            Some(2),
            "{body:?}"
        );
    }
    let missing = dir.path().join("missing.txt");
    assert_eq!(
        steklov(&["bounds", "--input", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(steklov(&["bounds", "--family", "{"]).status.code(), Some(2));
    assert_eq!(steklov(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn path_diameter_bound_is_tight() {
    let o = steklov(&[
        "bounds",
        "--family",
        r#"{"family":"PATH","L":10}"#,
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = text.lines().find(|l| l.contains("LAM2_DIAMETER")).unwrap();
    let tightness: f64 = row.split(',').nth(5).unwrap().parse().unwrap();
    assert!((tightness - 1.0).abs() < 1e-9);
    assert!(row.ends_with(",true"));
}

#[test]
fn ball_bounds_hold_and_large_k_is_inapplicable() {
    let o = steklov(&[
        "bounds",
        "--family",
        r#"{"family":"BALL","D":3,"r":3}"#,
        "--k",
        "3,100",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let reports = v["reports"].as_array().unwrap();
    for r in reports {
        assert_ne!(r["holds"], false);
        if r["k"] == 100 {
            assert_eq!(r["preconditions_met"], false);
            assert!(r["holds"].is_null());
        }
    }
}

#[test]
fn generate_writes_edge_list_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.txt");
    let o = steklov(&[
        "generate",
        "--family",
        r#"{"family":"RANDOM","n":5,"D":3,"seed":42}"#,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let edges: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(edges, ["0 3", "1 2", "2 3", "3 4"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("|V|=5"));

    let o = steklov(&[
        "generate",
        "--family",
        r#"{"family":"REFINED","l":2}"#,
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["n"], 16);
}

#[test]
fn verify_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = steklov(&[
            "verify",
            "--trials",
            "60",
            "--max-n",
            "30",
            "--max-degree",
            "5",
            "--seed",
            "11",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["trees"], 78);
}

#[test]
fn verify_rejects_zero_trials() {
    assert_eq!(steklov(&["verify", "--trials", "0"]).status.code(), Some(2));
}

#[test]
fn tolerance_flag_and_env() {
    let fam = r#"{"family":"PATH","L":4}"#;
    assert_eq!(
        steklov(&["bounds", "--family", fam, "--tol", "-1"])
            .status
            .code(),
        Some(2)
    );
    let o = Command::new(env!("CARGO_BIN_EXE_steklov"))
        .args(["bounds", "--family", fam])
        .env("STEKLOV_TOL", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(
        steklov(&["bounds", "--family", fam, "--tol", "1e-6"])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn sweep_emits_csv() {
    let o = steklov(&["sweep", "--family", r#"{"family":"BALL","D":3,"r":8}"#]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 9);
    assert!(text.starts_with("tree_id,vertices,boundary"));
}

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn thicknet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thicknet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn strip_timings(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timings");
    v
}

#[test]
fn classify_examples() {
    let out = thicknet(&["classify", "0", "-1", "1", "0"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["class"]["kind"], "Elliptic");
    let p = &v["class"]["min_set"]["Point"];
    assert!(p[0].as_f64().unwrap().abs() < 1e-15);
    assert!((p[1].as_f64().unwrap() - 1.0).abs() < 1e-15);

    let v = stdout_json(&thicknet(&["classify", "1", "1", "0", "1"]));
    assert_eq!(v["class"]["kind"], "Parabolic");

    let v = stdout_json(&thicknet(&["classify", "2", "0", "0", "0.5"]));
    assert_eq!(v["class"]["kind"], "Hyperbolic");
    let l = v["class"]["translation_length"].as_f64().unwrap();
    assert!((l - 2.0 * 2f64.ln()).abs() < 1e-12);

    let v = stdout_json(&thicknet(&["classify", "1+1i", "1", "0", "0.5-0.5i"]));
    assert_eq!(v["model"], "H3");
}

#[test]
fn classify_errors() {
    let out = thicknet(&["classify", "1", "2", "3", "x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot parse"));
    // determinant zero
    assert_eq!(
        thicknet(&["classify", "1", "1", "1", "1"]).status.code(),
        Some(2)
    );
    // trace inside the parabolic band but not exactly ±2
    assert_eq!(
        thicknet(&["classify", "1", "1", "-1e-10", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn pipeline_unknown_lattice_fails() {
    let out = thicknet(&["pipeline", "--lattice", "unknown-name"]);
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_eq!(v["pass"], false);
    assert_eq!(v["errors"][0]["stage"], "lattice");
}

#[test]
fn pipeline_writes_report_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = thicknet(&[
        "pipeline",
        "--lattice",
        "modular",
        "--alpha",
        "0.05",
        "--out",
        d,
        "--svg",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let v = read_json(&dir.path().join("report.json"));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["pass"], true);
    for (name, flag) in v["flags"].as_object().unwrap() {
        assert_eq!(flag, &Value::Bool(true), "{name}");
    }
    assert_eq!(v["derived"]["alpha"], 0.05);
    assert!(v["derived"]["c"].as_f64().unwrap() > 0.0);
    assert!(v["stages"]["net"]["size"].as_u64().unwrap() > 100);
    let svg = std::fs::read_to_string(dir.path().join("region.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("crimson"));
}

#[test]
fn pipeline_is_deterministic() {
    let a = thicknet(&["pipeline", "--alpha", "0.1", "--seed", "3"]);
    let b = thicknet(&["pipeline", "--alpha", "0.1", "--seed", "3"]);
    assert_eq!(
        strip_timings(stdout_json(&a)),
        strip_timings(stdout_json(&b))
    );
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"lattice": "hecke4", "alpha": 0.1, "probes": 300}"#,
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let v = stdout_json(&thicknet(&[
        "pipeline",
        "--config",
        c,
        "--lattice",
        "modular",
    ]));
    assert_eq!(v["config"]["lattice"], "modular");
    assert_eq!(v["config"]["alpha"], 0.1);
    assert_eq!(v["config"]["probes"], 300);
    assert_eq!(v["lattice"]["name"], "modular");

    std::fs::write(&cfg, r#"{"lattice": "hecke4", "bogus": 1}"#).unwrap();
    assert_eq!(
        thicknet(&["pipeline", "--config", c]).status.code(),
        Some(2)
    );
}

#[test]
fn lemmas_smoke_and_codim() {
    let out = thicknet(&["lemmas", "--trials", "10"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["checks"].as_array().unwrap().len(), 4);
    assert_eq!(v["pass"], true);

    let out = thicknet(&[
        "lemmas", "--model", "H3", "--check", "codim", "--trials", "200",
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["checks"][0]["check"], "codim_h3");

    // the codimension check needs H³
    assert_eq!(
        thicknet(&["lemmas", "--check", "codim"]).status.code(),
        Some(2)
    );
    assert_eq!(
        thicknet(&["lemmas", "--trials", "0"]).status.code(),
        Some(2)
    );
}

#[test]
fn constants_and_covolume_arithmetic() {
    let v = stdout_json(&thicknet(&["constants"]));
    assert_eq!(v["alpha"], 0.025);
    assert!((v["c"].as_f64().unwrap() / 2.546e4 - 1.0).abs() < 1e-3);
    let out = thicknet(&["constants", "--lattice", "modular"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["lattice"]["kazhdan_margulis"], true);
    assert_eq!(
        thicknet(&["constants", "--lattice", "picard"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn psi_and_flow_at_a_cusp_point() {
    let v = stdout_json(&thicknet(&["psi", "--point", "0.2,30"]));
    assert!(v["psi"].as_f64().unwrap() > 0.0);
    assert_eq!(v["thick"], false);
    let v = stdout_json(&thicknet(&["psi", "--point", "0.1,2"]));
    assert_eq!(v["psi"], 0.0);

    let out = thicknet(&["flow", "--point", "0.2,30"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["psi_end"], 0.0);
    assert_eq!(v["strictly_decreasing"], true);
    assert_eq!(
        thicknet(&["psi", "--point", "0.2,-1"]).status.code(),
        Some(2)
    );
}

#[test]
fn net_and_nerve_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(thicknet(&["nerve", "--alpha", "0.1", "--out", d, "--svg"])
        .status
        .success());
    let v = read_json(&dir.path().join("nerve.json"));
    let n = v["net"]["points"].as_array().unwrap().len();
    assert_eq!(v["nerve"]["vertices"].as_u64().unwrap() as usize, n);
    assert_eq!(v["nerve"]["components"], 1);
    assert!(dir.path().join("region.svg").exists());
}

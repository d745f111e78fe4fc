use std::f64::consts::TAU;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, job: &str, extra: &[&str]) -> Output {
    let path = dir.join("job.json");
    fs::write(&path, job).unwrap();
    Command::new(env!("CARGO_BIN_EXE_invmetric"))
        .arg("--job")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .env("INVMETRIC_THREADS", "1")
        .output()
        .unwrap()
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn stderr_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).unwrap()
}

#[test]
fn density_row_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        r#"{"command":"density","domain":{"type":"disc"},"metric":"kobayashi","points":[[0.5,0]],"vectors":[[1,0]]}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&dir.path().join("out/density.csv"));
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][4], 4.0 / 3.0);
    assert_eq!(r[0][5], 4.0 / 3.0);
}

#[test]
fn verify_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let job = r#"{"command":"verify","seed":11}"#;
    assert_eq!(run(dir.path(), job, &[]).status.code(), Some(0));
    let first = fs::read(dir.path().join("out/verify.json")).unwrap();
    assert_eq!(run(dir.path(), job, &[]).status.code(), Some(0));
    let second = fs::read(dir.path().join("out/verify.json")).unwrap();
    assert_eq!(first, second);
    assert_eq!(run(dir.path(), job, &["--seed", "12"]).status.code(), Some(0));
    let third = fs::read(dir.path().join("out/verify.json")).unwrap();
    assert_ne!(first, third);
    let report: serde_json::Value = serde_json::from_slice(&third).unwrap();
    assert_eq!(report["seed"], 12);
    assert_eq!(report["passed"], true);
}

#[test]
fn self_intersecting_boundary_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let boundary: Vec<[f64; 2]> = (0..512)
        .map(|k| {
            let t = TAU * k as f64 / 512.0;
            [t.sin(), t.sin() * t.cos()]
        })
        .collect();
    let job = serde_json::json!({
        "command": "density",
        "domain": {"type": "smooth", "boundary": boundary, "basepoint": [0.5, 0.0]},
        "points": [[0.5, 0.0]],
    });
    let out = run(dir.path(), &job.to_string(), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_json(&out)["message"].as_str().unwrap().contains("invalid domain"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn malformed_jobs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for job in [
        "{not json",
        r#"{"command":"teleport"}"#,
        r#"{"command":"density","points":[[0,0]]}"#,
        r#"{"command":"density","domain":{"type":"disc"},"points":[[2,0]]}"#,
        r#"{"command":"density","domain":{"type":"disc"},"points":[[0,0]],"colour":1}"#,
    ] {
        let out = run(dir.path(), job, &[]);
        assert_eq!(out.status.code(), Some(1), "{job}");
        assert_eq!(stderr_json(&out)["exit_code"], 1);
    }
}

#[test]
fn iteration_cap_is_a_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        r#"{"command":"fixed-point","map":{"type":"affine","scale":[0.99999999,0],"offset":[0,0]}}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "iteration_cap");
}

#[test]
fn annulus_gap_is_positive() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), r#"{"command":"annulus-gap","r_inner":0.2,"n_points":64}"#, &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&dir.path().join("out/annulus_gap.csv"));
    assert_eq!(r.len(), 64);
    for row in r {
        assert!((row[0].hypot(row[1]) - 0.2f64.sqrt()).abs() < 1e-15);
        assert!(row[4] > 0.0 && row[3] < row[2]);
    }
}

#[test]
fn fixed_point_and_orbit_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        r#"{"command":"fixed-point","map":{"type":"polynomial","coefficients":[[0.15,0],[0,0],[0.5,0]]},"tol":1e-12}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("out/fixed_point.json")).unwrap()).unwrap();
    let x = report["point"][0].as_f64().unwrap();
    assert!((x - (1.0 - 0.7f64.sqrt())).abs() < 1e-11);
    assert_eq!(report["restarts"].as_array().unwrap().len(), 9);
    assert!(dir.path().join("out/fixed_point_trace.csv").exists());

    let transforms: Vec<_> = (1..=10)
        .map(|j| serde_json::json!({"a": [-(1.0 - 0.5f64.powi(j)), 0.0]}))
        .collect();
    let job = serde_json::json!({
        "command": "orbit",
        "transforms": transforms,
        "sample": {"center": [0.0, 0.0], "radius": 0.0, "rings": 1},
        "ball": {"center": [1.0, 0.0], "radius": 0.1},
    });
    assert_eq!(run(dir.path(), &job.to_string(), &[]).status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("out/orbit.json")).unwrap()).unwrap();
    assert_eq!(report["escape_index"], 4);
}

#[test]
fn closed_form_distance_and_geodesic() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        r#"{"command":"distance","domain":{"type":"disc"},"pairs":[[[0,0],[0.5,0]],[[0.3,0],[-0.3,0]]]}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&dir.path().join("out/distance.csv"));
    assert!((r[0][4] - 0.5f64.atanh()).abs() < 1e-12);
    assert!((r[1][4] - (0.6f64 / 1.09).atanh()).abs() < 1e-12);

    let out = run(
        dir.path(),
        r#"{"command":"geodesic","domain":{"type":"disc"},"points":[[0.1,0.2],[-0.4,0.5]]}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&dir.path().join("out/geodesic_0.csv"));
    assert_eq!(r.first().unwrap()[1..], [0.1, 0.2]);
    let last = r.last().unwrap();
    assert!((last[1] + 0.4).abs() < 1e-12 && (last[2] - 0.5).abs() < 1e-12);
}

#[test]
fn balls_and_completeness_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        r#"{"command":"balls","domain":{"type":"disc"},"points":[[0,0],[0.5,0]],"radii":[1.0]}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&dir.path().join("out/balls.csv"));
    assert!((r[0][3] - 2.0 * 1f64.tanh()).abs() < 1e-12);
    assert!(r[1][3] < r[0][3]);

    let out = run(
        dir.path(),
        r#"{"command":"completeness","domain":{"type":"disc"},"metric":"poincare","points":[[0,0]],"boundary_point":[1,0],"epsilons":[0.1,0.01]}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&dir.path().join("out/completeness.csv"));
    for row in &r {
        let exact = 0.5 * ((2.0 - row[0]) / row[0]).ln();
        assert!((row[2] - exact).abs() < 1e-8);
    }
}

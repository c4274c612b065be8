use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::{json, Value};

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_peakinterp"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    fs::write(&p, v.to_string()).unwrap();
    p.to_string_lossy().into_owned()
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn disk_problem() -> Value {
    json!({
        "nodes": [0.0],
        "values": [[[1.0, 0.0]]],
        "body": {"kind": "ball", "radius": 1.0, "dim": 1},
        "k_max": 3
    })
}

#[test]
fn interpolate_then_verify_and_tamper() {
    let dir = tempfile::tempdir().unwrap();
    let prob = write(dir.path(), "p.json", &disk_problem());
    let out = dir.path().join("r.json");
    let out_s = out.to_string_lossy().into_owned();
    let grid = ["--grid-radial", "32", "--grid-angular", "64"];
    let (code, _, err) = run(&[&["interpolate", "--problem", &prob, "--out", &out_s], &grid[..]].concat());
    assert_eq!(code, 0, "{err}");
    let report = read(&out);
    assert!(report["report"]["interior_margin"].as_f64().unwrap() > 0.0);
    assert_eq!(report["problem"]["grid"]["radial"], 32);
    let csv = fs::read_to_string(dir.path().join("r.grid.csv")).unwrap();
    assert!(csv.starts_with("x,y,gauge_h,abs_h1"));
    assert_eq!(csv.lines().count(), 1 + 1 + 31 * 64);

    let v_out = dir.path().join("v.json");
    let (code, _, err) = run(&["verify", "--problem", &out_s, "--out", &v_out.to_string_lossy()]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(read(&v_out)["agrees_with_file"], true);

    let mut tampered = report.clone();
    tampered["report"]["interior_margin"] = json!(0.5);
    let t = write(dir.path(), "t.json", &tampered);
    let (code, _, _) = run(&["verify", "--problem", &t, "--out", &v_out.to_string_lossy()]);
    assert_eq!(code, 2);
    assert_eq!(read(&v_out)["agrees_with_file"], false);
}

#[test]
fn reports_are_byte_identical_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let prob = write(dir.path(), "p.json", &disk_problem());
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let (code, stdout, err) = run(&[
            "interpolate", "--problem", &prob, "--threads", threads, "--seed", "11", "--grid-radial", "16", "--grid-angular", "32",
        ]);
        assert_eq!(code, 0, "{err}");
        outputs.push(stdout);
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(outputs[0].contains("\"seed\": 11"));
}

#[test]
fn unknown_keys_exit_one_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let mut p = disk_problem();
    p["radius"] = json!(2.0);
    let prob = write(dir.path(), "p.json", &p);
    let (code, _, err) = run(&["interpolate", "--problem", &prob]);
    assert_eq!(code, 1);
    assert!(err.contains("radius"), "{err}");
    let (code, _, _) = run(&["interpolate", "--problem", "/nonexistent/p.json"]);
    assert_eq!(code, 1);
}

#[test]
fn gauge_table_of_a_ball_is_the_norm() {
    let dir = tempfile::tempdir().unwrap();
    let vectors: Vec<Value> = (0..8)
        .map(|k| {
            let t = k as f64 * 0.7;
            json!([[t.cos(), 0.3 * k as f64], [0.1, -t.sin()]])
        })
        .collect();
    let prob = write(dir.path(), "g.json", &json!({"body": {"kind": "ball", "radius": 1.0, "dim": 2}, "vectors": vectors}));
    let (code, stdout, err) = run(&["gauge", "--problem", &prob]);
    assert_eq!(code, 0, "{err}");
    let table: Value = serde_json::from_str(&stdout).unwrap();
    let rows = table["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    for row in rows {
        let v = row["vector"].as_array().unwrap();
        let n: f64 = v
            .iter()
            .map(|z| z[0].as_f64().unwrap().powi(2) + z[1].as_f64().unwrap().powi(2))
            .sum::<f64>()
            .sqrt();
        assert!((row["gauge"].as_f64().unwrap() - n).abs() < 1e-12);
    }
}

#[test]
fn lift_hull_and_conformal_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.json");
    let out_s = out.to_string_lossy().into_owned();

    let lift = write(dir.path(), "l.json", &json!({"nodes": [0.0, std::f64::consts::PI], "values": [[1, 0], [-1, 0]]}));
    let (code, _, err) = run(&["lift", "--problem", &lift, "--out", &out_s]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(read(&out)["report"]["outside_range"], 0);
    let zero = write(dir.path(), "z.json", &json!({"nodes": [0.0, 1.0], "values": [[1, 0], [0, 0]]}));
    assert_eq!(run(&["lift", "--problem", &zero]).0, 1);

    let hull = write(
        dir.path(),
        "h.json",
        &json!({"nodes": [0.0, 3.0], "values": [[[1, 0]], [[-1, 0]]], "eps": 0.5, "k_max": 2}),
    );
    let (code, _, err) = run(&["hull", "--problem", &hull, "--out", &out_s, "--grid-radial", "16", "--grid-angular", "32"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(read(&out)["problem"]["body"]["kind"], "hull_eps");

    let conf = write(dir.path(), "c.json", &json!({"amplitude": 0.3, "n": 256, "containment_grid": 40}));
    let (code, _, err) = run(&["conformal", "--problem", &conf, "--out", &out_s]);
    assert_eq!(code, 0, "{err}");
    let csv = fs::read_to_string(dir.path().join("o.boundary.csv")).unwrap();
    assert!(csv.lines().count() > 100);
    assert_eq!(read(&out)["containment"]["passed"], true);
}

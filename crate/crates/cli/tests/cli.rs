use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn cnormals(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cnormals"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn ellipse_census_at_the_centre() {
    let out = cnormals(&["census", "--builtin", "ellipse2d", "--params", "2,1", "--y", "0,0"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["tool"], "cnormals");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["command"]["manifest"]["name"], "ellipse2d");
    assert_eq!(v["result"]["count"], 4);
    assert_eq!(v["result"]["counts_by_index"], serde_json::json!([2, 2]));
}

#[test]
fn circle_census_off_centre() {
    let out = cnormals(&["census", "--builtin", "circle2d", "--params", "1", "--y", "0.5,0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["count"], 2);
}

#[test]
fn sphere_centre_is_not_morse() {
    let out = cnormals(&["census", "--builtin", "sphere", "--params", "1", "--y", "0,0,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("not a Morse point"));
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(cnormals(&["census", "--y", "1,2"]).status.code(), Some(1));
    assert_eq!(cnormals(&["census", "--builtin", "ellipse2d", "--params", "2,1", "--y", "0"]).status.code(), Some(1));
    assert_eq!(cnormals(&["census", "--builtin", "nosuch", "--y", "0,0"]).status.code(), Some(1));
    assert_eq!(cnormals(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(cnormals(&["--help"]).status.code(), Some(0));
}

#[test]
fn census_csv_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("census.csv");
    let out_json = dir.path().join("census.json");
    let out = cnormals(&[
        "census",
        "--builtin",
        "ellipsoid",
        "--params",
        "3,2,1",
        "--y",
        "0,0,0",
        "--csv",
        csv.to_str().unwrap(),
        "--out",
        out_json.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("chart,x0,x1,px,py,pz,value,mu,margin"));
    assert_eq!(lines.count(), 6);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_json).unwrap()).unwrap();
    assert_eq!(v["result"]["count"], 6);
}

#[test]
fn output_is_reproducible_across_thread_counts() {
    let args = ["census", "--builtin", "torus", "--params", "2,1", "--y", "0.3,0.2,0.4"];
    let a = cnormals(&args);
    let b = cnormals(&args);
    assert_eq!(a.stdout, b.stdout);
    let mut one = args.to_vec();
    one.extend(["--threads", "1"]);
    assert_eq!(cnormals(&one).stdout, a.stdout);
    let mut seq = args.to_vec();
    seq.push("--sequential");
    assert_eq!(json(&cnormals(&seq))["result"], json(&a)["result"]);
}

#[test]
fn verify_ellipsoid_finds_both_witnesses() {
    let out = cnormals(&["verify", "--builtin", "ellipsoid", "--params", "3,2,1", "--base", "0.7,1.1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let err = stderr(&out);
    assert!(err.contains("part1 PASS"), "{err}");
    assert!(err.contains("part2 PASS (witness count 6"), "{err}");
    let v = json(&out);
    assert_eq!(v["result"]["part2"]["witness"]["count"], 6);
}

#[test]
fn verify_refuses_irregular_normals() {
    let sphere = cnormals(&["verify", "--builtin", "sphere", "--params", "1", "--base", "0.3,0.4"]);
    assert_eq!(sphere.status.code(), Some(3));
    // the round torus is taut: every normal passes through critical circles
    let torus = cnormals(&["verify", "--builtin", "torus", "--params", "2,1", "--base", "0.5,0.9"]);
    assert_eq!(torus.status.code(), Some(3));
}

#[test]
fn forced_torus_walk_never_exceeds_four() {
    let out = cnormals(&["verify", "--builtin", "torus", "--params", "2,1", "--base", "0.5,0.9", "--force"]);
    assert_eq!(out.status.code(), Some(4));
    let v = json(&out);
    assert_eq!(v["result"]["part1"]["status"], "fail");
    assert_eq!(v["result"]["part1"]["max_count"], 4);
    assert_eq!(v["result"]["part2"]["status"], "not_applicable");
}

#[test]
fn walk_with_seeded_base_point() {
    let args = ["walk", "--builtin", "ellipse2d", "--params", "2,1", "--seed", "7"];
    let a = cnormals(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let v = json(&a);
    assert_eq!(v["config"]["seed"], 7);
    assert!(!v["result"]["events"].as_array().unwrap().is_empty());
    assert_eq!(cnormals(&args).stdout, a.stdout);
}

#[test]
fn focal_svg_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("evolute.svg");
    let csv = dir.path().join("focal.csv");
    let out = cnormals(&[
        "focal",
        "--builtin",
        "ellipse2d",
        "--params",
        "2,1",
        "--svg",
        svg.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let picture = std::fs::read_to_string(&svg).unwrap();
    assert!(picture.starts_with("<svg"));
    assert!(picture.contains(r#"id="curve""#) && picture.contains(r#"id="evolute-0""#));
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("px,py,nu\n"));
    // every evolute point lies on the astroid (x/1.5)^(2/3) + (y/3)^(2/3) = 1
    for line in table.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let s = (f[0].abs() / 1.5).powf(2.0 / 3.0) + (f[1].abs() / 3.0).powf(2.0 / 3.0);
        assert!((s - 1.0).abs() < 1e-9, "{line}");
    }
}

#[test]
fn svg_needs_a_planar_curve() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("x.svg");
    let out = cnormals(&["focal", "--builtin", "sphere", "--params", "1", "--samples", "8", "--svg", svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!Path::new(&svg).exists());
}

#[test]
fn circle_focal_cloud_is_the_centre() {
    let out = cnormals(&["focal", "--builtin", "circle2d", "--params", "1", "--samples", "64"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let pts = v["result"]["points"].as_array().unwrap();
    assert_eq!(pts.len(), 64);
    for p in pts {
        for c in p["pos"].as_array().unwrap() {
            assert!(c.as_f64().unwrap().abs() < 1e-12);
        }
    }
}

#[test]
fn tube_doubling() {
    let out = cnormals(&["tube", "--child", "circle3d", "--child-params", "2", "--r", "0.5", "--y", "1,0,0"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("doubling PASS (2 -> 4"));
    let v = json(&out);
    assert_eq!(v["result"]["passed"], true);
    assert_eq!(v["config"]["command"]["manifest"]["name"], "tube");

    let too_big = cnormals(&["tube", "--child", "ellipse3d", "--child-params", "2,1", "--r", "0.6", "--y", "0,0,0"]);
    assert_eq!(too_big.status.code(), Some(1));
    assert!(stderr(&too_big).contains("focal bound"));
}

#[test]
fn tube_manifest_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tube.json");
    std::fs::write(&path, r#"{"name": "tube", "child": {"name": "ellipse3d", "params": [2, 1]}, "r": 0.3}"#).unwrap();
    let out = cnormals(&["census", "--manifest", path.to_str().unwrap(), "--y", "0,0,0"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(json(&out)["result"]["count"], 8);
}

#[test]
fn examples_lists_builtins() {
    let out = cnormals(&["examples"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let names: Vec<&str> = v["result"].as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    for name in ["circle2d", "ellipse2d", "ellipsoid", "torus", "tube"] {
        assert!(names.contains(&name));
    }
}

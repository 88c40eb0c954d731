//! End-to-end tests of the binary: exit codes, artifact emission, and
//! process-level reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_heischar"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stripped(path: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(path).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v.as_object_mut().unwrap().remove("run");
    v
}

#[test]
fn scan_koranyi_ball_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let res = run(&[
        "scan",
        "--domain",
        "koranyi-ball",
        "--radius",
        "1",
        "--grid",
        "48",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let v = stripped(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["characteristic"].as_array().unwrap().len(), 2);
    assert_eq!(v["domain"]["kind"], "koranyi-ball");
    // Every tolerance that shaped the verdict is echoed.
    for key in [
        "tol_char",
        "tol_suspect",
        "dedupe_radius",
        "projection_tol_rel",
        "rank_ratio_tol",
    ] {
        assert!(v["tolerances"][key].is_number(), "missing tolerance {key}");
    }
}

#[test]
fn scan_torus_emits_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("t.json");
    let csv = dir.path().join("t.csv");
    let svg = dir.path().join("t.svg");
    let res = run(&[
        "scan",
        "--domain",
        "torus",
        "--profile",
        "disc(1,2,1)",
        "--mesh",
        "64x16",
        "--certify",
        "--cert-samples",
        "2048",
        "--out",
        json.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let v = stripped(&json);
    assert_eq!(v["characteristic"].as_array().unwrap().len(), 0);
    assert_eq!(v["certificate"]["pass"], true);
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(csv_text.lines().count(), 1 + 64 * 16);
    assert!(csv_text.starts_with("s,theta,x,y,t,psi,grad_norm,hgrad_norm,m"));
    let svg_text = std::fs::read_to_string(&svg).unwrap();
    assert!(svg_text.contains("<svg"));
}

#[test]
fn certify_exit_codes() {
    // PASS -> 0.
    let res = run(&[
        "certify",
        "--profile",
        "disc",
        "--center",
        "1,2",
        "--radius",
        "1",
        "--samples",
        "4096",
    ]);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(doc["kind"], "certify");
    assert_eq!(doc["certificate"]["pass"], true);
    assert_eq!(doc["disc_bound"]["min_hgrad"], 4.0);

    // Profile touching the axis -> validation error, exit 1.
    let res = run(&[
        "certify",
        "--profile",
        "disc",
        "--center",
        "1,0.5",
        "--radius",
        "1",
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("axis"));

    // Non-convex profile -> precondition error, exit 1.
    let res = run(&[
        "certify",
        "--profile",
        "flower(0,3,1,0.5,3)",
        "--samples",
        "512",
    ]);
    assert_eq!(res.status.code(), Some(1));

    // Unreachable rank threshold -> certification FAIL, exit 2.
    let res = run(&[
        "certify",
        "--profile",
        "disc",
        "--center",
        "1,2",
        "--radius",
        "1",
        "--samples",
        "512",
        "--min-rank-ratio",
        "0.99",
    ]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn scan_usage_errors_exit_one() {
    let res = run(&["scan", "--domain", "cube", "--out", "/tmp/never.json"]);
    assert_eq!(res.status.code(), Some(1));
    let res = run(&[
        "scan",
        "--domain",
        "torus",
        "--profile",
        "disc(1,0.5,1)",
        "--out",
        "/tmp/never.json",
    ]);
    assert_eq!(res.status.code(), Some(1));
    // Mesh dimensions below 8 are refused.
    let res = run(&[
        "scan",
        "--domain",
        "koranyi-ball",
        "--radius",
        "1",
        "--grid",
        "4",
        "--out",
        "/tmp/never.json",
    ]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn thread_cap_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let res = bin()
        .env("HEISCHAR_THREADS", "1")
        .args([
            "scan",
            "--domain",
            "koranyi-ball",
            "--radius",
            "1",
            "--grid",
            "24",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    assert_eq!(
        stripped(&out)["characteristic"].as_array().unwrap().len(),
        2
    );
}

#[test]
fn reproducible_json_across_processes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let res = run(&[
            "scan",
            "--domain",
            "torus",
            "--profile",
            "disc(1,2,1)",
            "--mesh",
            "32x8",
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(res.status.success());
    }
    let (va, vb) = (stripped(&a), stripped(&b));
    assert_eq!(
        serde_json::to_string_pretty(&va).unwrap().into_bytes(),
        serde_json::to_string_pretty(&vb).unwrap().into_bytes()
    );
    // The raw files differ only in the volatile run block.
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn map_and_profile_map_commands() {
    let res = run(&["map", "--point", "1,0,4"]);
    assert!(res.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(doc["w"][0], 4.0);
    assert_eq!(doc["w"][1], 1.0);

    let res = run(&["map", "--inverse", "0,4,0,1"]);
    let doc: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(doc["point"][1], 2.0);

    let res = run(&["map", "--point", "0,0,1"]);
    assert_eq!(res.status.code(), Some(1));

    let res = run(&["map", "--roundtrip", "2000", "--seed", "3"]);
    let doc: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert!(doc["max_roundtrip_error"].as_f64().unwrap() <= 1e-12);

    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("p.svg");
    let res = run(&[
        "profile-map",
        "--profile",
        "ellipse(0,3,2,1)",
        "--roundtrip",
        "256",
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert!(doc["roundtrip"]["max_error"].as_f64().unwrap() <= 1e-9);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<path"));
}

#[test]
fn profile_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let pf = dir.path().join("prof.txt");
    std::fs::write(
        &pf,
        "# expression profile\nexpr = (x - 1)^2 + (y - 2)^2 - 1\nbbox = -0.5, 2.5, 0.8, 3.2\n",
    )
    .unwrap();
    let out = dir.path().join("e.json");
    // Expression profiles carry no boundary curve; the scan falls back to
    // the box grid over the lifted field.
    let res = run(&[
        "scan",
        "--domain",
        "torus",
        "--profile-file",
        pf.to_str().unwrap(),
        "--grid",
        "32",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let v = stripped(&out);
    assert_eq!(v["characteristic"].as_array().unwrap().len(), 0);
    assert_eq!(v["mesh"]["type"], "box");
}

#[test]
fn report_subcommand_rebuilds_heatmap() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("t.json");
    let svg1 = dir.path().join("a.svg");
    let svg2 = dir.path().join("b.svg");
    let res = run(&[
        "scan",
        "--domain",
        "torus",
        "--profile",
        "disc(1,2,1)",
        "--mesh",
        "32x8",
        "--out",
        json.to_str().unwrap(),
        "--svg",
        svg1.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let res = run(&[
        "report",
        "--input",
        json.to_str().unwrap(),
        "--svg",
        svg2.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    assert_eq!(std::fs::read(&svg1).unwrap(), std::fs::read(&svg2).unwrap());

    // Koranyi scans are not parametric; the heatmap must refuse.
    let kj = dir.path().join("k.json");
    let res = run(&[
        "scan",
        "--domain",
        "koranyi-ball",
        "--radius",
        "1",
        "--grid",
        "16",
        "--out",
        kj.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let res = run(&[
        "report",
        "--input",
        kj.to_str().unwrap(),
        "--svg",
        svg2.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
}

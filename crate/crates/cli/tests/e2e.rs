mod common;

use common::{bht, check_schema, code, stdout};
use serde_json::Value;

fn read_json(path: &std::path::Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn list_shows_catalog_and_presets() {
    let o = bht(&["list"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    for name in [
        "torus_S2",
        "inversion_R4",
        "hopf_map",
        "nonbiharmonic_control",
    ] {
        assert!(s.contains(name), "{name} missing from list");
    }
    assert!(s.contains("scherk"));
}

#[test]
fn verify_exit_codes() {
    let o = bht(&["verify", "inclusion_small_sphere_2", "--samples", "64"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("proper_biharmonic"));

    let o = bht(&["verify", "nonbiharmonic_control"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("non_biharmonic"));

    // a computed verdict that differs from the published one still matches
    // the expected verdict
    let o = bht(&["verify", "torus_S3_phi", "--samples", "64"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("published: proper_biharmonic"));

    let o = bht(&["verify", "inclusion_small_sphere(6)", "--samples", "16"]);
    assert_eq!(code(&o), 0);

    assert_eq!(code(&bht(&["verify", "no_such_map"])), 2);
    assert_eq!(code(&bht(&["verify"])), 2);
    assert_eq!(code(&bht(&["verify", "hopf_map", "--order", "3"])), 2);
    assert_eq!(code(&bht(&["verify", "hopf_map", "--samples", "0"])), 2);
    assert_eq!(code(&bht(&["frobnicate"])), 2);
}

#[test]
fn verdict_mismatch_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.txt");
    std::fs::write(
        &path,
        "[map quartic]\ndomain = Euclidean(1)\ntarget = Euclidean(1)\nvars = t\ncomponent = t^4\nbox = 0.5, 2.0\nexpected = proper_biharmonic\n\n\
         [map broken]\ndomain = Euclidean(1)\ntarget = Euclidean(1)\nvars = t\ncomponent = t^2\nbox = 0.5, 2.0\nexpected = harmonic\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(
        code(&bht(&[
            "verify",
            "quartic",
            "--manifest",
            p,
            "--samples",
            "32"
        ])),
        1
    );
    assert_eq!(
        code(&bht(&[
            "verify",
            "--all",
            "--manifest",
            p,
            "--samples",
            "32"
        ])),
        1
    );
    assert_eq!(code(&bht(&["verify", "missing", "--manifest", p])), 2);

    std::fs::write(&path, "[map bad]\ndomain = Euclidean(1)\ntarget = Euclidean(1)\nvars = t\ncomponent = abs(t)\nbox = 0, 1\nexpected = harmonic\n").unwrap();
    let o = bht(&["verify", "--all", "--manifest", p]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 5"));
}

#[test]
fn verify_json_is_stable_and_valid() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = bht(&[
            "verify",
            "hopf_suspension",
            "--samples",
            "32",
            "--per-point",
            "--json",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let doc = read_json(&a);
    check_schema(&doc).unwrap();
    let r = &doc["reports"][0];
    assert_eq!(r["verdict"], "proper_biharmonic");
    assert_eq!(r["points"].as_array().unwrap().len(), 32);
    let raw = std::fs::read_to_string(&a).unwrap();
    assert!(raw.contains("\"sup_tension\": 4.0000000000000"));

    let o = bht(&[
        "verify",
        "hopf_map",
        "--samples",
        "16",
        "--timing",
        "--json",
        "-",
    ]);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    check_schema(&doc).unwrap();
    assert!(doc["reports"][0]["wall_time_s"].is_number());
}

#[test]
fn thread_count_does_not_change_reports() {
    let run = |threads: &str| {
        std::process::Command::new(env!("CARGO_BIN_EXE_bht"))
            .args([
                "verify",
                "complete_lift_inversion",
                "--samples",
                "64",
                "--json",
                "-",
            ])
            .env("BHT_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn graph_checks() {
    let o = bht(&[
        "graph",
        "--f",
        "x1*x1+x2*x2",
        "--check",
        "minimal",
        "--json",
        "-",
    ]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    check_schema(&doc).unwrap();
    let m = &doc["reports"][0]["checks"]["minimal"];
    assert_eq!(m["verdict"], "non_minimal");
    assert!((m["bernstein_at_centre"].as_f64().unwrap() - 4.0).abs() < 1e-12);

    let o = bht(&[
        "graph",
        "--f",
        "0.3*x1+2*x2-1",
        "--check",
        "all",
        "--json",
        "-",
    ]);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    check_schema(&doc).unwrap();
    let c = &doc["reports"][0]["checks"];
    for (check, key) in [
        ("bg", "sup"),
        ("bggd", "sup"),
        ("minimal", "sup_bernstein"),
        ("equivalence", "max_linkage_deviation"),
    ] {
        assert!(c[check][key].as_f64().unwrap() <= 1e-12, "{check}");
    }

    let o = bht(&[
        "graph",
        "--f",
        "log(cos(x2)/cos(x1))",
        "--box",
        "-0.7,0.7;-0.7,0.7",
        "--check",
        "bg",
        "--json",
        "-",
    ]);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(doc["reports"][0]["checks"]["bg"]["sup"].as_f64().unwrap() <= 1e-8);

    let o = bht(&[
        "graph",
        "--preset",
        "hemisphere",
        "--check",
        "minimal",
        "--json",
        "-",
    ]);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    let m = &doc["reports"][0]["checks"]["minimal"];
    assert!((m["min_mean_curvature"].as_f64().unwrap() + 1.0).abs() < 1e-8);
    assert!((m["max_mean_curvature"].as_f64().unwrap() + 1.0).abs() < 1e-8);

    assert_eq!(code(&bht(&["graph", "--f", "x1+", "--check", "bg"])), 2);
    assert_eq!(code(&bht(&["graph", "--f", "x3", "--dim", "2"])), 2);
    assert_eq!(
        code(&bht(&["graph", "--preset", "scherk", "--dim", "3"])),
        2
    );
    assert_eq!(code(&bht(&["graph", "--f", "x1", "--box", "1,0;0,1"])), 2);
}

#[test]
fn graph_from_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    std::fs::write(
        &path,
        "[graph scherk]\nf = ln(cos(x2)/cos(x1))\nbox = -0.7, 0.7; -0.7, 0.7\n",
    )
    .unwrap();
    let o = bht(&[
        "graph",
        "--manifest",
        path.to_str().unwrap(),
        "--name",
        "scherk",
        "--check",
        "minimal",
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("-> minimal"));
}

#[test]
fn search_runs_are_deterministic() {
    let args = [
        "search", "--dim", "2", "--degree", "3", "--seed", "7", "--lambda", "10", "--eps", "0.1",
        "--json", "-",
    ];
    let a = bht(&args);
    let b = bht(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let doc: Value = serde_json::from_slice(&a.stdout).unwrap();
    check_schema(&doc).unwrap();
    let r = &doc["reports"][0];
    assert!(r["best_residual"].is_number() && r["mean_delta_f_sq"].is_number());

    let o = bht(&["search", "--degree", "1", "--lambda", "0", "--json", "-"]);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(doc["reports"][0]["best_residual"].as_f64().unwrap() <= 1e-10);

    assert_eq!(code(&bht(&["search", "--dim", "1"])), 2);
    assert_eq!(code(&bht(&["search", "--degree", "0"])), 2);
}

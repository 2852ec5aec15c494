mod common;

use std::fs;

use tempfile::tempdir;

use common::tfq;

#[test]
fn verify_defaults_pass() {
    let dir = tempdir().unwrap();
    let out = tfq(&["verify", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("7/7 suites passed"), "{stdout}");
    let csv = fs::read_to_string(dir.path().join("o/verify.csv")).unwrap();
    assert_eq!(csv.lines().count(), 8);
    assert!(csv.starts_with("suite,cases,max_residual,tolerance,status\n"));
}

#[test]
fn invalid_configs_exit_2_with_message() {
    let dir = tempdir().unwrap();
    let cases = [
        (r#"{"N": 6, "lattice": {"a": 4, "b": 1}}"#, "lattice must divide grid"),
        (r#"{"tau": 1.5}"#, "quantization parameter out of range"),
        (r#"{"tau": []}"#, "tau list is empty"),
        (r#"{"N": 64, "lattice": {"a": 1, "b": 1}}"#, "full channel matrix too large"),
        (r#"{"rng": "mt19937"}"#, "unsupported rng"),
        (r#"{"symbol": {"kind": "nope"}}"#, "config"),
    ];
    for (i, (json, msg)) in cases.iter().enumerate() {
        let p = dir.path().join(format!("c{i}.json"));
        fs::write(&p, json).unwrap();
        let out = tfq(&["sweep", "--config", p.to_str().unwrap(), "--out", "o"], dir.path());
        assert_eq!(out.status.code(), Some(2), "{json}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.contains(msg), "{json}: {err}");
        assert!(!dir.path().join("o").exists(), "no output before validation");
    }
    let out = tfq(&["verify", "--config", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("missing.json"));
}

#[test]
fn delta_sweep_minimizes_sum_envelope_at_half() {
    let dir = tempdir().unwrap();
    let p = dir.path().join("d.json");
    fs::write(
        &p,
        r#"{"N": 16, "tau": [0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9], "symbol": {"kind": "delta"}, "s": 0, "trials": 2}"#,
    )
    .unwrap();
    let out = tfq(&["sweep", "--quiet", "--config", p.to_str().unwrap(), "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let mut rdr = csv::Reader::from_path(dir.path().join("o/sweep.csv")).unwrap();
    let sums: Vec<(f64, f64)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[3].parse().unwrap())
        })
        .collect();
    assert_eq!(sums.len(), 9);
    let best = sums.iter().cloned().fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    assert_eq!(best.0, 0.5);
}

#[test]
fn wiener_rows() {
    let dir = tempdir().unwrap();
    let cfg = |name: &str, body: &str| {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p.to_str().unwrap().to_string()
    };
    let run = |c: &str, out: &str| {
        let o = tfq(&["wiener", "--quiet", "--config", c, "--out", out], dir.path());
        assert_eq!(o.status.code(), Some(0));
        let text = fs::read_to_string(dir.path().join(out).join("wiener.json")).unwrap();
        serde_json::from_str::<serde_json::Value>(&text).unwrap()
    };
    let ident = run(&cfg("i.json", r#"{"N": 8, "symbol": {"kind": "constant", "value": 1}}"#), "i");
    assert_eq!(ident["inverse"][0]["invertible"], true);
    assert!(ident["inverse"][0]["condition_number"].as_f64().unwrap() < 1.0 + 1e-9);
    let pert = run(
        &cfg("p.json", r#"{"N": 8, "symbol": {"kind": "perturbed-identity", "eps": 0.1, "width": 2}}"#),
        "p",
    );
    assert!(pert["inverse"][0]["inverse_envelope_l1"].as_f64().unwrap().is_finite());
    assert!(pert["composition"][0]["reproduction_residual"].as_f64().unwrap() < 1e-10);
    let sing = run(&cfg("s.json", r#"{"N": 8, "symbol": {"kind": "singular"}}"#), "s");
    assert_eq!(sing["inverse"][0]["invertible"], false);
}

#[test]
fn norms_and_channel_outputs() {
    let dir = tempdir().unwrap();
    let o = tfq(&["norms", "--quiet", "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("o/norms.json")).unwrap()).unwrap();
    assert_eq!(v[0]["space"], "sjostrand");
    assert_eq!(v[0]["p"], "inf");
    let o = tfq(&["channel", "--quiet", "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    for m in ["difference", "sum", "shifted"] {
        let t = fs::read_to_string(dir.path().join(format!("o/channel_{m}.csv"))).unwrap();
        assert!(t.starts_with("k_x,k_omega,h,v_s,h_times_v\n"));
        assert_eq!(t.lines().count(), 65);
    }
}

#[test]
fn seed_flag_changes_random_outputs() {
    let dir = tempdir().unwrap();
    for (seed, out) in [("1", "a"), ("1", "b"), ("2", "c")] {
        let o = tfq(&["norms", "--quiet", "--seed", seed, "--out", out], dir.path());
        assert_eq!(o.status.code(), Some(0));
    }
    let read = |d: &str| fs::read(dir.path().join(d).join("norms.json")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
}

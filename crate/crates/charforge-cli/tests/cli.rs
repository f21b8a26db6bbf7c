//! End-to-end checks of the command-line contract: exit codes, JSON shapes,
//! and byte-identical reports under a fixed config and seed.

use std::process::{Command, Output};

fn charforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_charforge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn gauss_quadratic_f3_is_minus_i() {
    let out = charforge(&["gauss", "--q", "3", "--alpha", "1", "--psi-scale", "1"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert!(v["re"].as_f64().unwrap().abs() < 1e-9);
    assert!((v["im"].as_f64().unwrap() + 1.0).abs() < 1e-9);
    // the field header documents the generator convention
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("generator"), "{err}");
}

#[test]
fn group_order_sp4_f3() {
    let out = charforge(&["group-order", "--type", "Sp", "--n", "2", "--q", "3"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "51840");
}

#[test]
fn torus_catalog_sp2_f5_two_entries() {
    let out = charforge(&["torus-catalog", "--type", "Sp", "--n", "1", "--q", "5"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 2);
    assert_eq!(arr[0]["torus_order"], 4);
    assert_eq!(arr[1]["torus_order"], 6);
}

#[test]
fn verify_named_suite_exit_zero() {
    let out = charforge(&["verify", "--suite", "hasse_davenport", "--q", "7", "--m", "2"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("suite hasse_davenport"), "{text}");
    assert!(text.contains("0 failed"), "{text}");
}

#[test]
fn verify_elliptic_ef_q3_usage_error() {
    let out = charforge(&["verify", "--suite", "elliptic_EF", "--q", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("q >= 5"), "{err}");
}

#[test]
fn verify_unknown_suite_usage_error() {
    let out = charforge(&["verify", "--suite", "no_such_suite"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_reports_are_byte_identical() {
    let dir = std::env::temp_dir();
    let p1 = dir.join("charforge_cli_test_r1.json");
    let p2 = dir.join("charforge_cli_test_r2.json");
    for (path, workers) in [(&p1, "1"), (&p2, "3")] {
        let out = charforge(&[
            "verify",
            "--suite",
            "reflection",
            "--seed",
            "7",
            "--workers",
            workers,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let b1 = std::fs::read(&p1).unwrap();
    let b2 = std::fs::read(&p2).unwrap();
    assert_eq!(b1, b2, "reports must not depend on the worker count");
    let v: serde_json::Value = serde_json::from_slice(&b1).unwrap();
    assert!(v["meta"]["fields"][0]["generator"].is_array());
    assert!(v["reports"].as_array().unwrap().iter().all(|r| {
        r.get("identity").is_some() && r.get("abs_err").is_some() && r.get("pass").is_some()
    }));
    let _ = std::fs::remove_file(p1);
    let _ = std::fs::remove_file(p2);
}

#[test]
fn verify_csv_output() {
    let path = std::env::temp_dir().join("charforge_cli_test.csv");
    let out = charforge(&[
        "verify",
        "--suite",
        "reflection",
        "--out",
        path.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "identity,params,lhs_re,lhs_im,rhs_re,rhs_im,abs_err,tol,pass"
    );
    assert!(lines.all(|l| l.starts_with("reflection,") && l.ends_with("true")));
    let _ = std::fs::remove_file(path);
}

#[test]
fn dl_gamma_emits_all_fields() {
    let out = charforge(&[
        "dl-gamma",
        "--type",
        "Sp",
        "--n",
        "1",
        "--q",
        "5",
        "--lambda-minus",
        "1",
        "--theta",
        "1",
        "--chi",
        "1",
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    for key in ["gamma", "c_V", "R1", "lhs", "rhs"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    // the two routes agree
    let lhs = v["lhs"].as_array().unwrap();
    let rhs = v["rhs"].as_array().unwrap();
    let d = ((lhs[0].as_f64().unwrap() - rhs[0].as_f64().unwrap()).powi(2)
        + (lhs[1].as_f64().unwrap() - rhs[1].as_f64().unwrap()).powi(2))
    .sqrt();
    assert!(d < 1e-9);
}

#[test]
fn dl_gamma_rejects_conjugate_dual_chi() {
    let out = charforge(&[
        "dl-gamma",
        "--type",
        "Sp",
        "--n",
        "1",
        "--q",
        "5",
        "--lambda-minus",
        "1",
        "--theta",
        "1",
        "--chi",
        "0",
    ]);
    // chi = 1 is conjugate-dual: the gamma assembly itself is fine but the
    // pairing route is the appendix one; the command reports parameters
    // that at least parse, so it should succeed or fail loudly with 2.
    assert!(matches!(out.status.code(), Some(0) | Some(2)));
}

#[test]
fn jacobi_kernel_value() {
    let out = charforge(&["jacobi-kernel", "--q", "5", "--g", "1", "--chi", "1"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert!((v["im"].as_f64().unwrap() - 1.0).abs() < 1e-9, "chi(2) = i");
    // singular g rejected
    let bad = charforge(&["jacobi-kernel", "--q", "5", "--g", "0,0;0,0", "--chi", "1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn gl2_selftest_json_array() {
    let out = charforge(&["gl2", "selftest", "--q", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let arr = v.as_array().unwrap();
    assert!(arr.len() > 50);
    assert!(arr.iter().all(|r| r["pass"] == true));
    assert!(arr.iter().any(|r| r["invariant"] == "gl2_kondo_oracle"));
    assert!(arr.iter().any(|r| r["invariant"] == "dl_pairing_gl2"));
}

#[test]
fn verify_all_with_q_filter() {
    let out = charforge(&["verify", "--suite", "all", "--q", "3", "--sample", "2"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = String::from_utf8_lossy(&out.stdout);
    // E=F generic suites have no q=3 grid points and are skipped
    assert!(text.contains("suite split_II: skipped"), "{text}");
    assert!(text.contains("suite elliptic_EF: skipped"), "{text}");
    assert!(text.contains("suite dl:"), "{text}");
}

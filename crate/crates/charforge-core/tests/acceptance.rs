//! Acceptance suite: every criterion runs at its stated tolerance and
//! prints one pass/fail line. `cargo test --test acceptance -- --nocapture`
//! shows the summary.

use charforge_core::report::IdentityReport;
use charforge_core::verify::{gl2_selftest, run_suite, Grid};
use std::time::{Duration, Instant};

struct Criterion {
    name: &'static str,
    budget: Duration,
}

fn check(
    c: Criterion,
    reports: Vec<(String, Vec<IdentityReport>)>,
    extra_ok: bool,
    started: Instant,
) {
    let elapsed = started.elapsed();
    let mut n = 0usize;
    let mut failures = 0usize;
    let mut max_err: f64 = 0.0;
    for (_, rs) in &reports {
        for r in rs {
            n += 1;
            max_err = max_err.max(r.abs_err);
            if !r.pass {
                failures += 1;
                eprintln!("  FAILING POINT: {r:?}");
            }
        }
    }
    let pass = failures == 0 && extra_ok && elapsed <= c.budget;
    println!(
        "{} criterion {}: {} points, max abs_err {:.3e}, {:.2?} (budget {:.0?})",
        if pass { "PASS" } else { "FAIL" },
        c.name,
        n,
        max_err,
        elapsed,
        c.budget
    );
    assert!(failures == 0, "{}: {failures} failing grid points", c.name);
    assert!(extra_ok, "{}: side condition violated", c.name);
    assert!(
        elapsed <= c.budget,
        "{}: runtime {elapsed:?} over budget {:?}",
        c.name,
        c.budget
    );
}

fn suite(name: &str, grid: &Grid) -> (String, Vec<IdentityReport>) {
    (
        name.to_string(),
        run_suite(name, grid).unwrap_or_else(|e| panic!("suite {name}: {e}")),
    )
}

#[test]
fn criterion_01_gauss_core() {
    let started = Instant::now();
    let grid = Grid {
        tol_override: Some(1e-8),
        ..Grid::default()
    };
    let r = suite("gauss_core", &grid);
    check(
        Criterion {
            name: "1 (gauss core)",
            budget: Duration::from_secs(1),
        },
        vec![r],
        true,
        started,
    );
}

#[test]
fn criterion_02_hasse_davenport() {
    let started = Instant::now();
    let r = suite("hasse_davenport", &Grid::default());
    check(
        Criterion {
            name: "2 (hasse-davenport)",
            budget: Duration::from_secs(1),
        },
        vec![r],
        true,
        started,
    );
}

#[test]
fn criterion_03_kondo_oracle() {
    let started = Instant::now();
    let grid = Grid {
        tol_override: Some(1e-7),
        ..Grid::default()
    };
    let r = suite("kondo", &grid);
    // all rows and all chi of GL_2(F_3) and GL_2(F_5): 8*2 + 24*4 points
    let n = r.1.len();
    check(
        Criterion {
            name: "3 (kondo oracle)",
            budget: Duration::from_secs(10),
        },
        vec![r],
        n == 8 * 2 + 24 * 4,
        started,
    );
}

#[test]
fn criterion_04_jacobi_gl() {
    let started = Instant::now();
    let grid = Grid {
        tol_override: Some(1e-7),
        ..Grid::default()
    };
    let r = suite("jacobi_gl", &grid);
    // chi = 1 points appear under the cuspidal-support hypothesis
    let has_trivial_chi = r.1.iter().any(|rep| rep.params["chi"] == 0);
    check(
        Criterion {
            name: "4 (gl jacobi formula)",
            budget: Duration::from_secs(10),
        },
        vec![r],
        has_trivial_chi,
        started,
    );
}

#[test]
fn criterion_05_singular_vanishing() {
    let started = Instant::now();
    let grid = Grid {
        tol_override: Some(1e-7),
        ..Grid::default()
    };
    let r = suite("singular", &grid);
    // every singular 2x2 matrix over F_3 and F_5, every nontrivial chi:
    // 33 * 1 + 145 * 3
    let n = r.1.len();
    check(
        Criterion {
            name: "5 (singular vanishing)",
            budget: Duration::from_secs(5),
        },
        vec![r],
        n == 33 + 145 * 3,
        started,
    );
}

#[test]
fn criterion_06_torus_theorems() {
    let started = Instant::now();
    let rs = vec![
        suite("split_II", &Grid::default()),
        suite("elliptic_EF", &Grid::default()),
        suite("elliptic_E2F", &Grid::default()),
    ];
    check(
        Criterion {
            name: "6 (torus computation theorems)",
            budget: Duration::from_secs(60),
        },
        rs,
        true,
        started,
    );
}

#[test]
fn criterion_07_dl_pairing() {
    let started = Instant::now();
    let r = suite("dl", &Grid::default());
    // Sp_2, SO_3, U_1, U_2, GSp_2 at q in {3,5}; the negative-control
    // report asserts at least one flip, and E=F groups at q=3 are void
    let control_ok = r
        .1
        .iter()
        .any(|rep| rep.identity == "dl_so3_negative_control" && rep.pass);
    let groups_seen: std::collections::BTreeSet<String> = r
        .1
        .iter()
        .filter_map(|rep| rep.params.get("group"))
        .map(|v| v.as_str().unwrap_or("").to_string())
        .collect();
    let expect = ["GSp", "SO_odd", "Sp", "U"];
    let all_groups = expect.iter().all(|g| groups_seen.contains(*g));
    check(
        Criterion {
            name: "7 (main dl identity)",
            budget: Duration::from_secs(60),
        },
        vec![r],
        control_ok && all_groups,
        started,
    );
}

#[test]
fn criterion_08_geometric_conjugacy() {
    let started = Instant::now();
    let r = suite("geom_conj", &Grid::default());
    // exact exponent-level equality, zero tolerance, all theta, q in {3,5}
    let zero_tol = r.1.iter().all(|rep| rep.tol == 0.0 && rep.abs_err == 0.0);
    let n = r.1.len();
    check(
        Criterion {
            name: "8 (geometric conjugacy)",
            budget: Duration::from_secs(1),
        },
        vec![r],
        zero_tol && n == 4 + 6,
        started,
    );
}

#[test]
fn criterion_09_appendices() {
    let started = Instant::now();
    let rs = vec![
        suite("appendix_A1", &Grid::default()),
        suite("appendix_A2", &Grid::default()),
        suite("appendix_C_gl_trivial_chi", &Grid::default()),
        suite("appendix_C_split", &Grid::default()),
        suite("appendix_C_elliptic_EF", &Grid::default()),
        suite("appendix_C_elliptic_E2F", &Grid::default()),
        suite("appendix_C_dl", &Grid::default()),
    ];
    // the q = 3 quadratic appendix_A1 instance is exactly -2
    let a1_value = rs[0]
        .1
        .iter()
        .find(|r| r.params["q"] == 3 && r.params["chi"] == 1)
        .map(|r| (r.lhs[0] + 2.0).abs() < 1e-9 && r.lhs[1].abs() < 1e-9)
        .unwrap_or(false);
    // both branches of each case split are exercised
    let both_branches = |name: &str| {
        let reps = &rs.iter().find(|(n, _)| n == name).unwrap().1;
        let b = |tag: &str| reps.iter().any(|r| r.params.get("branch") == Some(&serde_json::json!(tag)));
        b("generic") && b("exceptional")
    };
    let branches_ok = both_branches("appendix_C_split")
        && both_branches("appendix_C_elliptic_EF")
        && both_branches("appendix_C_elliptic_E2F");
    check(
        Criterion {
            name: "9 (appendices A and C)",
            budget: Duration::from_secs(30),
        },
        rs,
        a1_value && branches_ok,
        started,
    );
}

#[test]
fn criterion_10_li_hu() {
    let started = Instant::now();
    let r = suite("li_hu", &Grid::default());
    // GL_1 over q in {3,5,7,9}: 2+4+6+8 points, plus 48 for GL_2(F_3)
    let n = r.1.len();
    check(
        Criterion {
            name: "10 (li-hu kernel)",
            budget: Duration::from_secs(5),
        },
        vec![r],
        n == 2 + 4 + 6 + 8 + 48,
        started,
    );
}

#[test]
fn criterion_11_group_plumbing() {
    let started = Instant::now();
    let r = suite("enumeration", &Grid::default());
    check(
        Criterion {
            name: "11 (group plumbing)",
            budget: Duration::from_secs(30),
        },
        vec![r],
        true,
        started,
    );
}

#[test]
fn gl2_selftest_battery() {
    let started = Instant::now();
    for q in [3u64, 5] {
        let reports = gl2_selftest(q, &Grid::default()).unwrap();
        assert!(!reports.is_empty());
        for r in &reports {
            assert!(r.pass, "gl2 selftest q={q}: {r:?}");
        }
    }
    println!("PASS gl2 selftest battery ({:.2?})", started.elapsed());
}

//! `charforge`: parameter-grid sweeps of the identity verifiers, individual
//! sum computation, catalog dumps, and machine-readable reporting.
//!
//! Exit codes: 0 all checks pass, 1 at least one identity failed,
//! 2 usage or parameter error.

use charforge_core::chars::{AddChar, MultChar, TorusCharData};
use charforge_core::ff::Tower;
use charforge_core::groups::{self, GroupKind, GroupSpec, TorusDatum};
use charforge_core::mat::Mat;
use charforge_core::report::IdentityReport;
use charforge_core::sums;
use charforge_core::verify::{gl2_selftest, run_suite, Grid, SUITE_NAMES};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::io::Write;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "charforge")]
#[command(about = "Gauss and Jacobi sum verification laboratory for finite classical groups")]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run verifier suites over a parameter grid and report every point.
    Verify(VerifyArgs),
    /// Compute a (twisted) Gauss sum.
    Gauss(GaussArgs),
    /// Evaluate the Jacobi kernel J_chi at a matrix.
    JacobiKernel(JacobiKernelArgs),
    /// Assemble the doubling-method gamma factor for a torus datum.
    DlGamma(DlGammaArgs),
    /// List the maximal-torus catalog of a group.
    TorusCatalog(GroupArgs),
    /// Print the order of a group.
    GroupOrder(GroupArgs),
    /// GL_2 laboratory commands.
    Gl2 {
        #[command(subcommand)]
        cmd: Gl2Cmd,
    },
}

#[derive(Subcommand)]
enum Gl2Cmd {
    /// Run the GL_2 invariant battery, emitting a pass/fail array.
    Selftest {
        #[arg(long, default_value_t = 3)]
        q: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Base field sizes (comma separated).
    #[arg(long, value_delimiter = ',')]
    q: Vec<u64>,
    /// Extension degrees for split-type suites.
    #[arg(long, value_delimiter = ',')]
    k: Vec<u32>,
    /// Norm-one degrees for elliptic-type suites.
    #[arg(long, value_delimiter = ',')]
    m: Vec<u32>,
    /// Additive character scales.
    #[arg(long = "psi-scale", value_delimiter = ',')]
    psi_scale: Vec<u64>,
    /// Tolerance override (default is the size-aware 1e-8 (1+S)).
    #[arg(long)]
    tol: Option<f64>,
    /// Cap the number of characters per family (seeded subset).
    #[arg(long)]
    sample: Option<u64>,
    /// Sampling seed; falls back to CHARFORGE_SEED, then a fixed default.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for suite dispatch.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Write the full report stream to this path.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Output format for --out.
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct GaussArgs {
    #[arg(long)]
    q: u64,
    /// Degree of alpha's field over the base.
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Exponent of alpha relative to the printed generator.
    #[arg(long)]
    alpha: u64,
    /// Optional twist character exponent on the base field.
    #[arg(long)]
    chi: Option<u64>,
    #[arg(long = "psi-scale", default_value_t = 1)]
    psi_scale: u64,
}

#[derive(Args)]
struct JacobiKernelArgs {
    #[arg(long)]
    q: u64,
    /// Degree of E over F (2 for unitary-side kernels).
    #[arg(long = "e-deg", default_value_t = 1)]
    e_deg: u32,
    /// Matrix entries as polynomial codes, rows separated by `;`.
    #[arg(long)]
    g: String,
    /// Character exponent on E^x (0 = trivial, via the Fourier kernel).
    #[arg(long, default_value_t = 0)]
    chi: u64,
    #[arg(long = "psi-scale", default_value_t = 1)]
    psi_scale: u64,
}

#[derive(Args)]
struct DlGammaArgs {
    /// Group type: GL, U, Sp, SO, SO+, SO-, GSp, GSO+, GSO-.
    #[arg(long = "type")]
    kind: String,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    q: u64,
    #[arg(long = "lambda-plus", value_delimiter = ',')]
    lambda_plus: Vec<u32>,
    #[arg(long = "lambda-minus", value_delimiter = ',')]
    lambda_minus: Vec<u32>,
    /// Split-part character exponents, aligned with lambda-plus.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<u64>,
    /// Elliptic-part character exponents, aligned with lambda-minus.
    #[arg(long, value_delimiter = ',')]
    theta: Vec<u64>,
    /// Character exponent on E^x.
    #[arg(long, default_value_t = 1)]
    chi: u64,
    #[arg(long = "psi-scale", default_value_t = 1)]
    psi_scale: u64,
}

#[derive(Args)]
struct GroupArgs {
    #[arg(long = "type")]
    kind: String,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    q: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> charforge_core::Result<ExitCode> {
    match cli.cmd {
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Gauss(args) => cmd_gauss(args),
        Cmd::JacobiKernel(args) => cmd_jacobi_kernel(args),
        Cmd::DlGamma(args) => cmd_dl_gamma(args),
        Cmd::TorusCatalog(args) => cmd_torus_catalog(args),
        Cmd::GroupOrder(args) => cmd_group_order(args),
        Cmd::Gl2 { cmd } => match cmd {
            Gl2Cmd::Selftest { q, seed } => cmd_gl2_selftest(q, seed),
        },
    }
}

fn env_seed() -> Option<u64> {
    std::env::var("CHARFORGE_SEED").ok()?.parse().ok()
}

fn tower_meta(qs: &[u64]) -> Vec<serde_json::Value> {
    let mut out = Vec::new();
    for &q in qs {
        let Ok((p, e0)) = groups::split_prime_power(q) else {
            continue;
        };
        for rel in 1..=6u32 {
            if let Ok(t) = Tower::new(p, e0, rel) {
                out.push(json!({
                    "q": q,
                    "rel_deg": rel,
                    "modulus": t.modulus(),
                    "generator": t.gen_poly(),
                }));
            }
        }
    }
    out
}

fn cmd_verify(args: VerifyArgs) -> charforge_core::Result<ExitCode> {
    let seed = args.seed.or_else(env_seed).unwrap_or(0xC0FFEE);
    let grid = Grid {
        qs: args.q.clone(),
        ks: args.k.clone(),
        ms: args.m.clone(),
        psi_scales: args.psi_scale.clone(),
        sample: args.sample,
        seed,
        tol_override: args.tol,
    };
    let suites: Vec<String> = if args.suite == "all" {
        SUITE_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        vec![args.suite.clone()]
    };
    for s in &suites {
        if !SUITE_NAMES.contains(&s.as_str()) {
            return Err(charforge_core::Error::UnknownIdentity(s.clone()));
        }
    }

    // With `--suite all` a shared q-list is filtered per suite; a directly
    // named suite takes the list verbatim and may reject it.
    let run_all = args.suite == "all";
    let jobs: Vec<(String, Grid)> = suites
        .iter()
        .filter_map(|s| {
            let mut g = grid.clone();
            if run_all && !g.qs.is_empty() {
                g.qs.retain(|&q| charforge_core::verify::suite_supports_q(s, q));
                if g.qs.is_empty() {
                    println!("suite {s}: skipped (no supported q in the requested list)");
                    return None;
                }
            }
            Some((s.clone(), g))
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers.max(1))
        .build()
        .map_err(|e| charforge_core::Error::UnsupportedParams(e.to_string()))?;
    let results: Vec<(String, charforge_core::Result<Vec<IdentityReport>>)> = pool.install(|| {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|(s, g)| (s.clone(), run_suite(s, g)))
            .collect()
    });

    let mut reports = Vec::new();
    let mut summaries = Vec::new();
    for (name, res) in results {
        let rs = res?;
        let failed = rs.iter().filter(|r| !r.pass).count();
        let max_err = rs.iter().map(|r| r.abs_err).fold(0.0f64, f64::max);
        summaries.push((name, rs.len(), failed, max_err));
        reports.extend(rs);
    }
    reports.sort_by_key(|r| r.sort_key());

    for (name, n, failed, max_err) in &summaries {
        println!(
            "suite {name}: {} points, {} failed, max abs_err {max_err:.3e}",
            n, failed
        );
    }
    let any_failed = summaries.iter().any(|(_, _, f, _)| *f > 0);

    if let Some(path) = &args.out {
        let payload = json!({
            "meta": {
                "seed": seed,
                "suites": suites,
                "fields": tower_meta(&effective_qs(&grid)),
            },
            "summary": summaries.iter().map(|(name, n, failed, max_err)| json!({
                "suite": name, "points": n, "failed": failed, "max_abs_err": max_err,
            })).collect::<Vec<_>>(),
            "reports": reports,
        });
        match args.format.as_str() {
            "json" => {
                let mut f =
                    std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
                serde_json::to_writer_pretty(&mut f, &payload)
                    .map_err(|e| charforge_core::Error::UnsupportedParams(e.to_string()))?;
                f.write_all(b"\n").map_err(io_err)?;
                f.flush().map_err(io_err)?;
            }
            "csv" => {
                let mut f =
                    std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
                writeln!(f, "identity,params,lhs_re,lhs_im,rhs_re,rhs_im,abs_err,tol,pass")
                    .map_err(io_err)?;
                for r in &reports {
                    writeln!(f, "{}", r.to_csv_row()).map_err(io_err)?;
                }
                f.flush().map_err(io_err)?;
            }
            other => {
                return Err(charforge_core::Error::UnsupportedParams(format!(
                    "unknown format `{other}`"
                )))
            }
        }
        println!("wrote {} reports to {}", reports.len(), path.display());
    }

    Ok(if any_failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn effective_qs(grid: &Grid) -> Vec<u64> {
    if grid.qs.is_empty() {
        vec![3, 5, 7, 9]
    } else {
        grid.qs.clone()
    }
}

fn io_err(e: std::io::Error) -> charforge_core::Error {
    charforge_core::Error::UnsupportedParams(e.to_string())
}

fn print_header(t: &Tower) {
    eprintln!(
        "# field p={} deg={} modulus={:?} generator={:?}",
        t.p(),
        t.abs_deg(),
        t.modulus(),
        t.gen_poly()
    );
}

fn cmd_gauss(args: GaussArgs) -> charforge_core::Result<ExitCode> {
    let (p, e0) = groups::split_prime_power(args.q)?;
    let t = Tower::new(p, e0, args.k)?;
    print_header(&t);
    let psi = AddChar::new(&t, args.psi_scale)?;
    let alpha = MultChar::new(&t, args.k, args.alpha)?;
    let v = match args.chi {
        None => sums::gauss(&t, &alpha, &psi)?,
        Some(c) => {
            let chi = MultChar::new(&t, 1, c)?;
            sums::gauss_twisted(&t, &alpha, &chi, &psi)?
        }
    };
    println!("{}", json!({"re": v.re, "im": v.im}));
    Ok(ExitCode::SUCCESS)
}

fn parse_matrix(t: &Tower, s: &str) -> charforge_core::Result<Mat> {
    let rows: Vec<&str> = s.split(';').collect();
    let n = rows.len();
    let mut a = Vec::new();
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        if cells.len() != n {
            return Err(charforge_core::Error::UnsupportedParams(
                "matrix must be square".into(),
            ));
        }
        for c in cells {
            let code: u64 = c.trim().parse().map_err(|_| {
                charforge_core::Error::UnsupportedParams(format!("bad entry `{c}`"))
            })?;
            a.push(t.from_code(code)?);
        }
    }
    Ok(Mat { n, a })
}

fn cmd_jacobi_kernel(args: JacobiKernelArgs) -> charforge_core::Result<ExitCode> {
    let (p, e0) = groups::split_prime_power(args.q)?;
    let t = Tower::new(p, e0, args.e_deg)?;
    print_header(&t);
    let psi = AddChar::new(&t, args.psi_scale)?;
    let chi = MultChar::new(&t, args.e_deg, args.chi)?;
    let g = parse_matrix(&t, &args.g)?;
    if g.n > 4 {
        return Err(charforge_core::Error::UnsupportedParams(
            "kernel supported for k <= 4".into(),
        ));
    }
    let v = sums::jacobi_kernel_gl(&t, args.e_deg, &g, &chi, &psi)?;
    println!("{}", json!({"re": v.re, "im": v.im}));
    Ok(ExitCode::SUCCESS)
}

fn cmd_dl_gamma(args: DlGammaArgs) -> charforge_core::Result<ExitCode> {
    let kind = GroupKind::parse(&args.kind)?;
    let spec = GroupSpec::new(kind, args.n, args.q)?;
    let lp_sum: u32 = args.lambda_plus.iter().sum();
    let lm_sum: u32 = args.lambda_minus.iter().sum();
    if lp_sum + lm_sum != args.n {
        return Err(charforge_core::Error::UnsupportedParams(format!(
            "|lambda+| + |lambda-| must equal n = {}",
            args.n
        )));
    }
    let td = TorusDatum {
        group: spec,
        lambda_plus: args.lambda_plus.clone(),
        lambda_minus: args.lambda_minus.clone(),
    };
    let tower = td.make_tower()?;
    print_header(&tower);
    let psi = AddChar::new(&tower, args.psi_scale)?;
    let chi = MultChar::new(&tower, spec.e_deg(), args.chi)?;
    let chars = TorusCharData {
        alphas: args.alpha.clone(),
        thetas: args.theta.clone(),
    };
    let g = groups::dl_gamma_rhs(&td, &tower, &chars, &chi, &psi)?;
    let (lhs, _) = groups::dl_pairing_lhs(&td, &tower, &chars, &chi, true)?;
    println!(
        "{}",
        json!({
            "gamma": [g.gamma.re, g.gamma.im],
            "c_V": [g.c_v.re, g.c_v.im],
            "R1": g.r1,
            "lhs": [lhs.re, lhs.im],
            "rhs": [g.rhs.re, g.rhs.im],
            "transfer": g.transfer,
        })
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_torus_catalog(args: GroupArgs) -> charforge_core::Result<ExitCode> {
    let kind = GroupKind::parse(&args.kind)?;
    let spec = GroupSpec::new(kind, args.n, args.q)?;
    let catalog: Vec<serde_json::Value> = spec
        .torus_catalog()
        .iter()
        .map(|td| {
            json!({
                "group": spec.kind.name(),
                "lambda_plus": td.lambda_plus,
                "lambda_minus": td.lambda_minus,
                "torus_order": td.torus_order(),
                "rel_rank": td.rel_rank(),
                "epsilon": td.epsilon(),
            })
        })
        .collect();
    println!("{}", serde_json::to_string_pretty(&catalog).unwrap());
    Ok(ExitCode::SUCCESS)
}

fn cmd_group_order(args: GroupArgs) -> charforge_core::Result<ExitCode> {
    let kind = GroupKind::parse(&args.kind)?;
    let spec = GroupSpec::new(kind, args.n, args.q)?;
    println!("{}", spec.order());
    Ok(ExitCode::SUCCESS)
}

fn cmd_gl2_selftest(q: u64, seed: Option<u64>) -> charforge_core::Result<ExitCode> {
    let grid = Grid {
        seed: seed.or_else(env_seed).unwrap_or(0xC0FFEE),
        ..Grid::default()
    };
    let reports = gl2_selftest(q, &grid)?;
    let arr: Vec<serde_json::Value> = reports
        .iter()
        .map(|r| {
            json!({"invariant": r.identity, "params": r.params, "abs_err": r.abs_err, "pass": r.pass})
        })
        .collect();
    println!("{}", serde_json::to_string_pretty(&arr).unwrap());
    Ok(if reports.iter().all(|r| r.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

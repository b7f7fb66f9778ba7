//! `lqlift q0`: counting-regime closed-form thresholds. Emits one file
//! per threshold notion with the certified `beta`, its distance to the
//! `alpha/2` ceiling, and the condition residual at the certified end.

use std::path::PathBuf;

use clap::Args;
use lqlift_core::q0_closed::{q0_threshold, Q0Threshold};
use lqlift_core::ProblemKind;
use rayon::prelude::*;
use serde::Serialize;

use crate::emit::{fmt_num, write_csv, write_json};
use crate::manifest::RunManifest;
use crate::{grid, worker_pool, CliError, CliResult};

#[derive(Args, Debug)]
pub struct Q0Args {
    /// Threshold notion (sectional or strong); both when omitted.
    #[arg(long)]
    pub kind: Option<String>,

    /// alpha grid: comma list or `start:stop:step`.
    #[arg(long, default_value = "0.1:0.9:0.1")]
    pub alpha: String,

    /// `lo:hi`; the top end is the exponential-parameter budget the
    /// closed forms may spend (the thresholds grow toward `alpha/2` with
    /// it).
    #[arg(long, default_value = "1e-3:1e4")]
    pub c3_range: String,

    /// Stop the threshold bisection at this bracket width.
    #[arg(long, default_value_t = 1e-4)]
    pub beta_tol: f64,

    /// Worker threads (default: one per logical core).
    #[arg(long)]
    pub jobs: Option<usize>,

    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Q0Request {
    kinds: Vec<ProblemKind>,
    alphas: Vec<f64>,
    c3_max: f64,
    beta_tol: f64,
}

/// JSON-twin row; the CSV columns are the same fields in the same order.
#[derive(Serialize)]
struct Q0Row {
    alpha: f64,
    beta: f64,
    ceiling_margin: f64,
    condition_residual: f64,
    c3_star: f64,
    b_star: f64,
    nu_g_star: f64,
    flags: Vec<String>,
}

const Q0_HEADER: &str =
    "alpha,beta,ceiling_margin,condition_residual,c3_star,b_star,nu_g_star,flags";

fn q0_row(alpha: f64, t: &Q0Threshold) -> Q0Row {
    Q0Row {
        alpha,
        beta: t.beta,
        ceiling_margin: t.ceiling_margin,
        condition_residual: t.condition_residual,
        c3_star: t.c3,
        b_star: t.b,
        nu_g_star: t.nu_g,
        flags: if t.bracket_degenerate {
            vec!["bracket-degenerate".into()]
        } else {
            Vec::new()
        },
    }
}

pub fn run(args: &Q0Args) -> CliResult {
    let kinds: Vec<ProblemKind> = match &args.kind {
        Some(k) => vec![k
            .parse()
            .map_err(|e: lqlift_core::Error| CliError::Usage(e.to_string()))?],
        None => vec![ProblemKind::Sectional, ProblemKind::Strong],
    };
    if kinds.contains(&ProblemKind::Weak) {
        return Err(CliError::Usage(
            "the counting-regime closed forms cover sectional and strong only".into(),
        ));
    }
    let alphas = grid::sorted_dedup(grid::parse_grid(&args.alpha, "alpha")?);
    let (_, c3_max) = grid::parse_pair(&args.c3_range, "c3-range")?;
    let request = Q0Request {
        kinds: kinds.clone(),
        alphas: alphas.clone(),
        c3_max,
        beta_tol: args.beta_tol,
    };

    let pool = worker_pool(args.jobs)?;
    std::fs::create_dir_all(&args.out)?;
    for &kind in &kinds {
        let solved: Vec<Q0Threshold> = pool.install(|| {
            alphas
                .par_iter()
                .map(|&a| q0_threshold(kind, a, c3_max, args.beta_tol))
                .collect::<lqlift_core::Result<Vec<_>>>()
        })?;

        let mut manifest = RunManifest::new("q0", &request)?;
        let rows: Vec<Q0Row> = alphas
            .iter()
            .zip(&solved)
            .map(|(&a, t)| q0_row(a, t))
            .collect();
        for row in &rows {
            let state = if row.flags.is_empty() {
                "ok".to_string()
            } else {
                format!("flags={}", row.flags.join(";"))
            };
            manifest
                .status
                .push(format!("kind={kind} alpha={} {state}", row.alpha));
        }

        let csv_rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    fmt_num(r.alpha),
                    fmt_num(r.beta),
                    fmt_num(r.ceiling_margin),
                    fmt_num(r.condition_residual),
                    fmt_num(r.c3_star),
                    fmt_num(r.b_star),
                    fmt_num(r.nu_g_star),
                    r.flags.join(";"),
                ]
            })
            .collect();
        let stem = format!("q0_{kind}");
        write_csv(&args.out.join(format!("{stem}.csv")), &manifest, Q0_HEADER, &csv_rows)?;
        write_json(&args.out.join(format!("{stem}.json")), &manifest, &rows)?;
        eprintln!("# wrote {stem}.csv / {stem}.json ({} rows)", rows.len());
    }
    Ok(())
}

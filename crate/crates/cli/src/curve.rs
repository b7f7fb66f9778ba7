//! `lqlift curve`: sweep certified thresholds `beta*(alpha)` over the
//! cartesian product of the `--q` and `--alpha` grids.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use lqlift_core::threshold::sweep;
use lqlift_core::{CurvePoint, CurveRequest, ProblemKind, QuadratureSpec};

use crate::emit::{fmt_num, fmt_opt, write_csv, write_json};
use crate::manifest::RunManifest;
use crate::{grid, worker_pool, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Exponentially lifted bound, minimized over the lift parameter.
    Lifted,
    /// Plain first-moment limit of the lifted bound.
    Limit,
    /// Both bounds per point (two beta columns).
    Both,
}

impl ModeArg {
    fn name(self) -> &'static str {
        match self {
            ModeArg::Lifted => "lifted",
            ModeArg::Limit => "limit",
            ModeArg::Both => "both",
        }
    }
}

#[derive(Args, Debug)]
pub struct CurveArgs {
    /// Threshold notion: sectional, strong, or weak.
    #[arg(long)]
    pub kind: String,

    /// q grid: comma list or `start:stop:step`.
    #[arg(long, default_value = "1")]
    pub q: String,

    /// alpha grid: comma list or `start:stop:step`.
    #[arg(long, default_value = "0.1:0.9:0.1")]
    pub alpha: String,

    /// Which bound(s) to compute per point.
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    pub mode: ModeArg,

    /// Stop the threshold bisection at this bracket width.
    #[arg(long, default_value_t = 1e-4)]
    pub beta_tol: f64,

    /// Gauss-Legendre node budget for the expectation layer.
    #[arg(long, default_value_t = 256)]
    pub quad_nodes: usize,

    /// Search range `lo:hi` for the exponential-bound parameter.
    #[arg(long, default_value = "1e-3:1e3")]
    pub c3_range: String,

    /// Worker threads (default: one per logical core). Output bytes never
    /// depend on this.
    #[arg(long)]
    pub jobs: Option<usize>,

    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

pub const CURVE_HEADER: &str =
    "alpha,q,beta_lifted,beta_limit,c3_star,gamma_star,nu_star,mu_star,flags";

pub fn curve_row(p: &CurvePoint) -> Vec<String> {
    vec![
        fmt_num(p.alpha),
        fmt_num(p.q),
        fmt_opt(p.beta_lifted),
        fmt_opt(p.beta_limit),
        fmt_num(p.c3_star),
        fmt_num(p.gamma_star),
        fmt_num(p.nu_star),
        fmt_num(p.mu_star),
        p.flags.join(";"),
    ]
}

fn point_status(p: &CurvePoint) -> String {
    if p.flags.is_empty() {
        format!("q={} alpha={} ok", p.q, p.alpha)
    } else {
        format!("q={} alpha={} flags={}", p.q, p.alpha, p.flags.join(";"))
    }
}

pub fn run(args: &CurveArgs) -> CliResult {
    let kind: ProblemKind = args
        .kind
        .parse()
        .map_err(|e: lqlift_core::Error| CliError::Usage(e.to_string()))?;
    let qs = grid::sorted_dedup(grid::parse_grid(&args.q, "q")?);
    let alphas = grid::sorted_dedup(grid::parse_grid(&args.alpha, "alpha")?);
    let c3_range = grid::parse_pair(&args.c3_range, "c3-range")?;

    let req = CurveRequest {
        kind,
        qs,
        alphas,
        lifted: args.mode != ModeArg::Limit,
        limit: args.mode != ModeArg::Lifted,
        beta_tol: args.beta_tol,
        c3_range,
        quad: QuadratureSpec {
            node_count: args.quad_nodes,
            ..QuadratureSpec::default()
        },
    };
    let mut manifest = RunManifest::new("curve", &req)?;

    let pool = worker_pool(args.jobs)?;
    let points = pool.install(|| sweep(&req))?;
    for p in &points {
        manifest.status.push(point_status(p));
    }

    std::fs::create_dir_all(&args.out)?;
    let stem = format!("curve_{kind}_{}", args.mode.name());
    let rows: Vec<Vec<String>> = points.iter().map(curve_row).collect();
    write_csv(&args.out.join(format!("{stem}.csv")), &manifest, CURVE_HEADER, &rows)?;
    write_json(&args.out.join(format!("{stem}.json")), &manifest, &points)?;
    eprintln!("# wrote {stem}.csv / {stem}.json ({} rows)", points.len());
    Ok(())
}

//! `vstop`: command-line front end.
//!
//! Exit codes: 0 on success, 1 for invalid input or configuration, 2 for numerical failure
//! (instability, non-plateau, non-contraction, CFL).

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{RouteChoice, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "vstop", version, about = "Stopping of a fast point charge in a screened Vlasov-Poisson plasma")]
struct Cli {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; falls back to VSTOP_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides numerics.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Penrose margin and the boundary curve of the dispersion function.
    Penrose {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Green's function in Fourier space plus pointwise samples.
    Greens {
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Linear stopping force at one velocity.
    Stopping {
        /// Comma-separated components, e.g. 12,0,0.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        vstar: Option<Vec<f64>>,
        #[arg(long, value_enum)]
        route: Option<RouteChoice>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quasi-static deceleration under the tabulated drag.
    Decelerate {
        #[arg(long)]
        v0: Option<f64>,
        #[arg(long)]
        tend: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nonlinear δf marker simulation.
    Simulate {
        #[arg(long)]
        v0: Option<f64>,
        #[arg(long)]
        tend: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Passage times and regions for probe points behind a straight charge.
    Geometry {
        /// CSV with columns t,x1,x2,x3,v1,v2,v3.
        #[arg(long)]
        probe: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// All stages in sequence; writes summary.json.
    Pipeline {
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("VSTOP_THREADS") {
        Ok(s) if !s.trim().is_empty() => Ok(Some(s.trim().parse().with_context(|| format!("VSTOP_THREADS={s} is not a count"))?)),
        _ => Ok(None),
    }
}

fn out_path(cfg: &RunConfig, out: Option<PathBuf>, default: &str) -> PathBuf {
    out.unwrap_or_else(|| cfg.io.out_dir.join(default))
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = thread_count(cli.threads)? {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let seed = cli.seed.unwrap_or(cfg.numerics.seed);
    let n = &cfg.numerics;
    match cli.command {
        Command::Penrose { out } => {
            commands::penrose(&cfg, &out_path(&cfg, out, "report.csv"))?;
        }
        Command::Greens { tmax, out } => {
            commands::greens(&cfg, tmax.unwrap_or(n.greens.t_max), &out_path(&cfg, out, "greens.csv"))?;
        }
        Command::Stopping { vstar, route, out } => {
            let v = match vstar {
                None => n.stopping.vstar,
                Some(v) => <[f64; 3]>::try_from(v.as_slice()).map_err(|_| anyhow::anyhow!("--vstar needs three components, got {v:?}"))?,
            };
            let results = commands::stopping(&cfg, v, route.unwrap_or(n.stopping.route), &out_path(&cfg, out, "force.csv"))?;
            for r in results {
                println!("{}: A_est = {:.10e}", r.route.name(), r.a_est);
            }
        }
        Command::Decelerate { v0, tend, out } => {
            let d = &n.decelerate;
            let s = commands::decelerate_cmd(&cfg, v0.unwrap_or(d.v0), tend.unwrap_or(d.t_end), &out_path(&cfg, out, "traj.csv"))?;
            println!("{}", serde_json::to_string(&s)?);
        }
        Command::Simulate { v0, tend, out } => {
            let s = &n.simulate;
            let r = commands::simulate(&cfg, v0.unwrap_or(s.v0), tend.unwrap_or(s.t_end), seed, &out_path(&cfg, out, "sim.csv"))?;
            println!("{}", serde_json::to_string(&r)?);
        }
        Command::Geometry { probe, out } => {
            let probes = commands::read_probes(&probe)?;
            let counts = commands::geometry_cmd(&cfg, &probes, &out_path(&cfg, out, "geo.csv"))?;
            println!("{}", serde_json::to_string(&counts)?);
        }
        Command::Pipeline { out } => {
            let dir = out.unwrap_or_else(|| cfg.io.out_dir.clone());
            let s = commands::pipeline(&cfg, seed, Path::new(&dir))?;
            println!("{}", serde_json::to_string_pretty(&s)?);
        }
    }
    Ok(())
}

/// 2 when the root cause is a numerical failure in the library, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err.chain().any(|e| e.downcast_ref::<vstop_core::Error>().is_some_and(|e| e.is_numerical()));
    if numerical {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

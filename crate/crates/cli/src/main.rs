mod config;
mod error;
mod plots;
mod report;
mod tasks;

use clap::{Args, Parser, Subcommand};
use config::{ExperimentConfig, Overrides};
use error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

const CSV_HELP: &str = "\
Tasks: metric-check, geodesic, distance, stable-sep, measures, calibrate, hedlund, graph-theorem.

CSV files (first line is the header, written verbatim):
  path.csv, standard.csv   t,x0,x1,is_in_tube,sqrt_abs_g          (2D metrics)
                           t,x0,x1,x2,is_in_tube,sqrt_abs_g       (hedlund)
  stable.csv               h0,h1,lhat,err,n_used,flag
                           h0,h1,h2,lhat,err,n_used,flag
  measure*.csv             cell_id,x0,x1,v0,v1,weight
                           cell_id,x0,x1,x2,v0,v1,v2,weight
  gains.csv                dist_base,dist_tangent,gain

Every run writes report.json with the resolved config, tolerances, results and one
pass flag per check. Exit status: 0 all checks passed, 2 a check failed, 1 usage or
config error. LORENTZ_THREADS caps the worker pool.";

#[derive(Parser)]
#[command(name = "lorentz-lab", version, about = "Lorentzian Aubry-Mather experiments on torus spacetimes", after_help = CSV_HELP)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment and write report.json plus task CSVs.
    #[command(after_help = CSV_HELP)]
    Run(RunArgs),
    /// Turn a report directory into gnuplot .dat files.
    EmitPlots {
        /// Directory holding report.json.
        dir: PathBuf,
        /// Where to write the .dat files (defaults to DIR).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Task name; may instead come from the config file.
    #[arg(value_name = "TASK")]
    kind: Option<String>,
    /// TOML config file; command-line options override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// flat2, conformal2, boundary2 or hedlund.
    #[arg(long)]
    metric: Option<String>,
    /// Hedlund weights λ₁,λ₂,λ₃ (normalized to sum 1).
    #[arg(long, allow_hyphen_values = true)]
    lambdas: Option<String>,
    /// Hedlund tube radius ε.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    from: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    to: Option<String>,
    /// Initial direction for geodesic runs.
    #[arg(long, allow_hyphen_values = true)]
    direction: Option<String>,
    /// Homology direction for stable-sep and measures.
    #[arg(long, allow_hyphen_values = true)]
    h: Option<String>,
    /// Grid spacing Δ.
    #[arg(long)]
    dx: Option<f64>,
    /// Stencil reach k.
    #[arg(long)]
    stencil: Option<i64>,
    /// Integrator step.
    #[arg(long)]
    step: Option<f64>,
    /// Background arclength of geodesic runs.
    #[arg(long = "t-span")]
    t_span: Option<f64>,
    /// Largest multiple N.
    #[arg(long)]
    n: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    count: Option<usize>,
    /// Main tolerance of the task.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Hedlund subtask: shadowing, segments or heteroclinic.
    #[arg(long = "task")]
    subtask: Option<String>,
}

fn threads() -> Result<Option<usize>, CliError> {
    match std::env::var("LORENTZ_THREADS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::config("LORENTZ_THREADS", format!("`{s}` is not a positive integer"))),
        },
        Err(_) => Ok(None),
    }
}

fn run(a: RunArgs) -> Result<bool, CliError> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::from_toml(&std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(Overrides {
        task: a.kind,
        metric: a.metric,
        lambdas: a.lambdas,
        eps: a.eps,
        from: a.from,
        to: a.to,
        direction: a.direction,
        h: a.h,
        dx: a.dx,
        stencil: a.stencil,
        step: a.step,
        t_span: a.t_span,
        n: a.n,
        samples: a.samples,
        count: a.count,
        tol: a.tol,
        seed: a.seed,
        out: a.out,
        subtask: a.subtask,
    })?;
    cfg.validate()?;
    let threads = threads()?;
    let dir = cfg.output.dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let go = || tasks::run(&cfg, &dir);
    let report = match threads {
        Some(n) => lorentz_core::exec::with_threads(n, go),
        None => go(),
    }?;
    for c in &report.checks {
        println!("{} {}: {} (tol {})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.tol);
    }
    if cfg.output.json() {
        let p = report.write(&dir)?;
        println!("wrote {}", p.display());
    }
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.cmd {
        Cmd::Run(a) => run(a),
        Cmd::EmitPlots { dir, out } => plots::emit_plots(&dir, out.as_ref().unwrap_or(&dir)).map(|files| {
            for f in files {
                println!("wrote {}", f.display());
            }
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

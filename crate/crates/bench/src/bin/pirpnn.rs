use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pirpnn_bench::export::{export_dense, write_report_json, write_sweep_csv};
use pirpnn_bench::sweep::linspace;
use pirpnn_bench::{run_benchmark, sweep_cn, BenchError, ReferenceTrajectory, RunOptions, SweepConfig};
use pirpnn_core::problems::{benchmark, REGISTRY};
use pirpnn_core::stepper::LinearSolver;
use pirpnn_core::SolverConfig;

#[derive(Parser)]
#[command(name = "pirpnn", version, about = "Random projection network solver for stiff ODEs and index-1 DAEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sparse {
    Auto,
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a benchmark and report errors.
    Solve {
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        abstol: Option<f64>,
        #[arg(long)]
        reltol: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        /// Reference CSV; without it errors are measured against a run at tol/1000.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// csv writes the dense output of the first seed, json the error report.
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, value_enum, default_value_t = Sparse::Auto)]
        sparse: Sparse,
        /// Output grid size when no reference is given.
        #[arg(long)]
        grid_points: Option<usize>,
        #[arg(long, default_value_t = 20)]
        kernels: usize,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = 12.0)]
        c: f64,
    },
    /// Bias-variance sweep over (c, N).
    Sweep {
        #[arg(long, default_value = "vdp")]
        problem: String,
        #[arg(long, default_value_t = 4.0)]
        c_min: f64,
        #[arg(long, default_value_t = 20.0)]
        c_max: f64,
        #[arg(long, default_value_t = 5)]
        c_steps: usize,
        #[arg(long, default_value_t = 10)]
        n_min: usize,
        #[arg(long, default_value_t = 30)]
        n_max: usize,
        #[arg(long, default_value_t = 5)]
        n_steps: usize,
        #[arg(long, default_value_t = 5)]
        seeds: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the registered benchmarks.
    ListProblems,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<u8, BenchError> {
    match cli.command {
        Command::ListProblems => {
            for name in REGISTRY {
                let spec = benchmark(name)?;
                println!("{name:24} m={:<4} t=[{}, {}]", spec.dim(), spec.t_span.0, spec.t_span.1);
            }
            Ok(0)
        }
        Command::Solve {
            problem,
            tol,
            abstol,
            reltol,
            t_end,
            seed,
            runs,
            reference,
            out,
            format,
            sparse,
            grid_points,
            kernels,
            points,
            c,
        } => {
            let spec = benchmark(&problem)?;
            let reference = reference.map(ReferenceTrajectory::read).transpose()?;
            let solver = SolverConfig {
                abstol: abstol.unwrap_or(tol),
                reltol: reltol.unwrap_or(tol),
                seed,
                kernels,
                points,
                c,
                linear_solver: match sparse {
                    Sparse::Auto => LinearSolver::Auto,
                    Sparse::On => LinearSolver::Sparse,
                    Sparse::Off => LinearSolver::Dense,
                },
                ..SolverConfig::default()
            };
            let opts = RunOptions {
                solver,
                runs,
                t_end,
                grid_points,
                ..RunOptions::default()
            };
            let run = run_benchmark(&spec, &opts, reference.as_ref())?;
            let rep = &run.report;
            println!(
                "{} tol=({:e}, {:e}) seeds={} grid={}{}",
                rep.problem,
                rep.abstol,
                rep.reltol,
                rep.seeds.len(),
                rep.grid_points,
                if rep.self_referenced { " self-referenced" } else { "" }
            );
            for (k, e) in rep.per_state.iter().enumerate() {
                println!("  u{:<3} l2={:.3e} linf={:.3e} mae={:.3e}", k + 1, e.l2, e.linf, e.mae);
            }
            if let Some(t) = &rep.timing {
                println!("  time median={:.3}s min={:.3}s max={:.3}s", t.median_s, t.min_s, t.max_s);
            }
            if let Some(path) = out {
                match format {
                    Format::Json => write_report_json(&path, rep)?,
                    Format::Csv => {
                        if let Some(traj) = run.trajectories.first() {
                            let note = vec![format!("problem: {}", rep.problem), format!("seed: {}", rep.seeds[0])];
                            export_dense(&path, traj, &run.times, &note)?;
                        }
                    }
                }
            }
            if let Some(f) = &rep.failure {
                eprintln!("solver failed for seed {} at t = {}: {}", f.seed, f.t_reached, f.reason);
                return Ok(2);
            }
            Ok(0)
        }
        Command::Sweep {
            problem,
            c_min,
            c_max,
            c_steps,
            n_min,
            n_max,
            n_steps,
            seeds,
            tol,
            reference,
            out,
        } => {
            let spec = benchmark(&problem)?;
            let reference = ReferenceTrajectory::read(reference)?;
            if n_max < n_min {
                return Err(BenchError::Input(format!("empty range {n_min}..{n_max}")));
            }
            let mut kernel_counts: Vec<usize> = linspace(n_min as f64, n_max as f64, n_steps)?
                .into_iter()
                .map(|v| v.round() as usize)
                .collect();
            kernel_counts.dedup();
            let cfg = SweepConfig {
                c_values: linspace(c_min, c_max, c_steps)?,
                kernel_counts,
                seeds,
                base: SolverConfig::with_tol(tol),
                t_end: None,
            };
            let result = sweep_cn(&spec, &cfg, &reference)?;
            write_sweep_csv(&out, &result)?;
            for cell in &result.cells {
                match cell.score {
                    Some(s) => println!("c={:<6} N={:<3} score={s:.3e} time={:.3}s", cell.c, cell.kernels, cell.time_s),
                    None => println!("c={:<6} N={:<3} failed", cell.c, cell.kernels),
                }
            }
            if let Some(b) = result.best() {
                println!("best: c={} N={}", b.c, b.kernels);
            }
            Ok(0)
        }
    }
}

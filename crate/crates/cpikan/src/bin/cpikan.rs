use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cpikan::diagnostics::{check_derivatives, D1_TOL, D2_TOL, GRAD_TOL};
use cpikan::experiment::{emit_reference, run_experiment, run_suite, ExperimentConfig, Overrides};

#[derive(Parser)]
#[command(name = "cpikan", about = "Physics-informed cKAN/MLP experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single experiment from a TOML or JSON config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Multiply the configured epoch count (e.g. 0.1 for a smoke run).
        #[arg(long)]
        epochs_scale: Option<f64>,
        /// Omit wall-clock timing so artifacts are byte-identical across reruns.
        #[arg(long)]
        deterministic: bool,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run every config listed in a suite manifest and emit a comparison table.
    Suite {
        manifest: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        epochs_scale: Option<f64>,
        #[arg(long)]
        deterministic: bool,
        #[arg(long, default_value = "out/suite")]
        out_dir: PathBuf,
    },
    /// Check jet derivatives and loss gradients against finite differences.
    CheckDerivatives {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        networks: usize,
    },
    /// Solve a reference problem on a fine grid and write it as CSV.
    EmitReference {
        /// Problem name; only `allen-cahn` has a reference solver.
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = 2.0)]
        m: f64,
        #[arg(long, default_value_t = 1e-4)]
        diffusion: f64,
        #[arg(long, default_value_t = 1.0)]
        t_final: f64,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> cpikan::Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            seed,
            epochs_scale,
            deterministic,
            out_dir,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            let overrides = Overrides {
                seed,
                epochs_scale,
                deterministic,
                out_dir,
            };
            overrides.apply(&mut cfg);
            let out = cfg.out_dir.clone().unwrap_or_else(|| {
                PathBuf::from("out").join(cfg.run_name())
            });
            let summary = run_experiment(&cfg, &out)?;
            println!(
                "{}: status={} re_u={} ({})",
                summary.name,
                summary.status,
                summary
                    .relative_l2
                    .map_or("n/a".into(), |e| format!("{e:.3e}")),
                out.display()
            );
            Ok(if summary.status == "ok" {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Suite {
            manifest,
            seed,
            epochs_scale,
            deterministic,
            out_dir,
        } => {
            let overrides = Overrides {
                seed,
                epochs_scale,
                deterministic,
                out_dir: None,
            };
            let rows = run_suite(&manifest, &overrides, &out_dir)?;
            for r in &rows {
                println!(
                    "{}: status={} re_u={}",
                    r.name,
                    r.status,
                    r.relative_l2.map_or("n/a".into(), |e| format!("{e:.3e}"))
                );
            }
            println!("table: {}", out_dir.join("suite.csv").display());
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckDerivatives { seed, networks } => {
            let report = check_derivatives(networks, seed)?;
            println!(
                "checked {} networks: max d1 err {:.3e} (tol {D1_TOL:.0e}), \
                 max d2 err {:.3e} (tol {D2_TOL:.0e}), max grad err {:.3e} (tol {GRAD_TOL:.0e})",
                report.networks, report.max_d1, report.max_d2, report.max_grad
            );
            if report.passes() {
                println!("derivative check passed");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("derivative check FAILED");
                Ok(ExitCode::FAILURE)
            }
        }
        Command::EmitReference {
            problem,
            m,
            diffusion,
            t_final,
            out_dir,
        } => {
            if problem != "allen-cahn" {
                return Err(cpikan::Error::InvalidConfig(format!(
                    "no reference solver for problem '{problem}' (only allen-cahn)"
                )));
            }
            std::fs::create_dir_all(&out_dir)?;
            let path = out_dir.join("reference_allen_cahn.csv");
            emit_reference(m, diffusion, t_final, &path)?;
            println!("reference written to {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

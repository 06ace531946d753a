//! `invopt` — recover cost vectors that make an observed mixed-integer
//! solution optimal or provably near-optimal.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use invopt::cutplane::CutPlaneConfig;
use invopt_cli::instance::{load_cost_file, load_instance_file};
use invopt_cli::report::emit;
use invopt_cli::run::{run_cutplane, run_solve, run_verify, ModelChoice, SolveOptions, WeightChoice};
use invopt_cli::{batch, CliError, CliResult};

#[derive(Parser)]
#[command(name = "invopt", version, about = "inverse mixed-integer optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Zero all cpu_seconds fields so reports are bit-for-bit reproducible.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance with an inverse model and print the report.
    Solve {
        instance: PathBuf,
        /// tolerance | biobj | bigm | concise
        #[arg(long, default_value = "tolerance")]
        model: String,
        /// Tolerance parameter; defaults to the ladder keyed on the
        /// reference forward objective.
        #[arg(long)]
        tau: Option<f64>,
        /// default | unit | comma-separated list aligned with the support.
        #[arg(long, default_value = "default")]
        weights: String,
        /// Rescale the recovered cost toward the reference afterwards.
        #[arg(long)]
        scale: bool,
        /// Wall-clock cap for forward solves, seconds.
        #[arg(long, default_value_t = 30.0)]
        forward_cap_s: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the cutting-plane refinement loop on one instance.
    Cutplane {
        instance: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        tau_init: f64,
        #[arg(long, default_value_t = 1.25)]
        tau_up: f64,
        #[arg(long, default_value_t = 0.75)]
        tau_down: f64,
        #[arg(long, default_value_t = 30.0)]
        forward_cap_s: f64,
        #[arg(long, default_value_t = 3600.0)]
        total_cap_s: f64,
        #[arg(long, default_value_t = 1000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-2)]
        gap_stop: f64,
        /// Suppress the line-delimited iteration records on stderr.
        #[arg(long)]
        quiet: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Price a given cost vector and certify the observation.
    Verify {
        instance: PathBuf,
        /// JSON file holding the structural cost as a bare array.
        #[arg(long)]
        cost: PathBuf,
        #[arg(long, default_value_t = 30.0)]
        forward_cap_s: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Solve every instance in a directory and print the aggregate table.
    Batch {
        dir: PathBuf,
        /// tolerance | biobj | bigm | concise
        #[arg(long, default_value = "tolerance")]
        model: String,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value = "default")]
        weights: String,
        /// Worker threads for instance-level parallelism.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// Write the aggregate table as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the aggregate table as Markdown here (stdout otherwise).
        #[arg(long)]
        md: Option<PathBuf>,
        /// Directory for per-instance JSON reports.
        #[arg(long)]
        report_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 30.0)]
        forward_cap_s: f64,
        #[arg(long)]
        no_timing: bool,
    },
}

fn env_seed() -> u64 {
    std::env::var("INVOPT_SEED")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}

fn write_or_print(text: &str, out: &Option<PathBuf>) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError {
            exit_code: 4,
            message: format!("cannot write {}: {e}", path.display()),
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Solve { instance, model, tau, weights, scale, forward_cap_s, output } => {
            let inst = load_instance_file(&instance)?;
            let opts = SolveOptions {
                model: ModelChoice::parse(&model)?,
                tau,
                weights: WeightChoice::parse(&weights)?,
                scale,
                forward_time_cap: Duration::from_secs_f64(forward_cap_s),
                seed: inst.config.seed.unwrap_or_else(env_seed),
            };
            let report = run_solve(&inst, &opts)?;
            write_or_print(&emit(&report, output.no_timing)?, &output.out)
        }
        Command::Cutplane {
            instance,
            tau_init,
            tau_up,
            tau_down,
            forward_cap_s,
            total_cap_s,
            max_iters,
            gap_stop,
            quiet,
            output,
        } => {
            let inst = load_instance_file(&instance)?;
            let cfg = CutPlaneConfig {
                tau_init,
                tau_up,
                tau_down,
                forward_time_cap: Duration::from_secs_f64(forward_cap_s),
                total_time_cap: Duration::from_secs_f64(total_cap_s),
                max_iters,
                abs_gap_stop: gap_stop,
            };
            let seed = inst.config.seed.unwrap_or_else(env_seed);
            let mut stream = |rec: &invopt::cutplane::IterationRecord| {
                if let Ok(line) = serde_json::to_string(rec) {
                    eprintln!("{line}");
                }
            };
            let observer: Option<&mut dyn FnMut(&invopt::cutplane::IterationRecord)> =
                if quiet { None } else { Some(&mut stream) };
            let report = run_cutplane(&inst, &cfg, seed, observer)?;
            write_or_print(&emit(&report, output.no_timing)?, &output.out)
        }
        Command::Verify { instance, cost, forward_cap_s, output } => {
            let inst = load_instance_file(&instance)?;
            let cost = load_cost_file(&cost, inst.problem.structural_count)?;
            let seed = inst.config.seed.unwrap_or_else(env_seed);
            let report =
                run_verify(&inst, &cost, Duration::from_secs_f64(forward_cap_s), seed)?;
            write_or_print(&emit(&report, output.no_timing)?, &output.out)
        }
        Command::Batch {
            dir,
            model,
            tau,
            weights,
            parallel,
            csv,
            md,
            report_dir,
            forward_cap_s,
            no_timing,
        } => {
            let opts = SolveOptions {
                model: ModelChoice::parse(&model)?,
                tau,
                weights: WeightChoice::parse(&weights)?,
                scale: false,
                forward_time_cap: Duration::from_secs_f64(forward_cap_s),
                seed: env_seed(),
            };
            let items = batch::run_batch(&dir, &opts, parallel.max(1), no_timing)?;

            if let Some(report_dir) = &report_dir {
                fs::create_dir_all(report_dir).map_err(|e| CliError {
                    exit_code: 4,
                    message: format!("cannot create {}: {e}", report_dir.display()),
                })?;
                for item in &items {
                    if let Ok(report) = &item.outcome {
                        let name = item
                            .file
                            .file_stem()
                            .map(|s| s.to_string_lossy().into_owned())
                            .unwrap_or_default();
                        let path = report_dir.join(format!("{name}.report.json"));
                        fs::write(&path, emit(report, no_timing)?).map_err(|e| CliError {
                            exit_code: 4,
                            message: format!("cannot write {}: {e}", path.display()),
                        })?;
                    }
                }
            }

            let rows = batch::aggregate(&items);
            let markdown = batch::to_markdown(&rows);
            match &md {
                Some(path) => fs::write(path, &markdown).map_err(|e| CliError {
                    exit_code: 4,
                    message: format!("cannot write {}: {e}", path.display()),
                })?,
                None => print!("{markdown}"),
            }
            if let Some(path) = &csv {
                fs::write(path, batch::to_csv(&rows)).map_err(|e| CliError {
                    exit_code: 4,
                    message: format!("cannot write {}: {e}", path.display()),
                })?;
            }

            let failures: Vec<&batch::BatchItem> =
                items.iter().filter(|i| i.outcome.is_err()).collect();
            if !failures.is_empty() {
                for item in &failures {
                    if let Err(e) = &item.outcome {
                        eprintln!("FAILED {}: {}", item.file.display(), e.message);
                    }
                }
                return Err(CliError {
                    exit_code: 1,
                    message: format!("{} of {} instances failed", failures.len(), items.len()),
                });
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.exit_code.clamp(0, 255) as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hoverctl::{cmd_check_sets, cmd_run, cmd_sweep, output_dir};

#[derive(Parser)]
#[command(name = "hoverctl", version, about = "Event-based impulsive hovering: runs, sweeps and set diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario; writes log.csv and metrics.json.
    Run {
        config: PathBuf,
        /// Output directory (default: $HOVERCTL_OUT, then ./hoverctl-out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one simulation per grid value; writes sweep.csv and runs/*.json.
    Sweep {
        config: PathBuf,
        /// Swept parameter: e, dvmin or dvmax.
        #[arg(long)]
        param: String,
        /// lin:START:STOP:N, log:START:STOP:N or list:V1,V2,...
        #[arg(long)]
        grid: String,
        /// Worker threads (default: logical cores).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print dead-zone existence, threshold bounds and initial-state verdicts.
    CheckSets { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => {
            let dir = output_dir(out);
            cmd_run(&config, &dir).map(|m| {
                eprintln!(
                    "fuel_J = {:.6e} m/s, impulses = {}, box satisfaction = {:.2}%, fallbacks = {}; wrote {}",
                    m.fuel_j,
                    m.n_impulses,
                    m.box_satisfaction,
                    m.calls_fallback,
                    dir.display()
                );
            })
        }
        Command::Sweep { config, param, grid, jobs, out } => {
            let dir = output_dir(out);
            let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            cmd_sweep(&config, &param, &grid, jobs, &dir).map(|rows| {
                let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
                eprintln!("{} runs, {failed} failed; wrote {}", rows.len(), dir.display());
            })
        }
        Command::CheckSets { config } => cmd_check_sets(&config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hoverctl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ruc_cli::{cmd_compare, cmd_run, cmd_sweep_k, default_out, exit, summary_line, Overrides};

#[derive(Parser)]
#[command(name = "ruc", version, about = "Hurricane-resilient robust unit commitment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OverrideArgs {
    /// Failure-probability threshold Π in [0, 1].
    #[arg(long)]
    pi: Option<f64>,
    /// Maximum number of simultaneously failed lines K.
    #[arg(long)]
    k: Option<usize>,
    /// Enable line repair (`--repair` or `--repair false`).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    repair: Option<bool>,
    /// Repair time RT (slots) applied to every line.
    #[arg(long)]
    rt: Option<usize>,
    /// Value of lost load ($/MWh).
    #[arg(long)]
    voll: Option<f64>,
    /// Value of generation curtailment ($/MWh).
    #[arg(long)]
    vogc: Option<f64>,
    /// Relative C&CG convergence tolerance.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Solver backend name.
    #[arg(long)]
    backend: Option<String>,
}

impl From<OverrideArgs> for Overrides {
    fn from(a: OverrideArgs) -> Self {
        Overrides {
            pi: a.pi,
            k: a.k,
            repair: a.repair,
            rt: a.rt,
            voll: a.voll,
            vogc: a.vogc,
            epsilon: a.epsilon,
            backend: a.backend,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one case and write the report files.
    Run {
        case: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
        /// Output directory (default: results/<case name>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run Scenarios I (Π=0), II (Π=0.01) and III (Π=0.01 with repair).
    CompareScenarios {
        case: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the case once per K value.
    SweepK {
        case: PathBuf,
        /// Comma-separated K values.
        #[arg(long = "k-values", value_delimiter = ',', required = true)]
        k_values: Vec<usize>,
        #[command(flatten)]
        overrides: OverrideArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::INPUT } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match cli.command {
        Command::Run { case, overrides, out } => {
            let out = out.unwrap_or_else(|| default_out(&case));
            match cmd_run(&case, &overrides.into(), &out) {
                Ok((report, code)) => {
                    println!("{}", summary_line(&report));
                    println!("reports written to {}", out.display());
                    code
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
        Command::CompareScenarios { case, overrides, out } => {
            let out = out.unwrap_or_else(|| default_out(&case).join("comparison"));
            study(cmd_compare(&case, &overrides.into(), &out), &out)
        }
        Command::SweepK {
            case,
            k_values,
            overrides,
            out,
        } => {
            let out = out.unwrap_or_else(|| default_out(&case).join("sweep_k"));
            study(cmd_sweep_k(&case, &overrides.into(), &k_values, &out), &out)
        }
    };
    ExitCode::from(code as u8)
}

fn study(result: ruc_cli::CliResult<ruc_cli::StudyOutcome>, out: &std::path::Path) -> i32 {
    match result {
        Ok(outcome) => {
            for (name, r) in &outcome.rows {
                match r {
                    Ok(rep) => println!("{name}: {}", summary_line(rep)),
                    Err(e) => println!("{name}: FAILED ({e})"),
                }
            }
            for (check, ok) in &outcome.checks {
                println!("{} {check}", if *ok { "holds:" } else { "VIOLATED:" });
            }
            println!("tables written to {}", out.display());
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qca_anomaly_cli::error::{CliError, EXIT_INTERNAL};
use qca_anomaly_cli::{parse_config, run, selftest, Report};

#[derive(Parser)]
#[command(name = "qca-anomaly", version, about = "Anomaly indices of symmetries of quantum spin chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write its reports.
    Run {
        config: PathBuf,
        /// Output directory, overriding `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Largest accepted phase snap error.
        #[arg(long)]
        tol: Option<f64>,
        /// Largest snapping denominator.
        #[arg(long)]
        den_cap: Option<u64>,
        /// Largest number of sites searched for obstruction unitaries.
        #[arg(long)]
        window_cap: Option<usize>,
        /// Worker threads for spectra scans.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run the built-in checks and print the results.
    Selftest,
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { config, out, tol, den_cap, window_cap, threads } => {
            let text =
                std::fs::read_to_string(&config).map_err(|source| CliError::Io { path: config.clone(), source })?;
            let mut cfg = parse_config(&text)?;
            let limits = &mut cfg.limits;
            limits.tol = tol.unwrap_or(limits.tol);
            limits.den_cap = den_cap.or(limits.den_cap);
            limits.window_cap = window_cap.unwrap_or(limits.window_cap);
            limits.threads = threads.unwrap_or(limits.threads);
            if let Some(dir) = out {
                cfg.output.dir = dir.to_string_lossy().into_owned();
            }
            cfg.validate()?;
            let report = run(&cfg)?;
            report.emit(&PathBuf::from(&cfg.output.dir), &cfg.output.name)?;
            print!("{}", report.summary);
            Ok(report.exit_code())
        }
        Command::Selftest => {
            let report: Report = selftest();
            print!("{}", report.summary);
            Ok(report.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match panic::catch_unwind(AssertUnwindSafe(|| execute(cli))) {
        Ok(Ok(code)) => code,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        Err(_) => EXIT_INTERNAL,
    };
    ExitCode::from(code as u8)
}

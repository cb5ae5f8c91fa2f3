use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qal_cli::{parse_config, report_exit_code, run, Command, RunError};
use qal_core::Mode;

#[derive(Parser)]
#[command(name = "qal", version, about = "Exact quantum-annulus computations and spectral probes")]
struct Cli {
    /// One of: verify-algebra, classify-derivation, states, implement,
    /// diag-criteria, nogo-probe, sweep.
    command: String,
    /// Configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Directory for the JSON report and CSV tables (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = ["exact", "double"])]
    mode: Option<String>,
}

fn execute(cli: Cli) -> Result<i32, RunError> {
    let cmd = Command::from_name(&cli.command)
        .ok_or_else(|| RunError::Usage(format!("unknown command `{}`", cli.command)))?;
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| RunError::Usage(format!("cannot read {}: {e}", cli.config.display())))?;
    let mut cfg = parse_config(&text)?;
    if let Some(c) = cfg.command.filter(|c| *c != cmd) {
        return Err(RunError::Usage(format!("{} is a `{c}` configuration", cli.config.display())));
    }
    cfg.command = Some(cmd);
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if let Some(m) = cli.mode {
        cfg.mode = Some(m.parse::<Mode>().map_err(|e| RunError::Usage(e.to_string()))?);
    }
    let report = run(&cfg)?;
    for c in &report.checks {
        eprintln!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
    }
    match cli.out.or(cfg.out.map(PathBuf::from)) {
        Some(dir) => {
            for p in report.write_to(&dir).map_err(|e| RunError::Runtime(format!("writing reports: {e}")))? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => print!("{}", report.to_json()),
    }
    Ok(report_exit_code(&report))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let path = cli.config.display().to_string();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(RunError::Config(e)) => {
            for d in &e.diagnostics {
                eprintln!("{path}:{d}");
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qwork_core::scenario::{list_models, parse_config, run_scenario, OutputFormat, ParsedConfig};

/// Work-statistics scenario runner: builds two-point-measurement work
/// distributions for small driven quantum systems, verifies the cumulant
/// generating function against its divergence identities and bound families,
/// exercises the explicit battery construction, and writes machine-readable
/// reports.
#[derive(Parser)]
#[command(name = "qwork", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario configuration and write its report.
    Run {
        /// Path to the configuration document.
        config: PathBuf,
        /// Output directory (overrides [output] path).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format: csv or json (overrides [output] format).
        #[arg(long)]
        format: Option<String>,
        /// Sampling seed (overrides [sampling] seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Treat unknown configuration keys as errors.
        #[arg(long)]
        strict: bool,
    },
    /// Validate a configuration document without running it.
    Check {
        /// Path to the configuration document.
        config: PathBuf,
        /// Treat unknown configuration keys as errors.
        #[arg(long)]
        strict: bool,
    },
    /// List the named system models and their parameters.
    ListScenarios,
}

fn load(path: &PathBuf, strict: bool) -> Result<ParsedConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_config(&text, strict).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListScenarios => {
            for model in list_models() {
                println!("{:<14} {}", model.name, model.summary);
                println!("{:<14}   parameters: {}", "", model.parameters);
            }
            ExitCode::SUCCESS
        }
        Command::Check { config, strict } => match load(&config, strict) {
            Ok(parsed) => {
                for warning in &parsed.warnings {
                    eprintln!("warning: {warning}");
                }
                println!(
                    "ok: scenario '{}' (model {}, beta {})",
                    parsed.config.name,
                    parsed.config.system.name(),
                    parsed.config.beta
                );
                ExitCode::SUCCESS
            }
            Err(message) => {
                eprintln!("invalid configuration: {message}");
                ExitCode::from(2)
            }
        },
        Command::Run {
            config,
            out,
            format,
            seed,
            strict,
        } => {
            let mut parsed = match load(&config, strict) {
                Ok(parsed) => parsed,
                Err(message) => {
                    eprintln!("invalid configuration: {message}");
                    return ExitCode::from(2);
                }
            };
            for warning in &parsed.warnings {
                eprintln!("warning: {warning}");
            }
            if let Some(dir) = out {
                parsed.config.output.path = dir.display().to_string();
            }
            match format.as_deref() {
                None => {}
                Some("json") => parsed.config.output.format = OutputFormat::Json,
                Some("csv") => parsed.config.output.format = OutputFormat::Csv,
                Some(other) => {
                    eprintln!("unknown --format '{other}' (csv|json)");
                    return ExitCode::from(2);
                }
            }
            if let (Some(seed), Some(sampling)) = (seed, parsed.config.sampling.as_mut()) {
                sampling.seed = seed;
            }

            let report = match run_scenario(&parsed.config) {
                Ok(report) => report,
                Err(error) => {
                    eprintln!("error: {error}");
                    return ExitCode::from(2);
                }
            };

            println!("scenario: {}", report.scenario);
            if let Some(bridge) = &report.bridge {
                println!(
                    "  beta = {}, dF = {:.6}, <W> = {:.6}, Var(W) = {:.6}, S_irr = {:.6}",
                    bridge.pots.beta,
                    bridge.pots.delta_f,
                    bridge.mean_work,
                    bridge.var_work,
                    bridge.s_irr
                );
            }
            for check in &report.checks {
                let sign = if check.kind == "max" { "<=" } else { ">=" };
                println!(
                    "  [{}] {:<32} {:>13.3e} {} {:>9.1e}",
                    if check.pass { "pass" } else { "FAIL" },
                    check.name,
                    check.value,
                    sign,
                    check.threshold
                );
            }
            println!(
                "result: {} ({} checks), outputs in {}",
                if report.passed() { "PASS" } else { "FAIL" },
                report.checks.len(),
                parsed.config.output.path
            );
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use isoshock::config::{load_config, parse_config, ExperimentConfig};
use isoshock::experiment::{exit_code, riemann_report, run_experiment, Mode};
use isoshock::riemann::GasState;
use isoshock::Error;

#[derive(Debug, Parser)]
#[command(
    name = "isoshock",
    version,
    about = "Generalized Riemann problem experiments for 2-D isothermal Euler flow"
)]
struct Cli {
    /// TOML experiment config; defaults apply when omitted
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output root; overrides `output.dir`
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides `perturbation.epsilon`
    #[arg(long, global = true, value_name = "X", allow_negative_numbers = true)]
    epsilon: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the wave fan of two states (the configured background by default)
    Riemann {
        /// Left state as RHO,U
        #[arg(long, value_parser = parse_state)]
        left: Option<GasState>,
        /// Right state as RHO,U
        #[arg(long, value_parser = parse_state)]
        right: Option<GasState>,
    },
    /// One run: functional series, final field dump and report
    Simulate,
    /// Refinement ladder of the identity residuals
    VerifyIdentities {
        /// Number of refinements of the configured grid
        #[arg(long, default_value_t = 2, value_name = "N")]
        refine: usize,
    },
    /// Lifespan proxy sweep over the configured epsilons
    Sweep,
    /// Test-function checks and 3-D hypothesis values
    Testfn,
}

fn parse_state(s: &str) -> Result<GasState, String> {
    let (rho, u) = s
        .split_once(',')
        .ok_or_else(|| format!("expected RHO,U, got `{s}`"))?;
    let rho: f64 = rho
        .trim()
        .parse()
        .map_err(|e| format!("density `{rho}`: {e}"))?;
    let u: f64 = u
        .trim()
        .parse()
        .map_err(|e| format!("velocity `{u}`: {e}"))?;
    Ok(GasState::new(rho, u, 0.0))
}

fn load(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut config = match &cli.config {
        Some(path) => load_config(path)?,
        None => parse_config("")?,
    };
    if let Some(e) = cli.epsilon {
        config.perturbation.epsilon = e;
        // re-validate through the text form so errors name the key
        config = parse_config(&config.to_toml())?;
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<(), Error> {
    let config = load(cli)?;
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output.dir));
    let mode = match cli.command {
        Command::Riemann { left, right } => {
            let b = &config.background;
            let l = left.unwrap_or(GasState::new(b.rho_l, b.u_l, 0.0));
            let r = right.unwrap_or(GasState::new(b.rho_r, b.u_r, 0.0));
            println!("config_hash = {}", config.hash());
            print!("{}", riemann_report(l, r)?);
            return Ok(());
        }
        Command::Simulate => Mode::Single,
        Command::VerifyIdentities { refine } => Mode::VerifyIdentities { refine },
        Command::Sweep => Mode::Sweep,
        Command::Testfn => Mode::Testfn,
    };
    let outcome = run_experiment(&config, mode, &out)?;
    print!("{}", outcome.report);
    println!("wrote {}", outcome.dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use relay_outage::outage::asymptotic::network_asymptotic_outage;
use relay_outage::outage::exact::network_user_outage;
use relay_outage::outage::system::{network_system_outage, SeriesControl};
use relay_outage::simulate::{estimate_network_system_outage, estimate_network_user_outage};
use relay_outage_cli::config::InterferenceSpec;
use relay_outage_cli::{run_sweep, validate, CliError, Config, RunOptions};

#[derive(Parser)]
#[command(name = "relay-outage", version, about = "Outage of two-way fixed-gain AF relaying with beamforming, correlation and CCI")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Monte Carlo trials, overriding the file.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Term limit of the system-outage series.
    #[arg(long)]
    max_series_terms: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every method over the configured grid and write a CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the closed forms against Monte Carlo and print a pass/fail table.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Scale C in the closed forms (negative control).
        #[arg(long, hide = true, default_value_t = 1.0)]
        corrupt_gain: f64,
    },
    /// User outage at the configured point.
    UserOutage {
        #[command(flatten)]
        common: Common,
    },
    /// System outage at the configured point (no interference).
    SystemOutage {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<Config, CliError> {
    let mut config = Config::load(&common.config)?;
    if let Some(t) = common.trials {
        config.trials = t;
    }
    if let Some(s) = common.seed {
        config.seed = s;
    }
    if let Some(m) = common.max_series_terms {
        config.series = SeriesControl::new(m, config.series.tolerance())?;
    }
    Ok(config)
}

fn user_outage(common: &Common) -> Result<(), CliError> {
    let config = load(common)?;
    for curve in config.curves() {
        let net = config.scenario(curve, None).resolve()?;
        for &u in &config.users {
            let exact = network_user_outage(&net, u)?;
            print!("[{curve}] user {}: {} {:.12e}", u.index(), exact.method, exact.p);
            if !matches!(config.interference, InterferenceSpec::Ratio(_)) {
                let a = network_asymptotic_outage(&net, u)?;
                print!("  asymptotic {:.6e}", a.evaluate(net.snr));
            }
            if common.trials.is_some() {
                let e = estimate_network_user_outage(&net, u, config.trials, config.seed)?;
                print!("  monte-carlo {:.6e} ± {:.2e}", e.p, e.stderr);
            }
            println!();
        }
    }
    Ok(())
}

fn system_outage(common: &Common) -> Result<(), CliError> {
    let config = load(common)?;
    for curve in config.curves() {
        let net = config.scenario(curve, None).resolve()?;
        let parts = network_system_outage(&net, config.series)?;
        print!(
            "[{curve}] system: {} {:.12e} (I1 {:.6e}, I2 {:.6e})",
            parts.method,
            parts.result().p,
            parts.i1,
            parts.i2
        );
        if common.trials.is_some() {
            let e = estimate_network_system_outage(&net, config.trials, config.seed)?;
            print!("  monte-carlo {:.6e} ± {:.2e}", e.p, e.stderr);
        }
        println!();
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Sweep { common, out } => {
            let config = load(&common)?;
            let n = run_sweep(&config, &out, RunOptions::default())?;
            eprintln!("wrote {n} rows to {}", out.display());
            Ok(true)
        }
        Command::Validate { common, corrupt_gain } => {
            let config = load(&common)?;
            let report = validate(&config, RunOptions { corrupt_gain })?;
            print!("{}", report.render());
            Ok(report.passed())
        }
        Command::UserOutage { common } => user_outage(&common).map(|_| true),
        Command::SystemOutage { common } => system_outage(&common).map(|_| true),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

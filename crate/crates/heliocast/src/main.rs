use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Parser, Subcommand};

use heliocast::cli;
use heliocast::config::RunConfig;

/// Day-ahead GHI forecasting with a two-stage NARNN + ARMAX model.
#[derive(Parser)]
#[command(name = "heliocast", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate and cache the input data, write the preprocessing
    /// artifact and an ADF summary.
    Prepare {
        #[arg(long)]
        config: PathBuf,
    },
    /// Produce a day-ahead forecast for one target date.
    Forecast {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        date: NaiveDate,
    },
    /// Run the three case studies plus the persistence baseline and
    /// emit the comparison table.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        dates: Vec<NaiveDate>,
    },
    /// Run the equal-order ARMAX scan alone.
    Orders {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        date: NaiveDate,
    },
    /// Emit the synthetic benchmark dataset.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 60)]
        days: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        start_date: Option<NaiveDate>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not usage errors
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };

    let result = match &cli.command {
        Command::Prepare { config } => RunConfig::load(config).and_then(|c| cli::cmd_prepare(&c)),
        Command::Forecast { config, date } => {
            RunConfig::load(config).and_then(|c| cli::cmd_forecast(&c, *date))
        }
        Command::Compare { config, dates } => {
            RunConfig::load(config).and_then(|c| cli::cmd_compare(&c, dates))
        }
        Command::Orders { config, date } => {
            RunConfig::load(config).and_then(|c| cli::cmd_orders(&c, *date))
        }
        Command::Synth { out, days, seed, start_date } => {
            cli::cmd_synth(out, *days, *seed, *start_date)
        }
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

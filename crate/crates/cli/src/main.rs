//! `semistatic`: exact arbitrage and super-hedging checks on JSON market files.
//!
//! Exit codes: 0 when the condition holds or the value was computed, 3 when
//! the condition fails (the report carries the certificate), 4 on invalid
//! input, 5 when a certificate fails to replay.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use report::Failure;

#[derive(Parser)]
#[command(name = "semistatic", version, about = "Exact no-arbitrage and super-hedging analysis of finite semi-static markets")]
struct Cli {
    /// Indent the JSON report.
    #[arg(long, global = true)]
    pretty: bool,
    /// Replay every certificate before printing; exit 5 if one fails.
    #[arg(long, global = true)]
    verify: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide no-arbitrage.
    CheckNa { market: PathBuf },
    /// Decide robust no-arbitrage.
    CheckNar { market: PathBuf },
    /// Super-hedging price and an optimal strategy.
    Superhedge {
        market: PathBuf,
        #[arg(long)]
        claim: PathBuf,
    },
    /// Largest expectation over consistent martingale measures.
    Dual {
        market: PathBuf,
        #[arg(long)]
        claim: PathBuf,
    },
    /// No-arbitrage price bounds of one option given all the others.
    Bounds {
        market: PathBuf,
        #[arg(long)]
        option: String,
    },
    /// Replicability of every spread option.
    Redundancy { market: PathBuf },
    /// No-arbitrage under non-redundant spread options, with dual measures.
    SharperFtap { market: PathBuf },
    /// A consistent measure dominating one generator.
    Dominate {
        market: PathBuf,
        #[arg(long)]
        generator: String,
    },
    /// A strictly consistent measure within `eps` of the dual optimum.
    StrictDual {
        market: PathBuf,
        #[arg(long)]
        claim: PathBuf,
        #[arg(long)]
        eps: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            return Failure::input("arguments", e.to_string().trim_end()).emit();
        }
    };
    let outcome = match cli.command {
        Command::CheckNa { market } => commands::check_na(&market),
        Command::CheckNar { market } => commands::check_nar(&market),
        Command::Superhedge { market, claim } => commands::superhedge(&market, &claim),
        Command::Dual { market, claim } => commands::dual(&market, &claim),
        Command::Bounds { market, option } => commands::bounds(&market, &option),
        Command::Redundancy { market } => commands::redundancy(&market),
        Command::SharperFtap { market } => commands::sharper_ftap(&market),
        Command::Dominate { market, generator } => commands::dominate(&market, &generator),
        Command::StrictDual { market, claim, eps } => commands::strict_dual(&market, &claim, &eps),
    };
    match outcome {
        Ok(out) => out.emit(cli.pretty, cli.verify),
        Err(failure) => failure.emit(),
    }
}

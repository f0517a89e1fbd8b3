//! `percept-bench`: generate, verify, train, score and report.

mod commands;
mod preview;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "percept-bench", version, about = "Graphical-perception regression benchmark harness")]
struct Cli {
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,

    /// Run data-parallel loops on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a dataset: tensors, parameter files and manifest.
    Generate(commands::GenerateArgs),
    /// Check checksums, split membership, seed replay and labels.
    Verify(commands::VerifyArgs),
    /// Train the MLP baseline and write test-split predictions.
    TrainBaseline(commands::TrainArgs),
    /// Score one or more prediction files against a dataset.
    Evaluate(commands::EvaluateArgs),
    /// Train on each parameterization, test on all of them.
    Crossgen(commands::CrossgenArgs),
    /// One-way ANOVA and Tukey HSD over grouped values.
    Stats(commands::StatsArgs),
    /// Assemble evaluations into a report with SVG charts.
    Report(commands::ReportArgs),
}

#[derive(Args, Clone, Copy)]
pub struct Global {
    pub json: bool,
    pub sequential: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = Global {
        json: cli.json,
        sequential: cli.sequential,
    };
    let result = match cli.command {
        Command::Generate(a) => commands::generate(a, g),
        Command::Verify(a) => commands::verify(a, g),
        Command::TrainBaseline(a) => commands::train_baseline(a, g),
        Command::Evaluate(a) => commands::evaluate(a, g),
        Command::Crossgen(a) => commands::crossgen(a, g),
        Command::Stats(a) => commands::stats(a, g),
        Command::Report(a) => commands::report(a, g),
    };
    match result {
        Ok(out) => {
            if g.json {
                println!("{}", serde_json::to_string_pretty(&out.json).expect("json"));
            } else {
                print!("{}", out.text);
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            let kind = e
                .downcast_ref::<percept_core::Error>()
                .map_or("failure", |e| e.kind());
            if g.json {
                let v = json!({ "error": { "kind": kind, "message": message(&e) } });
                println!("{}", serde_json::to_string_pretty(&v).expect("json"));
            } else {
                eprintln!("error ({kind}): {}", message(&e));
            }
            ExitCode::FAILURE
        }
    }
}

// Core errors already fold their io source into Display, so drop causes
// that merely repeat the tail of the previous message.
fn message(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let c = cause.to_string();
        if out.ends_with(&c) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&c);
    }
    out
}

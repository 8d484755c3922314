//! Command-line front end for the `statewarp` library.

pub mod args;
mod commands;
pub mod config;
pub mod experiments;

pub use args::Cli;

use args::Command;

/// How a command finished when it did not return an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Some runs failed; their records were still written.
    PartialFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::PartialFailure => 1,
        }
    }
}

pub fn run(cli: &Cli) -> anyhow::Result<Status> {
    match &cli.command {
        Command::Dist(a) => commands::dist(a),
        Command::Align(a) => commands::align(a),
        Command::Classify(a) => commands::classify(a),
        Command::Robustness(a) => commands::robustness(a),
        Command::Lengthscale(a) => commands::lengthscale(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Shapes(a) => commands::shapes(a),
        Command::Synth(a) => commands::synth(a),
        Command::Sharpshooter(a) => commands::sharpshooter_report(a),
        Command::Ranks(a) => commands::ranks(a),
    }
}

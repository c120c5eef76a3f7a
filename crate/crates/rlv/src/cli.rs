//! Argument parsing and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rlv_core::ComponentReading;

use crate::cmd::{self, ModelOpts};
use crate::fuzz::{self, Fault, FuzzOpts};
use crate::model::Selection;
use crate::report::Report;

#[derive(Debug, Parser)]
#[command(
    name = "rlv",
    version,
    about = "Check reachability formulas and their proofs on finite systems"
)]
pub struct Cli {
    /// Also write the report as JSON to this file.
    #[arg(long, global = true)]
    pub json_out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// A guarded-command model (`.rlm`) or an explicit system (`.json`).
    #[arg(long)]
    pub model: PathBuf,
    /// Keep only these arrows (0-based, comma separated).
    #[arg(long, value_delimiter = ',')]
    pub select_arrows: Vec<usize>,
    /// Keep only these nodes (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub select_nodes: Vec<String>,
    /// Refuse expansions with more states than this.
    #[arg(long)]
    pub max_states: Option<usize>,
}

impl ModelArgs {
    fn opts(&self) -> ModelOpts {
        ModelOpts {
            path: self.model.clone(),
            selection: Selection {
                arrows: self.select_arrows.clone(),
                nodes: self.select_nodes.clone(),
            },
            max_states: self.max_states,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Reading {
    Literal,
    ExitThroughFinals,
}

impl From<Reading> for ComponentReading {
    fn from(r: Reading) -> Self {
        match r {
            Reading::Literal => ComponentReading::Literal,
            Reading::ExitThroughFinals => ComponentReading::ExitThroughFinals,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide a formula by exhaustive path exploration.
    CheckValid {
        #[command(flatten)]
        model: ModelArgs,
        /// `l =>> r`, or JSON `{"lhs": .., "rhs": ..}`.
        #[arg(long)]
        formula: String,
    },
    /// Check an invariant certificate; optionally emit the derived proofs.
    Certify {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        formula: String,
        /// Predicate text, JSON `{"states": [..]}`, or `@file`.
        #[arg(long)]
        invariant: String,
        #[arg(long)]
        emit_script: Option<PathBuf>,
        #[arg(long)]
        emit_tree: Option<PathBuf>,
    },
    /// Compute the canonical invariant and check it.
    SynthQ {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        formula: String,
        /// Write the invariant as JSON.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Search for a cyclic proof or a counterexample.
    Autoprove {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        formula: String,
    },
    /// Check a phase script.
    CheckScript {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        script: PathBuf,
    },
    /// Check a proof tree or a component bundle.
    CheckTree {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        tree: PathBuf,
    },
    /// Check whether the selection is a component of the whole model.
    Component {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value = "literal")]
        reading: Reading,
    },
    /// Expand a model and print its size and range warnings.
    Expand {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Cross-check every decision procedure on random systems.
    Fuzz {
        #[arg(long, default_value_t = 1000)]
        count: u64,
        #[arg(long, default_value_t = 8)]
        max_states: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write failing instances here.
        #[arg(long)]
        dump_dir: Option<PathBuf>,
        /// Re-run a dumped instance.
        #[arg(long)]
        replay: Option<PathBuf>,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
    },
}

pub fn run(cli: &Cli) -> Report {
    match &cli.command {
        Command::CheckValid { model, formula } => cmd::check_valid(&model.opts(), formula),
        Command::Certify {
            model,
            formula,
            invariant,
            emit_script,
            emit_tree,
        } => cmd::certify(
            &model.opts(),
            formula,
            invariant,
            emit_script.as_deref(),
            emit_tree.as_deref(),
        ),
        Command::SynthQ { model, formula, emit } => cmd::synth(&model.opts(), formula, emit.as_deref()),
        Command::Autoprove { model, formula } => cmd::autoprove_cmd(&model.opts(), formula),
        Command::CheckScript { model, script } => cmd::check_script_cmd(&model.opts(), script),
        Command::CheckTree { model, tree } => cmd::check_tree_cmd(&model.opts(), tree),
        Command::Component { model, reading } => cmd::component_cmd(&model.opts(), (*reading).into()),
        Command::Expand { model } => cmd::expand_cmd(&model.opts()),
        Command::Fuzz {
            count,
            max_states,
            seed,
            dump_dir,
            replay,
            inject_fault,
        } => {
            let opts = FuzzOpts {
                count: *count,
                max_states: *max_states,
                seed: *seed,
                dump_dir: dump_dir.clone(),
                fault: *inject_fault,
            };
            match replay {
                Some(p) => fuzz::replay_cmd(p, &opts),
                None => fuzz::fuzz_cmd(&opts),
            }
        }
    }
}

/// Parses arguments, runs the command, prints the report and returns the
/// exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let report = run(&cli);
    print!("{}", report.render_text());
    if let Some(p) = &cli.json_out {
        if let Err(e) = std::fs::write(p, report.to_json() + "\n") {
            eprintln!("rlv: writing {}: {e}", p.display());
            return 2;
        }
    }
    report.exit_code()
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "lov",
    version,
    about = "Evaluate, normalize and compare linear optical circuits"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Output format; `json` wraps results as {command, version, result}.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Photon bound for numeric probes.
    #[arg(long, global = true, env = "LOV_CUTOFF")]
    pub cutoff: Option<u32>,
    /// Seed for every random choice.
    #[arg(long, global = true, env = "LOV_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Maximum rewrite steps per normalization.
    #[arg(long, global = true)]
    pub step_limit: Option<usize>,
    /// Tolerance on angles when comparing normal forms.
    #[arg(long, global = true)]
    pub angle_eps: Option<f64>,
    /// Tolerance on amplitudes when comparing states and normal forms.
    #[arg(long, global = true)]
    pub amp_eps: Option<f64>,
    /// Amplitudes below this are dropped during evaluation.
    #[arg(long, global = true)]
    pub prune_eps: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Dsl,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply a circuit to an input state.
    Eval {
        /// Circuit file, DSL or JSON; `-` reads standard input.
        file: PathBuf,
        /// Basis input as a comma separated occupation list.
        #[arg(long, conflicts_with = "state")]
        input: Option<String>,
        /// Input state in text form, `{ 1,0: 1 ; 0,1: i }`.
        #[arg(long)]
        state: Option<String>,
    },
    /// Rewrite a circuit to its normal form.
    Normalize {
        file: PathBuf,
        /// Print one line per applied rule.
        #[arg(long)]
        trace: bool,
    },
    /// Decide whether two circuits denote the same map.
    Equiv { left: PathBuf, right: PathBuf },
    /// Synthesize the triangle of a unitary given as JSON `[[[re, im], ...], ...]`.
    Synth {
        #[arg(required_unless_present = "random")]
        file: Option<PathBuf>,
        /// Use a Haar-random unitary of this size instead of a file.
        #[arg(long, conflicts_with = "file")]
        random: Option<usize>,
        #[arg(long, value_enum, default_value_t = Emit::Dsl)]
        emit: Emit,
    },
    /// Solve the two-mode Euler equation for a 2x2 unitary.
    Euler2 { file: PathBuf },
    /// Solve the three-mode Euler equation for a 3x3 unitary built from beam splitters only.
    Euler3 { file: PathBuf },
    /// Check random instances of every axiom.
    CheckAxioms {
        /// Instances per axiom.
        #[arg(long, default_value_t = 50)]
        instances: usize,
        /// Only check these axioms, by name.
        #[arg(long = "axiom")]
        only: Vec<String>,
    },
    /// Print the termination measure of a circuit.
    Rank { file: PathBuf },
    /// Convert between the DSL and JSON.
    Fmt {
        file: PathBuf,
        /// Target format; defaults to the other one.
        #[arg(long, value_enum)]
        to: Option<Emit>,
    },
}

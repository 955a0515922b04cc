//! Clap argument surface for the `lekb` binary.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::Overrides;

#[derive(Parser)]
#[command(name = "lekb", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Build a knowledge base from a JSONL corpus of raw legal entities.
    Build(BuildArgs),
    /// Generate a seeded synthetic corpus with ground truth and provenance.
    Synth(SynthArgs),
    /// Score a generated knowledge base against ground truth.
    Eval(EvalArgs),
    /// Inspect pairwise similarities between values or entity files.
    Sim(SimArgs),
}

#[derive(Args)]
pub struct BuildArgs {
    /// Input corpus: one JSON object per line with doc_id, local_id, fields.
    pub input: PathBuf,
    /// Output knowledge-base JSON path.
    #[arg(long)]
    pub output: PathBuf,
    /// Configuration file (JSON). Flags override file values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub min_cluster_size: Option<usize>,
    #[arg(long)]
    pub damping: Option<f64>,
    /// "median" or a fixed numeric preference.
    #[arg(long)]
    pub preference: Option<String>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// "raw_sum" or "renormalized".
    #[arg(long)]
    pub sim_mode: Option<String>,
}

impl BuildArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            min_cluster_size: self.min_cluster_size,
            damping: self.damping,
            preference: self.preference.clone(),
            max_iter: self.max_iter,
            sim_mode: self.sim_mode.clone(),
            ..Overrides::default()
        }
    }
}

#[derive(Args)]
pub struct SynthArgs {
    /// Number of ground-truth entities.
    #[arg(long)]
    pub n: usize,
    /// Observations per entity: "uniform:LO..HI", "fixed:K" or "list:a,b,...".
    #[arg(long, default_value = "uniform:4..20")]
    pub sizes: String,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for corpus.jsonl, truth.json and provenance.jsonl.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Per-character typo probability.
    #[arg(long)]
    pub p_char: Option<f64>,
    /// Per-field dropout probability.
    #[arg(long)]
    pub p_drop: Option<f64>,
    /// Corporate-name legal-form variation probability.
    #[arg(long)]
    pub p_variant: Option<f64>,
    /// Wrong-representative probability.
    #[arg(long)]
    pub p_wrong: Option<f64>,
}

impl SynthArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            p_char: self.p_char,
            p_drop: self.p_drop,
            p_variant: self.p_variant,
            p_wrong: self.p_wrong,
            ..Overrides::default()
        }
    }
}

#[derive(Args)]
pub struct EvalArgs {
    /// Generated knowledge-base JSON.
    pub kb: PathBuf,
    /// Ground-truth knowledge-base JSON.
    pub truth: PathBuf,
    /// Output report JSON path.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct SimArgs {
    /// Two values to compare (with --role), or none in entity-file mode.
    pub values: Vec<String>,
    /// Role of the compared values.
    #[arg(long)]
    pub role: Option<String>,
    /// First entity file (one corpus record as JSON).
    #[arg(long)]
    pub entity_a: Option<PathBuf>,
    /// Second entity file.
    #[arg(long)]
    pub entity_b: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl SimArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides::default()
    }
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "infocausal",
    version,
    about = "No-signaling boxes, random access codes and information causality experiments"
)]
pub struct Cli {
    /// Seed for every sampled quantity.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write data here (atomically) instead of stdout; the run manifest goes
    /// to `<out>.manifest.json`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for sampling; 0 picks one per core. Results do not
    /// depend on this value.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Build or inspect a box: `pr`, `noise`, `iso E`, `det F G`,
    /// `mix COMP:W ...`, `file PATH`.
    Box(BoxArgs),
    /// Decide membership in the local polytope, with a certificate.
    Membership(BoxArgs),
    /// Oblivious transfer through one box.
    Ot(OtArgs),
    /// Concatenated random access code.
    Rac(RacArgs),
    /// Information causality functional over a grid of depths and biases.
    Sweep(SweepArgs),
    /// Smallest bias violating information causality up to a depth.
    Threshold(ThresholdArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct BoxArgs {
    /// Box description, e.g. `iso 1/2` or `mix pr:17/20 noise:3/20`. Put
    /// `--` before a negative bias: `box -- iso -1/2`.
    #[arg(required = true, num_args = 1..)]
    pub spec: Vec<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct OtArgs {
    /// Alice's first bit; all combinations are run when x0, x1 and k are
    /// all omitted.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub x0: Option<u8>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub x1: Option<u8>,
    /// Index of the bit Bob wants.
    #[arg(short, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub k: Option<u8>,
    /// Box token: `pr`, `noise`, `iso=E`, `det=F,G` or `@file.json`.
    #[arg(long = "box", default_value = "pr")]
    pub box_token: String,
    /// Sampled runs per input combination.
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
}

#[derive(Debug, Args, Serialize)]
#[command(group = clap::ArgGroup::new("boxes").required(true).args(["bias", "box_token", "pairs"]))]
pub struct RacArgs {
    /// Depth of the concatenation tree.
    #[arg(short = 'n', long = "depth")]
    pub depth: u32,
    /// Isotropic bias for every pair, as `p/q` or a decimal.
    #[arg(short = 'E', long = "bias", allow_hyphen_values = true)]
    pub bias: Option<String>,
    /// Box token used for every pair (see `ot --box`).
    #[arg(long = "box")]
    pub box_token: Option<String>,
    /// JSON file holding an array of `2^n − 1` boxes in heap order.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Sampled trials per bit index; 0 reports exact values only.
    #[arg(long, default_value_t = 0)]
    pub trials: u64,
    /// Write one JSON line per sampled trial here.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// Depths, `a..b` inclusive or a single value.
    #[arg(long = "n")]
    pub depths: String,
    /// Biases, `lo..hi` inclusive or a single value, exact decimals or `p/q`.
    #[arg(short = 'E', long = "bias")]
    pub biases: String,
    /// Bias step, required for a proper range.
    #[arg(long)]
    pub step: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct ThresholdArgs {
    #[arg(long = "n-max", value_parser = clap::value_parser!(u32).range(1..))]
    pub n_max: u32,
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "dseffects", version, about = "Dataset effects from probing accuracies")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct GlobalArgs {
    /// Record file (newline-delimited JSON, or CSV when the name ends in .csv).
    #[arg(long, global = true, value_name = "FILE")]
    pub store: Option<PathBuf>,
    /// Dimension catalog (JSON array); for `plan`, the task catalog instead.
    #[arg(long, global = true, value_name = "FILE")]
    pub catalog: Option<PathBuf>,
    /// Accept any dimension name instead of pinning a catalog.
    #[arg(long, global = true)]
    pub unpinned: bool,
    /// Output format: md, csv, latex or json.
    #[arg(long, global = true, value_name = "FORMAT")]
    pub format: Option<String>,
    /// Significance level.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Persistence threshold (fraction of reference states).
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    /// Exit with status 4 when any result is numerically degenerate.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Welch's t-test instead of the pooled test.
    #[arg(long, global = true)]
    pub welch: bool,
    /// Report effects without p-values when a condition has a single seed.
    #[arg(long, global = true)]
    pub point_estimate: bool,
    /// TOML file with defaults for the flags above.
    #[arg(long, global = true, value_name = "FILE")]
    pub settings: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportKind {
    Individual,
    Interaction,
    Persistence,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate marker states and write a run manifest.
    Plan {
        #[arg(long, default_value = "I,A,B,C,D,E,F")]
        markers: String,
        #[arg(long, default_value = "BERT,RoBERTa")]
        models: String,
        #[arg(long, default_value = "42,1,1234,123,10")]
        seeds: String,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Validate record files, merge them, and optionally check them against a manifest.
    Ingest {
        files: Vec<PathBuf>,
        #[arg(long, value_name = "FILE")]
        manifest: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Seed-mean state vector of one condition.
    State {
        #[arg(long)]
        model: String,
        /// Comma-separated datasets; empty or `I` for the initial state.
        #[arg(long, default_value = "")]
        datasets: String,
    },
    /// Individual effect of a dataset.
    Effect {
        #[arg(long)]
        model: String,
        #[arg(long)]
        dataset: String,
        #[arg(long, default_value = "")]
        reference: String,
        /// One row per reference state found in the store.
        #[arg(long, conflicts_with = "reference")]
        all_references: bool,
    },
    /// Interaction effect of a dataset pair (every available pair when omitted).
    Interact {
        #[arg(long)]
        model: String,
        #[arg(long, requires = "y")]
        x: Option<String>,
        #[arg(long, requires = "x")]
        y: Option<String>,
        #[arg(long, default_value = "")]
        reference: String,
    },
    /// Persistence of a dataset's effects across all reference states in the store.
    Persist {
        #[arg(long)]
        model: String,
        #[arg(long)]
        dataset: String,
    },
    /// Markdown dataset effect card.
    Card {
        #[arg(long)]
        model: String,
        #[arg(long)]
        dataset: String,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Full significance table over the store.
    Report {
        #[arg(long, value_enum, default_value = "individual")]
        kind: ReportKind,
        /// Restrict to one model; all models in the store otherwise.
        #[arg(long)]
        model: Option<String>,
        #[arg(long, default_value = "")]
        reference: String,
    },
    /// Generate synthetic records for a manifest.
    Simulate {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        #[arg(long, value_name = "FILE")]
        manifest: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Monte Carlo false-positive rate and power of the interaction test.
    Calibrate {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        #[arg(long, default_value = "COLA")]
        x: String,
        #[arg(long, default_value = "SST2")]
        y: String,
        #[arg(long, default_value = "")]
        reference: String,
        /// Injected interaction (fraction) on every dimension for the power arm.
        #[arg(long, default_value_t = 0.05)]
        inject: f64,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        /// Also write the JSON report here.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// SVG scatter of state means on two dimensions.
    Plot {
        #[arg(long)]
        model: String,
        #[arg(long)]
        dim_x: String,
        #[arg(long)]
        dim_y: String,
        /// Semicolon-separated dataset sets, e.g. "I;SST2". Arrows run from the first.
        #[arg(long, conflicts_with = "interaction")]
        states: Option<String>,
        /// Pair "X,Y": plot its four states with E(X), E(Y) and Int arrows.
        #[arg(long)]
        interaction: Option<String>,
        #[arg(long, default_value = "")]
        reference: String,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

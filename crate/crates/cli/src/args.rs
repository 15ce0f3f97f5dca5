use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use outlier_core::analysis::ConstraintSet;
use outlier_core::sim::{Preset, ScenarioKind};
use outlier_core::{Pmf, TestKind};

/// Detect outlying sequences among categorical sample sequences.
#[derive(Debug, Parser)]
#[command(name = "outlier", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one detection test on a file of sequences.
    Detect(DetectArgs),
    /// Monte Carlo comparison of the tests; writes a results CSV and a run manifest.
    Simulate(Box<SimulateArgs>),
    /// Numerical checks of the divergence bounds and error exponents.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Sequence CSV: one sequence per row, comma-separated symbol indices,
    /// optional first line `# alphabet=K`.
    pub input: PathBuf,

    /// Test to run: gl-known, gl-unknown, delta2, delta2-1, delta3 or delta3-1.
    #[arg(long, value_parser = parse_test)]
    pub test: TestKind,

    /// Number of outliers; required by gl-known, delta2 and delta2-1.
    #[arg(long)]
    pub t: Option<usize>,

    /// Index of the sequence the clustering tests initialize from.
    #[arg(long, default_value_t = 0)]
    pub probe: usize,

    /// Iteration cap of the until-convergence tests.
    #[arg(long, default_value_t = outlier_core::cluster::DEFAULT_MAX_ITERATIONS)]
    pub max_iter: usize,

    /// Run the exhaustive tests beyond their enumeration caps.
    #[arg(long)]
    pub allow_large: bool,

    /// Add-λ smoothing of the empirical distributions (0 disables it).
    #[arg(long, default_value_t = 0.0)]
    pub smoothing: f64,

    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Run the parameter set of one figure: fig3, fig4, fig5, fig6 or fig7.
    #[arg(long, value_parser = parse_preset, conflicts_with_all = ["config", "replay", "scenario"])]
    pub preset: Option<Preset>,

    /// JSON file holding a simulation configuration (or a list of them).
    #[arg(long, conflicts_with_all = ["replay", "scenario"])]
    pub config: Option<PathBuf>,

    /// Re-run the configurations recorded in a manifest.
    #[arg(long, conflicts_with = "scenario")]
    pub replay: Option<PathBuf>,

    /// Scenario for an inline configuration: identical-typical-distinct-outliers,
    /// identical-both or two-clusters.
    #[arg(long, value_parser = parse_scenario, requires_all = ["m", "t", "n"])]
    pub scenario: Option<ScenarioKind>,

    /// Alphabet size of an inline scenario.
    #[arg(long, default_value_t = 10)]
    pub alphabet: usize,

    /// Number of sequences of an inline scenario.
    #[arg(long)]
    pub m: Option<usize>,

    /// Number of outliers of an inline scenario.
    #[arg(long)]
    pub t: Option<usize>,

    /// Comma-separated, strictly increasing sample lengths of an inline run.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,

    /// Comma-separated tests of an inline run.
    #[arg(long, value_delimiter = ',', value_parser = parse_test, default_value = "delta3")]
    pub tests: Vec<TestKind>,

    /// Minimum total variation between random outlying pmfs and the typical pmf.
    #[arg(long, default_value_t = 0.1)]
    pub min_tv: f64,

    /// Noise level of two-cluster scenarios.
    #[arg(long, default_value_t = 0.01)]
    pub sigma: f64,

    /// Probe used by the clustering tests: `random` (default) or a sequence index.
    #[arg(long)]
    pub probe: Option<String>,

    /// Iteration cap of the until-convergence tests.
    #[arg(long)]
    pub max_iter: Option<usize>,

    /// Run the exhaustive tests beyond their enumeration caps.
    #[arg(long)]
    pub allow_large: bool,

    /// Trials per sample length (overrides presets and config files).
    #[arg(long)]
    pub trials: Option<usize>,

    /// Master seed (overrides presets and config files; default 0).
    #[arg(long)]
    pub seed: Option<u64>,

    /// Worker threads (default: one per core).
    #[arg(long)]
    pub threads: Option<usize>,

    /// Record wall-clock time per test; makes the CSV differ between runs.
    #[arg(long)]
    pub timing: bool,

    /// Results CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Manifest path; defaults to `<out>.manifest.json` when --out is given.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Check the clustering condition between typical and outlying pmfs.
    ClusterCondition {
        /// Typical pmf as comma-separated probabilities; repeat for several.
        #[arg(long = "typical", required = true, value_parser = parse_pmf)]
        typicals: Vec<Pmf>,
        /// Outlying pmf as comma-separated probabilities; repeat for several.
        #[arg(long = "outlier", required = true, value_parser = parse_pmf)]
        outliers: Vec<Pmf>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Grid-minimize D(q‖p1) + D(q‖p2) and compare with 2B(p1, p2).
    Lemma2 {
        /// First pmf (|Y| = 2 or 3).
        #[arg(long, value_parser = parse_pmf)]
        p1: Pmf,
        /// Second pmf.
        #[arg(long, value_parser = parse_pmf)]
        p2: Pmf,
        /// Grid step, at most 0.01.
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Certificate that the unknown-T GL test fails on clustered distributions.
    Example1 {
        /// Number of sequences.
        #[arg(long, default_value_t = 1000)]
        m: usize,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Grid estimate of an error exponent on a binary alphabet.
    Exponent {
        /// Constraint set C1..C10.
        #[arg(long, value_parser = parse_set)]
        set: ConstraintSet,
        /// Typical pmf; repeat for distinct typical pmfs.
        #[arg(long = "pi", required = true, value_parser = parse_pmf)]
        pis: Vec<Pmf>,
        /// Outlying pmf; repeat for distinct outlying pmfs.
        #[arg(long = "mu", required = true, value_parser = parse_pmf)]
        mus: Vec<Pmf>,
        /// Grid step (default 1/200 for three variables, 1/64 for four).
        #[arg(long)]
        step: Option<f64>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// min over outliers of 2B(μ_i, π), the large-M exponent of the GL test.
    BhattaBound {
        /// Typical pmf.
        #[arg(long, value_parser = parse_pmf)]
        pi: Pmf,
        /// Outlying pmf; repeat for several.
        #[arg(long = "mu", required = true, value_parser = parse_pmf)]
        mus: Vec<Pmf>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
}

pub fn parse_pmf(s: &str) -> Result<Pmf, String> {
    let probs = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| format!("{x:?} is not a number")))
        .collect::<Result<Vec<_>, _>>()?;
    Pmf::new(probs).map_err(|e| e.to_string())
}

fn parse_test(s: &str) -> Result<TestKind, String> {
    s.parse().map_err(|e: outlier_core::Error| e.to_string())
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: outlier_core::Error| e.to_string())
}

fn parse_scenario(s: &str) -> Result<ScenarioKind, String> {
    s.parse().map_err(|e: outlier_core::Error| e.to_string())
}

fn parse_set(s: &str) -> Result<ConstraintSet, String> {
    s.parse().map_err(|e: outlier_core::Error| e.to_string())
}

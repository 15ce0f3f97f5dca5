use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use chrono::{DateTime, Utc};
use outlier_core::sim::{run_sim, ProbePolicy, ScenarioGenerator, ScenarioSpec, SimConfig, SimRecord};
use serde::{Deserialize, Serialize};

use crate::args::SimulateArgs;

/// Column order of the results CSV.
pub const CSV_HEADER: [&str; 11] = [
    "test_name",
    "scenario_kind",
    "M",
    "T",
    "n",
    "trials",
    "errors",
    "error_rate",
    "avg_iterations",
    "seed",
    "wall_time_seconds",
];

/// Everything needed to rerun a `simulate` invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub subcommand: String,
    /// Fully resolved configurations, overrides applied.
    pub configs: Vec<SimConfig>,
    pub master_seed: u64,
    pub version: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
}

pub fn run(args: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let configs = resolve_configs(args)?;
    for (i, c) in configs.iter().enumerate() {
        c.prepare().with_context(|| format!("configuration {i}"))?;
    }
    let started_at = Utc::now();
    let mut records = Vec::new();
    for (i, c) in configs.iter().enumerate() {
        log::info!("running configuration {} of {}", i + 1, configs.len());
        records.extend(run_sim(c).with_context(|| format!("configuration {i}"))?);
    }
    let finished_at = Utc::now();

    match &args.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(&records, file)?;
        }
        None => write_csv(&records, &mut *out)?,
    }
    if let Some(path) = manifest_path(args) {
        let manifest = RunManifest {
            subcommand: "simulate".into(),
            master_seed: configs[0].master_seed,
            configs,
            version: env!("CARGO_PKG_VERSION").into(),
            started_at,
            finished_at,
        };
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        serde_json::to_writer_pretty(file, &manifest)?;
    }
    Ok(())
}

fn manifest_path(args: &SimulateArgs) -> Option<PathBuf> {
    args.manifest.clone().or_else(|| {
        args.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    read_json(path)
}

fn resolve_configs(args: &SimulateArgs) -> Result<Vec<SimConfig>> {
    let mut configs = if let Some(preset) = args.preset {
        preset.configs(args.seed.unwrap_or(0))
    } else if let Some(path) = &args.config {
        let value: serde_json::Value = read_json(path)?;
        let parsed = if value.is_array() {
            serde_json::from_value(value)
        } else {
            serde_json::from_value(value).map(|c| vec![c])
        };
        parsed.with_context(|| format!("invalid configuration in {}", path.display()))?
    } else if let Some(path) = &args.replay {
        read_manifest(path)?.configs
    } else if let Some(kind) = args.scenario {
        let (m, t) = (args.m.unwrap_or_default(), args.t.unwrap_or_default());
        let mut g = ScenarioGenerator::new(kind, args.alphabet, m, t);
        g.min_tv = args.min_tv;
        g.sigma = args.sigma;
        vec![SimConfig::new(
            ScenarioSpec::Generate(g),
            args.n.clone(),
            outlier_core::sim::PRESET_TRIALS,
            args.tests.clone(),
        )]
    } else {
        bail!("one of --preset, --config, --replay or --scenario is required");
    };
    if configs.is_empty() {
        bail!("the configuration file lists no runs");
    }
    let probe = args.probe.as_deref().map(parse_probe).transpose()?;
    for c in &mut configs {
        if let Some(seed) = args.seed {
            c.master_seed = seed;
        }
        if let Some(trials) = args.trials {
            c.trials = trials;
        }
        if let Some(threads) = args.threads {
            c.threads = Some(threads);
        }
        if let Some(cap) = args.max_iter {
            c.max_iterations = cap;
        }
        if let Some(p) = probe {
            c.probe = p;
        }
        c.timing |= args.timing;
        c.gl_limits.allow_large |= args.allow_large;
    }
    Ok(configs)
}

fn parse_probe(s: &str) -> Result<ProbePolicy> {
    if s == "random" {
        return Ok(ProbePolicy::Random);
    }
    s.parse()
        .map(ProbePolicy::Fixed)
        .map_err(|_| anyhow!("--probe must be `random` or a sequence index, got {s:?}"))
}

/// Writes the records in [`CSV_HEADER`] order; floats use the shortest
/// representation that reads back exactly.
pub fn write_csv<W: Write>(records: &[SimRecord], w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.test_name.to_string(),
            r.scenario_kind.to_string(),
            r.m.to_string(),
            r.t.to_string(),
            r.n.to_string(),
            r.trials.to_string(),
            r.errors.to_string(),
            r.error_rate.to_string(),
            r.avg_iterations.to_string(),
            r.seed.to_string(),
            r.wall_time_seconds.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

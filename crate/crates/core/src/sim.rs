//! Scenario generation and seeded Monte Carlo evaluation of the detectors.
//!
//! # Randomness
//!
//! Every random draw comes from a `ChaCha8Rng` keyed by `master_seed`
//! (`ChaCha8Rng::seed_from_u64(master_seed)`) with a stream chosen per use:
//!
//! * stream `u64::MAX`: scenario generation (random outlier pmfs, cluster
//!   noise, placement of the true outlier set);
//! * stream `(n << 32) | trial`: the trial with sample length `n` and
//!   0-based index `trial`. The trial draws all `M·n` symbols, sequence by
//!   sequence, and then the probe index when the probe is random.
//!
//! A trial therefore depends only on `(master_seed, n, trial)`, and the
//! aggregated records are identical for any number of worker threads.

use std::time::Instant;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::check_cluster_condition;
use crate::cluster::{is_nonincreasing, TestOutcome, DEFAULT_MAX_ITERATIONS};
use crate::detector::{run_detector, DetectorParams, TestKind};
use crate::error::{Error, Result};
use crate::gl::{binomial, complement_of, GlLimits, OutlierSet};
use crate::pmf::{common_alphabet, pmf_from_counts, Alphabet, Pmf};

const SCENARIO_STREAM: u64 = u64::MAX;
/// Smallest coordinate accepted from the Dirichlet draw.
const MIN_RANDOM_COORDINATE: f64 = 1e-6;
/// Coordinate floor applied after adding cluster noise.
pub const CLUSTER_FLOOR: f64 = 1e-4;
const MAX_REJECTIONS: usize = 10_000;
const MAX_CLUSTER_ATTEMPTS: usize = 1_000;

/// RNG for scenario generation.
pub fn scenario_rng(master_seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(SCENARIO_STREAM);
    rng
}

/// RNG for one trial.
pub fn trial_rng(master_seed: u64, n: usize, trial: usize) -> ChaCha8Rng {
    assert!(
        n < 1 << 31 && trial < 1 << 32,
        "n or trial index too large for stream derivation"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((n as u64) << 32) | trial as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    /// One typical pmf; outliers may all differ.
    IdenticalTypicalDistinctOutliers,
    /// One typical pmf and one outlying pmf.
    IdenticalBoth,
    /// Typical and outlying pmfs each form a cluster satisfying the cluster condition.
    TwoClusters,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::IdenticalTypicalDistinctOutliers => "identical-typical-distinct-outliers",
            ScenarioKind::IdenticalBoth => "identical-both",
            ScenarioKind::TwoClusters => "two-clusters",
        }
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            ScenarioKind::IdenticalTypicalDistinctOutliers,
            ScenarioKind::IdenticalBoth,
            ScenarioKind::TwoClusters,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::invalid(format!("unknown scenario kind {s:?}")))
    }
}

/// Ground truth for a simulation: the generating pmf of every sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioRepr", into = "ScenarioRepr")]
pub struct Scenario {
    kind: ScenarioKind,
    /// Pmfs of the typical sequences, in index order of `true_set.complement()`.
    typical_pmfs: Vec<Pmf>,
    /// Pmfs of the outlying sequences, in index order of `true_set`.
    outlier_pmfs: Vec<Pmf>,
    true_set: OutlierSet,
}

#[derive(Serialize, Deserialize)]
struct ScenarioRepr {
    kind: ScenarioKind,
    typical_pmfs: Vec<Pmf>,
    outlier_pmfs: Vec<Pmf>,
    true_set: Vec<usize>,
}

impl TryFrom<ScenarioRepr> for Scenario {
    type Error = Error;
    fn try_from(r: ScenarioRepr) -> Result<Self> {
        let m = r.typical_pmfs.len() + r.outlier_pmfs.len();
        Scenario::new(r.kind, r.typical_pmfs, r.outlier_pmfs, OutlierSet::new(r.true_set, m)?)
    }
}

impl From<Scenario> for ScenarioRepr {
    fn from(s: Scenario) -> Self {
        ScenarioRepr {
            kind: s.kind,
            typical_pmfs: s.typical_pmfs,
            outlier_pmfs: s.outlier_pmfs,
            true_set: s.true_set.indices().to_vec(),
        }
    }
}

impl Scenario {
    pub fn new(
        kind: ScenarioKind,
        typical_pmfs: Vec<Pmf>,
        outlier_pmfs: Vec<Pmf>,
        true_set: OutlierSet,
    ) -> Result<Self> {
        if outlier_pmfs.len() != true_set.len() {
            return Err(Error::invalid(format!(
                "{} outlier pmfs for an outlier set of size {}",
                outlier_pmfs.len(),
                true_set.len()
            )));
        }
        if typical_pmfs.len() + outlier_pmfs.len() != true_set.m() {
            return Err(Error::invalid(format!(
                "{} pmfs for M = {} sequences",
                typical_pmfs.len() + outlier_pmfs.len(),
                true_set.m()
            )));
        }
        let all: Vec<Pmf> = typical_pmfs.iter().chain(&outlier_pmfs).cloned().collect();
        common_alphabet(&all)?;
        let all_equal = |v: &[Pmf]| v.windows(2).all(|w| w[0] == w[1]);
        match kind {
            ScenarioKind::IdenticalTypicalDistinctOutliers if !all_equal(&typical_pmfs) => {
                return Err(Error::invalid("typical pmfs must be identical for this scenario"));
            }
            ScenarioKind::IdenticalBoth if !(all_equal(&typical_pmfs) && all_equal(&outlier_pmfs)) => {
                return Err(Error::invalid(
                    "typical pmfs and outlier pmfs must each be identical for this scenario",
                ));
            }
            ScenarioKind::TwoClusters => {
                let report = check_cluster_condition(&typical_pmfs, &outlier_pmfs)?;
                if !report.holds {
                    return Err(Error::invalid(format!(
                        "two-cluster scenario violates the cluster condition: {:?}",
                        report.violation
                    )));
                }
            }
            _ => {}
        }
        Ok(Scenario {
            kind,
            typical_pmfs,
            outlier_pmfs,
            true_set,
        })
    }

    /// One typical pmf `pi` and one outlying pmf `mu` at the positions `true_set`.
    pub fn identical(pi: Pmf, mu: Pmf, true_set: OutlierSet) -> Result<Self> {
        let m = true_set.m();
        let t = true_set.len();
        Scenario::new(ScenarioKind::IdenticalBoth, vec![pi; m - t], vec![mu; t], true_set)
    }

    pub fn kind(&self) -> ScenarioKind {
        self.kind
    }

    pub fn typical_pmfs(&self) -> &[Pmf] {
        &self.typical_pmfs
    }

    pub fn outlier_pmfs(&self) -> &[Pmf] {
        &self.outlier_pmfs
    }

    pub fn true_set(&self) -> &OutlierSet {
        &self.true_set
    }

    pub fn m(&self) -> usize {
        self.true_set.m()
    }

    pub fn t(&self) -> usize {
        self.true_set.len()
    }

    pub fn alphabet(&self) -> Alphabet {
        self.typical_pmfs[0].alphabet()
    }

    /// Generating pmf of every sequence, in index order.
    pub fn sources(&self) -> Vec<&Pmf> {
        let mut out: Vec<Option<&Pmf>> = vec![None; self.m()];
        for (&i, p) in self.true_set.indices().iter().zip(&self.outlier_pmfs) {
            out[i] = Some(p);
        }
        for (i, p) in self.true_set.complement().into_iter().zip(&self.typical_pmfs) {
            out[i] = Some(p);
        }
        out.into_iter().map(|p| p.expect("every index covered")).collect()
    }
}

/// Draws `count` pmfs uniformly from the simplex (normalized unit
/// exponentials), rejecting draws with a coordinate below `1e-6` or within
/// total variation `min_tv_from_typical` of `typical`.
pub fn gen_random_outliers<R: Rng + ?Sized>(
    alphabet: Alphabet,
    count: usize,
    rng: &mut R,
    typical: &Pmf,
    min_tv_from_typical: f64,
) -> Result<Vec<Pmf>> {
    if count == 0 {
        return Err(Error::invalid("count must be at least 1"));
    }
    if typical.alphabet() != alphabet {
        return Err(Error::invalid("typical pmf is on a different alphabet"));
    }
    let mut out = Vec::with_capacity(count);
    let mut rejections = 0;
    while out.len() < count {
        let raw: Vec<f64> = (0..alphabet.size()).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.into_iter().map(|x| x / total).collect();
        let p = Pmf::new(probs)?;
        let accept =
            p.has_full_support_with(MIN_RANDOM_COORDINATE) && p.total_variation(typical)? >= min_tv_from_typical;
        if accept {
            out.push(p);
            rejections = 0;
        } else {
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                return Err(Error::Config(format!(
                    "{MAX_REJECTIONS} consecutive draws rejected; minimum total variation {min_tv_from_typical} is too strict"
                )));
            }
        }
    }
    Ok(out)
}

/// `count` noisy copies of `center`: add `N(0, sigma²)` to every
/// coordinate, clamp at `1e-4` and renormalize.
pub fn gen_cluster<R: Rng + ?Sized>(center: &Pmf, count: usize, sigma: f64, rng: &mut R) -> Result<Vec<Pmf>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("noise level must be positive, got {sigma}")));
    }
    (0..count)
        .map(|_| {
            let noisy: Vec<f64> = center
                .probs()
                .iter()
                .map(|&p| {
                    let z: f64 = StandardNormal.sample(rng);
                    (p + sigma * z).max(CLUSTER_FLOOR)
                })
                .collect();
            let total: f64 = noisy.iter().sum();
            Pmf::new(noisy.into_iter().map(|x| x / total).collect())
        })
        .collect()
}

/// Recipe for drawing a [`Scenario`] from the scenario RNG.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioGenerator {
    pub kind: ScenarioKind,
    pub alphabet_size: usize,
    pub m: usize,
    pub t: usize,
    /// Typical pmf (or typical cluster center); uniform when absent.
    #[serde(default)]
    pub typical: Option<Pmf>,
    /// Minimum total variation between a random outlying pmf (or outlying
    /// cluster center) and the typical pmf.
    #[serde(default = "default_min_tv")]
    pub min_tv: f64,
    /// Cluster noise for two-cluster scenarios.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
}

fn default_min_tv() -> f64 {
    0.1
}

fn default_sigma() -> f64 {
    0.01
}

impl ScenarioGenerator {
    pub fn new(kind: ScenarioKind, alphabet_size: usize, m: usize, t: usize) -> Self {
        ScenarioGenerator {
            kind,
            alphabet_size,
            m,
            t,
            typical: None,
            min_tv: default_min_tv(),
            sigma: default_sigma(),
        }
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Scenario> {
        let alphabet = Alphabet::new(self.alphabet_size)?;
        if self.m < 3 || self.t == 0 || 2 * self.t >= self.m {
            return Err(Error::Config(format!(
                "need M ≥ 3 and 1 ≤ T < M/2, got M = {} and T = {}",
                self.m, self.t
            )));
        }
        let pi = match &self.typical {
            Some(p) if p.alphabet() == alphabet => p.clone(),
            Some(_) => return Err(Error::Config("typical pmf does not match alphabet_size".into())),
            None => Pmf::uniform(alphabet),
        };
        let mut positions = index::sample(rng, self.m, self.t).into_vec();
        positions.sort_unstable();
        let true_set = OutlierSet::new(positions, self.m)?;
        let typ_count = self.m - self.t;

        match self.kind {
            ScenarioKind::IdenticalTypicalDistinctOutliers => {
                let mus = gen_random_outliers(alphabet, self.t, rng, &pi, self.min_tv)?;
                Scenario::new(self.kind, vec![pi; typ_count], mus, true_set)
            }
            ScenarioKind::IdenticalBoth => {
                let mu = gen_random_outliers(alphabet, 1, rng, &pi, self.min_tv)?.remove(0);
                Scenario::identical(pi, mu, true_set)
            }
            ScenarioKind::TwoClusters => {
                for _ in 0..MAX_CLUSTER_ATTEMPTS {
                    let center = gen_random_outliers(alphabet, 1, rng, &pi, self.min_tv)?.remove(0);
                    let typicals = gen_cluster(&pi, typ_count, self.sigma, rng)?;
                    let outliers = gen_cluster(&center, self.t, self.sigma, rng)?;
                    if check_cluster_condition(&typicals, &outliers)?.holds {
                        return Scenario::new(self.kind, typicals, outliers, true_set);
                    }
                }
                Err(Error::Config(format!(
                    "no draw in {MAX_CLUSTER_ATTEMPTS} attempts satisfied the cluster condition; lower sigma or raise min_tv"
                )))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioSpec {
    Explicit(Scenario),
    Generate(ScenarioGenerator),
}

impl ScenarioSpec {
    pub fn resolve(&self, master_seed: u64) -> Result<Scenario> {
        match self {
            ScenarioSpec::Explicit(s) => Ok(s.clone()),
            ScenarioSpec::Generate(g) => g.generate(&mut scenario_rng(master_seed)),
        }
    }
}

/// How the clustering tests choose their probe sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbePolicy {
    /// Uniform over `0..M`, drawn from the trial RNG.
    Random,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub scenario: ScenarioSpec,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    pub tests: Vec<TestKind>,
    /// `T` handed to the known-T tests; defaults to the size of the true set.
    #[serde(default)]
    pub t_known: Option<usize>,
    #[serde(default = "default_probe")]
    pub probe: ProbePolicy,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default)]
    pub gl_limits: GlLimits,
    /// Worker threads; `None` uses the global rayon pool.
    #[serde(default)]
    pub threads: Option<usize>,
    /// Record per-test execution time. Off by default so that reruns are
    /// byte-identical.
    #[serde(default)]
    pub timing: bool,
}

fn default_probe() -> ProbePolicy {
    ProbePolicy::Random
}

fn default_max_iterations() -> usize {
    DEFAULT_MAX_ITERATIONS
}

impl SimConfig {
    pub fn new(scenario: ScenarioSpec, n_grid: Vec<usize>, trials: usize, tests: Vec<TestKind>) -> Self {
        SimConfig {
            scenario,
            n_grid,
            trials,
            master_seed: 0,
            tests,
            t_known: None,
            probe: default_probe(),
            max_iterations: default_max_iterations(),
            gl_limits: GlLimits::default(),
            threads: None,
            timing: false,
        }
    }

    /// Checks the configuration and resolves its scenario.
    pub fn prepare(&self) -> Result<Scenario> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.n_grid.is_empty() {
            return Err(Error::Config("n_grid must list at least one sample length".into()));
        }
        if self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("n_grid must be positive and strictly increasing".into()));
        }
        if self.tests.is_empty() {
            return Err(Error::Config("select at least one test".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        let scenario = self.scenario.resolve(self.master_seed)?;
        let m = scenario.m();
        let t = self.t_known.unwrap_or(scenario.t());
        if let ProbePolicy::Fixed(p) = self.probe {
            if p >= m {
                return Err(Error::Config(format!("probe index {p} out of range for M = {m}")));
            }
        }
        for &kind in &self.tests {
            if kind.needs_t() && (t == 0 || 2 * t >= m) {
                return Err(Error::Config(format!("{kind} needs 1 ≤ T < M/2; got T = {t}, M = {m}")));
            }
            let limits = &self.gl_limits;
            match kind {
                TestKind::GlKnown if !limits.allow_large && binomial(m, t) > limits.max_hypotheses => {
                    return Err(Error::Config(format!(
                        "gl-known would enumerate C({m}, {t}) = {} hypotheses, above the cap of {}",
                        binomial(m, t),
                        limits.max_hypotheses
                    )));
                }
                TestKind::GlUnknown if !limits.allow_large && m > limits.max_m_unknown => {
                    return Err(Error::Config(format!(
                        "gl-unknown is limited to M ≤ {}, got M = {m}",
                        limits.max_m_unknown
                    )));
                }
                _ => {}
            }
        }
        Ok(scenario)
    }

    fn detector_params(&self, scenario: &Scenario, probe_index: usize) -> DetectorParams {
        DetectorParams {
            t: Some(self.t_known.unwrap_or(scenario.t())),
            probe_index,
            max_iterations: self.max_iterations,
            gl_limits: self.gl_limits,
        }
    }
}

/// Per-(test, n) tally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub test_name: TestKind,
    pub scenario_kind: ScenarioKind,
    pub m: usize,
    pub t: usize,
    pub n: usize,
    pub trials: usize,
    /// Trials whose detected set differs from the true set (degenerate outcomes count as errors).
    pub errors: usize,
    pub error_rate: f64,
    pub avg_iterations: f64,
    pub seed: u64,
    /// Summed test execution time; zero unless timing is enabled.
    pub wall_time_seconds: f64,
    /// Trials whose cost trace increased somewhere.
    pub cost_violations: usize,
    /// Trials where the test could not identify any outliers.
    pub degenerate: usize,
}

/// One test's result inside a trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TestRun {
    pub test: TestKind,
    pub outcome: TestOutcome,
    pub correct: bool,
    pub seconds: f64,
}

/// Everything produced by one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub n: usize,
    pub trial: usize,
    pub probe_index: usize,
    pub gammas: Vec<Pmf>,
    pub runs: Vec<TestRun>,
}

/// Draws `n` samples from each source and returns the empirical pmfs.
pub fn sample_empiricals<R: Rng + ?Sized>(
    samplers: &[WeightedAliasIndex<f64>],
    dim: usize,
    n: usize,
    rng: &mut R,
) -> Vec<Pmf> {
    samplers
        .iter()
        .map(|s| {
            let mut counts = vec![0u64; dim];
            for _ in 0..n {
                counts[s.sample(rng)] += 1;
            }
            pmf_from_counts(&counts)
        })
        .collect()
}

/// Prepared per-scenario state shared by all trials.
pub struct Harness<'a> {
    config: &'a SimConfig,
    scenario: Scenario,
    samplers: Vec<WeightedAliasIndex<f64>>,
}

impl<'a> Harness<'a> {
    pub fn new(config: &'a SimConfig) -> Result<Self> {
        let scenario = config.prepare()?;
        let samplers = scenario
            .sources()
            .into_iter()
            .map(|p| {
                WeightedAliasIndex::new(p.probs().to_vec())
                    .map_err(|e| Error::Config(format!("cannot sample from {p}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Harness {
            config,
            scenario,
            samplers,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Runs trial `trial` at sample length `n`.
    pub fn trial(&self, n: usize, trial: usize) -> Result<TrialResult> {
        let mut rng = trial_rng(self.config.master_seed, n, trial);
        let dim = self.scenario.alphabet().size();
        let gammas = sample_empiricals(&self.samplers, dim, n, &mut rng);
        let probe_index = match self.config.probe {
            ProbePolicy::Random => rng.random_range(0..self.scenario.m()),
            ProbePolicy::Fixed(p) => p,
        };
        let params = self.config.detector_params(&self.scenario, probe_index);
        let runs = self
            .config
            .tests
            .iter()
            .map(|&test| {
                let start = self.config.timing.then(Instant::now);
                let outcome = run_detector(test, &gammas, &params)?;
                let seconds = start.map_or(0.0, |s| s.elapsed().as_secs_f64());
                let correct = outcome.detected.as_ref() == Some(self.scenario.true_set());
                Ok(TestRun {
                    test,
                    outcome,
                    correct,
                    seconds,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TrialResult {
            n,
            trial,
            probe_index,
            gammas,
            runs,
        })
    }

    /// All trials at sample length `n`, in trial order.
    pub fn trials_at(&self, n: usize) -> Result<Vec<TrialResult>> {
        self.in_pool(|| {
            (0..self.config.trials)
                .into_par_iter()
                .map(|k| self.trial(n, k))
                .collect::<Result<Vec<_>>>()
        })?
    }

    fn in_pool<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        match self.config.threads {
            Some(k) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build()
                    .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
                Ok(pool.install(f))
            }
            None => Ok(f()),
        }
    }

    /// Tallies every (test, n) pair.
    pub fn run(&self) -> Result<Vec<SimRecord>> {
        let tests = &self.config.tests;
        #[derive(Default, Clone, Copy)]
        struct Tally {
            errors: usize,
            iterations: usize,
            seconds: f64,
            violations: usize,
            degenerate: usize,
        }
        let mut records = Vec::new();
        let mut by_n = Vec::new();
        for &n in &self.config.n_grid {
            let tallies = self.in_pool(|| {
                (0..self.config.trials)
                    .into_par_iter()
                    .map(|k| {
                        let r = self.trial(n, k)?;
                        Ok(r.runs
                            .iter()
                            .map(|run| Tally {
                                errors: usize::from(!run.correct),
                                iterations: run.outcome.iterations,
                                seconds: run.seconds,
                                violations: usize::from(!is_nonincreasing(&run.outcome.cost_trace)),
                                degenerate: usize::from(run.outcome.detected.is_none()),
                            })
                            .collect::<Vec<_>>())
                    })
                    .collect::<Result<Vec<_>>>()
            })??;
            // Sum in trial order so floating-point time totals do not depend on scheduling.
            let mut sums = vec![Tally::default(); tests.len()];
            for per_trial in &tallies {
                for (s, t) in sums.iter_mut().zip(per_trial) {
                    s.errors += t.errors;
                    s.iterations += t.iterations;
                    s.seconds += t.seconds;
                    s.violations += t.violations;
                    s.degenerate += t.degenerate;
                }
            }
            by_n.push((n, sums));
        }
        for (ti, &test) in tests.iter().enumerate() {
            for (n, sums) in &by_n {
                let s = sums[ti];
                let trials = self.config.trials;
                records.push(SimRecord {
                    test_name: test,
                    scenario_kind: self.scenario.kind(),
                    m: self.scenario.m(),
                    t: self.config.t_known.unwrap_or(self.scenario.t()),
                    n: *n,
                    trials,
                    errors: s.errors,
                    error_rate: s.errors as f64 / trials as f64,
                    avg_iterations: s.iterations as f64 / trials as f64,
                    seed: self.config.master_seed,
                    wall_time_seconds: s.seconds,
                    cost_violations: s.violations,
                    degenerate: s.degenerate,
                });
            }
        }
        Ok(records)
    }
}

/// Runs the full simulation described by `config`.
pub fn run_sim(config: &SimConfig) -> Result<Vec<SimRecord>> {
    Harness::new(config)?.run()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub m: usize,
    pub n: usize,
    pub avg_iterations: f64,
}

/// Average iterations of `delta3` run to convergence, per `(M, n)` grid
/// point of each configuration. The configurations' test lists are replaced
/// by `[delta3]`.
pub fn convergence_profile(configs: &[SimConfig]) -> Result<Vec<ProfilePoint>> {
    let mut out = Vec::new();
    for config in configs {
        let config = SimConfig {
            tests: vec![TestKind::Delta3],
            ..config.clone()
        };
        for r in run_sim(&config)? {
            out.push(ProfilePoint {
                m: r.m,
                n: r.n,
                avg_iterations: r.avg_iterations,
            });
        }
    }
    Ok(out)
}

/// Default trial count of the presets.
pub const PRESET_TRIALS: usize = 2000;

/// Parameter sets of the §VI experiments, scaled for a desktop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Distinct outliers, known T: M=20, T=3, gl-known vs. delta2 vs. delta2-1.
    Fig3,
    /// Identical outliers, unknown T: M=100, T=10, delta3 vs. delta3-1.
    Fig4,
    /// As Fig4, once with identical pmfs and once with noisy clusters.
    Fig5,
    /// Iterations of delta3 against n, Fig4 setting.
    Fig6,
    /// Iterations of delta3 against M with T=M/5 and n=400.
    Fig7,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Fig3, Preset::Fig4, Preset::Fig5, Preset::Fig6, Preset::Fig7];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
        }
    }

    /// The runs making up the preset, each seeded with `master_seed`.
    pub fn configs(self, master_seed: u64) -> Vec<SimConfig> {
        let gen = |kind, m, t| ScenarioSpec::Generate(ScenarioGenerator::new(kind, 10, m, t));
        let cfg = |scenario, n_grid: Vec<usize>, tests: Vec<TestKind>| SimConfig {
            master_seed,
            ..SimConfig::new(scenario, n_grid, PRESET_TRIALS, tests)
        };
        let small_n: Vec<usize> = (1..=10).map(|k| 20 * k).collect();
        let clustering = vec![TestKind::Delta3, TestKind::Delta3OneStep];
        match self {
            Preset::Fig3 => vec![cfg(
                gen(ScenarioKind::IdenticalTypicalDistinctOutliers, 20, 3),
                small_n,
                vec![TestKind::GlKnown, TestKind::Delta2, TestKind::Delta2OneStep],
            )],
            Preset::Fig4 => vec![cfg(gen(ScenarioKind::IdenticalBoth, 100, 10), small_n, clustering)],
            Preset::Fig5 => vec![
                cfg(
                    gen(ScenarioKind::IdenticalBoth, 100, 10),
                    small_n.clone(),
                    clustering.clone(),
                ),
                cfg(gen(ScenarioKind::TwoClusters, 100, 10), small_n, clustering),
            ],
            Preset::Fig6 => vec![cfg(
                gen(ScenarioKind::IdenticalBoth, 100, 10),
                vec![50, 100, 200, 400, 800, 1600],
                vec![TestKind::Delta3],
            )],
            Preset::Fig7 => (1..=5)
                .map(|k| {
                    let m = 40 * k;
                    cfg(
                        gen(ScenarioKind::IdenticalBoth, m, m / 5),
                        vec![400],
                        vec![TestKind::Delta3],
                    )
                })
                .collect(),
        }
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown preset {s:?}; expected fig3, fig4, fig5, fig6 or fig7")))
    }
}

/// Indices of the typical sequences of a scenario.
pub fn typical_indices(scenario: &Scenario) -> Vec<usize> {
    complement_of(scenario.true_set().indices(), scenario.m())
}

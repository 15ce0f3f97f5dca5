//! KL-divergence K-means and the two clustering-based detection tests.
//!
//! Every assignment step measures `D(γ_i ‖ center)`, empirical pmf first.
//! Re-estimation replaces a center by the arithmetic mean of its members,
//! which is the cost-minimizing center for any Bregman divergence, so the
//! recorded cost never increases from one iteration to the next.
//!
//! Iteration counting: an iteration is one assignment plus one
//! re-estimation. After each iteration the assignment is recomputed once
//! more; if it is unchanged the run has converged and that confirming pass
//! is not counted. A run whose first assignment is already stable therefore
//! reports one iteration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gl::{complement_of, OutlierSet};
use crate::pmf::{common_alphabet, kl_slices, mean_of, Pmf};
use crate::select::{kth_smallest, top_t_largest};

/// Iteration cap used by [`StopRule::UntilConvergence`].
pub const DEFAULT_MAX_ITERATIONS: usize = 100;

/// How long a clustering test iterates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopRule {
    /// Exactly `ℓ` iterations unless the assignment stabilizes earlier.
    Steps(usize),
    /// Iterate until the assignment repeats, up to a safety cap.
    UntilConvergence { cap: usize },
}

impl StopRule {
    pub fn steps(steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::invalid("iteration count must be at least 1"));
        }
        Ok(StopRule::Steps(steps))
    }

    pub fn one_step() -> Self {
        StopRule::Steps(1)
    }

    pub fn until_convergence() -> Self {
        StopRule::UntilConvergence {
            cap: DEFAULT_MAX_ITERATIONS,
        }
    }

    pub fn max_iterations(self) -> usize {
        match self {
            StopRule::Steps(n) => n,
            StopRule::UntilConvergence { cap } => cap,
        }
    }

    fn validate(self) -> Result<()> {
        if self.max_iterations() == 0 {
            return Err(Error::invalid("iteration cap must be at least 1"));
        }
        Ok(())
    }

    fn warn_on_cap(self) -> bool {
        matches!(self, StopRule::UntilConvergence { .. })
    }
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule::until_convergence()
    }
}

/// Two-cluster partition state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterState {
    pub centers: Vec<Pmf>,
    /// Cluster index (0 or 1) of every sequence.
    pub assignment: Vec<usize>,
    pub k: usize,
    /// Set when an assignment step left a cluster empty; its previous center
    /// was kept.
    pub degenerate: bool,
}

impl ClusterState {
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == cluster)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Result of one [`kmeans2`] run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansRun {
    pub state: ClusterState,
    /// Total within-cluster cost after each re-estimation.
    pub cost_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Output of a detection test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    /// `None` when the clustering collapsed into a single cluster and no
    /// outliers could be identified.
    pub detected: Option<OutlierSet>,
    pub iterations: usize,
    pub cost_trace: Vec<f64>,
    pub converged: bool,
}

impl TestOutcome {
    pub fn is_degenerate(&self) -> bool {
        self.detected.is_none()
    }
}

/// True iff every entry of `trace` is `≤` its predecessor.
pub fn is_nonincreasing(trace: &[f64]) -> bool {
    trace.windows(2).all(|w| w[1] <= w[0])
}

fn check_input(gammas: &[Pmf], probe_index: usize) -> Result<usize> {
    if gammas.len() < 3 {
        return Err(Error::invalid(format!(
            "need at least 3 empirical distributions, got {}",
            gammas.len()
        )));
    }
    let dim = common_alphabet(gammas)?.size();
    if probe_index >= gammas.len() {
        return Err(Error::invalid(format!(
            "probe index {probe_index} out of range for M = {}",
            gammas.len()
        )));
    }
    Ok(dim)
}

fn divergences_to(gammas: &[Pmf], center: &Pmf) -> Vec<f64> {
    gammas.iter().map(|g| kl_slices(g.probs(), center.probs())).collect()
}

/// Initial typical center for the known-T test: the empirical pmf whose
/// divergence to the probe `γ_probe` is the `⌈M/2⌉`-th smallest.
pub fn init_known_t(gammas: &[Pmf], probe_index: usize) -> Result<Pmf> {
    check_input(gammas, probe_index)?;
    let d = divergences_to(gammas, &gammas[probe_index]);
    let (_, idx) = kth_smallest(&d, gammas.len().div_ceil(2))?;
    Ok(gammas[idx].clone())
}

/// Clustering test with a known number `t` of outliers.
///
/// Alternates assigning the `t` sequences farthest from the typical center
/// to the outlier set and re-estimating the center as the mean of the rest.
pub fn delta2(gammas: &[Pmf], t: usize, stop: StopRule, probe_index: usize) -> Result<TestOutcome> {
    let dim = check_input(gammas, probe_index)?;
    stop.validate()?;
    let m = gammas.len();
    if t == 0 || 2 * t >= m {
        return Err(Error::invalid(format!(
            "number of outliers T = {t} must satisfy 1 ≤ T < M/2 with M = {m}"
        )));
    }

    let mut center = init_known_t(gammas, probe_index)?;
    let mut current: Option<Vec<usize>> = None;
    let mut cost_trace = Vec::new();
    let mut converged = false;

    loop {
        let outliers = top_t_largest(&divergences_to(gammas, &center), t)?;
        if current.as_ref() == Some(&outliers) {
            converged = true;
            break;
        }
        if cost_trace.len() == stop.max_iterations() {
            break;
        }
        let typical = complement_of(&outliers, m);
        center = mean_of(dim, typical.iter().map(|&j| &gammas[j]));
        cost_trace.push(
            typical
                .iter()
                .map(|&j| kl_slices(gammas[j].probs(), center.probs()))
                .sum(),
        );
        current = Some(outliers);
    }

    if !converged && stop.warn_on_cap() {
        log::warn!(
            "delta2 stopped at the {}-iteration cap without converging",
            stop.max_iterations()
        );
    }
    let detected = OutlierSet::new(current.expect("at least one iteration"), m)?;
    Ok(TestOutcome {
        detected: Some(detected),
        iterations: cost_trace.len(),
        cost_trace,
        converged,
    })
}

/// Initial centers for the unknown-T test: `c1` is the empirical pmf
/// farthest from the probe (smallest index on ties), `c2` is the probe.
pub fn init_unknown(gammas: &[Pmf], probe_index: usize) -> Result<(Pmf, Pmf)> {
    check_input(gammas, probe_index)?;
    let probe = &gammas[probe_index];
    let d = divergences_to(gammas, probe);
    let far = top_t_largest(&d, 1)?[0];
    Ok((gammas[far].clone(), probe.clone()))
}

fn assign(gammas: &[Pmf], centers: &[Pmf; 2]) -> Vec<usize> {
    gammas
        .iter()
        .map(|g| {
            let d0 = kl_slices(g.probs(), centers[0].probs());
            let d1 = kl_slices(g.probs(), centers[1].probs());
            usize::from(d1 < d0)
        })
        .collect()
}

/// Two-cluster KL K-means from the given initial centers.
pub fn kmeans2(gammas: &[Pmf], c1: &Pmf, c2: &Pmf, stop: StopRule) -> Result<KMeansRun> {
    if gammas.is_empty() {
        return Err(Error::invalid("no distributions to cluster"));
    }
    let dim = common_alphabet(gammas)?.size();
    if c1.probs().len() != dim || c2.probs().len() != dim {
        return Err(Error::invalid(
            "cluster centers are on a different alphabet than the data",
        ));
    }
    stop.validate()?;

    let mut centers = [c1.clone(), c2.clone()];
    let mut current: Option<Vec<usize>> = None;
    let mut cost_trace = Vec::new();
    let mut converged = false;
    let mut degenerate = false;

    loop {
        let assignment = assign(gammas, &centers);
        if current.as_ref() == Some(&assignment) {
            converged = true;
            break;
        }
        if cost_trace.len() == stop.max_iterations() {
            break;
        }
        for (k, center) in centers.iter_mut().enumerate() {
            let mut members = gammas
                .iter()
                .zip(&assignment)
                .filter(|(_, &a)| a == k)
                .map(|(g, _)| g)
                .peekable();
            if members.peek().is_some() {
                *center = mean_of(dim, members);
            } else {
                degenerate = true;
            }
        }
        // Summed cluster by cluster so that a partition costs exactly what
        // the GL objective assigns to it.
        let cluster_sum = |k: usize| -> f64 {
            gammas
                .iter()
                .zip(&assignment)
                .filter(|(_, &a)| a == k)
                .map(|(g, _)| kl_slices(g.probs(), centers[k].probs()))
                .sum()
        };
        cost_trace.push(cluster_sum(0) + cluster_sum(1));
        current = Some(assignment);
    }

    if !converged && stop.warn_on_cap() {
        log::warn!(
            "kmeans2 stopped at the {}-iteration cap without converging",
            stop.max_iterations()
        );
    }
    Ok(KMeansRun {
        state: ClusterState {
            centers: centers.to_vec(),
            assignment: current.expect("at least one iteration"),
            k: 2,
            degenerate,
        },
        iterations: cost_trace.len(),
        cost_trace,
        converged,
    })
}

/// Clustering test with an unknown number of outliers.
///
/// Runs [`kmeans2`] from [`init_unknown`] and reports the smaller final
/// cluster as outlying. On an exact size tie the cluster whose center is
/// farther, in `D(center ‖ overall mean)`, is reported. If either cluster is
/// empty the outcome is degenerate and `detected` is `None`.
pub fn delta3(gammas: &[Pmf], stop: StopRule, probe_index: usize) -> Result<TestOutcome> {
    let dim = check_input(gammas, probe_index)?;
    let (c1, c2) = init_unknown(gammas, probe_index)?;
    let run = kmeans2(gammas, &c1, &c2, stop)?;
    let m = gammas.len();

    let first = run.state.members(0);
    let second = run.state.members(1);
    let detected = if first.is_empty() || second.is_empty() {
        None
    } else {
        let outliers = match first.len().cmp(&second.len()) {
            std::cmp::Ordering::Less => first,
            std::cmp::Ordering::Greater => second,
            std::cmp::Ordering::Equal => {
                let overall = mean_of(dim, gammas);
                let d0 = kl_slices(run.state.centers[0].probs(), overall.probs());
                let d1 = kl_slices(run.state.centers[1].probs(), overall.probs());
                if d1 > d0 {
                    second
                } else {
                    first
                }
            }
        };
        Some(OutlierSet::from_cluster(outliers, m)?)
    };

    Ok(TestOutcome {
        detected,
        iterations: run.iterations,
        cost_trace: run.cost_trace,
        converged: run.converged,
    })
}

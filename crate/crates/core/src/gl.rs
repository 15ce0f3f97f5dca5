//! Exhaustive generalized-likelihood (GL) tests.
//!
//! Both tests reduce to divergence minimization over outlier hypotheses:
//!
//! ```text
//! known T:   argmin_{|S| = T}  Σ_{j∉S} D(γ_j ‖ mean_{S^c})
//! unknown:   argmin_{1 ≤ |S| < M/2}  Σ_{j∉S} D(γ_j ‖ mean_{S^c}) + Σ_{i∈S} D(γ_i ‖ mean_S)
//! ```
//!
//! Hypotheses are enumerated in lexicographic order of their index lists and
//! only a strict improvement replaces the incumbent, so ties resolve to the
//! smallest set (unknown-T) and then the lexicographically smallest list.
//! The search is exponential in `M`; [`GlLimits`] guards it.

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmf::{common_alphabet, kl_slices, mean_of, Pmf};

/// Flag name reported when an enumeration cap refuses a request.
pub const OVERRIDE_FLAG: &str = "--allow-large";

/// A candidate set of outlying sequence indices out of `m` sequences.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OutlierSet {
    indices: Vec<usize>,
    m: usize,
}

impl OutlierSet {
    /// An admissible hypothesis: `1 ≤ |indices| < m/2`, indices distinct and `< m`.
    /// Indices may be given in any order.
    pub fn new(indices: Vec<usize>, m: usize) -> Result<Self> {
        let set = Self::from_parts(indices, m)?;
        if 2 * set.indices.len() >= m {
            return Err(Error::invalid(format!(
                "outlier set of size {} is not below M/2 = {}",
                set.indices.len(),
                m as f64 / 2.0
            )));
        }
        Ok(set)
    }

    /// A cluster reported as outlying by a clustering test. Unlike [`OutlierSet::new`]
    /// this admits `|indices| = m/2`, which only arises from an exact
    /// two-cluster size tie.
    pub fn from_cluster(indices: Vec<usize>, m: usize) -> Result<Self> {
        let set = Self::from_parts(indices, m)?;
        if 2 * set.indices.len() > m {
            return Err(Error::invalid(format!(
                "cluster of size {} is larger than half of M = {m}",
                set.indices.len()
            )));
        }
        Ok(set)
    }

    fn from_parts(mut indices: Vec<usize>, m: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::invalid("outlier set must be nonempty"));
        }
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("duplicate index {}", w[0])));
        }
        if let Some(&last) = indices.last() {
            if last >= m {
                return Err(Error::invalid(format!("index {last} out of range for M = {m}")));
            }
        }
        Ok(OutlierSet { indices, m })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// `|S| < M/2`.
    pub fn is_admissible(&self) -> bool {
        2 * self.indices.len() < self.m
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Indices not in the set, ascending.
    pub fn complement(&self) -> Vec<usize> {
        complement_of(&self.indices, self.m)
    }

    /// Membership mask of length `m`.
    pub fn mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.m];
        for &i in &self.indices {
            mask[i] = true;
        }
        mask
    }
}

impl fmt::Display for OutlierSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.indices.iter().join(", "))
    }
}

pub(crate) fn complement_of(sorted: &[usize], m: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(m - sorted.len());
    let mut it = sorted.iter().peekable();
    for i in 0..m {
        if it.peek() == Some(&&i) {
            it.next();
        } else {
            out.push(i);
        }
    }
    out
}

/// The two sums of the unknown-T GL objective for one hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlCostBreakdown {
    pub typical_cost: f64,
    pub outlier_cost: f64,
    pub total: f64,
}

/// Enumeration guards for the exhaustive tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlLimits {
    /// Largest `C(M, T)` the known-T test will enumerate.
    pub max_hypotheses: u128,
    /// Largest `M` the unknown-T test will enumerate.
    pub max_m_unknown: usize,
    /// Skip both caps.
    pub allow_large: bool,
}

impl Default for GlLimits {
    fn default() -> Self {
        GlLimits {
            max_hypotheses: 2_000_000,
            max_m_unknown: 24,
            allow_large: false,
        }
    }
}

/// Within-cluster cost `Σ_{i∈members} D(γ_i ‖ mean of members)`.
pub(crate) fn cluster_cost(gammas: &[Pmf], members: &[usize]) -> f64 {
    if members.is_empty() {
        return 0.0;
    }
    let dim = gammas[0].probs().len();
    let center = mean_of(dim, members.iter().map(|&i| &gammas[i]));
    members
        .iter()
        .map(|&i| kl_slices(gammas[i].probs(), center.probs()))
        .sum()
}

fn check_gammas(gammas: &[Pmf]) -> Result<()> {
    if gammas.len() < 3 {
        return Err(Error::invalid(format!(
            "need at least 3 empirical distributions, got {}",
            gammas.len()
        )));
    }
    common_alphabet(gammas).map(|_| ())
}

fn check_set(gammas: &[Pmf], s: &OutlierSet) -> Result<()> {
    if s.m() != gammas.len() {
        return Err(Error::invalid(format!(
            "outlier set is over M = {} sequences but {} distributions were given",
            s.m(),
            gammas.len()
        )));
    }
    Ok(())
}

/// Known-T GL cost of hypothesis `s`: `Σ_{j∉S} D(γ_j ‖ mean_{S^c})`.
pub fn gl_cost_known_t(gammas: &[Pmf], s: &OutlierSet) -> Result<f64> {
    check_gammas(gammas)?;
    check_set(gammas, s)?;
    Ok(cluster_cost(gammas, &s.complement()))
}

/// Unknown-T GL cost of hypothesis `s`, split into its typical and outlier sums.
pub fn gl_cost_unknown(gammas: &[Pmf], s: &OutlierSet) -> Result<GlCostBreakdown> {
    check_gammas(gammas)?;
    check_set(gammas, s)?;
    Ok(breakdown(gammas, s.indices(), &s.complement()))
}

pub(crate) fn breakdown(gammas: &[Pmf], outliers: &[usize], typical: &[usize]) -> GlCostBreakdown {
    let typical_cost = cluster_cost(gammas, typical);
    let outlier_cost = cluster_cost(gammas, outliers);
    GlCostBreakdown {
        typical_cost,
        outlier_cost,
        total: typical_cost + outlier_cost,
    }
}

/// `C(n, k)` in `u128`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of admissible hypotheses for the unknown-T test, `Σ_{1 ≤ s < M/2} C(M, s)`.
pub fn unknown_hypothesis_count(m: usize) -> u128 {
    (1..m.div_ceil(2))
        .map(|s| binomial(m, s))
        .fold(0u128, |a, b| a.saturating_add(b))
}

fn argmin_subsets<I, F>(subsets: I, m: usize, mut cost: F) -> Option<(Vec<usize>, f64)>
where
    I: Iterator<Item = Vec<usize>>,
    F: FnMut(&[usize], &[usize]) -> f64,
{
    let mut best: Option<(Vec<usize>, f64)> = None;
    for s in subsets {
        let c = cost(&s, &complement_of(&s, m));
        if best.as_ref().is_none_or(|(_, b)| c < *b) {
            best = Some((s, c));
        }
    }
    best
}

/// Exhaustive known-T GL test. Returns the minimizing hypothesis and its cost.
pub fn gl_test_known_t_with_cost(gammas: &[Pmf], t: usize, limits: &GlLimits) -> Result<(OutlierSet, f64)> {
    check_gammas(gammas)?;
    let m = gammas.len();
    if t == 0 || 2 * t >= m {
        return Err(Error::invalid(format!(
            "number of outliers T = {t} must satisfy 1 ≤ T < M/2 with M = {m}"
        )));
    }
    let count = binomial(m, t);
    if !limits.allow_large && count > limits.max_hypotheses {
        return Err(Error::CapExceeded {
            count,
            cap: limits.max_hypotheses,
            flag: OVERRIDE_FLAG,
        });
    }
    let (best, cost) = argmin_subsets((0..m).combinations(t), m, |_, typical| cluster_cost(gammas, typical))
        .expect("at least one hypothesis");
    Ok((OutlierSet { indices: best, m }, cost))
}

/// Exhaustive known-T GL test.
pub fn gl_test_known_t(gammas: &[Pmf], t: usize, limits: &GlLimits) -> Result<OutlierSet> {
    gl_test_known_t_with_cost(gammas, t, limits).map(|(s, _)| s)
}

/// Exhaustive unknown-T GL test. Returns the minimizing hypothesis and its cost.
pub fn gl_test_unknown_with_cost(gammas: &[Pmf], limits: &GlLimits) -> Result<(OutlierSet, GlCostBreakdown)> {
    check_gammas(gammas)?;
    let m = gammas.len();
    if !limits.allow_large && m > limits.max_m_unknown {
        return Err(Error::CapExceeded {
            count: unknown_hypothesis_count(m),
            cap: unknown_hypothesis_count(limits.max_m_unknown),
            flag: OVERRIDE_FLAG,
        });
    }
    let subsets = (1..m.div_ceil(2)).flat_map(|size| (0..m).combinations(size));
    let (best, _) = argmin_subsets(subsets, m, |outliers, typical| {
        breakdown(gammas, outliers, typical).total
    })
    .expect("M ≥ 3 admits singleton hypotheses");
    let parts = breakdown(gammas, &best, &complement_of(&best, m));
    Ok((OutlierSet { indices: best, m }, parts))
}

/// Exhaustive unknown-T GL test.
pub fn gl_test_unknown(gammas: &[Pmf], limits: &GlLimits) -> Result<OutlierSet> {
    gl_test_unknown_with_cost(gammas, limits).map(|(s, _)| s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pmf(v: &[f64]) -> Pmf {
        Pmf::new(v.to_vec()).unwrap()
    }

    fn three() -> Vec<Pmf> {
        vec![pmf(&[0.5, 0.5]), pmf(&[0.5, 0.5]), pmf(&[0.9, 0.1])]
    }

    #[test]
    fn outlier_set_validation() {
        assert_eq!(OutlierSet::new(vec![3, 1], 10).unwrap().indices(), &[1, 3]);
        assert!(OutlierSet::new(vec![], 10).is_err());
        assert!(OutlierSet::new(vec![1, 1], 10).is_err());
        assert!(OutlierSet::new(vec![10], 10).is_err());
        assert!(OutlierSet::new(vec![0, 1, 2, 3, 4], 10).is_err());
        assert!(OutlierSet::from_cluster(vec![0, 1, 2, 3, 4], 10).is_ok());
        assert!(OutlierSet::new(vec![0], 2).is_err());
        let s = OutlierSet::new(vec![1, 4], 6).unwrap();
        assert_eq!(s.complement(), vec![0, 2, 3, 5]);
        assert_eq!(s.to_string(), "{1, 4}");
    }

    #[test]
    fn known_t_costs() {
        let g = three();
        let s2 = OutlierSet::new(vec![2], 3).unwrap();
        assert_eq!(gl_cost_known_t(&g, &s2).unwrap(), 0.0);
        let s0 = OutlierSet::new(vec![0], 3).unwrap();
        let c = gl_cost_known_t(&g, &s0).unwrap();
        let expect = 0.5 * (0.5f64 / 0.7).ln()
            + 0.5 * (0.5f64 / 0.3).ln()
            + 0.9 * (0.9f64 / 0.7).ln()
            + 0.1 * (0.1f64 / 0.3).ln();
        assert!((c - expect).abs() < 1e-12, "{c}");
    }

    #[test]
    fn lone_member_cluster_costs_nothing() {
        // |S^c| = 1 is never admissible, so check the per-cluster cost directly.
        let g = vec![pmf(&[0.1, 0.9]), pmf(&[0.3, 0.7]), pmf(&[0.6, 0.4])];
        for j in 0..3 {
            assert_eq!(cluster_cost(&g, &[j]), 0.0);
        }
    }

    #[test]
    fn known_t_picks_the_deviant() {
        let g = three();
        let s = gl_test_known_t(&g, 1, &GlLimits::default()).unwrap();
        assert_eq!(s.indices(), &[2]);
    }

    #[test]
    fn known_t_ties_go_lexicographic() {
        let g = vec![pmf(&[0.3, 0.7]); 7];
        let s = gl_test_known_t(&g, 2, &GlLimits::default()).unwrap();
        assert_eq!(s.indices(), &[0, 1]);
        let s = gl_test_known_t(&g, 1, &GlLimits::default()).unwrap();
        assert_eq!(s.indices(), &[0]);
    }

    #[test]
    fn known_t_cap_refuses() {
        let g = vec![pmf(&[0.3, 0.7]); 40];
        let limits = GlLimits::default();
        match gl_test_known_t(&g, 10, &limits) {
            Err(Error::CapExceeded { count, cap, flag }) => {
                assert_eq!(count, binomial(40, 10));
                assert_eq!(cap, 2_000_000);
                assert_eq!(flag, OVERRIDE_FLAG);
            }
            other => panic!("expected cap refusal, got {other:?}"),
        }
        assert!(gl_test_known_t(&g, 0, &limits).is_err());
        assert!(gl_test_known_t(&g[..6], 3, &limits).is_err());
    }

    #[test]
    fn unknown_breakdown_zero_cases() {
        let g = three();
        let b = gl_cost_unknown(&g, &OutlierSet::new(vec![2], 3).unwrap()).unwrap();
        assert_eq!(b.typical_cost, 0.0);
        assert_eq!(b.outlier_cost, 0.0);
        assert_eq!(b.total, 0.0);

        let g = vec![
            pmf(&[0.2, 0.8]),
            pmf(&[0.9, 0.1]),
            pmf(&[0.2, 0.8]),
            pmf(&[0.9, 0.1]),
            pmf(&[0.2, 0.8]),
        ];
        let b = gl_cost_unknown(&g, &OutlierSet::new(vec![1, 3], 5).unwrap()).unwrap();
        assert_eq!(b.total, 0.0);
        assert_eq!(b.total, b.typical_cost + b.outlier_cost);
    }

    #[test]
    fn unknown_finds_the_minority_group() {
        let g = vec![
            pmf(&[0.12, 0.88]),
            pmf(&[0.88, 0.12]),
            pmf(&[0.1, 0.9]),
            pmf(&[0.91, 0.09]),
            pmf(&[0.09, 0.91]),
        ];
        let s = gl_test_unknown(&g, &GlLimits::default()).unwrap();
        assert_eq!(s.indices(), &[1, 3]);
    }

    #[test]
    fn unknown_ties_collapse_to_first_singleton() {
        let g = vec![pmf(&[0.4, 0.6]); 6];
        assert_eq!(gl_test_unknown(&g, &GlLimits::default()).unwrap().indices(), &[0]);
    }

    #[test]
    fn unknown_cap_refuses_without_override() {
        let g = vec![pmf(&[0.4, 0.6]); 25];
        assert!(matches!(
            gl_test_unknown(&g, &GlLimits::default()),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn hypothesis_counts() {
        assert_eq!(binomial(6, 2), 15);
        assert_eq!(binomial(40, 10), 847_660_528);
        assert_eq!(unknown_hypothesis_count(5), 15);
        assert_eq!(unknown_hypothesis_count(6), 6 + 15);
        assert_eq!(unknown_hypothesis_count(10), 10 + 45 + 120 + 210);
    }
}

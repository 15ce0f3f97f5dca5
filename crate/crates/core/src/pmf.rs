//! Probability mass functions over a finite alphabet, empirical distributions
//! of categorical sequences, and the two divergences used throughout the crate.
//!
//! All divergences are in nats. The extended-real conventions are
//!
//! ```text
//! 0 · ln(0/q) = 0,   0 · ln(0/0) = 0,   p · ln(p/0) = +∞  (p > 0)
//! ```
//!
//! and `f64::INFINITY` is used for +∞, so divergences compare with `<`/`>`
//! like any other value.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deviation from unit mass accepted without touching the entries.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;
/// Deviation from unit mass that is silently renormalized; anything larger is rejected.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-9;
/// Default floor for [`Pmf::has_full_support`].
pub const DEFAULT_SUPPORT_FLOOR: f64 = 1e-12;

/// A finite alphabet `{0, .., size - 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Alphabet(usize);

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::invalid(format!("alphabet size must be at least 2, got {size}")));
        }
        Ok(Alphabet(size))
    }

    pub fn size(self) -> usize {
        self.0
    }
}

impl TryFrom<usize> for Alphabet {
    type Error = Error;
    fn try_from(size: usize) -> Result<Self> {
        Alphabet::new(size)
    }
}

impl From<Alphabet> for usize {
    fn from(a: Alphabet) -> usize {
        a.0
    }
}

/// A probability mass function on an [`Alphabet`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    /// Builds a pmf, renormalizing when the mass is off by less than
    /// [`RENORMALIZE_TOLERANCE`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Alphabet::new(probs.len())?;
        if let Some((y, p)) = probs.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < 0.0) {
            return Err(Error::invalid(format!(
                "probability at symbol {y} is {p}; entries must be finite and nonnegative"
            )));
        }
        let total: f64 = probs.iter().sum();
        let deviation = (total - 1.0).abs();
        if deviation <= NORMALIZATION_TOLERANCE {
            Ok(Pmf { probs })
        } else if deviation <= RENORMALIZE_TOLERANCE {
            Ok(Pmf {
                probs: probs.into_iter().map(|p| p / total).collect(),
            })
        } else {
            Err(Error::invalid(format!("probabilities sum to {total}, not 1")))
        }
    }

    /// Uniform distribution on `alphabet`.
    pub fn uniform(alphabet: Alphabet) -> Self {
        let k = alphabet.size();
        Pmf {
            probs: vec![1.0 / k as f64; k],
        }
    }

    /// Internal constructor for vectors that are normalized by construction
    /// (means of pmfs, count ratios). Only checked in debug builds.
    pub(crate) fn from_normalized(probs: Vec<f64>) -> Self {
        debug_assert!(probs.len() >= 2);
        debug_assert!(
            (probs.iter().sum::<f64>() - 1.0).abs() <= RENORMALIZE_TOLERANCE,
            "unnormalized {probs:?}"
        );
        Pmf { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet(self.probs.len())
    }

    pub fn has_full_support(&self) -> bool {
        self.has_full_support_with(DEFAULT_SUPPORT_FLOOR)
    }

    pub fn has_full_support_with(&self, floor: f64) -> bool {
        self.probs.iter().all(|&p| p >= floor)
    }

    /// Total variation distance `½ Σ |p - q|`.
    pub fn total_variation(&self, other: &Pmf) -> Result<f64> {
        same_alphabet(self, other)?;
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }
}

impl TryFrom<Vec<f64>> for Pmf {
    type Error = Error;
    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Pmf::new(probs)
    }
}

impl From<Pmf> for Vec<f64> {
    fn from(p: Pmf) -> Vec<f64> {
        p.probs
    }
}

impl fmt::Display for Pmf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.probs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p:.6}")?;
        }
        write!(f, ")")
    }
}

/// `M` categorical sequences of common length `n` over one alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceSet {
    rows: Vec<Vec<usize>>,
    alphabet: Alphabet,
}

impl SequenceSet {
    pub fn new(rows: Vec<Vec<usize>>, alphabet: Alphabet) -> Result<Self> {
        if rows.len() < 3 {
            return Err(Error::invalid(format!("need at least 3 sequences, got {}", rows.len())));
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(Error::invalid("sequences must be nonempty"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(format!(
                    "sequence {i} has length {}, expected {n}",
                    row.len()
                )));
            }
            if let Some((k, &y)) = row.iter().enumerate().find(|(_, &y)| y >= alphabet.size()) {
                return Err(Error::invalid(format!(
                    "sequence {i} position {k}: symbol {y} outside alphabet of size {}",
                    alphabet.size()
                )));
            }
        }
        Ok(SequenceSet { rows, alphabet })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn num_sequences(&self) -> usize {
        self.rows.len()
    }

    pub fn len(&self) -> usize {
        self.rows[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    /// Empirical distribution of every row.
    pub fn empiricals(&self) -> Vec<Pmf> {
        self.rows
            .iter()
            .map(|row| empirical(row, self.alphabet).expect("validated on construction"))
            .collect()
    }
}

fn symbol_counts(seq: &[usize], alphabet: Alphabet) -> Result<Vec<u64>> {
    if seq.is_empty() {
        return Err(Error::invalid("cannot build an empirical pmf from an empty sequence"));
    }
    let mut counts = vec![0u64; alphabet.size()];
    for (k, &y) in seq.iter().enumerate() {
        match counts.get_mut(y) {
            Some(c) => *c += 1,
            None => {
                return Err(Error::invalid(format!(
                    "symbol {y} at position {k} outside alphabet of size {}",
                    alphabet.size()
                )))
            }
        }
    }
    Ok(counts)
}

/// Empirical distribution (type) of a sequence: `count(y) / n`.
pub fn empirical(seq: &[usize], alphabet: Alphabet) -> Result<Pmf> {
    let counts = symbol_counts(seq, alphabet)?;
    Ok(pmf_from_counts(&counts))
}

pub(crate) fn pmf_from_counts(counts: &[u64]) -> Pmf {
    let n = counts.iter().sum::<u64>() as f64;
    Pmf::from_normalized(counts.iter().map(|&c| c as f64 / n).collect())
}

/// Add-λ smoothed empirical distribution `(count(y) + λ) / (n + λ|Y|)`.
/// `lambda = 0` reproduces [`empirical`].
pub fn empirical_smoothed(seq: &[usize], alphabet: Alphabet, lambda: f64) -> Result<Pmf> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "smoothing λ must be finite and ≥ 0, got {lambda}"
        )));
    }
    let counts = symbol_counts(seq, alphabet)?;
    let denom = seq.len() as f64 + lambda * alphabet.size() as f64;
    Pmf::new(counts.iter().map(|&c| (c as f64 + lambda) / denom).collect())
}

fn same_alphabet(p: &Pmf, q: &Pmf) -> Result<()> {
    if p.probs.len() != q.probs.len() {
        return Err(Error::invalid(format!(
            "alphabet mismatch: {} vs {} symbols",
            p.probs.len(),
            q.probs.len()
        )));
    }
    Ok(())
}

/// KL divergence on raw slices of equal length.
#[inline]
pub(crate) fn kl_slices(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            acc += a * (a / b).ln();
        }
    }
    // Exact arithmetic gives acc ≥ 0; clip rounding noise.
    acc.max(0.0)
}

/// `D(p‖q) = Σ p(y) ln(p(y)/q(y))` in nats, +∞ if `p` is not absolutely
/// continuous with respect to `q`.
pub fn kl(p: &Pmf, q: &Pmf) -> Result<f64> {
    same_alphabet(p, q)?;
    Ok(kl_slices(&p.probs, &q.probs))
}

/// Bhattacharyya distance `-ln Σ √(p(y) q(y))` in nats; +∞ for disjoint supports.
pub fn bhattacharyya(p: &Pmf, q: &Pmf) -> Result<f64> {
    same_alphabet(p, q)?;
    let coefficient: f64 = p.probs.iter().zip(&q.probs).map(|(a, b)| (a * b).sqrt()).sum();
    if coefficient <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((-coefficient.ln()).max(0.0))
}

/// Coordinate-wise mean of borrowed pmfs, summed in iteration order.
pub(crate) fn mean_of<'a, I>(dim: usize, pmfs: I) -> Pmf
where
    I: IntoIterator<Item = &'a Pmf>,
{
    let mut acc = vec![0.0; dim];
    let mut count = 0usize;
    for p in pmfs {
        for (a, &x) in acc.iter_mut().zip(&p.probs) {
            *a += x;
        }
        count += 1;
    }
    debug_assert!(count > 0);
    let count = count as f64;
    for a in &mut acc {
        *a /= count;
    }
    Pmf::from_normalized(acc)
}

/// Arithmetic mean of a nonempty list of pmfs on one alphabet.
pub fn average(pmfs: &[Pmf]) -> Result<Pmf> {
    let first = pmfs
        .first()
        .ok_or_else(|| Error::invalid("cannot average an empty list of pmfs"))?;
    for p in &pmfs[1..] {
        same_alphabet(first, p)?;
    }
    Ok(mean_of(first.probs.len(), pmfs))
}

/// Checks that every pmf in `pmfs` shares one alphabet and returns it.
pub(crate) fn common_alphabet(pmfs: &[Pmf]) -> Result<Alphabet> {
    let first = pmfs.first().ok_or_else(|| Error::invalid("empty list of pmfs"))?;
    for (i, p) in pmfs.iter().enumerate() {
        if p.probs.len() != first.probs.len() {
            return Err(Error::invalid(format!(
                "pmf {i} has {} symbols, expected {}",
                p.probs.len(),
                first.probs.len()
            )));
        }
    }
    Ok(first.alphabet())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pmf(v: &[f64]) -> Pmf {
        Pmf::new(v.to_vec()).unwrap()
    }

    #[test]
    fn alphabet_rejects_singletons() {
        assert!(Alphabet::new(1).is_err());
        assert!(Alphabet::new(0).is_err());
        assert_eq!(Alphabet::new(2).unwrap().size(), 2);
    }

    #[test]
    fn constructor_normalization_bands() {
        let p = Pmf::new(vec![0.5, 0.5 + 5e-10]).unwrap();
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-15);
        assert!(Pmf::new(vec![0.5, 0.51]).is_err());
        assert!(Pmf::new(vec![1.5, -0.5]).is_err());
        assert!(Pmf::new(vec![f64::NAN, 1.0]).is_err());
        assert!(Pmf::new(vec![1.0]).is_err());
    }

    #[test]
    fn empirical_counts() {
        let a3 = Alphabet::new(3).unwrap();
        assert_eq!(empirical(&[0, 1, 1, 2], a3).unwrap().probs(), &[0.25, 0.5, 0.25]);
        let a2 = Alphabet::new(2).unwrap();
        assert_eq!(empirical(&[0, 0, 0], a2).unwrap().probs(), &[1.0, 0.0]);
        assert!(matches!(empirical(&[0, 2], a2), Err(Error::InvalidInput(_))));
        assert!(empirical(&[], a2).is_err());
    }

    #[test]
    fn smoothing_off_matches_plain_empirical() {
        let a = Alphabet::new(3).unwrap();
        let seq = [0, 0, 2, 1, 0];
        assert_eq!(empirical_smoothed(&seq, a, 0.0).unwrap(), empirical(&seq, a).unwrap());
        let s = empirical_smoothed(&[0, 0], a, 1.0).unwrap();
        assert!((s.probs()[0] - 0.6).abs() < 1e-15);
        assert!((s.probs()[2] - 0.2).abs() < 1e-15);
        assert!(empirical_smoothed(&seq, a, -1.0).is_err());
    }

    #[test]
    fn kl_reference_values() {
        let p = pmf(&[0.5, 0.5]);
        assert_eq!(kl(&p, &p).unwrap(), 0.0);
        let d = kl(&p, &pmf(&[0.25, 0.75])).unwrap();
        // 0.5 ln 2 + 0.5 ln(2/3)
        assert!((d - 0.143841).abs() < 1e-6, "{d}");
        assert_eq!(kl(&pmf(&[1.0, 0.0]), &pmf(&[0.0, 1.0])).unwrap(), f64::INFINITY);
        // zero mass in p never contributes, even where q is zero too
        assert_eq!(kl(&pmf(&[1.0, 0.0]), &pmf(&[1.0, 0.0])).unwrap(), 0.0);
        assert!(kl(&p, &pmf(&[0.2, 0.3, 0.5])).is_err());
    }

    #[test]
    fn bhattacharyya_reference_values() {
        let p = pmf(&[0.5, 0.5]);
        assert_eq!(bhattacharyya(&p, &p).unwrap(), 0.0);
        let b = bhattacharyya(&p, &pmf(&[0.125, 0.875])).unwrap();
        let expect = -((1.0f64 / 16.0).sqrt() + (7.0f64 / 16.0).sqrt()).ln();
        assert!((b - expect).abs() < 1e-12, "{b}");
        assert!((b - 0.092732).abs() < 1e-6, "{b}");
        assert_eq!(
            bhattacharyya(&pmf(&[1.0, 0.0]), &pmf(&[0.0, 1.0])).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn average_examples() {
        assert_eq!(average(&[pmf(&[1.0, 0.0])]).unwrap(), pmf(&[1.0, 0.0]));
        assert_eq!(
            average(&[pmf(&[1.0, 0.0]), pmf(&[0.0, 1.0])]).unwrap(),
            pmf(&[0.5, 0.5])
        );
        let m = average(&[pmf(&[0.25, 0.5, 0.25]), pmf(&[0.2, 7.0 / 15.0, 1.0 / 3.0])]).unwrap();
        for (got, want) in m.probs().iter().zip([0.225, 0.483333, 0.291667]) {
            assert!((got - want).abs() < 1e-6);
        }
        assert!(average(&[]).is_err());
    }

    #[test]
    fn full_support_floor_is_configurable() {
        let p = pmf(&[1e-6, 1.0 - 1e-6]);
        assert!(p.has_full_support());
        assert!(!p.has_full_support_with(1e-3));
        assert!(!pmf(&[0.0, 1.0]).has_full_support());
    }
}

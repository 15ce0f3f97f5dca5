//! Outlier hypothesis testing over empirical distributions.
//!
//! Given `M` sequences over a finite alphabet, some of which were drawn from
//! an outlying distribution, the tests in this crate decide which ones are
//! outliers:
//!
//! * the exhaustive generalized likelihood tests [`gl_test_known_t`] and
//!   [`gl_test_unknown`];
//! * the clustering tests [`delta2`] (known number of outliers) and
//!   [`delta3`] (unknown number), each runnable for a single step or until
//!   convergence.
//!
//! The [`analysis`] module holds the numerical tools for the error-exponent
//! bounds, and [`sim`] runs seeded Monte Carlo comparisons of the tests.
//!
//! ```
//! use outlier_core::{delta2, Pmf, StopRule};
//!
//! let pi = Pmf::new(vec![0.5, 0.5])?;
//! let mu = Pmf::new(vec![0.9, 0.1])?;
//! let gammas = vec![pi.clone(), mu, pi.clone(), pi.clone(), pi];
//! let out = delta2(&gammas, 1, StopRule::one_step(), 0)?;
//! assert_eq!(out.detected.unwrap().indices(), &[1]);
//! # Ok::<(), outlier_core::Error>(())
//! ```

pub mod analysis;
pub mod cluster;
pub mod detector;
mod error;
pub mod gl;
pub mod pmf;
pub mod select;
pub mod sim;

pub use cluster::{delta2, delta3, kmeans2, StopRule, TestOutcome};
pub use detector::{run_detector, DetectorParams, TestKind};
pub use error::{Error, Result};
pub use gl::{gl_test_known_t, gl_test_unknown, GlLimits, OutlierSet};
pub use pmf::{average, bhattacharyya, empirical, kl, Alphabet, Pmf, SequenceSet};

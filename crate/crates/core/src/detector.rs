//! Uniform entry point over the six detection tests.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cluster::{delta2, delta3, StopRule, TestOutcome, DEFAULT_MAX_ITERATIONS};
use crate::error::{Error, Result};
use crate::gl::{gl_test_known_t_with_cost, gl_test_unknown_with_cost, GlLimits};
use crate::pmf::Pmf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TestKind {
    #[serde(rename = "gl-known")]
    GlKnown,
    #[serde(rename = "gl-unknown")]
    GlUnknown,
    #[serde(rename = "delta2")]
    Delta2,
    #[serde(rename = "delta2-1")]
    Delta2OneStep,
    #[serde(rename = "delta3")]
    Delta3,
    #[serde(rename = "delta3-1")]
    Delta3OneStep,
}

impl TestKind {
    pub const ALL: [TestKind; 6] = [
        TestKind::GlKnown,
        TestKind::GlUnknown,
        TestKind::Delta2,
        TestKind::Delta2OneStep,
        TestKind::Delta3,
        TestKind::Delta3OneStep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestKind::GlKnown => "gl-known",
            TestKind::GlUnknown => "gl-unknown",
            TestKind::Delta2 => "delta2",
            TestKind::Delta2OneStep => "delta2-1",
            TestKind::Delta3 => "delta3",
            TestKind::Delta3OneStep => "delta3-1",
        }
    }

    /// Whether the test needs the number of outliers.
    pub fn needs_t(self) -> bool {
        matches!(self, TestKind::GlKnown | TestKind::Delta2 | TestKind::Delta2OneStep)
    }

    pub fn is_exhaustive(self) -> bool {
        matches!(self, TestKind::GlKnown | TestKind::GlUnknown)
    }

    /// Whether the test reads a probe index.
    pub fn uses_probe(self) -> bool {
        !self.is_exhaustive()
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TestKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            Error::invalid(format!(
                "unknown test {s:?}; expected one of gl-known, gl-unknown, delta2, delta2-1, delta3, delta3-1"
            ))
        })
    }
}

/// Parameters shared by all tests; fields a test does not use are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    pub t: Option<usize>,
    pub probe_index: usize,
    /// Iteration cap for the until-convergence variants.
    pub max_iterations: usize,
    pub gl_limits: GlLimits,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            t: None,
            probe_index: 0,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            gl_limits: GlLimits::default(),
        }
    }
}

/// Runs `kind` on the empirical distributions. Exhaustive tests report zero
/// iterations and an empty cost trace.
pub fn run_detector(kind: TestKind, gammas: &[Pmf], params: &DetectorParams) -> Result<TestOutcome> {
    let t = || {
        params
            .t
            .ok_or_else(|| Error::invalid(format!("test {kind} requires the number of outliers T")))
    };
    let until = StopRule::UntilConvergence {
        cap: params.max_iterations,
    };
    match kind {
        TestKind::GlKnown => {
            let (s, _) = gl_test_known_t_with_cost(gammas, t()?, &params.gl_limits)?;
            Ok(exhaustive(s))
        }
        TestKind::GlUnknown => {
            let (s, _) = gl_test_unknown_with_cost(gammas, &params.gl_limits)?;
            Ok(exhaustive(s))
        }
        TestKind::Delta2 => delta2(gammas, t()?, until, params.probe_index),
        TestKind::Delta2OneStep => delta2(gammas, t()?, StopRule::one_step(), params.probe_index),
        TestKind::Delta3 => delta3(gammas, until, params.probe_index),
        TestKind::Delta3OneStep => delta3(gammas, StopRule::one_step(), params.probe_index),
    }
}

fn exhaustive(s: crate::gl::OutlierSet) -> TestOutcome {
    TestOutcome {
        detected: Some(s),
        iterations: 0,
        cost_trace: Vec::new(),
        converged: true,
    }
}

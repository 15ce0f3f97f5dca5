use std::io::Write;

use anyhow::{bail, Context, Result};
use outlier_core::pmf::empirical_smoothed;
use outlier_core::{run_detector, DetectorParams, GlLimits, Pmf, TestOutcome};
use serde::Serialize;

use crate::args::DetectArgs;
use crate::sequences::parse_sequences;

#[derive(Debug, Serialize)]
pub struct DetectReport {
    pub test: String,
    pub m: usize,
    pub n: usize,
    pub alphabet: usize,
    /// `None` when the clustering collapsed into one cluster.
    pub detected: Option<Vec<usize>>,
    pub iterations: usize,
    pub converged: bool,
    pub cost_trace: Vec<f64>,
}

pub fn run(args: &DetectArgs, out: &mut dyn Write) -> Result<()> {
    if args.test.needs_t() && args.t.is_none() {
        bail!("test {} requires --t (the number of outliers)", args.test);
    }
    if !(args.smoothing >= 0.0 && args.smoothing.is_finite()) {
        bail!("--smoothing must be a nonnegative number, got {}", args.smoothing);
    }
    let text = std::fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let set = parse_sequences(&text).with_context(|| format!("parsing {}", args.input.display()))?;
    let gammas: Vec<Pmf> = if args.smoothing > 0.0 {
        set.rows()
            .iter()
            .map(|row| empirical_smoothed(row, set.alphabet(), args.smoothing))
            .collect::<outlier_core::Result<_>>()?
    } else {
        set.empiricals()
    };
    let params = DetectorParams {
        t: args.t,
        probe_index: args.probe,
        max_iterations: args.max_iter,
        gl_limits: GlLimits {
            allow_large: args.allow_large,
            ..GlLimits::default()
        },
    };
    let outcome = run_detector(args.test, &gammas, &params)?;
    let report = report(args, &set, outcome);
    if args.json {
        serde_json::to_writer_pretty(&mut *out, &report)?;
        writeln!(out)?;
    } else {
        write_text(&report, out)?;
    }
    Ok(())
}

fn report(args: &DetectArgs, set: &outlier_core::SequenceSet, outcome: TestOutcome) -> DetectReport {
    DetectReport {
        test: args.test.to_string(),
        m: set.num_sequences(),
        n: set.len(),
        alphabet: set.alphabet().size(),
        detected: outcome.detected.map(|s| s.indices().to_vec()),
        iterations: outcome.iterations,
        converged: outcome.converged,
        cost_trace: outcome.cost_trace,
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn write_text(r: &DetectReport, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "test: {}", r.test)?;
    writeln!(out, "sequences: {} of length {} over {} symbols", r.m, r.n, r.alphabet)?;
    match &r.detected {
        Some(s) => writeln!(out, "outliers: {}", join(s))?,
        None => writeln!(out, "outliers: none (clustering degenerated to one cluster)")?,
    }
    writeln!(out, "iterations: {}", r.iterations)?;
    writeln!(out, "converged: {}", r.converged)?;
    writeln!(out, "cost trace: {}", join(&r.cost_trace))?;
    Ok(())
}

use std::io::Write;

use anyhow::Result;
use outlier_core::analysis::{
    bhattacharyya_bound, check_cluster_condition, default_exponent_step, estimate_constraint_set,
    example1_certificate_with, lemma2_oracle, ClusterConditionReport, ClusterSide, Example1Params,
};
use outlier_core::Pmf;
use serde::Serialize;

use crate::args::AnalyzeCommand;

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn run(cmd: &AnalyzeCommand, out: &mut dyn Write) -> Result<()> {
    match cmd {
        AnalyzeCommand::ClusterCondition {
            typicals,
            outliers,
            json,
        } => {
            let r = check_cluster_condition(typicals, outliers)?;
            if *json {
                return emit(out, &r);
            }
            write_condition(&r, out)
        }
        AnalyzeCommand::Lemma2 { p1, p2, step, json } => {
            let r = lemma2_oracle(p1, p2, *step)?;
            if *json {
                return emit(out, &r);
            }
            writeln!(out, "grid step: {}", r.grid_step)?;
            writeln!(
                out,
                "grid minimum of D(q||p1) + D(q||p2): {:.6} at q = {}",
                r.min_value, r.argmin
            )?;
            writeln!(
                out,
                "2B(p1, p2): {:.6} at q* = {}",
                r.closed_form_value, r.closed_form_argmin
            )?;
            writeln!(out, "gap: {:.3e}", r.min_value - r.closed_form_value)?;
            Ok(())
        }
        AnalyzeCommand::Example1 { m, json } => {
            let params = Example1Params {
                m: *m,
                ..Example1Params::default()
            };
            let r = example1_certificate_with(&params)?;
            if *json {
                return emit(out, &r);
            }
            writeln!(out, "{r}")?;
            Ok(())
        }
        AnalyzeCommand::Exponent {
            set,
            pis,
            mus,
            step,
            json,
        } => {
            let step = step.unwrap_or_else(|| default_exponent_step(set.num_vars()));
            let r = estimate_constraint_set(*set, pis, mus, step)?;
            if *json {
                return emit(out, &r);
            }
            writeln!(out, "set: {set}")?;
            writeln!(out, "grid step: {}", r.grid_step)?;
            writeln!(out, "exponent estimate: {:.6}", r.value)?;
            if r.minimizer.is_empty() {
                writeln!(out, "minimizer: none (no feasible grid point)")?;
            } else {
                writeln!(out, "minimizer: {}", join_pmfs(&r.minimizer))?;
            }
            if r.relaxed_strict {
                writeln!(out, "note: strict inequalities were evaluated as non-strict")?;
            }
            Ok(())
        }
        AnalyzeCommand::BhattaBound { pi, mus, json } => {
            let bound = bhattacharyya_bound(pi, mus)?;
            if *json {
                return emit(out, &serde_json::json!({ "bound": bound }));
            }
            writeln!(out, "min_i 2B(mu_i, pi): {bound:.6}")?;
            Ok(())
        }
    }
}

fn join_pmfs(pmfs: &[Pmf]) -> String {
    pmfs.iter().map(Pmf::to_string).collect::<Vec<_>>().join(" ")
}

fn write_condition(r: &ClusterConditionReport, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "cluster condition: {}", if r.holds { "holds" } else { "violated" })?;
    writeln!(out, "max intra-outlier divergence: {:.6}", r.max_intra_outlier)?;
    writeln!(out, "max intra-typical divergence: {:.6}", r.max_intra_typical)?;
    writeln!(out, "min cross divergence: {:.6}", r.min_cross)?;
    if let Some(v) = &r.violation {
        let side = match v.side {
            ClusterSide::Outliers => "outlier",
            ClusterSide::Typicals => "typical",
        };
        let (o, t) = v.cross_pair;
        let cross = if v.cross_reversed {
            format!("D(pi_{t}||mu_{o})")
        } else {
            format!("D(mu_{o}||pi_{t})")
        };
        writeln!(
            out,
            "violation: {side} pair ({}, {}) has divergence {:.6}, not below {cross} = {:.6}",
            v.intra_pair.0, v.intra_pair.1, v.intra_value, v.cross_value
        )?;
    }
    Ok(())
}

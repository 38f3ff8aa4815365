//! Artifact writers shared by the subcommands.
//!
//! Every floating-point value in a CSV is printed with 17 significant
//! digits, which round-trips `f64` exactly, so two runs with the same
//! configuration and seed produce byte-identical tables regardless of worker
//! count. Timing lives only in the manifest.

use std::io;
use std::path::Path;

use serde_json::{json, Value};

use crate::ensemble::{BranchingReport, ConvergenceReport, EnsembleStats, GkslComparison};
use crate::noise::NoiseValidationReport;

/// Format that round-trips every finite `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Version stamp for the artifact layout produced by this binary.
pub const ARTIFACT_VERSION: u32 = 1;

pub fn ensemble_stats_csv(stats: &EnsembleStats) -> String {
    let d = stats.dim();
    let mut out = String::from("t,mean_norm_sq,se_norm_sq");
    for i in 0..d {
        for j in 0..d {
            out.push_str(&format!(",rho_re_{i}_{j}"));
        }
    }
    for i in 0..d {
        for j in 0..d {
            out.push_str(&format!(",rho_im_{i}_{j}"));
        }
    }
    out.push_str(",raw_trace\n");
    for (k, &t) in stats.times.iter().enumerate() {
        out.push_str(&fmt_f64(t));
        out.push(',');
        out.push_str(&fmt_f64(stats.mean_norm_sq[k]));
        out.push(',');
        out.push_str(&fmt_f64(stats.se_norm_sq[k]));
        for entry in stats.rho[k].data() {
            out.push(',');
            out.push_str(&fmt_f64(entry.re));
        }
        for entry in stats.rho[k].data() {
            out.push(',');
            out.push_str(&fmt_f64(entry.im));
        }
        out.push(',');
        out.push_str(&fmt_f64(stats.raw_trace[k]));
        out.push('\n');
    }
    out
}

pub fn branching_checkpoints_csv(report: &BranchingReport) -> String {
    let mut out = String::from("prefix_index,t,cond_mean,se,z,norm_sq_s\n");
    for prefix in &report.prefixes {
        for ck in &prefix.checkpoints {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                prefix.prefix_index,
                fmt_f64(ck.t),
                fmt_f64(ck.cond_mean),
                fmt_f64(ck.se),
                fmt_f64(ck.z),
                fmt_f64(prefix.norm_sq_s),
            ));
        }
    }
    out
}

pub fn branching_report_json(report: &BranchingReport) -> Value {
    json!({
        "s": report.s,
        "checkpoint_times": report.checkpoint_times,
        "n_prefixes": report.prefixes.len(),
        "n_z": report.n_z,
        "n_exceed": report.n_exceed,
        "frac_exceed": report.frac_exceed,
        "binom_p_value": report.binom_p_value,
        "mean_abs_z": report.mean_abs_z,
        "combined_z": report.combined_z,
        "aborted_continuations": report.aborted_continuations,
        "pass": report.pass,
    })
}

pub fn noise_checks_csv(report: &NoiseValidationReport) -> String {
    let mut out = String::from("label,tau,estimate,predicted,se,z\n");
    for c in report.all_checks() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.label,
            fmt_f64(c.tau),
            fmt_f64(c.estimate),
            fmt_f64(c.predicted),
            fmt_f64(c.se),
            fmt_f64(c.z),
        ));
    }
    out
}

pub fn gksl_comparison_csv(cmp: &GkslComparison) -> String {
    let mut out = String::from("t,trace_distance,envelope\n");
    for (k, &t) in cmp.times.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(t),
            fmt_f64(cmp.trace_distances[k]),
            fmt_f64(cmp.envelopes[k]),
        ));
    }
    out
}

pub fn gksl_report_json(cmp: &GkslComparison) -> Value {
    json!({
        "rate": cmp.rate,
        "verdict": cmp.verdict.to_string(),
        "max_ratio": cmp.max_ratio,
        "max_envelope": cmp.max_envelope,
    })
}

pub fn convergence_levels_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from("dt,value,se\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(row.dt),
            fmt_f64(row.value),
            fmt_f64(row.se),
        ));
    }
    out
}

pub fn convergence_report_json(report: &ConvergenceReport) -> Value {
    json!({
        "integrator": report.integrator.to_string(),
        "fitted_order": report.fitted_order,
        "consistency_z": report.consistency_z,
        "pass": report.pass,
        "levels": report.rows.iter().map(|r| json!({
            "dt": r.dt, "value": r.value, "se": r.se,
        })).collect::<Vec<_>>(),
    })
}

#[allow(clippy::too_many_arguments)]
pub fn manifest_json(
    kind: &str,
    config_sha256: &str,
    master_seed: u64,
    workers: usize,
    wall_time_seconds: f64,
    verdicts: Value,
    outputs: &[String],
    warnings: &[String],
) -> Value {
    json!({
        "artifact_version": ARTIFACT_VERSION,
        "kind": kind,
        "config_sha256": config_sha256,
        "master_seed": master_seed,
        "workers": workers,
        "wall_time_seconds": wall_time_seconds,
        "verdicts": verdicts,
        "outputs": outputs,
        "warnings": warnings,
    })
}

pub fn write_text(dir: &Path, name: &str, content: &str) -> io::Result<()> {
    std::fs::write(dir.join(name), content)
}

pub fn write_json(dir: &Path, name: &str, value: &Value) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    std::fs::write(dir.join(name), text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for &v in &[0.1, 1.0 / 3.0, 2e-300, -5.5e17, f64::MIN_POSITIVE, 0.0] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }
}

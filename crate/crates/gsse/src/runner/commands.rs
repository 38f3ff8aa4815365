//! One driver per subcommand: load and validate the configuration, run the
//! experiment, write the artifacts, then enforce any expected verdict.

use std::path::PathBuf;
use std::time::Instant;

use serde_json::json;
use sha2::{Digest, Sha256};

use crate::ensemble::{
    compare_to_gksl, convergence_study, effective_workers, martingale_branch_test, run_ensemble,
    EnsembleError, EnsembleStats, ExperimentConfig,
};
use crate::noise::{validate_noise_statistics, CorrelationPair, TimeGrid, WhichCorrelation};
use crate::sse::ModelKind;

use super::cli::{Command, CommonArgs};
use super::config::RunConfig;
use super::output;
use super::RunnerError;

/// Oscillator ensembles whose averaged top-level occupation exceeds this are
/// flagged as truncation-limited.
pub const QBM_OCCUPATION_WARN: f64 = 1e-3;

fn lift(e: EnsembleError) -> RunnerError {
    match e {
        EnsembleError::TooManyAborts { aborted, total } => {
            RunnerError::TooManyAborts { aborted, total }
        }
        other => RunnerError::Validation(other.to_string()),
    }
}

fn check_expected(expected: Option<&String>, actual: &str) -> Result<(), RunnerError> {
    match expected {
        Some(e) if !e.eq_ignore_ascii_case(actual) => {
            Err(RunnerError::VerdictMismatch { expected: e.clone(), actual: actual.to_string() })
        }
        _ => Ok(()),
    }
}

/// Shared state of one subcommand run.
struct Run {
    config: RunConfig,
    config_sha256: String,
    out: PathBuf,
    started: Instant,
    outputs: Vec<String>,
    warnings: Vec<String>,
    seed_override: Option<u64>,
    workers_override: Option<usize>,
}

impl Run {
    fn prepare(args: &CommonArgs) -> Result<Self, RunnerError> {
        let bytes = std::fs::read(&args.config).map_err(|e| {
            RunnerError::Validation(format!("cannot read config {}: {e}", args.config.display()))
        })?;
        let config_sha256 = hex_digest(&bytes);
        let config = RunConfig::parse(&bytes)?;
        std::fs::create_dir_all(&args.out)?;
        Ok(Self {
            config,
            config_sha256,
            out: args.out.clone(),
            started: Instant::now(),
            outputs: Vec::new(),
            warnings: Vec::new(),
            seed_override: args.seed,
            workers_override: args.workers,
        })
    }

    fn experiment_config(&self) -> Result<ExperimentConfig, RunnerError> {
        self.config.experiment_config(self.seed_override, self.workers_override)
    }

    fn master_seed(&self) -> u64 {
        self.seed_override.unwrap_or(self.config.ensemble.master_seed)
    }

    fn workers(&self) -> usize {
        effective_workers(self.workers_override.or(self.config.ensemble.workers))
    }

    fn write_text(&mut self, name: &str, content: &str) -> Result<(), RunnerError> {
        output::write_text(&self.out, name, content)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn write_json(&mut self, name: &str, value: &serde_json::Value) -> Result<(), RunnerError> {
        output::write_json(&self.out, name, value)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    /// Write the manifest (always the last artifact, so its output list is
    /// complete) and enforce the expected verdict if one is configured.
    fn finish(mut self, kind: &str, verdicts: serde_json::Value) -> Result<(), RunnerError> {
        let mut outputs = std::mem::take(&mut self.outputs);
        outputs.push("manifest.json".to_string());
        let manifest = output::manifest_json(
            kind,
            &self.config_sha256,
            self.master_seed(),
            self.workers(),
            self.started.elapsed().as_secs_f64(),
            verdicts.clone(),
            &outputs,
            &self.warnings,
        );
        output::write_json(&self.out, "manifest.json", &manifest)?;
        if let Some(actual) = verdicts.get(kind).and_then(|v| v.as_str()) {
            check_expected(self.config.experiment.expected_verdict.as_ref(), actual)?;
        }
        Ok(())
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Fraction of the averaged state in the top basis level, maximized over
/// snapshots — the truncation monitor for oscillator presets.
fn max_top_level_occupation(stats: &EnsembleStats) -> f64 {
    let d = stats.dim();
    stats.rho.iter().map(|rho| rho[(d - 1, d - 1)].re).fold(0.0, f64::max)
}

fn run_simulate(args: &CommonArgs) -> Result<(), RunnerError> {
    let mut run = Run::prepare(args)?;
    let cfg = run.experiment_config()?;
    let stats = run_ensemble(&cfg).map_err(lift)?;
    if matches!(cfg.model.kind, ModelKind::Qbm { .. }) {
        let occ = max_top_level_occupation(&stats);
        if occ > QBM_OCCUPATION_WARN {
            let msg = format!(
                "top basis level holds {occ:.3e} of the averaged state \
                 (limit {QBM_OCCUPATION_WARN:.0e}); enlarge the basis"
            );
            eprintln!("warning: {msg}");
            run.warnings.push(msg);
        }
    }
    run.write_text("ensemble_stats.csv", &output::ensemble_stats_csv(&stats))?;
    println!(
        "simulate: {} trajectories, {} aborted, final mean norm^2 {:.6}",
        stats.n_completed,
        stats.n_aborted,
        stats.mean_norm_sq.last().expect("nonempty"),
    );
    run.finish("simulate", json!({}))
}

fn run_martingale_test(args: &CommonArgs) -> Result<(), RunnerError> {
    let mut run = Run::prepare(args)?;
    let cfg = run.experiment_config()?;
    let report = martingale_branch_test(&cfg).map_err(lift)?;
    run.write_text("branching_checkpoints.csv", &output::branching_checkpoints_csv(&report))?;
    run.write_json("branching_report.json", &output::branching_report_json(&report))?;
    let verdict = if report.pass { "pass" } else { "fail" };
    println!(
        "martingale-test: {verdict} ({} of {} z-scores exceed, binomial p = {:.4}, mean |z| = {:.3})",
        report.n_exceed, report.n_z, report.binom_p_value, report.mean_abs_z,
    );
    run.finish("martingale-test", json!({ "martingale-test": verdict }))
}

fn run_validate_noise(args: &CommonArgs) -> Result<(), RunnerError> {
    let mut run = Run::prepare(args)?;
    // only the noise sections matter here: the pair is judged on its own,
    // so an inadmissible-by-construction model or integrator cannot mask it
    let pair = CorrelationPair::new(run.config.noise.x.clone(), run.config.noise.y.clone());
    let grid = TimeGrid::new(run.config.grid.t_max, run.config.grid.dt)
        .map_err(|e| RunnerError::Validation(e.to_string()))?;
    let n = run.config.experiment.n_noise_realizations.unwrap_or(10_000);
    let report = validate_noise_statistics(&pair, &grid, n, run.master_seed())
        .map_err(|e| RunnerError::Validation(e.to_string()))?;
    run.write_text("noise_checks.csv", &output::noise_checks_csv(&report))?;
    run.write_json(
        "noise_report.json",
        &serde_json::to_value(&report).expect("serializable report"),
    )?;
    let verdict = if report.pass { "pass" } else { "fail" };
    if report.pair_validation.accepted {
        println!(
            "validate-noise: {verdict} (max |z| = {:.2} over {} checks, {} realizations)",
            report.max_abs_z,
            report.all_checks().count(),
            report.n_realizations,
        );
    } else {
        println!(
            "validate-noise: {verdict} (pair rejected: {})",
            report.pair_validation.violations.join("; "),
        );
    }
    run.finish("validate-noise", json!({ "validate-noise": verdict }))
}

fn run_compare_gksl(args: &CommonArgs) -> Result<(), RunnerError> {
    let mut run = Run::prepare(args)?;
    let cfg = run.experiment_config()?;
    // default rate: the white flux of the Hermitian correlation, which is
    // the decoherence rate the memoryless limit of this noise would have
    let rate = run
        .config
        .experiment
        .gksl_rate
        .unwrap_or_else(|| cfg.pair.correlation_eval(WhichCorrelation::Alpha, 0.0).1);
    let stats = run_ensemble(&cfg).map_err(lift)?;
    let comparison = compare_to_gksl(&stats, &cfg.model, rate).map_err(lift)?;
    run.write_text("ensemble_stats.csv", &output::ensemble_stats_csv(&stats))?;
    run.write_text("gksl_comparison.csv", &output::gksl_comparison_csv(&comparison))?;
    run.write_json("gksl_report.json", &output::gksl_report_json(&comparison))?;
    let verdict = comparison.verdict.to_string();
    println!(
        "compare-gksl: {verdict} (rate {rate}, max distance/envelope ratio {:.2})",
        comparison.max_ratio,
    );
    run.finish("compare-gksl", json!({ "compare-gksl": verdict }))
}

fn run_convergence(args: &CommonArgs) -> Result<(), RunnerError> {
    let mut run = Run::prepare(args)?;
    let cfg = run.experiment_config()?;
    let levels = run.config.experiment.dt_levels.clone().ok_or_else(|| {
        RunnerError::Validation("convergence requires experiment.dt_levels".to_string())
    })?;
    let n = run.config.experiment.n_per_level.unwrap_or(400);
    let report = convergence_study(&cfg, &levels, n).map_err(lift)?;
    run.write_text("convergence_levels.csv", &output::convergence_levels_csv(&report))?;
    run.write_json("convergence_report.json", &output::convergence_report_json(&report))?;
    let verdict = if report.pass { "pass" } else { "fail" };
    match (report.fitted_order, report.consistency_z) {
        (Some(order), _) => println!("convergence: {verdict} (fitted order {order:.3})"),
        (_, Some(z)) => println!("convergence: {verdict} (two-level consistency z = {z:.2})"),
        _ => println!("convergence: {verdict}"),
    }
    run.finish("convergence", json!({ "convergence": verdict }))
}

pub fn execute(command: &Command) -> Result<(), RunnerError> {
    match command {
        Command::Simulate(args) => run_simulate(args),
        Command::MartingaleTest(args) => run_martingale_test(args),
        Command::ValidateNoise(args) => run_validate_noise(args),
        Command::CompareGksl(args) => run_compare_gksl(args),
        Command::Convergence(args) => run_convergence(args),
    }
}

//! Monte-Carlo harness: draws channel realizations, runs the consensus
//! optimizer per regularization weight per realization per mode, evaluates
//! ergodic metrics on fresh conditional samples and aggregates trade-off
//! tables.
//!
//! Common random numbers are used throughout: channel, conditional-sample
//! and evaluation streams depend only on the realization index, never on
//! the mode or the regularization weight, so curves are comparable point
//! by point and whole sweeps are reproducible bit for bit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admm::{run_with, AdmmError, RadComSolution};
use crate::config::{AccessMode, CsitMode, SolverKnobs, SystemConfig};
use crate::model::{
    average_rates, bse, sample_saa_batch, BeampatternSpec, ChannelEstimate, SaaBatch,
};
use crate::rng;

/// How the ergodic root error aggregates over realizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErbseAggregation {
    /// Mean of per-realization roots (default; keeps units of power).
    RootThenMean,
    /// Root of the mean squared error.
    MeanThenRoot,
}

#[derive(Debug, Clone)]
pub struct SweepPlan {
    /// Strictly increasing regularization weights.
    pub lambdas: Vec<f64>,
    pub n_realizations: usize,
    pub modes: Vec<(AccessMode, CsitMode)>,
    /// Fresh conditional samples per realization for metric evaluation.
    pub eval_samples: usize,
    pub erbse_aggregation: ErbseAggregation,
}

impl Default for SweepPlan {
    fn default() -> Self {
        SweepPlan {
            lambdas: (0..9).map(|i| 10f64.powi(-9 + i)).collect(),
            n_realizations: 20,
            modes: vec![
                (AccessMode::Rsma, CsitMode::Partial),
                (AccessMode::Sdma, CsitMode::Partial),
            ],
            eval_samples: 1000,
            erbse_aggregation: ErbseAggregation::RootThenMean,
        }
    }
}

impl SweepPlan {
    pub fn validate(&self) -> Result<(), String> {
        if self.lambdas.is_empty() {
            return Err("at least one lambda required".into());
        }
        if self.lambdas.windows(2).any(|w| w[1] <= w[0]) {
            return Err("lambdas must be strictly increasing".into());
        }
        if self.n_realizations < 1 {
            return Err("at least one realization required".into());
        }
        if self.modes.is_empty() {
            return Err("at least one mode required".into());
        }
        if self.eval_samples < 1 {
            return Err("at least one evaluation sample required".into());
        }
        Ok(())
    }
}

/// One aggregated sweep point.
#[derive(Debug, Clone)]
pub struct TradeoffPoint {
    pub lambda: f64,
    pub ewsr: f64,
    pub erbse: f64,
    /// Mean delivered per-user rate (common share plus private).
    pub per_user_ar: Vec<f64>,
    pub common_power_frac: f64,
    pub private_power_fracs: Vec<f64>,
    pub n_ok: usize,
    pub n_infeasible: usize,
}

/// Per-realization evaluation on fresh conditional samples.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub per_user_total: Vec<f64>,
    pub delivered_shares: Vec<f64>,
    pub weighted_sum_rate: f64,
    pub rbse: f64,
    pub bse: f64,
    pub common_power_frac: f64,
    pub private_power_fracs: Vec<f64>,
}

/// Evaluates a solution against fresh conditional draws: average rates
/// with the delivered shares clipped to stay decodable, and the root
/// beampattern error at the solution's pattern scale. With exact CSIT the
/// evaluation is the instantaneous one regardless of the sample budget.
pub fn evaluate_solution(
    solution: &RadComSolution,
    estimate: &ChannelEstimate,
    spec: &BeampatternSpec,
    config: &SystemConfig,
    eval_samples: usize,
    rng: &mut rand_chacha::ChaCha12Rng,
) -> Evaluation {
    let batch = if estimate.is_exact() {
        SaaBatch::from_samples(vec![estimate.h_hat.clone()]).expect("single-sample batch")
    } else {
        sample_saa_batch(estimate, eval_samples, rng)
    };
    let avg = average_rates(
        &solution.precoder,
        &solution.shares,
        &batch,
        &config.user_weights,
    );
    let scaled = spec.clone().with_scale(solution.pattern_scale);
    let bse_val = bse(&solution.precoder, &scaled, config.antenna_spacing);
    let per_user_total: Vec<f64> = avg
        .delivered_shares
        .iter()
        .zip(&avg.private_per_user)
        .map(|(&c, &r)| c + r)
        .collect();
    let (common_power_frac, private_power_fracs) = solution.precoder.power_split();
    Evaluation {
        per_user_total,
        delivered_shares: avg.delivered_shares.clone(),
        weighted_sum_rate: avg.awsr,
        rbse: bse_val.sqrt(),
        bse: bse_val,
        common_power_frac,
        private_power_fracs,
    }
}

#[derive(Debug, Clone)]
pub struct ModeSweep {
    pub access_mode: AccessMode,
    pub csit_mode: CsitMode,
    pub points: Vec<TradeoffPoint>,
}

/// Outcome of one (mode, lambda, realization) work item.
enum RealizationOutcome {
    Ok(Box<Evaluation>),
    Infeasible(String),
}

fn realization_config(
    base: &SystemConfig,
    access: AccessMode,
    csit: CsitMode,
    lambda: f64,
    realization: u64,
) -> SystemConfig {
    let mut cfg = base.clone();
    cfg.access_mode = access;
    cfg.csit_mode = csit;
    cfg.reg_lambda = lambda;
    cfg.rng_seed = rng::derive_seed(base.rng_seed, "realization", &[realization]);
    if csit == CsitMode::Perfect {
        // degenerate conditional distribution: one sample carries it
        cfg.saa_samples = 1;
    }
    cfg
}

/// Runs the full sweep. Work items execute in parallel; aggregation is a
/// deterministic sequential reduction ordered by (mode, lambda,
/// realization), so results are schedule-independent.
pub fn run_sweep(
    plan: &SweepPlan,
    config: &SystemConfig,
    spec: &BeampatternSpec,
    knobs: &SolverKnobs,
) -> Result<Vec<ModeSweep>, String> {
    plan.validate()?;
    config.validate().map_err(|e| e.to_string())?;

    struct Job {
        mode_idx: usize,
        lambda_idx: usize,
        realization: usize,
    }
    let mut jobs = Vec::new();
    for mode_idx in 0..plan.modes.len() {
        for lambda_idx in 0..plan.lambdas.len() {
            for realization in 0..plan.n_realizations {
                jobs.push(Job {
                    mode_idx,
                    lambda_idx,
                    realization,
                });
            }
        }
    }

    let outcomes: Vec<RealizationOutcome> = jobs
        .par_iter()
        .map(|job| {
            let (access, csit) = plan.modes[job.mode_idx];
            let lambda = plan.lambdas[job.lambda_idx];
            let r = job.realization as u64;
            let cfg = realization_config(config, access, csit, lambda, r);
            let mut channel_rng = rng::stream(config.rng_seed, "channel", &[r]);
            let estimate = crate::model::sample_channel_estimate(&cfg, &mut channel_rng);
            match run_with(&cfg, &estimate, spec, knobs) {
                Ok(solution) => {
                    let mut eval_rng = rng::stream(config.rng_seed, "eval", &[r]);
                    let eval = evaluate_solution(
                        &solution,
                        &estimate,
                        spec,
                        &cfg,
                        plan.eval_samples,
                        &mut eval_rng,
                    );
                    RealizationOutcome::Ok(Box::new(eval))
                }
                Err(e) => RealizationOutcome::Infeasible(classify_failure(&e)),
            }
        })
        .collect();

    let mut sweeps = Vec::new();
    let mut idx = 0;
    for &(access, csit) in &plan.modes {
        let mut points = Vec::new();
        for &lambda in &plan.lambdas {
            let mut ok = Vec::new();
            let mut infeasible = 0usize;
            for _ in 0..plan.n_realizations {
                match &outcomes[idx] {
                    RealizationOutcome::Ok(eval) => ok.push(eval.as_ref().clone()),
                    RealizationOutcome::Infeasible(reason) => {
                        infeasible += 1;
                        eprintln!(
                            "excluded realization ({:?}/{:?}, lambda {lambda:.1e}): {reason}",
                            access, csit
                        );
                    }
                }
                idx += 1;
            }
            points.push(aggregate_point(
                lambda,
                &ok,
                infeasible,
                config.n_users,
                plan.erbse_aggregation,
            ));
        }
        sweeps.push(ModeSweep {
            access_mode: access,
            csit_mode: csit,
            points,
        });
    }
    Ok(sweeps)
}

fn classify_failure(e: &AdmmError) -> String {
    if e.is_qos_infeasible() {
        "QoS infeasible".into()
    } else {
        format!("solver failure: {e}")
    }
}

fn aggregate_point(
    lambda: f64,
    ok: &[Evaluation],
    n_infeasible: usize,
    n_users: usize,
    aggregation: ErbseAggregation,
) -> TradeoffPoint {
    let n = ok.len();
    let nf = n.max(1) as f64;
    let mean = |f: &dyn Fn(&Evaluation) -> f64| ok.iter().map(|e| f(e)).sum::<f64>() / nf;
    let erbse = match aggregation {
        ErbseAggregation::RootThenMean => mean(&|e| e.rbse),
        ErbseAggregation::MeanThenRoot => mean(&|e| e.bse).sqrt(),
    };
    TradeoffPoint {
        lambda,
        ewsr: mean(&|e| e.weighted_sum_rate),
        erbse,
        per_user_ar: (0..n_users)
            .map(|k| mean(&|e| e.per_user_total[k]))
            .collect(),
        common_power_frac: mean(&|e| e.common_power_frac),
        private_power_fracs: (0..n_users)
            .map(|k| mean(&|e| e.private_power_fracs[k]))
            .collect(),
        n_ok: n,
        n_infeasible,
    }
}

fn fmt_mode(access: AccessMode, csit: CsitMode) -> (String, String) {
    let a = match access {
        AccessMode::Rsma => "rsma",
        AccessMode::Sdma => "sdma",
    };
    let c = match csit {
        CsitMode::Perfect => "perfect",
        CsitMode::Partial => "partial",
    };
    (a.to_string(), c.to_string())
}

/// Trade-off table in the canonical column order.
pub fn tradeoff_csv(sweep: &ModeSweep, n_users: usize) -> String {
    let mut out = String::new();
    out.push_str("mode,csit_mode,lambda,ewsr_bpshz,erbse");
    for k in 1..=n_users {
        out.push_str(&format!(",ar_user_{k}"));
    }
    out.push_str(",common_power_frac");
    for k in 1..=n_users {
        out.push_str(&format!(",private_power_frac_{k}"));
    }
    out.push_str(",n_ok,n_infeasible\n");
    let (a, c) = fmt_mode(sweep.access_mode, sweep.csit_mode);
    for p in &sweep.points {
        out.push_str(&format!("{a},{c},{}", p.lambda));
        out.push_str(&format!(",{},{}", p.ewsr, p.erbse));
        for v in &p.per_user_ar {
            out.push_str(&format!(",{v}"));
        }
        out.push_str(&format!(",{}", p.common_power_frac));
        for v in &p.private_power_fracs {
            out.push_str(&format!(",{v}"));
        }
        out.push_str(&format!(",{},{}\n", p.n_ok, p.n_infeasible));
    }
    out
}

/// Two-column `erbse ewsr` companion file for plotting.
pub fn tradeoff_curve(sweep: &ModeSweep) -> String {
    let mut out = String::new();
    for p in &sweep.points {
        out.push_str(&format!("{} {}\n", p.erbse, p.ewsr));
    }
    out
}

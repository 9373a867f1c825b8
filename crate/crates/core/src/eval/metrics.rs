use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gft::{recover, GftOperator, SamplingSet};
use crate::plans::SamplingPlan;
use crate::sim::DataMatrix;

/// A junction is polluted when its peak exceeds this fraction of the scenario peak.
pub const POLLUTION_FRACTION: f64 = 0.01;

/// Accuracy tiers as `(name, nrmse threshold)`, tightest first.
pub const TIERS: [(&str, f64); 3] = [("high", 0.05), ("medium", 0.15), ("low", 0.30)];

/// Looks up a tier threshold by name.
pub fn tier_threshold(name: &str) -> Option<f64> {
    TIERS.iter().find(|(n, _)| *n == name).map(|&(_, t)| t)
}

/// RMSE over the range of `reference`.
///
/// A flat reference has no range; the error is then `0` when the estimate
/// stays within `1e-9 * scale` of it everywhere and `+inf` otherwise.
pub fn nrmse(reference: &[f64], estimate: &[f64], scale: f64) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::InvalidArgument("nrmse of an empty series".into()));
    }
    if reference.len() != estimate.len() {
        return Err(Error::DimensionMismatch {
            expected: reference.len(),
            got: estimate.len(),
        });
    }
    let (lo, hi) = reference
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let range = hi - lo;
    if range == 0.0 {
        let dev = reference
            .iter()
            .zip(estimate)
            .fold(0.0f64, |m, (r, e)| m.max((r - e).abs()));
        return Ok(if dev < 1e-9 * scale.abs() { 0.0 } else { f64::INFINITY });
    }
    let mse = reference
        .iter()
        .zip(estimate)
        .map(|(r, e)| (r - e) * (r - e))
        .sum::<f64>()
        / reference.len() as f64;
    Ok(mse.sqrt() / range)
}

/// `true` when the series peaks strictly above 1% of the scenario peak.
pub fn classify_polluted(series: &[f64], scenario_max: f64) -> bool {
    series.iter().any(|&v| v > POLLUTION_FRACTION * scenario_max)
}

/// Anything that turns sensor rows into a full-network estimate.
pub trait Reconstructor {
    /// `sensors` is |S| x K in plan order; the result is N x K.
    fn reconstruct(&self, sensors: &DMatrix<f64>) -> Result<DMatrix<f64>>;
}

/// Exact band-limited recovery as a reconstructor.
pub struct GftReconstructor<'a> {
    pub op: &'a GftOperator,
    pub set: &'a SamplingSet,
}

impl Reconstructor for GftReconstructor<'_> {
    fn reconstruct(&self, sensors: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        Ok(recover(self.op, self.set, sensors)?.signal)
    }
}

/// Predicts clean water everywhere.
pub struct ZeroReconstructor {
    pub nodes: usize,
}

impl Reconstructor for ZeroReconstructor {
    fn reconstruct(&self, sensors: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        Ok(DMatrix::zeros(self.nodes, sensors.ncols()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierScore {
    pub tier: String,
    pub threshold: f64,
    /// Polluted (scenario, junction) pairs reconstructed within the threshold.
    pub sensitivity: f64,
    /// Clean pairs whose reconstruction is also classified clean.
    pub specificity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub plan_id: String,
    pub scenario_ids: Vec<String>,
    /// Fraction of junctions monitored.
    pub budget_fraction: f64,
    /// Mean nrmse per junction over the scenarios that pollute it.
    pub per_node_nrmse: BTreeMap<String, f64>,
    /// Mean nrmse over all polluted pairs; absent when nothing was polluted.
    pub mean_nrmse: Option<f64>,
    pub polluted_pairs: usize,
    pub clean_pairs: usize,
    /// Ordered high, medium, low.
    pub tiers: Vec<TierScore>,
}

impl EvalReport {
    pub fn tier(&self, name: &str) -> Option<&TierScore> {
        self.tiers.iter().find(|t| t.tier == name)
    }

    pub fn sensitivity(&self, name: &str) -> Option<f64> {
        self.tier(name).map(|t| t.sensitivity)
    }

    /// Sensitivity and specificity never drop from a tighter to a looser tier.
    pub fn tiers_are_monotone(&self) -> bool {
        self.tiers.windows(2).all(|w| {
            w[0].threshold <= w[1].threshold
                && w[0].sensitivity <= w[1].sensitivity
                && w[0].specificity <= w[1].specificity
        })
    }
}

/// Scores a reconstructor on held-out scenarios, pooling all
/// (scenario, junction) pairs.
pub fn evaluate_plan(
    plan: &SamplingPlan,
    model: &dyn Reconstructor,
    test_matrices: &[DataMatrix],
) -> Result<EvalReport> {
    let first = test_matrices
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty test set".into()))?;
    let n = first.nodes();
    plan.validate(n)?;

    let mut node_sum = vec![0.0; n];
    let mut node_count = vec![0usize; n];
    let mut polluted_errors = Vec::new();
    let mut clean_pairs = 0usize;
    let mut clean_ok = 0usize;
    for x in test_matrices {
        if x.node_index != first.node_index {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x.nodes(),
            });
        }
        let estimate = model.reconstruct(&x.rows(&plan.nodes))?;
        if estimate.shape() != x.values.shape() {
            return Err(Error::DimensionMismatch {
                expected: x.values.len(),
                got: estimate.len(),
            });
        }
        let peak = x.max_value();
        for i in 0..n {
            let r: Vec<f64> = x.values.row(i).iter().copied().collect();
            let e: Vec<f64> = estimate.row(i).iter().copied().collect();
            if peak > 0.0 && classify_polluted(&r, peak) {
                let err = nrmse(&r, &e, peak)?;
                node_sum[i] += err;
                node_count[i] += 1;
                polluted_errors.push(err);
            } else {
                clean_pairs += 1;
                if !(peak > 0.0 && classify_polluted(&e, peak)) {
                    clean_ok += 1;
                }
            }
        }
    }

    let fraction = |hit: usize, total: usize| if total == 0 { 1.0 } else { hit as f64 / total as f64 };
    let specificity = fraction(clean_ok, clean_pairs);
    let tiers = TIERS
        .iter()
        .map(|&(name, threshold)| TierScore {
            tier: name.to_string(),
            threshold,
            sensitivity: fraction(
                polluted_errors.iter().filter(|&&e| e <= threshold).count(),
                polluted_errors.len(),
            ),
            specificity,
        })
        .collect();
    let per_node_nrmse = (0..n)
        .filter(|&i| node_count[i] > 0)
        .map(|i| (first.node_index[i].clone(), node_sum[i] / node_count[i] as f64))
        .collect();
    let mean_nrmse =
        (!polluted_errors.is_empty()).then(|| polluted_errors.iter().sum::<f64>() / polluted_errors.len() as f64);
    Ok(EvalReport {
        plan_id: plan.id(),
        scenario_ids: test_matrices.iter().map(|x| x.scenario.label()).collect(),
        budget_fraction: plan.len() as f64 / n as f64,
        per_node_nrmse,
        mean_nrmse,
        polluted_pairs: polluted_errors.len(),
        clean_pairs,
        tiers,
    })
}

/// Mean nrmse over the junctions a scenario pollutes, for every matrix in
/// `truth` against the matching estimate.
pub fn mean_polluted_nrmse(truth: &[DataMatrix], estimates: &[DMatrix<f64>]) -> Result<f64> {
    if truth.len() != estimates.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: estimates.len(),
        });
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (x, est) in truth.iter().zip(estimates) {
        let peak = x.max_value();
        if peak <= 0.0 {
            continue;
        }
        for i in 0..x.nodes() {
            let r: Vec<f64> = x.values.row(i).iter().copied().collect();
            if classify_polluted(&r, peak) {
                let e: Vec<f64> = est.row(i).iter().copied().collect();
                sum += nrmse(&r, &e, peak)?;
                count += 1;
            }
        }
    }
    Ok(if count == 0 { 0.0 } else { sum / count as f64 })
}

#[derive(Debug, Serialize, Deserialize)]
struct PlotRow {
    plan: String,
    budget_fraction: f64,
    tier: String,
    sensitivity: f64,
    specificity: f64,
    mean_nrmse: Option<f64>,
}

/// Long-format CSV, one row per report and tier, sorted by plan then budget.
pub fn export_plot_data(reports: &[EvalReport]) -> Result<String> {
    let mut sorted: Vec<&EvalReport> = reports.iter().collect();
    sorted.sort_by(|a, b| {
        a.plan_id
            .cmp(&b.plan_id)
            .then(a.budget_fraction.total_cmp(&b.budget_fraction))
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in sorted {
        for t in &r.tiers {
            w.serialize(PlotRow {
                plan: r.plan_id.clone(),
                budget_fraction: r.budget_fraction,
                tier: t.tier.clone(),
                sensitivity: t.sensitivity,
                specificity: t.specificity,
                mean_nrmse: r.mean_nrmse,
            })?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

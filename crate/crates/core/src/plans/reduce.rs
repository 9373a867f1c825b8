use super::{Provenance, SamplingPlan};
use crate::error::{Error, Result};
use crate::sim::DataMatrix;

/// Scores a candidate plan by the held-out reconstruction error (mean nrmse)
/// of a decoder retrained on it.
pub trait PlanScorer {
    fn held_out_nrmse(&self, plan: &SamplingPlan, matrices: &[DataMatrix]) -> Result<f64>;
}

impl<F> PlanScorer for F
where
    F: Fn(&SamplingPlan, &[DataMatrix]) -> Result<f64>,
{
    fn held_out_nrmse(&self, plan: &SamplingPlan, matrices: &[DataMatrix]) -> Result<f64> {
        self(plan, matrices)
    }
}

/// Injection-specific reduction: drops the least important node one at a
/// time while the held-out error stays within `accuracy_threshold`.
///
/// `matrices` are the scenario variants of the plan's source. Returns the
/// last plan that passed, a prefix of the input in the same order.
pub fn reduce_injection_specific(
    plan: &SamplingPlan,
    matrices: &[DataMatrix],
    accuracy_threshold: f64,
    scorer: &dyn PlanScorer,
) -> Result<SamplingPlan> {
    let Provenance::GftSpecific { source } = &plan.provenance else {
        return Err(Error::InvalidArgument(format!(
            "plan {} is not injection-specific",
            plan.id()
        )));
    };
    if !(accuracy_threshold > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "accuracy threshold must be positive, got {accuracy_threshold}"
        )));
    }
    if matrices.is_empty() {
        return Err(Error::InvalidArgument("no scenario matrices to evaluate on".into()));
    }
    if let Some(x) = matrices.iter().find(|x| &x.scenario.source != source) {
        return Err(Error::InvalidArgument(format!(
            "scenario {} does not belong to source \"{source}\"",
            x.scenario.label()
        )));
    }
    if plan.is_empty() {
        return Err(Error::InvalidArgument("plan is empty".into()));
    }

    let full = scorer.held_out_nrmse(plan, matrices)?;
    if !(full <= accuracy_threshold) {
        return Err(Error::ThresholdUnreachable {
            achieved: full,
            threshold: accuracy_threshold,
        });
    }
    let prefix = |len: usize| SamplingPlan {
        nodes: plan.nodes[..len].to_vec(),
        provenance: plan.provenance.clone(),
        parent: vec![plan.id()],
        scores: plan.scores.iter().take(len).copied().collect(),
    };
    let mut keep = plan.len();
    while keep > 1 {
        let candidate = prefix(keep - 1);
        let err = scorer.held_out_nrmse(&candidate, matrices)?;
        log::debug!("{}: {} nodes -> nrmse {err:.4}", plan.id(), keep - 1);
        if !(err <= accuracy_threshold) {
            break;
        }
        keep -= 1;
    }
    Ok(prefix(keep))
}

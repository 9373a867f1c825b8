//! Sampling plans: per-scenario GFT datasets, the general plans derived from
//! them, and the Laplacian and random baselines.

mod baseline;
mod reduce;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gft::{build_gft_operator, select_sampling_set, SelectionStrategy, DEFAULT_RANK_TOL};
use crate::sim::DataMatrix;

pub use baseline::{laplacian_plan, laplacian_scores, random_plan};
pub use reduce::{reduce_injection_specific, PlanScorer};

/// How a plan was produced. Together with the inputs it fully determines the plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    GftSpecific {
        source: String,
    },
    GftFrequent {
        threshold: usize,
        /// Set when the frequency ranking was cut or padded to a node budget.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        budget: Option<usize>,
    },
    GftImportant {
        n: usize,
    },
    Laplacian {
        budget: usize,
    },
    Random {
        seed: u64,
        budget: usize,
    },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::GftSpecific { source } => write!(f, "gft_specific-{source}"),
            Provenance::GftFrequent {
                threshold,
                budget: None,
            } => write!(f, "gft_frequent-t{threshold}"),
            Provenance::GftFrequent {
                threshold,
                budget: Some(b),
            } => write!(f, "gft_frequent-t{threshold}-b{b}"),
            Provenance::GftImportant { n } => write!(f, "gft_important-n{n}"),
            Provenance::Laplacian { budget } => write!(f, "laplacian-b{budget}"),
            Provenance::Random { seed, budget } => write!(f, "random-s{seed}-b{budget}"),
        }
    }
}

/// Ordered node subset, most important node first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    /// Junction indices in the canonical network order.
    pub nodes: Vec<usize>,
    pub provenance: Provenance,
    /// Ids of the GFT datasets this plan was derived from.
    #[serde(default)]
    pub parent: Vec<String>,
    /// Importance score per node, when the producer has one.
    #[serde(default)]
    pub scores: Vec<f64>,
}

impl SamplingPlan {
    pub fn id(&self) -> String {
        self.provenance.to_string()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_set(&self) -> BTreeSet<usize> {
        self.nodes.iter().copied().collect()
    }

    /// Checks the plan invariants against a network of `n` junctions.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::InvalidArgument(format!("plan {} is empty", self.id())));
        }
        let mut seen = BTreeSet::new();
        for &i in &self.nodes {
            if i >= n {
                return Err(Error::InvalidArgument(format!(
                    "plan {} names node {i}, network has {n}",
                    self.id()
                )));
            }
            if !seen.insert(i) {
                return Err(Error::InvalidArgument(format!("plan {} repeats node {i}", self.id())));
            }
        }
        if !self.scores.is_empty() && self.scores.len() != self.nodes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.nodes.len(),
                got: self.scores.len(),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn source(&self) -> Option<&str> {
        match &self.provenance {
            Provenance::GftSpecific { source } => Some(source),
            _ => None,
        }
    }
}

/// GFT dataset of one scenario: the greedy sampling set of its operator, in
/// importance order.
pub fn build_gft_dataset(x: &DataMatrix) -> Result<SamplingPlan> {
    let op = build_gft_operator(&x.values, DEFAULT_RANK_TOL)?;
    let set = select_sampling_set(&op, SelectionStrategy::Greedy)?;
    Ok(SamplingPlan {
        nodes: set.nodes,
        provenance: Provenance::GftSpecific {
            source: x.scenario.source.clone(),
        },
        parent: Vec::new(),
        scores: set.scores,
    })
}

/// GFT dataset of one injection source over all of its scenario variants.
///
/// The variants are placed side by side so the operator spans every one of them.
pub fn build_source_dataset(variants: &[&DataMatrix]) -> Result<SamplingPlan> {
    if let Some(other) = variants
        .iter()
        .find(|x| x.scenario.source != variants[0].scenario.source)
    {
        return Err(Error::InvalidArgument(format!(
            "variants mix sources \"{}\" and \"{}\"",
            variants[0].scenario.source, other.scenario.source
        )));
    }
    build_gft_dataset(&DataMatrix::concat(variants)?)
}

/// Drops every plan whose node set is contained in another retained plan.
///
/// Among identical sets the plan whose source id sorts lowest survives. The
/// input order is kept.
pub fn filter_subset_datasets(plans: &[SamplingPlan]) -> Vec<SamplingPlan> {
    let sets: Vec<BTreeSet<usize>> = plans.iter().map(SamplingPlan::node_set).collect();
    let key = |i: usize| (plans[i].source().unwrap_or(""), i);
    let keep: Vec<bool> = (0..plans.len())
        .map(|i| {
            !(0..plans.len()).any(|j| {
                if i == j || !sets[i].is_subset(&sets[j]) {
                    return false;
                }
                // a strict superset always wins; equal sets defer to the lower key
                sets[i].len() < sets[j].len() || key(j) < key(i)
            })
        })
        .collect();
    plans
        .iter()
        .zip(keep)
        .filter(|&(_, k)| k)
        .map(|(p, _)| p.clone())
        .collect()
}

/// Occurrence count of every node across `plans`.
pub fn node_frequencies(plans: &[SamplingPlan]) -> BTreeMap<usize, usize> {
    let mut counts = BTreeMap::new();
    for p in plans {
        for &i in &p.nodes {
            *counts.entry(i).or_insert(0) += 1;
        }
    }
    counts
}

fn parents(plans: &[SamplingPlan]) -> Vec<String> {
    plans.iter().map(SamplingPlan::id).collect()
}

/// GFT-F: nodes appearing in at least `threshold` plans, most frequent first
/// (ties by ascending index). Scores are the counts.
pub fn gft_frequent_plan(plans: &[SamplingPlan], threshold: usize) -> Result<SamplingPlan> {
    if plans.is_empty() {
        return Err(Error::InvalidArgument("no GFT datasets given".into()));
    }
    if threshold == 0 {
        return Err(Error::InvalidArgument("threshold must be at least 1".into()));
    }
    let counts = node_frequencies(plans);
    let max = counts.values().copied().max().unwrap_or(0);
    let mut ranked: Vec<(usize, usize)> = counts.into_iter().filter(|&(_, c)| c >= threshold).collect();
    if ranked.is_empty() {
        return Err(Error::EmptyPlan { threshold, max });
    }
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(SamplingPlan {
        nodes: ranked.iter().map(|&(i, _)| i).collect(),
        provenance: Provenance::GftFrequent {
            threshold,
            budget: None,
        },
        parent: parents(plans),
        scores: ranked.iter().map(|&(_, c)| c as f64).collect(),
    })
}

/// GFT-F cut to exactly `budget` of `n` junctions.
///
/// A ranking longer than the budget is truncated; a shorter one is padded
/// with the remaining junctions in ascending index order (score 0).
pub fn gft_frequent_budget_plan(
    plans: &[SamplingPlan],
    threshold: usize,
    budget: usize,
    n: usize,
) -> Result<SamplingPlan> {
    if budget == 0 || budget > n {
        return Err(Error::InvalidArgument(format!("budget {budget} outside 1..={n}")));
    }
    let mut plan = gft_frequent_plan(plans, threshold)?;
    if let Some(&bad) = plan.nodes.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidArgument(format!(
            "node {bad} outside a network of {n} junctions"
        )));
    }
    plan.nodes.truncate(budget);
    plan.scores.truncate(budget);
    let taken = plan.node_set();
    for i in (0..n).filter(|i| !taken.contains(i)).take(budget - plan.nodes.len()) {
        plan.nodes.push(i);
        plan.scores.push(0.0);
    }
    plan.provenance = Provenance::GftFrequent {
        threshold,
        budget: Some(budget),
    };
    Ok(plan)
}

/// GFT-I: union of the first `n` nodes of each plan, ordered by the best
/// rank position reached in any plan (ties by ascending index).
pub fn gft_important_plan(plans: &[SamplingPlan], n: usize) -> Result<SamplingPlan> {
    if plans.is_empty() {
        return Err(Error::InvalidArgument("no GFT datasets given".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let mut best: BTreeMap<usize, usize> = BTreeMap::new();
    for p in plans {
        for (pos, &i) in p.nodes.iter().take(n).enumerate() {
            let e = best.entry(i).or_insert(pos);
            *e = (*e).min(pos);
        }
    }
    let mut ranked: Vec<(usize, usize)> = best.into_iter().collect();
    ranked.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
    Ok(SamplingPlan {
        nodes: ranked.iter().map(|&(i, _)| i).collect(),
        provenance: Provenance::GftImportant { n },
        parent: parents(plans),
        scores: ranked.iter().map(|&(_, pos)| pos as f64).collect(),
    })
}

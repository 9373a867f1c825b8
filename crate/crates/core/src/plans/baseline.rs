use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Provenance, SamplingPlan};
use crate::error::{Error, Result};
use crate::network::PipeNetwork;

/// Eigenvalues closer than this (relative to the largest) form one cluster.
const EIGEN_RTOL: f64 = 1e-9;

/// Scores within this relative distance are tied.
const SCORE_RTOL: f64 = 1e-9;

fn check_budget(budget: usize, n: usize) -> Result<()> {
    if budget == 0 || budget > n {
        return Err(Error::InvalidArgument(format!("budget {budget} outside 1..={n}")));
    }
    Ok(())
}

/// Unweighted junction-graph Laplacian; parallel pipes count once.
fn junction_laplacian(net: &PipeNetwork) -> DMatrix<f64> {
    let n = net.junction_count();
    let edges: BTreeSet<(usize, usize)> = net
        .junction_edges()
        .into_iter()
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();
    let mut l = DMatrix::zeros(n, n);
    for (a, b) in edges {
        l[(a, b)] -= 1.0;
        l[(b, a)] -= 1.0;
        l[(a, a)] += 1.0;
        l[(b, b)] += 1.0;
    }
    l
}

/// Leverage of every junction on the `budget` eigenvectors with the smallest
/// nonzero Laplacian eigenvalues.
///
/// When the cut falls inside a cluster of equal eigenvalues, the cluster
/// contributes the diagonal of its spectral projector scaled by the share of
/// the cluster that fits. That keeps the scores independent of the arbitrary
/// basis an eigensolver picks inside a degenerate eigenspace.
pub fn laplacian_scores(net: &PipeNetwork, budget: usize) -> Result<Vec<f64>> {
    let n = net.junction_count();
    check_budget(budget, n)?;
    let eig = junction_laplacian(net).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let nonzero: Vec<usize> = order
        .into_iter()
        .filter(|&k| eig.eigenvalues[k] > EIGEN_RTOL * top)
        .collect();

    let mut scores = vec![0.0; n];
    let mut slots = budget.min(nonzero.len());
    let mut start = 0;
    while slots > 0 && start < nonzero.len() {
        let lambda = eig.eigenvalues[nonzero[start]];
        let mut end = start + 1;
        while end < nonzero.len() && eig.eigenvalues[nonzero[end]] - lambda <= EIGEN_RTOL * top {
            end += 1;
        }
        let size = end - start;
        let share = slots.min(size) as f64 / size as f64;
        for &k in &nonzero[start..end] {
            let u = eig.eigenvectors.column(k);
            for i in 0..n {
                scores[i] += share * u[i] * u[i];
            }
        }
        slots -= slots.min(size);
        start = end;
    }
    Ok(scores)
}

/// Laplacian baseline: the `budget` junctions with the highest leverage
/// scores, descending, ties by ascending index.
pub fn laplacian_plan(net: &PipeNetwork, budget: usize) -> Result<SamplingPlan> {
    let scores = laplacian_scores(net, budget)?;
    let top = scores.iter().fold(0.0f64, |m, &s| m.max(s));
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        if (scores[a] - scores[b]).abs() <= SCORE_RTOL * top {
            a.cmp(&b)
        } else {
            scores[b].total_cmp(&scores[a])
        }
    });
    order.truncate(budget);
    Ok(SamplingPlan {
        scores: order.iter().map(|&i| scores[i]).collect(),
        nodes: order,
        provenance: Provenance::Laplacian { budget },
        parent: Vec::new(),
    })
}

/// Random baseline: `budget` junctions drawn uniformly without replacement.
pub fn random_plan(net: &PipeNetwork, budget: usize, seed: u64) -> Result<SamplingPlan> {
    let n = net.junction_count();
    check_budget(budget, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = rand::seq::index::sample(&mut rng, n, budget).into_vec();
    Ok(SamplingPlan {
        nodes,
        provenance: Provenance::Random { seed, budget },
        parent: Vec::new(),
        scores: Vec::new(),
    })
}

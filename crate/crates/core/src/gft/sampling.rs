use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::operator::GftOperator;
use crate::error::{Error, Result};
use crate::matrix::sigma_min;

/// Scores within this relative distance of the best are ties.
pub const TIE_RTOL: f64 = 1e-9;

/// Below this `sigma_min(F_SR)` the sampled rows do not reach full rank.
pub const FULL_RANK_FLOOR: f64 = 1e-12;

/// Largest number of subsets the exhaustive search will enumerate.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionStrategy {
    Greedy,
    Exhaustive,
}

/// Sampled nodes in importance order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingSet {
    pub nodes: Vec<usize>,
    /// `sigma_min` of the band rows sampled so far, at the step each node was added.
    pub scores: Vec<f64>,
}

impl SamplingSet {
    pub fn sorted_nodes(&self) -> Vec<usize> {
        let mut v = self.nodes.clone();
        v.sort_unstable();
        v
    }
}

fn beats(candidate: f64, best: f64) -> bool {
    candidate > best + TIE_RTOL * best.abs()
}

/// Number of `k`-subsets of `n` items.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Chooses `rank` nodes whose band rows `F[S, R]` have the largest smallest
/// singular value.
pub fn select_sampling_set(op: &GftOperator, strategy: SelectionStrategy) -> Result<SamplingSet> {
    let basis = op.band_basis();
    let set = match strategy {
        SelectionStrategy::Greedy => greedy_order(&basis, &(0..basis.nrows()).collect::<Vec<_>>(), op.rank),
        SelectionStrategy::Exhaustive => {
            let best = exhaustive_argmax(&basis, op.rank)?;
            greedy_order(&basis, &best, op.rank)
        }
    };
    let last = set.scores.last().copied().unwrap_or(0.0);
    if set.nodes.len() != op.rank || last <= FULL_RANK_FLOOR {
        return Err(Error::RankDeficient(last));
    }
    Ok(set)
}

/// Grows a set one row at a time from `candidates`, each time taking the row
/// that maximizes `sigma_min` of the grown submatrix (lowest index on ties).
fn greedy_order(basis: &DMatrix<f64>, candidates: &[usize], steps: usize) -> SamplingSet {
    let mut nodes: Vec<usize> = Vec::with_capacity(steps);
    let mut scores = Vec::with_capacity(steps);
    let mut rows: Vec<usize> = Vec::with_capacity(steps + 1);
    for _ in 0..steps {
        let mut best: Option<(usize, f64)> = None;
        for &c in candidates {
            if nodes.contains(&c) {
                continue;
            }
            rows.clear();
            rows.extend_from_slice(&nodes);
            rows.push(c);
            let s = sigma_min(&basis.select_rows(&rows));
            match best {
                Some((_, b)) if !beats(s, b) => {}
                _ => best = Some((c, s)),
            }
        }
        match best {
            Some((c, s)) => {
                nodes.push(c);
                scores.push(s);
            }
            None => break,
        }
    }
    SamplingSet { nodes, scores }
}

/// True argmax over all `rank`-subsets, first in lexicographic order on ties.
fn exhaustive_argmax(basis: &DMatrix<f64>, rank: usize) -> Result<Vec<usize>> {
    let n = basis.nrows();
    let count = binomial(n, rank);
    if count > EXHAUSTIVE_LIMIT {
        return Err(Error::SearchTooLarge(count));
    }
    let mut combo: Vec<usize> = (0..rank).collect();
    let mut best = combo.clone();
    let mut best_score = f64::NEG_INFINITY;
    loop {
        let s = sigma_min(&basis.select_rows(&combo));
        if best_score == f64::NEG_INFINITY || beats(s, best_score) {
            best_score = s;
            best.clone_from(&combo);
        }
        if !next_combination(&mut combo, n) {
            break;
        }
    }
    Ok(best)
}

/// Advances to the next `k`-combination of `0..n` in lexicographic order.
pub(crate) fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gft::{build_gft_operator, DEFAULT_RANK_TOL};

    #[test]
    fn combinations_are_lexicographic() {
        let mut c = vec![0, 1];
        let mut all = vec![c.clone()];
        while next_combination(&mut c, 4) {
            all.push(c.clone());
        }
        assert_eq!(
            all,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(30, 15), 155_117_520);
    }

    #[test]
    fn full_rank_selects_every_node() {
        let x = DMatrix::from_fn(4, 8, |i, j| {
            ((i * j) as f64 * 0.7 + 0.3 * i as f64).sin() + if i == j { 1.0 } else { 0.0 }
        });
        let op = build_gft_operator(&x, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(op.rank, 4);
        for strategy in [SelectionStrategy::Greedy, SelectionStrategy::Exhaustive] {
            let s = select_sampling_set(&op, strategy).unwrap();
            assert_eq!(s.sorted_nodes(), vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn rank_one_picks_largest_entry() {
        let u = [0.2, -1.5, 0.9, 1.4];
        let x = DMatrix::from_fn(4, 5, |i, j| u[i] * (j as f64 + 1.0));
        let op = build_gft_operator(&x, DEFAULT_RANK_TOL).unwrap();
        let s = select_sampling_set(&op, SelectionStrategy::Greedy).unwrap();
        assert_eq!(s.nodes, vec![1]);
        let f = op.band_basis();
        assert!((s.scores[0] - f[(1, 0)].abs()).abs() < 1e-14);
    }

    #[test]
    fn scores_never_increase() {
        let x = DMatrix::from_fn(7, 12, |i, j| ((i * i + 3 * j) as f64 * 0.53).cos() * (1.0 + i as f64));
        let op = build_gft_operator(&x, DEFAULT_RANK_TOL).unwrap();
        let s = select_sampling_set(&op, SelectionStrategy::Greedy).unwrap();
        assert!(s.scores.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }

    #[test]
    fn exhaustive_limit_enforced() {
        // 30 nodes, rank 15: C(30, 15) > 1e6
        let x = DMatrix::from_fn(30, 15, |i, j| {
            ((i * 17 + j * 5) as f64 * 0.29).sin() + if i == j { 2.0 } else { 0.0 }
        });
        let op = build_gft_operator(&x, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(op.rank, 15);
        assert!(matches!(
            select_sampling_set(&op, SelectionStrategy::Exhaustive),
            Err(Error::SearchTooLarge(_))
        ));
    }
}

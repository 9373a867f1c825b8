//! Seeded train/test split of scenario variants.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::sim::DataMatrix;

/// Share of each source's variants held out for testing.
pub const TEST_FRACTION: f64 = 0.2;

/// Indices into the matrix list, both ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    pub fn pick<'a>(idx: &[usize], matrices: &'a [DataMatrix]) -> Vec<&'a DataMatrix> {
        idx.iter().map(|&i| &matrices[i]).collect()
    }

    pub fn train_set(&self, matrices: &[DataMatrix]) -> Vec<DataMatrix> {
        self.train.iter().map(|&i| matrices[i].clone()).collect()
    }

    pub fn test_set(&self, matrices: &[DataMatrix]) -> Vec<DataMatrix> {
        self.test.iter().map(|&i| matrices[i].clone()).collect()
    }
}

/// Splits 80/20 within every injection source so each source keeps training
/// variants. A source with a single variant goes entirely to training.
pub fn split_variants(matrices: &[DataMatrix], seed: u64) -> Split {
    let mut groups: Vec<(&str, Vec<usize>)> = Vec::new();
    for (i, x) in matrices.iter().enumerate() {
        match groups.iter_mut().find(|(s, _)| *s == x.scenario.source) {
            Some((_, g)) => g.push(i),
            None => groups.push((&x.scenario.source, vec![i])),
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (_, mut g) in groups {
        g.shuffle(&mut rng);
        let held = if g.len() < 2 {
            0
        } else {
            ((g.len() as f64 * TEST_FRACTION).round() as usize).clamp(1, g.len() - 1)
        };
        test.extend_from_slice(&g[..held]);
        train.extend_from_slice(&g[held..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Split { train, test }
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;

    use super::*;
    use crate::network::InjectionScenario;

    fn m(source: &str, rate: f64) -> DataMatrix {
        DataMatrix {
            values: DMatrix::zeros(2, 3),
            node_index: vec!["A".into(), "B".into()],
            timestep: 60.0,
            scenario: InjectionScenario {
                source: source.into(),
                rate,
                start: 0.0,
                duration: 60.0,
                timestep: 60.0,
                max_steps: 3,
            },
        }
    }

    #[test]
    fn one_of_four_held_out_per_source() {
        let xs: Vec<DataMatrix> = ["A", "B", "C"]
            .iter()
            .flat_map(|s| (1..=4).map(move |r| m(s, r as f64)))
            .collect();
        let split = split_variants(&xs, 7);
        assert_eq!(split.test.len(), 3);
        assert_eq!(split.train.len(), 9);
        for s in ["A", "B", "C"] {
            assert_eq!(split.test.iter().filter(|&&i| xs[i].scenario.source == s).count(), 1);
        }
        assert_eq!(split, split_variants(&xs, 7));
        let mut all: Vec<usize> = split.train.iter().chain(&split.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn single_variant_trains_only() {
        let split = split_variants(&[m("A", 1.0)], 0);
        assert_eq!(
            split,
            Split {
                train: vec![0],
                test: vec![]
            }
        );
    }
}

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use proptest::prelude::*;

use hydrosample::gft::{
    build_gft_operator, recover, select_sampling_set, GftOperator, SelectionStrategy, DEFAULT_RANK_TOL,
};
use hydrosample::network::{Junction, Pipe, PipeNetwork, Reservoir};
use hydrosample::plans::{filter_subset_datasets, gft_frequent_plan, gft_important_plan, Provenance, SamplingPlan};
use hydrosample::{parse_inp, serialize_inp};

/// Connected network: junction `i` hangs off an earlier node, plus a few
/// extra loop pipes.
fn network() -> impl Strategy<Value = PipeNetwork> {
    (2usize..12)
        .prop_flat_map(|n| {
            (
                proptest::collection::vec(0.0f64..0.05, n),
                proptest::collection::vec(any::<prop::sample::Index>(), n),
                proptest::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>()), 0..4),
                proptest::collection::vec((1.0f64..2000.0, 0.05f64..1.0), n + 4),
                1.0f64..200.0,
            )
        })
        .prop_map(|(demands, parents, loops, dims, head)| {
            let n = demands.len();
            let junctions: Vec<Junction> = demands
                .iter()
                .enumerate()
                .map(|(i, &d)| Junction {
                    id: format!("J{i}"),
                    demand: d,
                })
                .collect();
            let name = |k: usize| {
                if k == 0 {
                    "R1".to_string()
                } else {
                    format!("J{}", k - 1)
                }
            };
            let mut pipes = Vec::new();
            for (i, p) in parents.iter().enumerate() {
                pipes.push((name(p.index(i + 1)), format!("J{i}")));
            }
            for (a, b) in loops {
                let (a, b) = (a.index(n), b.index(n));
                if a != b {
                    pipes.push((format!("J{a}"), format!("J{b}")));
                }
            }
            let pipes = pipes
                .into_iter()
                .zip(dims)
                .enumerate()
                .map(|(k, ((from, to), (length, diameter)))| Pipe {
                    id: format!("P{k}"),
                    from,
                    to,
                    length,
                    diameter,
                })
                .collect();
            let reservoirs = vec![Reservoir { id: "R1".into(), head }];
            PipeNetwork::new(junctions, reservoirs, pipes).unwrap()
        })
}

/// N x K matrix of rank `r` from random factors.
fn low_rank() -> impl Strategy<Value = DMatrix<f64>> {
    (3usize..8, 1usize..4, 4usize..12, any::<u64>()).prop_map(|(n, r, k, seed)| {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let r = r.min(n);
        let a = DMatrix::from_fn(n, r, |_, _| rng.random_range(-1.0..1.0));
        let b = DMatrix::from_fn(r, k, |_, _| rng.random_range(-1.0..1.0));
        a * b
    })
}

fn sigma_min(op: &GftOperator, set: &[usize]) -> f64 {
    let band = &op.band_support;
    DMatrix::from_fn(set.len(), band.len(), |i, j| op.f_inv[(band[j], set[i])])
        .singular_values()
        .min()
}

fn specific_plans() -> impl Strategy<Value = Vec<SamplingPlan>> {
    proptest::collection::vec(proptest::collection::btree_set(0usize..10, 1..6), 1..7).prop_map(|sets| {
        sets.into_iter()
            .enumerate()
            .map(|(i, s)| SamplingPlan {
                nodes: s.into_iter().collect(),
                provenance: Provenance::GftSpecific {
                    source: format!("J{i}"),
                },
                parent: Vec::new(),
                scores: Vec::new(),
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parse_inverts_serialize(net in network()) {
        let text = serialize_inp(&net);
        prop_assert_eq!(parse_inp(&text).unwrap(), net);
    }

    #[test]
    fn parser_never_panics(text in "(\\[[A-Z]{3,10}\\]\n|[A-Z0-9]{1,3}( [-0-9.e]{1,6}){0,5}\n|;[a-z ]*\n){0,12}") {
        // any outcome is fine as long as it is a value or a structured error
        let _ = parse_inp(&text);
    }

    #[test]
    fn greedy_never_beats_exhaustive(x in low_rank()) {
        let op = build_gft_operator(&x, DEFAULT_RANK_TOL).unwrap();
        let greedy = select_sampling_set(&op, SelectionStrategy::Greedy).unwrap();
        let best = select_sampling_set(&op, SelectionStrategy::Exhaustive).unwrap();
        let (g, e) = (sigma_min(&op, &greedy.sorted_nodes()), sigma_min(&op, &best.sorted_nodes()));
        prop_assert!(g <= e * (1.0 + 1e-9));
        prop_assert!(g > 0.0);
    }

    #[test]
    fn relabelling_nodes_permutes_the_result(x in low_rank(), shift in 1usize..7) {
        let n = x.nrows();
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        // row i of the permuted matrix is row perm[i] of x
        let px = DMatrix::from_fn(n, x.ncols(), |i, j| x[(perm[i], j)]);
        let op = build_gft_operator(&x, DEFAULT_RANK_TOL).unwrap();
        let pop = build_gft_operator(&px, DEFAULT_RANK_TOL).unwrap();
        let set = select_sampling_set(&op, SelectionStrategy::Greedy).unwrap();
        let pset = select_sampling_set(&pop, SelectionStrategy::Greedy).unwrap();
        let mapped: BTreeSet<usize> = pset.nodes.iter().map(|&i| perm[i]).collect();
        let original: BTreeSet<usize> = set.nodes.iter().copied().collect();
        prop_assert_eq!(sigma_min(&op, &set.sorted_nodes()) > 0.0, true);
        // ties may pick different nodes of equal value; compare sets only when the optimum is unique
        if mapped != original {
            let a = sigma_min(&op, &set.sorted_nodes());
            let mut back: Vec<usize> = mapped.iter().copied().collect();
            back.sort_unstable();
            let b = sigma_min(&op, &back);
            prop_assert!((a - b).abs() <= 1e-9 * a.max(b), "{a} vs {b}");
        }

        let rows = |m: &DMatrix<f64>, s: &[usize]| DMatrix::from_fn(s.len(), m.ncols(), |i, j| m[(s[i], j)]);
        let rec = recover(&op, &set, &rows(&x, &set.nodes)).unwrap().signal;
        let prec = recover(&pop, &pset, &rows(&px, &pset.nodes)).unwrap().signal;
        let unpermuted = DMatrix::from_fn(n, x.ncols(), |i, j| prec[(perm.iter().position(|&p| p == i).unwrap(), j)]);
        let scale = x.amax().max(1.0);
        prop_assert!((&rec - &unpermuted).amax() < 1e-8 * scale);
        prop_assert!((&rec - &x).amax() < 1e-8 * scale);
    }

    #[test]
    fn frequent_plan_shrinks_with_threshold(plans in specific_plans(), t in 1usize..4) {
        let lo = gft_frequent_plan(&plans, t);
        let hi = gft_frequent_plan(&plans, t + 1);
        if let (Ok(lo), Ok(hi)) = (&lo, &hi) {
            prop_assert!(hi.node_set().is_subset(&lo.node_set()));
        }
        if lo.is_err() {
            prop_assert!(hi.is_err());
        }
    }

    #[test]
    fn important_plan_grows_with_n(plans in specific_plans(), n in 1usize..5) {
        let small = gft_important_plan(&plans, n).unwrap();
        let large = gft_important_plan(&plans, n + 1).unwrap();
        prop_assert!(small.node_set().is_subset(&large.node_set()));
    }

    #[test]
    fn filtering_preserves_the_union(plans in specific_plans()) {
        let kept = filter_subset_datasets(&plans);
        prop_assert!(!kept.is_empty());
        let all = gft_frequent_plan(&plans, 1).unwrap().node_set();
        let filtered = gft_frequent_plan(&kept, 1).unwrap().node_set();
        prop_assert_eq!(all, filtered);
        for (i, a) in kept.iter().enumerate() {
            for b in kept.iter().skip(i + 1) {
                prop_assert!(!a.node_set().is_subset(&b.node_set()));
                prop_assert!(!b.node_set().is_subset(&a.node_set()));
            }
        }
    }
}

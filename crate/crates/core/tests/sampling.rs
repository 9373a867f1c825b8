use nalgebra::DMatrix;

use hydrosample::fixtures;
use hydrosample::gft::{build_gft_operator, select_sampling_set, GftOperator, SelectionStrategy, DEFAULT_RANK_TOL};
use hydrosample::plans::build_gft_dataset;
use hydrosample::sim::{run_scenario_sweep, DataMatrix, VariantSpec};

fn sweep(net: &hydrosample::PipeNetwork, sources: &[&str], rates: &[f64]) -> Vec<DataMatrix> {
    let spec = VariantSpec {
        rates: rates.to_vec(),
        durations: vec![300.0],
        starts: vec![0.0],
        timestep: 30.0,
        max_steps: 400,
    };
    let sources: Vec<String> = sources.iter().map(|s| s.to_string()).collect();
    run_scenario_sweep(net, &sources, &spec).unwrap()
}

fn sigma_min(op: &GftOperator, set: &[usize]) -> f64 {
    let band = &op.band_support;
    let m = DMatrix::from_fn(set.len(), band.len(), |i, j| op.f_inv[(band[j], set[i])]);
    m.singular_values().min()
}

/// Best sigma_min over every subset of size `r`, by plain enumeration.
fn brute_force(op: &GftOperator) -> (Vec<usize>, f64) {
    let n = op.nodes();
    let r = op.rank;
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != r {
            continue;
        }
        let set: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let s = sigma_min(op, &set);
        if s > best.1 * (1.0 + 1e-9) {
            best = (set, s);
        }
    }
    best
}

#[test]
fn y5_plans_match_exhaustive_oracle() {
    let net = fixtures::y5();
    for x in sweep(&net, &["J1", "J2", "J3", "J4", "J5"], &[50.0]) {
        let op = build_gft_operator(&x.values, DEFAULT_RANK_TOL).unwrap();
        let (oracle, best) = brute_force(&op);
        let exhaustive = select_sampling_set(&op, SelectionStrategy::Exhaustive).unwrap();
        assert_eq!(exhaustive.sorted_nodes(), oracle, "{}", x.scenario.label());

        let plan = build_gft_dataset(&x).unwrap();
        let mut nodes = plan.nodes.clone();
        nodes.sort_unstable();
        let greedy = sigma_min(&op, &nodes);
        assert!(greedy <= best * (1.0 + 1e-9));
        assert!(greedy >= 0.5 * best, "{}: {greedy} vs {best}", x.scenario.label());
        assert!(greedy > 0.0);
        assert_eq!(nodes, oracle, "{}", x.scenario.label());
    }
}

#[test]
fn rate_changes_leave_plans_unchanged() {
    let net = fixtures::looped30();
    let xs = sweep(&net, &["J3", "J16"], &[10.0, 35.0, 120.0]);
    for group in xs.chunks(3) {
        let plans: Vec<Vec<usize>> = group.iter().map(|x| build_gft_dataset(x).unwrap().nodes).collect();
        assert_eq!(plans[0], plans[1]);
        assert_eq!(plans[0], plans[2]);
    }
}

#[test]
fn doubling_the_rate_doubles_the_dynamics() {
    let net = fixtures::looped30();
    let xs = sweep(&net, &["J8"], &[20.0, 40.0]);
    let scale = xs[1].max_value();
    let dev = (&xs[0].values * 2.0 - &xs[1].values).amax();
    assert!(dev < 1e-9 * scale, "{dev}");
}

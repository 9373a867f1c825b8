//! Eulerian donor-cell advection of a conservative contaminant.
//!
//! Every flowing pipe is cut into `max(1, floor(L / (v dt)))` equal segments so
//! the Courant number `v dt / segment` never exceeds one. Each step moves the
//! Courant fraction of every segment's mass one segment downstream. Masses
//! arriving at a junction, plus any injected mass, mix completely with the
//! arriving water and leave through the demand and the outgoing pipes in
//! proportion to their volumes. Reservoirs absorb what reaches them and emit
//! clean water.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::hydraulics::FlowField;
use crate::error::{Error, Result};
use crate::network::{InjectionScenario, NodeRef, PipeNetwork};

/// Residual in-network mass, as a fraction of injected mass, that ends a run.
pub const EXPULSION_FRACTION: f64 = 1e-6;

/// Flows at or below this fraction of the largest pipe flow are stagnant.
pub const STAGNANT_FRACTION: f64 = 1e-12;

const MG_PER_M3_TO_MG_PER_L: f64 = 1e-3;

/// Node-by-time concentration matrix of one scenario, in mg/L.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    /// N x K, rows follow `node_index`.
    pub values: DMatrix<f64>,
    pub node_index: Vec<String>,
    /// s
    pub timestep: f64,
    pub scenario: InjectionScenario,
}

impl DataMatrix {
    pub fn nodes(&self) -> usize {
        self.values.nrows()
    }

    pub fn steps(&self) -> usize {
        self.values.ncols()
    }

    /// Rows of `values` picked in the order of `nodes`.
    pub fn rows(&self, nodes: &[usize]) -> DMatrix<f64> {
        self.values.select_rows(nodes)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Side-by-side concatenation of matrices over the same nodes. The result
    /// keeps the first matrix's scenario.
    pub fn concat(parts: &[&DataMatrix]) -> Result<DataMatrix> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("nothing to concatenate".into()))?;
        let n = first.nodes();
        if let Some(bad) = parts.iter().find(|p| p.node_index != first.node_index) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.nodes(),
            });
        }
        let k: usize = parts.iter().map(|p| p.steps()).sum();
        let mut values = DMatrix::zeros(n, k);
        let mut at = 0;
        for p in parts {
            values.columns_mut(at, p.steps()).copy_from(&p.values);
            at += p.steps();
        }
        Ok(DataMatrix {
            values,
            node_index: first.node_index.clone(),
            timestep: first.timestep,
            scenario: first.scenario.clone(),
        })
    }
}

/// Mass inventory after one step, all in mg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassBalance {
    pub injected: f64,
    pub in_pipes: f64,
    pub in_junctions: f64,
    pub expelled: f64,
    pub absorbed: f64,
}

impl MassBalance {
    /// `|injected - (pipes + junctions + expelled + absorbed)| / injected`,
    /// zero while nothing has been injected.
    pub fn relative_error(&self) -> f64 {
        if self.injected == 0.0 {
            return (self.in_pipes + self.in_junctions + self.expelled + self.absorbed).abs();
        }
        (self.injected - (self.in_pipes + self.in_junctions + self.expelled + self.absorbed)).abs() / self.injected
    }
}

struct PipeState {
    upstream: NodeRef,
    downstream: NodeRef,
    /// m³ per step
    volume_flow: f64,
    courant: f64,
    mass: Vec<f64>,
}

/// Runs one injection scenario over a stationary flow field.
pub fn simulate_transport(net: &PipeNetwork, flows: &FlowField, scenario: &InjectionScenario) -> Result<DataMatrix> {
    simulate_transport_traced(net, flows, scenario).map(|(x, _)| x)
}

/// Like [`simulate_transport`] but also returns the per-step mass inventory.
pub fn simulate_transport_traced(
    net: &PipeNetwork,
    flows: &FlowField,
    scenario: &InjectionScenario,
) -> Result<(DataMatrix, Vec<MassBalance>)> {
    scenario.validate(net)?;
    let source = net
        .junction_index(&scenario.source)
        .ok_or_else(|| Error::InvalidScenario(format!("source \"{}\" is not a junction", scenario.source)))?;
    let dt = scenario.timestep;
    let n = net.junction_count();

    let max_flow = flows.pipe_flow.iter().fold(0.0f64, |m, q| m.max(q.abs()));
    let mut pipes = Vec::with_capacity(net.pipes.len());
    for ((pipe, &(from, to)), (&q, &v)) in net
        .pipes
        .iter()
        .zip(&net.pipe_endpoints())
        .zip(flows.pipe_flow.iter().zip(&flows.pipe_velocity))
    {
        if q.abs() <= STAGNANT_FRACTION * max_flow {
            continue;
        }
        let travel = v.abs() * dt;
        let segments = ((pipe.length / travel).floor() as usize).max(1);
        let seg_len = pipe.length / segments as f64;
        if travel > seg_len {
            return Err(Error::CflViolation {
                pipe: pipe.id.clone(),
                travel,
                segment: seg_len,
            });
        }
        let (upstream, downstream) = if q > 0.0 { (from, to) } else { (to, from) };
        pipes.push(PipeState {
            upstream,
            downstream,
            volume_flow: q.abs() * dt,
            courant: travel / seg_len,
            mass: vec![0.0; segments],
        });
    }

    // volume arriving at / leaving each junction per step
    let mut inflow_volume = vec![0.0; n];
    let mut outflow_volume: Vec<f64> = net.junctions.iter().map(|j| j.demand * dt).collect();
    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, p) in pipes.iter().enumerate() {
        if let NodeRef::Junction(j) = p.downstream {
            inflow_volume[j] += p.volume_flow;
        }
        if let NodeRef::Junction(j) = p.upstream {
            outflow_volume[j] += p.volume_flow;
            outgoing[j].push(k);
        }
    }

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut trace = Vec::new();
    let mut arrivals = vec![0.0; n];
    let mut held = vec![0.0; n];
    let mut balance = MassBalance {
        injected: 0.0,
        in_pipes: 0.0,
        in_junctions: 0.0,
        expelled: 0.0,
        absorbed: 0.0,
    };
    let injection_end = scenario.start + scenario.duration;

    for step in 0..scenario.max_steps {
        let t = step as f64 * dt;
        arrivals.iter_mut().for_each(|a| *a = 0.0);

        for p in pipes.iter_mut() {
            let c = p.courant;
            let last = p.mass.len() - 1;
            let out = c * p.mass[last];
            for s in (1..=last).rev() {
                p.mass[s] = (1.0 - c) * p.mass[s] + c * p.mass[s - 1];
            }
            p.mass[0] *= 1.0 - c;
            match p.downstream {
                NodeRef::Junction(j) => arrivals[j] += out,
                NodeRef::Reservoir(_) => balance.absorbed += out,
            }
        }

        if scenario.injecting_at(t) {
            let m = scenario.rate * dt;
            arrivals[source] += m;
            balance.injected += m;
        }

        let mut column = vec![0.0; n];
        for j in 0..n {
            let mass = arrivals[j] + held[j];
            if mass == 0.0 {
                continue;
            }
            if inflow_volume[j] <= 0.0 || outflow_volume[j] <= 0.0 {
                held[j] = mass;
                continue;
            }
            held[j] = 0.0;
            column[j] = mass / inflow_volume[j] * MG_PER_M3_TO_MG_PER_L;
            let share = mass / outflow_volume[j];
            balance.expelled += share * net.junctions[j].demand * dt;
            for &k in &outgoing[j] {
                pipes[k].mass[0] += share * pipes[k].volume_flow;
            }
        }
        columns.push(column);

        balance.in_pipes = pipes.iter().map(|p| p.mass.iter().sum::<f64>()).sum();
        balance.in_junctions = held.iter().sum();
        trace.push(balance);

        let residual = balance.in_pipes + balance.in_junctions;
        if t + dt >= injection_end - 0.5 * dt
            && balance.injected > 0.0
            && residual < EXPULSION_FRACTION * balance.injected
        {
            break;
        }
    }

    let k = columns.len();
    let values = DMatrix::from_fn(n, k, |i, j| columns[j][i]);
    Ok((
        DataMatrix {
            values,
            node_index: net.junction_ids(),
            timestep: dt,
            scenario: scenario.clone(),
        },
        trace,
    ))
}

//! Linearized steady hydraulics.
//!
//! Pipe flow is `w * (h_from - h_to)` with conductance `w = d² / L`. Reservoir
//! heads are fixed, junction demands are sinks, and the junction heads solve
//! the grounded weighted-Laplacian system `L_JJ h_J = -q - L_JR h_R`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{NodeRef, PipeNetwork};

/// Steady flow state. Vectors follow the network's junction, reservoir and
/// pipe order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowField {
    pub junction_head: Vec<f64>,
    pub reservoir_head: Vec<f64>,
    /// m³/s, positive from `pipe.from` to `pipe.to`.
    pub pipe_flow: Vec<f64>,
    /// m/s, signed like `pipe_flow`.
    pub pipe_velocity: Vec<f64>,
}

impl FlowField {
    pub fn head(&self, net: &PipeNetwork, id: &str) -> Option<f64> {
        net.node_map().get(id).map(|r| match *r {
            NodeRef::Junction(i) => self.junction_head[i],
            NodeRef::Reservoir(i) => self.reservoir_head[i],
        })
    }

    pub fn flow(&self, net: &PipeNetwork, pipe_id: &str) -> Option<f64> {
        net.pipes
            .iter()
            .position(|p| p.id == pipe_id)
            .map(|i| self.pipe_flow[i])
    }

    /// Net inflow minus outflow at every junction.
    pub fn junction_balance(&self, net: &PipeNetwork) -> Vec<f64> {
        let mut bal = vec![0.0; net.junction_count()];
        for ((from, to), q) in net.pipe_endpoints().into_iter().zip(&self.pipe_flow) {
            if let NodeRef::Junction(i) = from {
                bal[i] -= q;
            }
            if let NodeRef::Junction(i) = to {
                bal[i] += q;
            }
        }
        bal
    }
}

/// Solves the steady linearized flow problem.
pub fn solve_flows(net: &PipeNetwork) -> Result<FlowField> {
    let n = net.junction_count();
    let ends = net.pipe_endpoints();
    let reservoir_head: Vec<f64> = net.reservoirs.iter().map(|r| r.head).collect();

    let mut lap = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::from_iterator(n, net.junctions.iter().map(|j| -j.demand));
    for (pipe, &(a, b)) in net.pipes.iter().zip(&ends) {
        let w = pipe.conductance();
        match (a, b) {
            (NodeRef::Junction(i), NodeRef::Junction(j)) => {
                lap[(i, i)] += w;
                lap[(j, j)] += w;
                lap[(i, j)] -= w;
                lap[(j, i)] -= w;
            }
            (NodeRef::Junction(i), NodeRef::Reservoir(r)) | (NodeRef::Reservoir(r), NodeRef::Junction(i)) => {
                lap[(i, i)] += w;
                rhs[i] += w * reservoir_head[r];
            }
            // reservoir-to-reservoir pipes do not touch the unknowns
            (NodeRef::Reservoir(_), NodeRef::Reservoir(_)) => {}
        }
    }

    let chol = lap
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SingularSystem("some junctions have no path to a reservoir".into()))?;
    let heads = chol.solve(&rhs);
    if heads.iter().any(|h| !h.is_finite()) {
        return Err(Error::SingularSystem("non-finite heads".into()));
    }

    let head_of = |r: NodeRef| match r {
        NodeRef::Junction(i) => heads[i],
        NodeRef::Reservoir(i) => reservoir_head[i],
    };
    let pipe_flow: Vec<f64> = net
        .pipes
        .iter()
        .zip(&ends)
        .map(|(p, &(a, b))| p.conductance() * (head_of(a) - head_of(b)))
        .collect();
    let pipe_velocity = net.pipes.iter().zip(&pipe_flow).map(|(p, q)| q / p.area()).collect();

    Ok(FlowField {
        junction_head: heads.iter().copied().collect(),
        reservoir_head,
        pipe_flow,
        pipe_velocity,
    })
}

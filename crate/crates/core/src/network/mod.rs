//! Pipe-network data model.
//!
//! A [`PipeNetwork`] holds junctions (demand nodes), reservoirs (fixed-head
//! sources) and pipes. The order of [`PipeNetwork::junctions`] is the
//! canonical node indexing used by every node-by-time matrix in the crate.

mod inp;
mod scenario;

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use inp::{parse_inp, serialize_inp};
pub use scenario::{parse_scenario, InjectionScenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    pub id: String,
    /// Constant demand in m³/s.
    pub demand: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reservoir {
    pub id: String,
    /// Fixed hydraulic head in m.
    pub head: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipe {
    pub id: String,
    pub from: String,
    pub to: String,
    /// m
    pub length: f64,
    /// m
    pub diameter: f64,
}

impl Pipe {
    /// Cross-section area in m².
    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.diameter * self.diameter / 4.0
    }

    /// Conductance of the linearized hydraulic model, `diameter² / length`.
    pub fn conductance(&self) -> f64 {
        self.diameter * self.diameter / self.length
    }
}

/// A node reference resolved against a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeRef {
    Junction(usize),
    Reservoir(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipeNetwork {
    pub junctions: Vec<Junction>,
    pub reservoirs: Vec<Reservoir>,
    pub pipes: Vec<Pipe>,
}

impl PipeNetwork {
    /// Builds a network and checks every structural invariant.
    pub fn new(junctions: Vec<Junction>, reservoirs: Vec<Reservoir>, pipes: Vec<Pipe>) -> Result<Self> {
        let net = PipeNetwork {
            junctions,
            reservoirs,
            pipes,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn junction_count(&self) -> usize {
        self.junctions.len()
    }

    pub fn junction_ids(&self) -> Vec<String> {
        self.junctions.iter().map(|j| j.id.clone()).collect()
    }

    pub fn junction_index(&self, id: &str) -> Option<usize> {
        self.junctions.iter().position(|j| j.id == id)
    }

    /// Map from node id to its resolved reference.
    pub fn node_map(&self) -> HashMap<&str, NodeRef> {
        let mut map = HashMap::with_capacity(self.junctions.len() + self.reservoirs.len());
        for (i, j) in self.junctions.iter().enumerate() {
            map.insert(j.id.as_str(), NodeRef::Junction(i));
        }
        for (i, r) in self.reservoirs.iter().enumerate() {
            map.insert(r.id.as_str(), NodeRef::Reservoir(i));
        }
        map
    }

    /// Resolved `(from, to)` endpoints of every pipe, in pipe order.
    pub fn pipe_endpoints(&self) -> Vec<(NodeRef, NodeRef)> {
        let map = self.node_map();
        self.pipes
            .iter()
            .map(|p| (map[p.from.as_str()], map[p.to.as_str()]))
            .collect()
    }

    /// Junction-to-junction edges (reservoirs dropped), one per pipe.
    pub fn junction_edges(&self) -> Vec<(usize, usize)> {
        self.pipe_endpoints()
            .into_iter()
            .filter_map(|ends| match ends {
                (NodeRef::Junction(a), NodeRef::Junction(b)) => Some((a, b)),
                _ => None,
            })
            .collect()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.junctions.is_empty() {
            return Err(Error::InvalidArgument("network has no junctions".into()));
        }
        let mut seen: HashMap<&str, ()> = HashMap::new();
        for id in self
            .junctions
            .iter()
            .map(|j| &j.id)
            .chain(self.reservoirs.iter().map(|r| &r.id))
        {
            if seen.insert(id.as_str(), ()).is_some() {
                return Err(Error::DuplicateId {
                    line: 0,
                    id: id.clone(),
                });
            }
        }
        for j in &self.junctions {
            if !(j.demand.is_finite() && j.demand >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "junction \"{}\" has invalid demand {}",
                    j.id, j.demand
                )));
            }
        }
        for r in &self.reservoirs {
            if !r.head.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "reservoir \"{}\" has non-finite head",
                    r.id
                )));
            }
        }
        let mut pipe_ids: HashMap<&str, ()> = HashMap::new();
        for p in &self.pipes {
            if pipe_ids.insert(p.id.as_str(), ()).is_some() {
                return Err(Error::DuplicateId {
                    line: 0,
                    id: p.id.clone(),
                });
            }
            for end in [&p.from, &p.to] {
                if !seen.contains_key(end.as_str()) {
                    return Err(Error::UnknownNode {
                        line: 0,
                        id: end.clone(),
                    });
                }
            }
            if p.from == p.to {
                return Err(Error::InvalidArgument(format!("pipe \"{}\" is a self-loop", p.id)));
            }
            if !(p.length.is_finite() && p.length > 0.0) || !(p.diameter.is_finite() && p.diameter > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "pipe \"{}\" needs positive length and diameter",
                    p.id
                )));
            }
        }
        if self.reservoirs.is_empty() {
            return Err(Error::NoReservoir);
        }
        self.check_connected()
    }

    fn check_connected(&self) -> Result<()> {
        let map = self.node_map();
        let total = self.junctions.len() + self.reservoirs.len();
        let flat = |r: NodeRef| match r {
            NodeRef::Junction(i) => i,
            NodeRef::Reservoir(i) => self.junctions.len() + i,
        };
        let mut adj = vec![Vec::new(); total];
        for p in &self.pipes {
            let a = flat(map[p.from.as_str()]);
            let b = flat(map[p.to.as_str()]);
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut visited = vec![false; total];
        let mut queue = VecDeque::from([0usize]);
        visited[0] = true;
        while let Some(n) = queue.pop_front() {
            for &m in &adj[n] {
                if !visited[m] {
                    visited[m] = true;
                    queue.push_back(m);
                }
            }
        }
        match visited.iter().position(|v| !v) {
            None => Ok(()),
            Some(i) if i < self.junctions.len() => Err(Error::Disconnected(self.junctions[i].id.clone())),
            Some(i) => Err(Error::Disconnected(
                self.reservoirs[i - self.junctions.len()].id.clone(),
            )),
        }
    }
}

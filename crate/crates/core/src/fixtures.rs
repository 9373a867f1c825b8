//! Bundled test networks and the scenario sweep used for acceptance runs.

use crate::network::{parse_inp, PipeNetwork};
use crate::sim::VariantSpec;

/// Reservoir, tee and two demand junctions.
pub const Y3_INP: &str = include_str!("../fixtures/y3.inp");

/// Five junctions on a Y-shaped tree.
pub const Y5_INP: &str = include_str!("../fixtures/y5.inp");

/// Thirty junctions with loops, one reservoir.
pub const LOOPED30_INP: &str = include_str!("../fixtures/looped30.inp");

/// Injection sources of the looped network sweep.
pub const LOOPED30_SOURCES: [&str; 8] = ["J2", "J3", "J8", "J9", "J10", "J16", "J17", "J23"];

pub fn y3() -> PipeNetwork {
    parse_inp(Y3_INP).expect("bundled fixture parses")
}

pub fn y5() -> PipeNetwork {
    parse_inp(Y5_INP).expect("bundled fixture parses")
}

pub fn looped30() -> PipeNetwork {
    parse_inp(LOOPED30_INP).expect("bundled fixture parses")
}

pub fn looped30_sources() -> Vec<String> {
    LOOPED30_SOURCES.iter().map(|s| s.to_string()).collect()
}

/// Two rates times two durations, one start, 60 s steps.
pub fn looped30_variants() -> VariantSpec {
    VariantSpec {
        rates: vec![50.0, 80.0],
        durations: vec![600.0, 1200.0],
        starts: vec![0.0],
        timestep: 60.0,
        max_steps: 5000,
    }
}

//! Steady hydraulics and contaminant transport.

mod hydraulics;
mod io;
mod sweep;
mod transport;

pub use hydraulics::{solve_flows, FlowField};
pub use io::{read_data_matrix, write_data_matrix, DataMatrixMeta};
pub use sweep::{run_scenario_sweep, VariantSpec};
pub use transport::{
    simulate_transport, simulate_transport_traced, DataMatrix, MassBalance, EXPULSION_FRACTION, STAGNANT_FRACTION,
};

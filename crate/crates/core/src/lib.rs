//! Sparse sampling and reconstruction of contaminant dynamics on pipe networks.
//!
//! The crate covers the whole chain:
//!
//! - [`network`]: pipe-network model and the INP subset reader/writer.
//! - [`sim`]: linearized steady hydraulics and donor-cell contaminant transport.
//! - [`gft`]: data-driven graph Fourier operator from a column-pivoted QR,
//!   sampling-set selection and exact band-limited recovery.
//! - [`plans`]: per-scenario GFT datasets and the general plans derived from
//!   them, plus Laplacian and random baselines.
//! - [`neural`]: dense feed-forward networks used as node classifier
//!   (encoder) and dynamics reconstructor (decoder).
//! - [`eval`]: accuracy metrics, reports and the end-to-end pipeline.

// `!(x < t)` is used on purpose so that NaN fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod eval;
pub mod fixtures;
pub mod gft;
pub mod matrix;
pub mod network;
pub mod neural;
pub mod plans;
pub mod sim;
pub mod split;

pub use error::{Error, Result};
pub use network::{parse_inp, serialize_inp, InjectionScenario, PipeNetwork};
pub use sim::{run_scenario_sweep, simulate_transport, solve_flows, DataMatrix, FlowField, VariantSpec};

//! Data-driven graph Fourier transform, sampling-set selection and recovery.

mod operator;
pub mod qr;
mod recover;
mod sampling;

pub use operator::{build_gft_operator, GftOperator, GftOperatorJson, DEFAULT_RANK_TOL};
pub use recover::{recover, Recovery, ILL_CONDITIONED};
pub use sampling::{
    binomial, select_sampling_set, SamplingSet, SelectionStrategy, EXHAUSTIVE_LIMIT, FULL_RANK_FLOOR, TIE_RTOL,
};

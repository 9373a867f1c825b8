//! Shared inputs for the benchmarks.

use hydrosample::fixtures;
use hydrosample::{run_scenario_sweep, DataMatrix};

/// All scenario matrices of the 30-junction fixture.
pub fn looped30_sweep() -> Vec<DataMatrix> {
    run_scenario_sweep(
        &fixtures::looped30(),
        &fixtures::looped30_sources(),
        &fixtures::looped30_variants(),
    )
    .expect("fixture sweep")
}

/// The sweep's matrices placed side by side.
pub fn looped30_stacked() -> DataMatrix {
    let xs = looped30_sweep();
    DataMatrix::concat(&xs.iter().collect::<Vec<_>>()).expect("same network")
}

use nalgebra::DMatrix;

use super::operator::GftOperator;
use super::sampling::SamplingSet;
use crate::error::{Error, Result};
use crate::matrix::Svd;

/// Condition number of `F_SRᵀ F_SR` above which a recovery is flagged.
pub const ILL_CONDITIONED: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    /// N x K reconstruction.
    pub signal: DMatrix<f64>,
    /// Condition number of `F_SRᵀ F_SR`.
    pub condition: f64,
    pub ill_conditioned: bool,
}

/// Reconstructs every node from the samples at `set.nodes`:
/// `X̂ = F_VR (F_SRᵀ F_SR)⁻¹ F_SRᵀ X_S`.
///
/// The least-squares factor is applied through an SVD of `F_SR`, which equals
/// the normal-equation form whenever `F_SR` has full column rank.
pub fn recover(op: &GftOperator, set: &SamplingSet, samples: &DMatrix<f64>) -> Result<Recovery> {
    if samples.nrows() != set.nodes.len() {
        return Err(Error::DimensionMismatch {
            expected: set.nodes.len(),
            got: samples.nrows(),
        });
    }
    if let Some(&bad) = set.nodes.iter().find(|&&i| i >= op.nodes()) {
        return Err(Error::InvalidArgument(format!(
            "sampled node {bad} is outside the operator"
        )));
    }
    let f_vr = op.band_basis();
    let f_sr = f_vr.select_rows(&set.nodes);
    let sv = Svd::new(&f_sr);
    let smax = sv.s.first().copied().unwrap_or(0.0);
    let smin = sv.s.last().copied().unwrap_or(0.0);
    if sv.s.len() < op.rank || smin <= 0.0 {
        return Err(Error::RankDeficient(smin));
    }
    let condition = (smax / smin).powi(2);
    let coefficients = sv.solve(samples, 0.0)?;
    let signal = f_vr * coefficients;
    let ill_conditioned = condition > ILL_CONDITIONED;
    if ill_conditioned {
        log::warn!("recovery is ill-conditioned: cond(F_SR^T F_SR) = {condition:e}");
    }
    Ok(Recovery {
        signal,
        condition,
        ill_conditioned,
    })
}

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::mlp::{mlp_train, Activation, MlpModel, TrainConfig, TrainingSet};
use crate::error::{Error, Result};
use crate::eval::{mean_polluted_nrmse, Reconstructor};
use crate::plans::{PlanScorer, SamplingPlan};
use crate::sim::DataMatrix;
use crate::split::{split_variants, Split};

/// Decoder shape and training schedule.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    /// Hidden widths; `None` means one layer of `ceil((m + n) / 2)`.
    #[serde(default)]
    pub hidden: Option<Vec<usize>>,
    #[serde(flatten)]
    pub train: TrainConfig,
}

impl DecoderConfig {
    pub fn layer_sizes(&self, m: usize, n: usize) -> Vec<usize> {
        let mut sizes = vec![m];
        match &self.hidden {
            Some(h) => sizes.extend_from_slice(h),
            None => sizes.push((m + n).div_ceil(2)),
        }
        sizes.push(n);
        sizes
    }
}

fn check_matrices(matrices: &[&DataMatrix]) -> Result<usize> {
    let first = matrices
        .first()
        .ok_or_else(|| Error::InvalidArgument("no scenario matrices".into()))?;
    if let Some(bad) = matrices.iter().find(|x| x.node_index != first.node_index) {
        return Err(Error::DimensionMismatch {
            expected: first.nodes(),
            got: bad.nodes(),
        });
    }
    Ok(first.nodes())
}

/// One sample per timestep: plan-node readings in, all junctions out.
pub fn decoder_samples(plan: &SamplingPlan, matrices: &[&DataMatrix]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = check_matrices(matrices)?;
    plan.validate(n)?;
    let k: usize = matrices.iter().map(|x| x.steps()).sum();
    let mut inputs = DMatrix::zeros(k, plan.len());
    let mut targets = DMatrix::zeros(k, n);
    let mut row = 0;
    for x in matrices {
        for t in 0..x.steps() {
            for (c, &i) in plan.nodes.iter().enumerate() {
                inputs[(row, c)] = x.values[(i, t)];
            }
            targets.row_mut(row).copy_from(&x.values.column(t).transpose());
            row += 1;
        }
    }
    Ok((inputs, targets))
}

/// Trains a reconstructor from the plan's readings to every junction.
///
/// The matrices are split per source (see [`split_variants`]); the model
/// learns from the training part and reports its loss on the held-out part.
pub fn train_decoder(
    plan: &SamplingPlan,
    matrices: &[DataMatrix],
    split_seed: u64,
    cfg: &DecoderConfig,
) -> Result<MlpModel> {
    let split = split_variants(matrices, split_seed);
    train_decoder_on(
        plan,
        &Split::pick(&split.train, matrices),
        &Split::pick(&split.test, matrices),
        cfg,
    )
}

/// [`train_decoder`] on an explicit train/validation partition.
pub fn train_decoder_on(
    plan: &SamplingPlan,
    train: &[&DataMatrix],
    validation: &[&DataMatrix],
    cfg: &DecoderConfig,
) -> Result<MlpModel> {
    let (inputs, targets) = decoder_samples(plan, train)?;
    let n = targets.ncols();
    let data = TrainingSet::new(inputs, targets)?;
    let held = if validation.is_empty() {
        None
    } else {
        let (vi, vt) = decoder_samples(plan, validation)?;
        Some(TrainingSet::with_normalization(vi, vt, data.normalization.clone())?)
    };
    let model = MlpModel::new(
        &cfg.layer_sizes(plan.len(), n),
        Activation::Relu,
        Activation::Identity,
        cfg.train.seed,
    )?;
    mlp_train(&model, &data, &cfg.train, held.as_ref())
}

/// Full-network dynamics from the plan's sensor rows (|S| x K -> N x K),
/// negative outputs clamped to zero.
pub fn predict_dynamics(model: &MlpModel, plan: &SamplingPlan, sensor_rows: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let norm = model.normalization.as_ref().ok_or(Error::MissingNormalization)?;
    if sensor_rows.nrows() != plan.len() || plan.len() != model.input_width() {
        return Err(Error::DimensionMismatch {
            expected: model.input_width(),
            got: sensor_rows.nrows(),
        });
    }
    if sensor_rows.ncols() == 0 {
        return Ok(DMatrix::zeros(model.output_width(), 0));
    }
    let input = norm.input.normalize(&sensor_rows.transpose());
    let mut out = norm.target.denormalize(&model.forward_batch(&input)?);
    out.apply(|v| *v = v.max(0.0));
    Ok(out.transpose())
}

/// A trained decoder bound to its plan.
pub struct DecoderReconstructor<'a> {
    pub model: &'a MlpModel,
    pub plan: &'a SamplingPlan,
}

impl Reconstructor for DecoderReconstructor<'_> {
    fn reconstruct(&self, sensors: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        predict_dynamics(self.model, self.plan, sensors)
    }
}

/// Held-out scorer for plan reduction: trains a decoder on the split's
/// training variants and returns the mean nrmse over the junctions each
/// held-out variant pollutes.
#[derive(Debug, Clone)]
pub struct NeuralScorer {
    pub config: DecoderConfig,
    pub split_seed: u64,
}

impl PlanScorer for NeuralScorer {
    fn held_out_nrmse(&self, plan: &SamplingPlan, matrices: &[DataMatrix]) -> Result<f64> {
        let split = split_variants(matrices, self.split_seed);
        let test = if split.test.is_empty() {
            &split.train
        } else {
            &split.test
        };
        let model = train_decoder_on(plan, &Split::pick(&split.train, matrices), &[], &self.config)?;
        let truth: Vec<DataMatrix> = test.iter().map(|&i| matrices[i].clone()).collect();
        let estimates = truth
            .iter()
            .map(|x| predict_dynamics(&model, plan, &x.rows(&plan.nodes)))
            .collect::<Result<Vec<_>>>()?;
        mean_polluted_nrmse(&truth, &estimates)
    }
}

/// How the encoder treats timesteps whose whole input is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroRows {
    /// Skip them: they would carry every scenario's label at once.
    #[default]
    Drop,
    /// Keep them, labelled "no node important".
    NotImportant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    #[serde(default)]
    pub zero_rows: ZeroRows,
    #[serde(flatten)]
    pub train: TrainConfig,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            zero_rows: ZeroRows::Drop,
            train: TrainConfig::default(),
        }
    }
}

fn encoder_samples(
    matrices: &[&DataMatrix],
    plans: &[&SamplingPlan],
    zero_rows: ZeroRows,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = check_matrices(matrices)?;
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    let mut rows = 0;
    for (x, plan) in matrices.iter().zip(plans) {
        plan.validate(n)?;
        let mut label = vec![0.0; n];
        for &i in &plan.nodes {
            label[i] = 1.0;
        }
        for t in 0..x.steps() {
            let col = x.values.column(t);
            let zero = col.iter().all(|&v| v == 0.0);
            if zero && zero_rows == ZeroRows::Drop {
                continue;
            }
            inputs.extend(col.iter().copied());
            if zero {
                targets.extend(std::iter::repeat_n(0.0, n));
            } else {
                targets.extend_from_slice(&label);
            }
            rows += 1;
        }
    }
    Ok((
        DMatrix::from_row_slice(rows, n, &inputs),
        DMatrix::from_row_slice(rows, n, &targets),
    ))
}

/// Trains the node classifier: one sample per timestep, all junction
/// readings in, the scenario's plan membership out (N -> N -> N, sigmoid).
pub fn train_encoder(
    matrices: &[DataMatrix],
    plans: &[SamplingPlan],
    split_seed: u64,
    cfg: &EncoderConfig,
) -> Result<MlpModel> {
    if matrices.len() != plans.len() {
        return Err(Error::DimensionMismatch {
            expected: matrices.len(),
            got: plans.len(),
        });
    }
    let split = split_variants(matrices, split_seed);
    let pick_plans = |idx: &[usize]| idx.iter().map(|&i| &plans[i]).collect::<Vec<_>>();
    let (inputs, targets) = encoder_samples(
        &Split::pick(&split.train, matrices),
        &pick_plans(&split.train),
        cfg.zero_rows,
    )?;
    if inputs.nrows() == 0 {
        return Err(Error::InvalidArgument(
            "no contaminated timestep to train the encoder on".into(),
        ));
    }
    let n = inputs.ncols();
    let data = TrainingSet::with_raw_targets(inputs, targets)?;
    let held = if split.test.is_empty() {
        None
    } else {
        let (vi, vt) = encoder_samples(
            &Split::pick(&split.test, matrices),
            &pick_plans(&split.test),
            cfg.zero_rows,
        )?;
        Some(TrainingSet::with_normalization(vi, vt, data.normalization.clone())?)
    };
    let model = MlpModel::new(&[n, n, n], Activation::Relu, Activation::Sigmoid, cfg.train.seed)?;
    mlp_train(&model, &data, &cfg.train, held.as_ref())
}

/// Per-node importance probability for a scenario: sigmoid outputs averaged
/// over the timesteps with any contamination (all timesteps when there is none).
pub fn encoder_scores(model: &MlpModel, x: &DataMatrix) -> Result<Vec<f64>> {
    let norm = model.normalization.as_ref().ok_or(Error::MissingNormalization)?;
    if x.nodes() != model.input_width() {
        return Err(Error::DimensionMismatch {
            expected: model.input_width(),
            got: x.nodes(),
        });
    }
    let mut cols: Vec<usize> = (0..x.steps())
        .filter(|&t| x.values.column(t).iter().any(|&v| v != 0.0))
        .collect();
    if cols.is_empty() {
        cols = (0..x.steps()).collect();
    }
    if cols.is_empty() {
        return Ok(vec![0.0; model.output_width()]);
    }
    let input = norm.input.normalize(&x.values.select_columns(&cols).transpose());
    let out = model.forward_batch(&input)?;
    Ok(out.column_iter().map(|c| c.mean()).collect())
}

/// Nodes whose averaged importance exceeds 0.5, ascending.
pub fn predict_important(model: &MlpModel, x: &DataMatrix) -> Result<Vec<usize>> {
    Ok(encoder_scores(model, x)?
        .iter()
        .enumerate()
        .filter_map(|(i, &p)| (p > 0.5).then_some(i))
        .collect())
}

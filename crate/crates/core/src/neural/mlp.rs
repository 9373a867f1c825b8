use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
}

impl Activation {
    fn apply(self, z: &mut DMatrix<f64>) {
        match self {
            Activation::Identity => {}
            Activation::Relu => z.apply(|v| *v = v.max(0.0)),
            Activation::Sigmoid => z.apply(|v| *v = sigmoid(*v)),
        }
    }

    /// Derivative expressed through the activation output `a`.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
        }
    }
}

fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Per-feature affine map `v -> (v - shift) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaling {
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

impl FeatureScaling {
    pub fn identity(width: usize) -> Self {
        FeatureScaling {
            shift: vec![0.0; width],
            scale: vec![1.0; width],
        }
    }

    /// Min-max scaling over the rows of `data`; constant features get scale 1.
    pub fn min_max(data: &DMatrix<f64>) -> Self {
        let mut shift = Vec::with_capacity(data.ncols());
        let mut scale = Vec::with_capacity(data.ncols());
        for col in data.column_iter() {
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
            shift.push(lo);
            scale.push(if hi > lo { hi - lo } else { 1.0 });
        }
        FeatureScaling { shift, scale }
    }

    pub fn width(&self) -> usize {
        self.shift.len()
    }

    /// Applies the map to every row of `data` (samples x features).
    pub fn normalize(&self, data: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(data.nrows(), data.ncols(), |i, j| {
            (data[(i, j)] - self.shift[j]) / self.scale[j]
        })
    }

    pub fn denormalize(&self, data: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(data.nrows(), data.ncols(), |i, j| {
            data[(i, j)] * self.scale[j] + self.shift[j]
        })
    }

    fn validate(&self) -> Result<()> {
        if self.shift.len() != self.scale.len() {
            return Err(Error::DimensionMismatch {
                expected: self.shift.len(),
                got: self.scale.len(),
            });
        }
        if self.shift.iter().any(|v| !v.is_finite()) || self.scale.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(Error::InvalidArgument(
                "normalization needs finite shifts and positive scales".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub input: FeatureScaling,
    pub target: FeatureScaling,
}

/// Training samples (one per row) with the scaling fitted to them.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    /// S x m, raw units.
    pub inputs: DMatrix<f64>,
    /// S x n, raw units.
    pub targets: DMatrix<f64>,
    pub normalization: Normalization,
}

impl TrainingSet {
    /// Fits min-max scaling to both inputs and targets.
    pub fn new(inputs: DMatrix<f64>, targets: DMatrix<f64>) -> Result<Self> {
        let normalization = Normalization {
            input: FeatureScaling::min_max(&inputs),
            target: FeatureScaling::min_max(&targets),
        };
        Self::with_normalization(inputs, targets, normalization)
    }

    /// Min-max scaled inputs, targets left as they are (class labels).
    pub fn with_raw_targets(inputs: DMatrix<f64>, targets: DMatrix<f64>) -> Result<Self> {
        let normalization = Normalization {
            input: FeatureScaling::min_max(&inputs),
            target: FeatureScaling::identity(targets.ncols()),
        };
        Self::with_normalization(inputs, targets, normalization)
    }

    pub fn with_normalization(
        inputs: DMatrix<f64>,
        targets: DMatrix<f64>,
        normalization: Normalization,
    ) -> Result<Self> {
        if inputs.nrows() != targets.nrows() {
            return Err(Error::DimensionMismatch {
                expected: inputs.nrows(),
                got: targets.nrows(),
            });
        }
        if inputs.ncols() != normalization.input.width() || targets.ncols() != normalization.target.width() {
            return Err(Error::DimensionMismatch {
                expected: inputs.ncols() + targets.ncols(),
                got: normalization.input.width() + normalization.target.width(),
            });
        }
        if inputs.iter().chain(targets.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        normalization.input.validate()?;
        normalization.target.validate()?;
        Ok(TrainingSet {
            inputs,
            targets,
            normalization,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.nrows() == 0
    }

    fn scaled(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        (
            self.normalization.input.normalize(&self.inputs),
            self.normalization.target.normalize(&self.targets),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// out x in
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub final_train_loss: f64,
    pub final_val_loss: Option<f64>,
}

/// Dense feed-forward network.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    pub layers: Vec<Layer>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    /// Scaling of raw inputs and targets, set once trained on a [`TrainingSet`].
    pub normalization: Option<Normalization>,
    pub train_meta: Option<TrainMeta>,
}

impl MlpModel {
    /// Glorot-uniform weights drawn from `seed`.
    pub fn new(layer_sizes: &[usize], hidden: Activation, output: Activation, seed: u64) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::InvalidArgument(format!("bad layer sizes {layer_sizes:?}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let last = layer_sizes.len() - 2;
        let layers = layer_sizes
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let limit = (6.0 / (w[0] + w[1]) as f64).sqrt();
                // small positive hidden bias keeps ReLU units alive on [0, 1] inputs
                let b = if k < last && hidden == Activation::Relu {
                    HIDDEN_BIAS
                } else {
                    0.0
                };
                Layer {
                    weights: DMatrix::from_fn(w[1], w[0], |_, _| rng.random_range(-limit..limit)),
                    bias: DVector::from_element(w[1], b),
                }
            })
            .collect();
        Ok(MlpModel {
            layer_sizes: layer_sizes.to_vec(),
            layers,
            hidden_activation: hidden,
            output_activation: output,
            normalization: None,
            train_meta: None,
        })
    }

    /// All-zero weights and biases.
    pub fn zeros(layer_sizes: &[usize], hidden: Activation, output: Activation) -> Result<Self> {
        let mut m = Self::new(layer_sizes, hidden, output, 0)?;
        for l in &mut m.layers {
            l.weights.fill(0.0);
            l.bias.fill(0.0);
        }
        Ok(m)
    }

    pub fn input_width(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_width(&self) -> usize {
        *self.layer_sizes.last().expect("at least two layers")
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Checks shapes against `layer_sizes` and that every weight is finite.
    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() != self.layers.len() + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.layer_sizes.len() - 1,
                got: self.layers.len(),
            });
        }
        for (w, l) in self.layer_sizes.windows(2).zip(&self.layers) {
            if l.weights.shape() != (w[1], w[0]) || l.bias.len() != w[1] {
                return Err(Error::DimensionMismatch {
                    expected: w[0] * w[1],
                    got: l.weights.len(),
                });
            }
        }
        if self
            .layers
            .iter()
            .any(|l| l.weights.iter().chain(l.bias.iter()).any(|v| !v.is_finite()))
        {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    fn activation(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            self.output_activation
        } else {
            self.hidden_activation
        }
    }

    /// Activations of every layer for a batch (samples x features); entry 0
    /// is the input itself.
    fn forward_trace(&self, input: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(input.clone());
        for (k, l) in self.layers.iter().enumerate() {
            let prev = acts.last().expect("input pushed");
            let mut z = prev * l.weights.transpose();
            for mut row in z.row_iter_mut() {
                row += l.bias.transpose();
            }
            self.activation(k).apply(&mut z);
            acts.push(z);
        }
        acts
    }

    /// Batch forward pass on already-normalized rows.
    pub fn forward_batch(&self, input: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if input.ncols() != self.input_width() {
            return Err(Error::DimensionMismatch {
                expected: self.input_width(),
                got: input.ncols(),
            });
        }
        Ok(self.forward_trace(input).pop().expect("output layer"))
    }

    fn loss(&self) -> Loss {
        if self.output_activation == Activation::Sigmoid {
            Loss::CrossEntropy
        } else {
            Loss::MeanSquared
        }
    }

    /// Loss on normalized rows and its gradient for every layer.
    pub fn gradients(&self, input: &DMatrix<f64>, target: &DMatrix<f64>) -> (f64, Vec<Layer>) {
        let acts = self.forward_trace(input);
        let out = acts.last().expect("output layer");
        let loss = self.loss();
        let count = (out.nrows() * out.ncols()) as f64;
        let value = loss.value(out, target);

        // gradient of the loss w.r.t. the output pre-activation
        let mut delta = match loss {
            // sigmoid and cross-entropy combine to (p - y)
            Loss::CrossEntropy => (out - target) / count,
            Loss::MeanSquared => {
                let act = self.output_activation;
                DMatrix::from_fn(out.nrows(), out.ncols(), |i, j| {
                    2.0 * (out[(i, j)] - target[(i, j)]) / count * act.derivative_from_output(out[(i, j)])
                })
            }
        };
        let mut grads: Vec<Layer> = Vec::with_capacity(self.layers.len());
        for k in (0..self.layers.len()).rev() {
            let weights = delta.transpose() * &acts[k];
            let bias = DVector::from_iterator(delta.ncols(), delta.column_iter().map(|c| c.sum()));
            grads.push(Layer { weights, bias });
            if k > 0 {
                let mut back = &delta * &self.layers[k].weights;
                let act = self.activation(k - 1);
                back.zip_apply(&acts[k], |d, a| *d *= act.derivative_from_output(a));
                delta = back;
            }
        }
        grads.reverse();
        (value, grads)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Loss {
    MeanSquared,
    CrossEntropy,
}

impl Loss {
    fn value(self, out: &DMatrix<f64>, target: &DMatrix<f64>) -> f64 {
        let count = (out.nrows() * out.ncols()).max(1) as f64;
        match self {
            Loss::MeanSquared => (out - target).norm_squared() / count,
            Loss::CrossEntropy => {
                let eps = 1e-12;
                out.iter()
                    .zip(target.iter())
                    .map(|(&p, &y)| -(y * p.max(eps).ln() + (1.0 - y) * (1.0 - p).max(eps).ln()))
                    .sum::<f64>()
                    / count
            }
        }
    }
}

/// Single-sample forward pass on raw (unnormalized) values.
pub fn mlp_forward(model: &MlpModel, input: &[f64]) -> Result<Vec<f64>> {
    if input.len() != model.input_width() {
        return Err(Error::DimensionMismatch {
            expected: model.input_width(),
            got: input.len(),
        });
    }
    let row = DMatrix::from_row_slice(1, input.len(), input);
    let out = match &model.normalization {
        Some(n) => n.target.denormalize(&model.forward_batch(&n.input.normalize(&row))?),
        None => model.forward_batch(&row)?,
    };
    Ok(out.iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 300,
            learning_rate: 3e-3,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "training hyperparameters must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

const HIDDEN_BIAS: f64 = 0.1;
const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Mini-batch Adam on MSE (identity/ReLU output) or binary cross-entropy
/// (sigmoid output). Shuffling is seeded, so the run is bit-reproducible.
///
/// The returned model carries the set's normalization and the training
/// metadata; `validation` only feeds `final_val_loss`.
pub fn mlp_train(
    model: &MlpModel,
    data: &TrainingSet,
    cfg: &TrainConfig,
    validation: Option<&TrainingSet>,
) -> Result<MlpModel> {
    cfg.validate()?;
    model.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    if data.inputs.ncols() != model.input_width() || data.targets.ncols() != model.output_width() {
        return Err(Error::DimensionMismatch {
            expected: model.input_width() + model.output_width(),
            got: data.inputs.ncols() + data.targets.ncols(),
        });
    }
    let (x, y) = data.scaled();
    let mut model = model.clone();
    let zeros = |m: &MlpModel| -> Vec<Layer> {
        m.layers
            .iter()
            .map(|l| Layer {
                weights: DMatrix::zeros(l.weights.nrows(), l.weights.ncols()),
                bias: DVector::zeros(l.bias.len()),
            })
            .collect()
    };
    let mut m1 = zeros(&model);
    let mut m2 = zeros(&model);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut t = 0i32;
    let mut epoch_loss = f64::NAN;

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let bx = x.select_rows(batch);
            let by = y.select_rows(batch);
            let (loss, grads) = model.gradients(&bx, &by);
            if !loss.is_finite() {
                return Err(Error::Diverged(epoch));
            }
            total += loss * batch.len() as f64;
            t += 1;
            let c1 = 1.0 - BETA1.powi(t);
            let c2 = 1.0 - BETA2.powi(t);
            for (((l, g), a), b) in model.layers.iter_mut().zip(&grads).zip(&mut m1).zip(&mut m2) {
                adam_step(
                    l.weights.as_mut_slice(),
                    g.weights.as_slice(),
                    a.weights.as_mut_slice(),
                    b.weights.as_mut_slice(),
                    cfg.learning_rate,
                    c1,
                    c2,
                );
                adam_step(
                    l.bias.as_mut_slice(),
                    g.bias.as_slice(),
                    a.bias.as_mut_slice(),
                    b.bias.as_mut_slice(),
                    cfg.learning_rate,
                    c1,
                    c2,
                );
            }
        }
        epoch_loss = total / data.len() as f64;
        if !epoch_loss.is_finite() {
            return Err(Error::Diverged(epoch));
        }
    }

    let final_val_loss = match validation {
        Some(v) if !v.is_empty() => {
            let vx = data.normalization.input.normalize(&v.inputs);
            let vy = data.normalization.target.normalize(&v.targets);
            Some(model.loss().value(&model.forward_batch(&vx)?, &vy))
        }
        _ => None,
    };
    model.normalization = Some(data.normalization.clone());
    model.train_meta = Some(TrainMeta {
        epochs: cfg.epochs,
        learning_rate: cfg.learning_rate,
        batch_size: cfg.batch_size,
        seed: cfg.seed,
        final_train_loss: epoch_loss,
        final_val_loss,
    });
    Ok(model)
}

fn adam_step(p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64], lr: f64, c1: f64, c2: f64) {
    for i in 0..p.len() {
        m[i] = BETA1 * m[i] + (1.0 - BETA1) * g[i];
        v[i] = BETA2 * v[i] + (1.0 - BETA2) * g[i] * g[i];
        p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + ADAM_EPS);
    }
}

/// Largest relative disagreement between backprop and central finite
/// differences over every parameter, on normalized rows.
pub fn gradient_check(model: &MlpModel, input: &DMatrix<f64>, target: &DMatrix<f64>, eps: f64) -> f64 {
    let (_, grads) = model.gradients(input, target);
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    for (k, (layer, grad)) in model.layers.iter().zip(&grads).enumerate() {
        let nw = layer.weights.len();
        for idx in 0..nw + layer.bias.len() {
            let (orig, analytic) = if idx < nw {
                (layer.weights.as_slice()[idx], grad.weights.as_slice()[idx])
            } else {
                (layer.bias[idx - nw], grad.bias[idx - nw])
            };
            let mut loss_at = |v: f64| {
                if idx < nw {
                    probe.layers[k].weights.as_mut_slice()[idx] = v;
                } else {
                    probe.layers[k].bias[idx - nw] = v;
                }
                probe.gradients(input, target).0
            };
            let numeric = (loss_at(orig + eps) - loss_at(orig - eps)) / (2.0 * eps);
            loss_at(orig);
            let denom = analytic.abs().max(numeric.abs()).max(1e-7);
            worst = worst.max((analytic - numeric).abs() / denom);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_rows(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn zero_model_outputs_bias() {
        let mut m = MlpModel::zeros(&[3, 4, 2], Activation::Relu, Activation::Identity).unwrap();
        m.layers[1].bias = DVector::from_vec(vec![0.5, -2.0]);
        assert_eq!(mlp_forward(&m, &[1.0, 2.0, 3.0]).unwrap(), vec![0.5, -2.0]);
        m.output_activation = Activation::Sigmoid;
        let out = mlp_forward(&m, &[1.0, 2.0, 3.0]).unwrap();
        assert!((out[0] - 1.0 / (1.0 + (-0.5f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn identity_layer_passes_input() {
        let mut m = MlpModel::zeros(&[3, 3], Activation::Relu, Activation::Identity).unwrap();
        m.layers[0].weights = DMatrix::identity(3, 3);
        assert_eq!(mlp_forward(&m, &[-1.0, 0.5, 2.0]).unwrap(), vec![-1.0, 0.5, 2.0]);
        assert!(mlp_forward(&m, &[1.0]).is_err());
    }

    #[test]
    fn hand_built_xor() {
        // h1 = relu(x1 + x2), h2 = relu(x1 + x2 - 1), y = h1 - 2 h2
        let mut m = MlpModel::zeros(&[2, 2, 1], Activation::Relu, Activation::Identity).unwrap();
        m.layers[0].weights = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        m.layers[0].bias = DVector::from_vec(vec![0.0, -1.0]);
        m.layers[1].weights = DMatrix::from_row_slice(1, 2, &[1.0, -2.0]);
        for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
            let y = mlp_forward(&m, &[a, b]).unwrap()[0];
            let want = if a != b { 1.0 } else { 0.0 };
            assert!((y - want).abs() < 0.1);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        for seed in 0..5 {
            let m = MlpModel::new(&[3, 5, 2], Activation::Relu, Activation::Identity, seed).unwrap();
            let err = gradient_check(
                &m,
                &random_rows(10, 3, seed + 100),
                &random_rows(10, 2, seed + 200),
                1e-5,
            );
            assert!(err < 1e-4, "seed {seed}: {err}");
        }
        let mut m = MlpModel::new(&[3, 5, 2], Activation::Relu, Activation::Sigmoid, 9).unwrap();
        m.layers[1].bias = DVector::from_vec(vec![0.2, -0.3]);
        let y = random_rows(10, 2, 3).map(|v| if v > 0.0 { 1.0 } else { 0.0 });
        assert!(gradient_check(&m, &random_rows(10, 3, 4), &y, 1e-5) < 1e-4);
    }

    #[test]
    fn learns_identity() {
        let x = DMatrix::from_fn(64, 1, |i, _| i as f64 / 63.0 * 4.0 - 2.0);
        let data = TrainingSet::new(x.clone(), x.clone()).unwrap();
        let m = MlpModel::new(&[1, 4, 1], Activation::Relu, Activation::Identity, 1).unwrap();
        let cfg = TrainConfig {
            epochs: 500,
            learning_rate: 1e-2,
            batch_size: 16,
            seed: 1,
        };
        let trained = mlp_train(&m, &data, &cfg, Some(&data)).unwrap();
        let meta = trained.train_meta.as_ref().unwrap();
        assert!(meta.final_val_loss.unwrap() < 1e-3, "{meta:?}");
    }

    #[test]
    fn learns_xor() {
        let x = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0]);
        let y = DMatrix::from_column_slice(4, 1, &[0.0, 1.0, 1.0, 0.0]);
        let data = TrainingSet::with_raw_targets(x.clone(), y.clone()).unwrap();
        let m = MlpModel::new(&[2, 8, 1], Activation::Relu, Activation::Sigmoid, 3).unwrap();
        let cfg = TrainConfig {
            epochs: 2000,
            learning_rate: 1e-2,
            batch_size: 4,
            seed: 3,
        };
        let trained = mlp_train(&m, &data, &cfg, None).unwrap();
        for i in 0..4 {
            let p = mlp_forward(&trained, &[x[(i, 0)], x[(i, 1)]]).unwrap()[0];
            assert_eq!(p > 0.5, y[(i, 0)] > 0.5, "sample {i}: {p}");
        }
    }

    #[test]
    fn training_is_deterministic() {
        let x = random_rows(40, 3, 5);
        let y = DMatrix::from_fn(40, 2, |i, j| x[(i, j)] * 2.0 - x[(i, 2)]);
        let data = TrainingSet::new(x, y).unwrap();
        let m = MlpModel::new(&[3, 6, 2], Activation::Relu, Activation::Identity, 11).unwrap();
        let cfg = TrainConfig {
            epochs: 20,
            ..TrainConfig::default()
        };
        let a = mlp_train(&m, &data, &cfg, None).unwrap();
        let b = mlp_train(&m, &data, &cfg, None).unwrap();
        assert_eq!(a, b);
        let c = mlp_train(&m, &data, &TrainConfig { seed: 1, ..cfg }, None).unwrap();
        assert_ne!(a.layers, c.layers);
    }

    #[test]
    fn normalization_round_trip() {
        let x = random_rows(9, 4, 8) * 37.0;
        let s = FeatureScaling::min_max(&x);
        let back = s.denormalize(&s.normalize(&x));
        assert!((back - &x).abs().max() < 1e-12);
        let flat = DMatrix::from_element(3, 1, 2.5);
        assert_eq!(FeatureScaling::min_max(&flat).scale, vec![1.0]);
    }

    #[test]
    fn rejects_bad_training_input() {
        let m = MlpModel::new(&[2, 2, 1], Activation::Relu, Activation::Identity, 0).unwrap();
        let data = TrainingSet::new(DMatrix::zeros(3, 2), DMatrix::zeros(3, 1)).unwrap();
        let bad = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        assert!(mlp_train(&m, &data, &bad, None).is_err());
        let empty = TrainingSet::new(DMatrix::zeros(0, 2), DMatrix::zeros(0, 1)).unwrap();
        assert!(mlp_train(&m, &empty, &TrainConfig::default(), None).is_err());
        let mut nan = DMatrix::zeros(2, 2);
        nan[(0, 0)] = f64::NAN;
        assert!(matches!(
            TrainingSet::new(nan, DMatrix::zeros(2, 1)),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn diverging_training_stops() {
        let x = random_rows(8, 2, 1) * 1e3;
        let data = TrainingSet::with_normalization(
            x.clone(),
            x * 1e200,
            Normalization {
                input: FeatureScaling::identity(2),
                target: FeatureScaling::identity(2),
            },
        )
        .unwrap();
        let m = MlpModel::new(&[2, 3, 2], Activation::Relu, Activation::Identity, 0).unwrap();
        let cfg = TrainConfig {
            epochs: 50,
            learning_rate: 1e3,
            batch_size: 8,
            seed: 0,
        };
        assert!(matches!(mlp_train(&m, &data, &cfg, None), Err(Error::Diverged(_))));
    }
}

//! Dense feed-forward networks and their two roles: the encoder classifies
//! nodes as sampling-important, the decoder rebuilds every junction's
//! concentration from a plan's sensor readings.

mod io;
mod mlp;
mod roles;

pub use io::MODEL_VERSION;
pub use mlp::{
    gradient_check, mlp_forward, mlp_train, Activation, FeatureScaling, Layer, MlpModel, Normalization, TrainConfig,
    TrainMeta, TrainingSet,
};
pub use roles::{
    decoder_samples, encoder_scores, predict_dynamics, predict_important, train_decoder, train_decoder_on,
    train_encoder, DecoderConfig, DecoderReconstructor, EncoderConfig, NeuralScorer, ZeroRows,
};

//! Accuracy metrics, evaluation reports, plot data and the end-to-end
//! experiment pipeline.

mod config;
mod metrics;
mod pipeline;

pub use config::{DecoderSection, PipelineConfig, PlanSection, VariantSection};
pub use metrics::{
    classify_polluted, evaluate_plan, export_plot_data, mean_polluted_nrmse, nrmse, tier_threshold, EvalReport,
    GftReconstructor, Reconstructor, TierScore, ZeroReconstructor, POLLUTION_FRACTION, TIERS,
};
pub use pipeline::{
    run_pipeline, strategy_label, summarize, ExperimentBundle, Manifest, ManifestEntry, ManifestWriter, SummaryRow,
};

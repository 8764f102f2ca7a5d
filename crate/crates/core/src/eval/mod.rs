//! Reconstruction metrics, ablation runners and CSV reports.

mod ablation;
pub mod metrics;
mod predictor;
mod readout;
mod report;

pub use ablation::{
    channel_ablation, channel_ablation_csv, cross_corpus_matrix, cross_matrix_csv, geometric_scales, held_out,
    mask_ablation, mask_ablation_csv, ChannelRow, CrossMatrix, MaskAblation, RunConfig,
};
pub use predictor::{Constant, GroundTruth, ModelPredictor, Predictor};
pub use readout::{fit_readout, readout_error, LinearReadout};
pub use report::{
    parse_report_csv, reconstruction_accuracy, report_csv, save_report, MaskMode, ReconReport, ReportRow,
    REPORT_HEADER,
};

//! The drift-aware multi-memory model and its dual-memory baseline.

mod baseline;
mod cleaning;
mod compress;
mod config;
mod log;
mod model;
mod noise;

pub use baseline::{interleaved_balanced_accuracy, SamKnnBaseline};
pub use cleaning::{
    clean_against, consistent_set, distance_threshold, exchange, inconsistent_set, noise_removal, ExchangeReport,
};
pub use compress::{compress, kmeans_pp, within_cluster_distance, CompressionReport, KMEANS_MAX_ITER};
pub use config::{Dam3Config, SamKnnConfig};
pub use log::{StepDiagnostics, TransferLog, TransferTotals};
pub use noise::NoiseFilter;
pub use model::{Dam3Model, Prediction, Submodel, SubmodelTrackers, SubmodelVotes};

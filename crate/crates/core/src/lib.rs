//! Memory-based online classification for binary, imbalanced, drifting streams.
//!
//! The central model is [`Dam3Model`], a kNN ensemble over four memories
//! (short-term, long-term, working, and the combined STM ∪ LTM view) that
//! relocates inconsistent long-term knowledge into a working memory instead
//! of deleting it, oversamples the minority class when knowledge moves into
//! long-term storage, and triggers those moves with a balanced-accuracy
//! Kolmogorov–Smirnov drift detector. [`SamKnnBaseline`] is the dual-memory
//! reference model sharing the same machinery.

pub mod buffer;
pub mod classifiers;
pub mod dam3;
pub mod dataset;
pub mod drift;
pub mod error;
pub mod eval;
pub mod generators;
pub mod neighbors;
pub mod sampling;
pub mod types;

pub use buffer::{imbalance_ratio, MemoryBuffer};
pub use dam3::{Dam3Config, Dam3Model, SamKnnBaseline, SamKnnConfig, Submodel};
pub use error::{DriftMemError, Result};
pub use eval::{prequential_run, PrequentialResult, StreamClassifier};
pub use neighbors::{euclidean_distance, knn_search, Neighbor, NeighborList};
pub use types::{InstanceId, Label, LabeledInstance};

//! Base learners: distance-weighted kNN over a memory and an incrementally
//! maintained full-covariance Gaussian Bayes model.

mod bayes;
mod knn;

pub use bayes::{FullBayesModel, GaussianClassStats, MIN_RIDGE, RIDGE_SCALE};
pub use knn::{knn_predict, knn_predict_parts, weighted_vote, DEFAULT_EPSILON_DIST};

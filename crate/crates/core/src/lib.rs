//! Binary classifiers trained to equalize risk-score distributions across
//! a binary protected attribute, and audits of their parity as the decision
//! threshold moves.
//!
//! The crate is organized bottom-up:
//!
//! * [`dataset`]: schema-driven CSV ingestion, standardization, splits and
//!   protected-group partitions;
//! * [`model`]: linear and RBF-kernel scoring functions, the sigmoid risk
//!   score and the model file format;
//! * [`fairness`]: soft-histogram and Gaussian distribution distances used
//!   as regularizers, with exact gradients;
//! * [`training`]: logistic regression, linear SVM and kernel SVM losses and
//!   the momentum descent loop;
//! * [`metrics`]: accuracy, CV parity scores, threshold sweeps and the
//!   density-gap bounds on parity;
//! * [`reference`]: brute-force oracles used by the test suites.

pub mod dataset;
pub mod error;
pub mod fairness;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod reference;
pub mod training;

pub use dataset::{Dataset, GroupPartition, PartitionMode};
pub use error::{Error, Result};
pub use fairness::{HistogramParams, Method};
pub use matrix::Matrix;
pub use model::{KernelModel, LinearModel, Model, RiskScore};
pub use training::{FairnessMode, ModelKind, TrainConfig, TrainReport};

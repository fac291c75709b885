//! Representation-diversity measurement, feature-level ensembling and
//! out-of-distribution scoring for small neural encoders.

pub mod ensemble;
pub mod error;
pub mod esn;
pub mod features;
pub mod numerics;
pub mod rng;
pub mod scalar;
pub mod scoring;
pub mod trainer;
pub mod transport;

pub use error::{Error, FormatError, Result};
pub use features::{FeatureSet, LabelSet, LogitSet};
pub use scalar::Scalar;

pub type MatrixF64 = numerics::Matrix<f64>;
pub type MatrixF32 = numerics::Matrix<f32>;

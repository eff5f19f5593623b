//! Real-valued sentence specificity with unsupervised domain adaptation.
//!
//! A BiLSTM-plus-features predictor is trained on binary-labeled source
//! sentences and unlabeled target sentences. A student network learns by
//! gradient descent; a teacher tracks it by exponential moving average and
//! is used for prediction. A consistency loss ties the two under independent
//! input noise, and a distribution loss pulls the batch of predictions
//! toward a reference mean and standard deviation.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the
//! `F32*`/`F64*` aliases name the concrete types.

pub mod augment;
pub mod checkpoint;
pub mod config;
pub mod corpusfilter;
pub mod corpusio;
pub mod error;
pub mod evalmetrics;
pub mod features;
mod scalar;
pub mod specnet;
pub mod trainer;

pub use checkpoint::Checkpoint;
pub use error::{Error, Result};
pub use scalar::Scalar;

pub type F32Params = specnet::ModelParameters<f32>;
pub type F64Params = specnet::ModelParameters<f64>;
pub type F32Embeddings = corpusio::EmbeddingTable<f32>;
pub type F64Embeddings = corpusio::EmbeddingTable<f64>;
pub type F32Checkpoint = Checkpoint<f32>;
pub type F64Checkpoint = Checkpoint<f64>;
pub type F32Trainer = trainer::Trainer<f32>;
pub type F64Trainer = trainer::Trainer<f64>;
pub type F32Input = specnet::NetInput<f32>;
pub type F64Input = specnet::NetInput<f64>;

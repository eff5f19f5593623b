//! The base predictor: word vectors → BiLSTM → final states ⊕ shallow
//! features → batch-normalized ReLU MLP → sigmoid.

mod lstm;
mod mlp;
mod network;
mod params;

pub use network::{
    backward, forward, forward_batch, predict_batch, update_running_stats, ForwardOptions,
    ForwardPass, Mode, NetInput,
};
pub use params::{ModelParameters, NetworkConfig};

/// Deep copy of a parameter set.
pub fn clone_params<T: crate::Scalar>(src: &ModelParameters<T>) -> ModelParameters<T> {
    src.clone_params()
}

/// Fresh parameters for `config`, reproducible from `seed`.
pub fn init_params<T: crate::Scalar>(
    config: &NetworkConfig,
    seed: u64,
) -> crate::Result<ModelParameters<T>> {
    ModelParameters::init(config, seed)
}

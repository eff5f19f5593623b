//! Fully connected layer → batch norm → ReLU → dropout.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::params::MlpBlocks;
use crate::scalar::Scalar;

pub(crate) struct LayerCache<T> {
    input: Array2<T>,
    /// Normalized pre-activation (the raw pre-activation without batch norm).
    xhat: Array2<T>,
    inv_std: Array1<T>,
    /// Post-ReLU mask folded with the dropout scale: `d_out ⊙ gate` is the
    /// gradient reaching the batch-norm output.
    gate: Array2<T>,
}

/// Batch mean and biased variance observed by one layer.
pub(crate) struct BatchMoments<T> {
    pub mean: Array1<T>,
    pub var: Array1<T>,
}

pub(crate) struct LayerOutput<T> {
    pub output: Array2<T>,
    pub cache: LayerCache<T>,
    pub moments: Option<BatchMoments<T>>,
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn forward<T: Scalar>(
    blocks: &MlpBlocks,
    weights: &[T],
    running: &[T],
    input: Array2<T>,
    batch_norm: bool,
    use_batch_stats: bool,
    epsilon: T,
    dropout_mask: Option<Array2<T>>,
) -> LayerOutput<T> {
    let w = blocks.weight.mat(weights);
    let mut pre = input.dot(&w.t());
    pre += &blocks.bias.vec(weights);
    let width = pre.ncols();

    let (xhat, inv_std, moments, y) = if batch_norm {
        let (mean, var, moments) = if use_batch_stats {
            let n = T::from_usize(pre.nrows()).expect("batch size");
            let mean = pre.sum_axis(Axis(0)) / n;
            let centred = &pre - &mean;
            let var = (&centred * &centred).sum_axis(Axis(0)) / n;
            let moments = BatchMoments {
                mean: mean.clone(),
                var: var.clone(),
            };
            (mean, var, Some(moments))
        } else {
            (
                blocks.running_mean.vec(running).to_owned(),
                blocks.running_var.vec(running).to_owned(),
                None,
            )
        };
        let inv_std = var.mapv(|v| T::one() / (v + epsilon).sqrt());
        let xhat = (&pre - &mean) * &inv_std;
        #[allow(clippy::op_ref)]
        let y = &xhat * &blocks.scale.vec(weights) + &blocks.shift.vec(weights);
        (xhat, inv_std, moments, y)
    } else {
        let y = pre.clone();
        (pre, Array1::ones(width), None, y)
    };

    let mut gate = y.mapv(|v| if v > T::zero() { T::one() } else { T::zero() });
    if let Some(mask) = dropout_mask {
        gate *= &mask;
    }
    let output = &y * &gate;
    LayerOutput {
        output,
        cache: LayerCache {
            input,
            xhat,
            inv_std,
            gate,
        },
        moments,
    }
}

/// Returns the gradient with respect to the layer input.
pub(crate) fn backward<T: Scalar>(
    blocks: &MlpBlocks,
    weights: &[T],
    cache: &LayerCache<T>,
    d_out: ArrayView2<T>,
    batch_norm: bool,
    used_batch_stats: bool,
    grad: &mut [T],
) -> Array2<T> {
    let dy = &d_out * &cache.gate;
    let d_pre = if batch_norm {
        {
            let mut g_scale = blocks.scale.vec_mut(grad);
            g_scale += &(&dy * &cache.xhat).sum_axis(Axis(0));
        }
        {
            let mut g_shift = blocks.shift.vec_mut(grad);
            g_shift += &dy.sum_axis(Axis(0));
        }
        let d_xhat = &dy * &blocks.scale.vec(weights);
        if used_batch_stats {
            let n = T::from_usize(dy.nrows()).expect("batch size");
            let sum_d = d_xhat.sum_axis(Axis(0));
            let sum_dx = (&d_xhat * &cache.xhat).sum_axis(Axis(0));
            let centred = &d_xhat * n - &sum_d - &(&cache.xhat * &sum_dx);
            centred * &(&cache.inv_std / n)
        } else {
            d_xhat * &cache.inv_std
        }
    } else {
        dy
    };
    let one = T::one();
    {
        let mut gw = blocks.weight.mat_mut(grad);
        general_mat_mul(one, &d_pre.t(), &cache.input, one, &mut gw);
    }
    {
        let mut gb = blocks.bias.vec_mut(grad);
        gb += &d_pre.sum_axis(Axis(0));
    }
    d_pre.dot(&blocks.weight.mat(weights))
}

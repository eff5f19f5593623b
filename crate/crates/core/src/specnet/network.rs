use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use super::lstm::{self, LstmCache};
use super::mlp::{self, BatchMoments, LayerCache};
use super::params::{Block, LstmBlocks, ModelParameters};
use crate::error::{Error, Result};
use crate::scalar::{sigmoid, Scalar};

/// One embedded sentence with its standardized shallow features.
#[derive(Clone, Debug, PartialEq)]
pub struct NetInput<T> {
    /// `len × embedding_dim` word vectors.
    pub tokens: Array2<T>,
    pub features: Array1<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Fine-grained control over the stochastic and batch-dependent layers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ForwardOptions {
    pub dropout: bool,
    /// Normalize with batch statistics instead of the running statistics.
    pub batch_stats: bool,
}

impl ForwardOptions {
    pub fn train() -> Self {
        ForwardOptions {
            dropout: true,
            batch_stats: true,
        }
    }

    pub fn eval() -> Self {
        ForwardOptions {
            dropout: false,
            batch_stats: false,
        }
    }

    /// Teacher pass during training: batch statistics, no dropout. Student
    /// and teacher differ only by their input noise.
    pub fn teacher() -> Self {
        ForwardOptions {
            dropout: false,
            batch_stats: true,
        }
    }

    /// Deterministic and batch-independent; used for gradient checking.
    pub fn frozen() -> Self {
        Self::eval()
    }
}

impl From<Mode> for ForwardOptions {
    fn from(mode: Mode) -> Self {
        match mode {
            Mode::Train => Self::train(),
            Mode::Eval => Self::eval(),
        }
    }
}

struct DirectionCache<T> {
    lstm: LstmCache<T>,
    /// Word vectors before projection, when a projection is configured.
    raw: Option<Array2<T>>,
}

/// Intermediate values of one batched forward pass.
pub struct ForwardPass<T> {
    pub logits: Vec<T>,
    pub predictions: Vec<T>,
    opts: ForwardOptions,
    forward: DirectionCache<T>,
    backward: DirectionCache<T>,
    repr_mask: Option<Array2<T>>,
    layers: Vec<LayerCache<T>>,
    last_hidden: Array2<T>,
    moments: Vec<BatchMoments<T>>,
}

fn dropout_mask<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    p: f64,
) -> Array2<T> {
    let keep = T::lit(1.0 / (1.0 - p));
    Array2::from_shape_simple_fn((rows, cols), || {
        if rng.random_bool(p) {
            T::zero()
        } else {
            keep
        }
    })
}

/// Builds the padded time-major input for one direction.
fn time_major<T: Scalar>(
    inputs: &[NetInput<T>],
    steps: usize,
    reverse: bool,
) -> (Array2<T>, Vec<bool>) {
    let batch = inputs.len();
    let dim = inputs[0].tokens.ncols();
    let mut x = Array2::zeros((steps * batch, dim));
    let mut active = vec![false; steps * batch];
    for (i, inp) in inputs.iter().enumerate() {
        let len = inp.tokens.nrows();
        for t in 0..len {
            let src = if reverse { len - 1 - t } else { t };
            x.row_mut(t * batch + i).assign(&inp.tokens.row(src));
            active[t * batch + i] = true;
        }
    }
    (x, active)
}

fn project<T: Scalar>(raw: &Array2<T>, proj: (Block, Block), weights: &[T]) -> Array2<T> {
    let mut out = raw.dot(&proj.0.mat(weights).t());
    out += &proj.1.vec(weights);
    out
}

fn run_direction<T: Scalar>(
    params: &ModelParameters<T>,
    blocks: &LstmBlocks,
    proj: Option<(Block, Block)>,
    inputs: &[NetInput<T>],
    steps: usize,
    reverse: bool,
) -> (Array2<T>, DirectionCache<T>) {
    let (x, active) = time_major(inputs, steps, reverse);
    let (x, raw) = match proj {
        Some(p) => (project(&x, p, &params.weights), Some(x)),
        None => (x, None),
    };
    let (last, cache) = lstm::forward(blocks, &params.weights, x, active, inputs.len());
    (last, DirectionCache { lstm: cache, raw })
}

fn validate_inputs<T: Scalar>(params: &ModelParameters<T>, inputs: &[NetInput<T>]) -> Result<()> {
    if inputs.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let cfg = &params.config;
    for inp in inputs {
        if inp.tokens.nrows() == 0 {
            return Err(Error::EmptySentence);
        }
        if inp.tokens.ncols() != cfg.embedding_dim {
            return Err(Error::dims(cfg.embedding_dim, inp.tokens.ncols()));
        }
        if inp.features.len() != cfg.feature_dim {
            return Err(Error::dims(cfg.feature_dim, inp.features.len()));
        }
    }
    Ok(())
}

/// Runs the network on a batch of sentences.
///
/// Does not modify `params`; batch statistics seen in training mode are
/// returned in the pass and folded into the running statistics by
/// [`update_running_stats`].
pub fn forward_batch<T: Scalar, R: Rng + ?Sized>(
    params: &ModelParameters<T>,
    inputs: &[NetInput<T>],
    opts: ForwardOptions,
    rng: &mut R,
) -> Result<ForwardPass<T>> {
    validate_inputs(params, inputs)?;
    let cfg = &params.config;
    let layout = params.layout();
    let batch = inputs.len();
    let steps = inputs.iter().map(|i| i.tokens.nrows()).max().unwrap_or(1);
    let hidden = cfg.hidden_size;
    let p = cfg.dropout;
    let use_dropout = opts.dropout && p > 0.0;

    let (h_fwd, forward) = run_direction(
        params,
        &layout.forward,
        layout.projection,
        inputs,
        steps,
        false,
    );
    let (h_bwd, backward) = run_direction(
        params,
        &layout.backward,
        layout.projection,
        inputs,
        steps,
        true,
    );

    let mut mlp_in = Array2::<T>::zeros((batch, cfg.mlp_input_dim()));
    mlp_in.slice_mut(s![.., ..hidden]).assign(&h_fwd);
    mlp_in.slice_mut(s![.., hidden..2 * hidden]).assign(&h_bwd);
    let repr_mask = use_dropout.then(|| dropout_mask::<T, R>(rng, batch, 2 * hidden, p));
    if let Some(mask) = &repr_mask {
        let mut repr = mlp_in.slice_mut(s![.., ..2 * hidden]);
        repr *= mask;
    }
    for (i, inp) in inputs.iter().enumerate() {
        mlp_in.slice_mut(s![i, 2 * hidden..]).assign(&inp.features);
    }

    let eps = T::lit(cfg.bn_epsilon);
    let mut layers = Vec::with_capacity(layout.mlp.len());
    let mut moments = Vec::new();
    let mut act = mlp_in;
    let depth = layout.mlp.len();
    for (li, blocks) in layout.mlp.iter().enumerate() {
        // dropout sits between MLP layers, not in front of the output unit
        let mask = (use_dropout && li + 1 < depth)
            .then(|| dropout_mask::<T, R>(rng, batch, cfg.mlp_width, p));
        let out = mlp::forward(
            blocks,
            &params.weights,
            &params.running,
            act,
            cfg.batch_norm,
            opts.batch_stats,
            eps,
            mask,
        );
        act = out.output;
        layers.push(out.cache);
        moments.extend(out.moments);
    }

    let w_out = layout.out_weight.vec(&params.weights);
    let b_out = params.weights[layout.out_bias.offset];
    let logits: Vec<T> = act.dot(&w_out).iter().map(|z| *z + b_out).collect();
    let predictions = logits.iter().map(|z| sigmoid(*z)).collect();
    Ok(ForwardPass {
        logits,
        predictions,
        opts,
        forward,
        backward,
        repr_mask,
        layers,
        last_hidden: act,
        moments,
    })
}

/// Gradient of `Σ_i d_logits[i] · logit_i` with respect to every weight.
pub fn backward<T: Scalar>(
    params: &ModelParameters<T>,
    pass: &ForwardPass<T>,
    d_logits: &[T],
) -> Result<Vec<T>> {
    if d_logits.len() != pass.logits.len() {
        return Err(Error::dims(pass.logits.len(), d_logits.len()));
    }
    let cfg = &params.config;
    let layout = params.layout();
    let weights = &params.weights;
    let mut grad = vec![T::zero(); weights.len()];
    let batch = d_logits.len();
    let hidden = cfg.hidden_size;

    let d_z = Array1::from(d_logits.to_vec());
    {
        let mut gw = layout.out_weight.vec_mut(&mut grad);
        gw += &pass.last_hidden.t().dot(&d_z);
    }
    grad[layout.out_bias.offset] = d_z.sum();
    let w_out = layout.out_weight.vec(weights);
    let mut d_act = Array2::from_shape_fn((batch, cfg.mlp_width), |(i, k)| d_z[i] * w_out[k]);

    for (blocks, cache) in layout.mlp.iter().zip(&pass.layers).rev() {
        d_act = mlp::backward(
            blocks,
            weights,
            cache,
            d_act.view(),
            cfg.batch_norm,
            pass.opts.batch_stats,
            &mut grad,
        );
    }

    let mut d_repr = d_act.slice(s![.., ..2 * hidden]).to_owned();
    if let Some(mask) = &pass.repr_mask {
        d_repr *= mask;
    }
    let directions = [
        (&layout.forward, &pass.forward, 0),
        (&layout.backward, &pass.backward, hidden),
    ];
    for (blocks, cache, col) in directions {
        let d_last: ArrayView2<T> = d_repr.slice(s![.., col..col + hidden]);
        let d_x = lstm::backward(
            blocks,
            weights,
            &cache.lstm,
            d_last,
            &mut grad,
            layout.projection.is_some(),
        );
        if let (Some((pw, pb)), Some(d_x), Some(raw)) = (layout.projection, d_x, &cache.raw) {
            {
                let mut gw = pw.mat_mut(&mut grad);
                gw += &d_x.t().dot(raw);
            }
            let mut gb = pb.vec_mut(&mut grad);
            gb += &d_x.sum_axis(Axis(0));
        }
    }
    Ok(grad)
}

/// Folds the batch statistics of a training pass into the running statistics.
pub fn update_running_stats<T: Scalar>(params: &mut ModelParameters<T>, pass: &ForwardPass<T>) {
    if pass.moments.is_empty() {
        return;
    }
    let layout = params.layout();
    let m = T::lit(params.config.bn_momentum);
    let keep = T::one() - m;
    let n = pass.logits.len();
    let correction = if n > 1 {
        T::lit(n as f64 / (n - 1) as f64)
    } else {
        T::one()
    };
    for (blocks, moments) in layout.mlp.iter().zip(&pass.moments) {
        let mut rm = blocks.running_mean.vec_mut(&mut params.running);
        rm.zip_mut_with(&moments.mean, |r, b| *r = keep * *r + m * *b);
        let mut rv = blocks.running_var.vec_mut(&mut params.running);
        rv.zip_mut_with(&moments.var, |r, b| *r = keep * *r + m * *b * correction);
    }
}

/// Predicts one sentence. In eval mode the result depends only on the inputs.
pub fn forward<T: Scalar, R: Rng + ?Sized>(
    params: &ModelParameters<T>,
    input: &NetInput<T>,
    mode: Mode,
    rng: &mut R,
) -> Result<T> {
    let pass = forward_batch(params, std::slice::from_ref(input), mode.into(), rng)?;
    Ok(pass.predictions[0])
}

/// Eval-mode predictions, computed in chunks of `chunk` sentences.
pub fn predict_batch<T: Scalar>(
    params: &ModelParameters<T>,
    inputs: &[NetInput<T>],
    chunk: usize,
) -> Result<Vec<T>> {
    // eval mode draws nothing from the stream
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
    let mut out = Vec::with_capacity(inputs.len());
    for part in inputs.chunks(chunk.max(1)) {
        out.extend(forward_batch(params, part, ForwardOptions::eval(), &mut rng)?.predictions);
    }
    Ok(out)
}

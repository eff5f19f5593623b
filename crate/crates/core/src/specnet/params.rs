use std::ops::Range;

use ndarray::{ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FEATURE_DIM;
use crate::scalar::Scalar;

/// Shape and regularization settings of the base network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub embedding_dim: usize,
    /// Linear projection applied to every word vector; 0 keeps the raw vectors.
    pub projection_dim: usize,
    /// LSTM hidden size per direction.
    pub hidden_size: usize,
    pub feature_dim: usize,
    pub mlp_width: usize,
    pub mlp_depth: usize,
    pub dropout: f64,
    pub batch_norm: bool,
    pub bn_momentum: f64,
    pub bn_epsilon: f64,
}

impl NetworkConfig {
    pub fn new(embedding_dim: usize) -> Self {
        NetworkConfig {
            embedding_dim,
            projection_dim: 0,
            hidden_size: 100,
            feature_dim: FEATURE_DIM,
            mlp_width: 100,
            mlp_depth: 3,
            dropout: 0.5,
            batch_norm: true,
            bn_momentum: 0.1,
            bn_epsilon: 1e-5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("embedding_dim", self.embedding_dim),
            ("hidden_size", self.hidden_size),
            ("mlp_width", self.mlp_width),
            ("mlp_depth", self.mlp_depth),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!(
                "dropout must lie in [0,1), got {}",
                self.dropout
            )));
        }
        if !(0.0..=1.0).contains(&self.bn_momentum)
            || self.bn_epsilon.is_nan()
            || self.bn_epsilon <= 0.0
        {
            return Err(Error::Config("invalid batch-norm settings".into()));
        }
        Ok(())
    }

    pub fn lstm_input_dim(&self) -> usize {
        if self.projection_dim > 0 {
            self.projection_dim
        } else {
            self.embedding_dim
        }
    }

    pub fn representation_dim(&self) -> usize {
        2 * self.hidden_size
    }

    pub fn mlp_input_dim(&self) -> usize {
        self.representation_dim() + self.feature_dim
    }
}

/// A contiguous `rows × cols` block inside a flat buffer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Block {
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Block {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn range(&self) -> Range<usize> {
        self.offset..self.offset + self.len()
    }

    pub fn mat<'a, T>(&self, data: &'a [T]) -> ArrayView2<'a, T> {
        ArrayView2::from_shape((self.rows, self.cols), &data[self.range()]).expect("block shape")
    }

    pub fn mat_mut<'a, T>(&self, data: &'a mut [T]) -> ArrayViewMut2<'a, T> {
        ArrayViewMut2::from_shape((self.rows, self.cols), &mut data[self.range()])
            .expect("block shape")
    }

    pub fn vec<'a, T>(&self, data: &'a [T]) -> ArrayView1<'a, T> {
        ArrayView1::from(&data[self.range()])
    }

    pub fn vec_mut<'a, T>(&self, data: &'a mut [T]) -> ArrayViewMut1<'a, T> {
        ArrayViewMut1::from(&mut data[self.range()])
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct LstmBlocks {
    /// `4H × input` in gate order input, forget, cell, output.
    pub w_input: Block,
    pub w_hidden: Block,
    pub bias: Block,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct MlpBlocks {
    pub weight: Block,
    pub bias: Block,
    pub scale: Block,
    pub shift: Block,
    /// Offsets into the running-statistics buffer.
    pub running_mean: Block,
    pub running_var: Block,
}

#[derive(Clone, Debug)]
pub(crate) struct Layout {
    pub projection: Option<(Block, Block)>,
    pub forward: LstmBlocks,
    pub backward: LstmBlocks,
    pub mlp: Vec<MlpBlocks>,
    pub out_weight: Block,
    pub out_bias: Block,
    pub n_weights: usize,
    pub n_running: usize,
    names: Vec<(String, Block)>,
}

impl Layout {
    pub fn new(cfg: &NetworkConfig) -> Self {
        let mut names = Vec::new();
        let mut offset = 0;
        let mut take =
            |name: String, rows: usize, cols: usize, names: &mut Vec<(String, Block)>| {
                let b = Block { offset, rows, cols };
                offset += b.len();
                names.push((name, b));
                b
            };
        let projection = (cfg.projection_dim > 0).then(|| {
            (
                take(
                    "projection.weight".into(),
                    cfg.projection_dim,
                    cfg.embedding_dim,
                    &mut names,
                ),
                take("projection.bias".into(), 1, cfg.projection_dim, &mut names),
            )
        });
        let (h, inp) = (cfg.hidden_size, cfg.lstm_input_dim());
        let mut lstm = |dir: &str, names: &mut Vec<(String, Block)>| LstmBlocks {
            w_input: take(format!("lstm.{dir}.w_input"), 4 * h, inp, names),
            w_hidden: take(format!("lstm.{dir}.w_hidden"), 4 * h, h, names),
            bias: take(format!("lstm.{dir}.bias"), 1, 4 * h, names),
        };
        let forward = lstm("forward", &mut names);
        let backward = lstm("backward", &mut names);
        let mut mlp = Vec::with_capacity(cfg.mlp_depth);
        let mut in_dim = cfg.mlp_input_dim();
        let w = cfg.mlp_width;
        for l in 0..cfg.mlp_depth {
            let weight = take(format!("mlp.{l}.weight"), w, in_dim, &mut names);
            let bias = take(format!("mlp.{l}.bias"), 1, w, &mut names);
            let scale = take(format!("mlp.{l}.bn_scale"), 1, w, &mut names);
            let shift = take(format!("mlp.{l}.bn_shift"), 1, w, &mut names);
            let running_mean = Block {
                offset: 2 * l * w,
                rows: 1,
                cols: w,
            };
            let running_var = Block {
                offset: (2 * l + 1) * w,
                rows: 1,
                cols: w,
            };
            mlp.push(MlpBlocks {
                weight,
                bias,
                scale,
                shift,
                running_mean,
                running_var,
            });
            in_dim = w;
        }
        let out_weight = take("output.weight".into(), 1, w, &mut names);
        let out_bias = take("output.bias".into(), 1, 1, &mut names);
        Layout {
            projection,
            forward,
            backward,
            mlp,
            out_weight,
            out_bias,
            n_weights: offset,
            n_running: 2 * cfg.mlp_depth * w,
            names,
        }
    }
}

/// All weights of one network instance plus its batch-norm running statistics.
///
/// Weights and running statistics are stored in two flat buffers so that
/// optimizers, moving averages and checkpoints treat them uniformly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParameters<T> {
    pub config: NetworkConfig,
    pub weights: Vec<T>,
    pub running: Vec<T>,
}

fn glorot<T: Scalar, R: Rng>(rng: &mut R, fan_in: usize, fan_out: usize, out: &mut [T]) {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    for v in out {
        *v = T::lit(rng.random_range(-limit..limit));
    }
}

impl<T: Scalar> ModelParameters<T> {
    /// Glorot-uniform weights, zero biases (forget-gate bias 1), unit
    /// batch-norm scale, running mean 0 and variance 1. Reproducible from `seed`.
    pub fn init(config: &NetworkConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(config);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = vec![T::zero(); layout.n_weights];
        if let Some((w, _)) = layout.projection {
            glorot(&mut rng, w.cols, w.rows, &mut weights[w.range()]);
        }
        let h = config.hidden_size;
        for dir in [layout.forward, layout.backward] {
            glorot(
                &mut rng,
                dir.w_input.cols,
                h,
                &mut weights[dir.w_input.range()],
            );
            glorot(&mut rng, h, h, &mut weights[dir.w_hidden.range()]);
            let bias = &mut weights[dir.bias.range()];
            bias[h..2 * h].iter_mut().for_each(|b| *b = T::one());
        }
        for l in &layout.mlp {
            glorot(
                &mut rng,
                l.weight.cols,
                l.weight.rows,
                &mut weights[l.weight.range()],
            );
            weights[l.scale.range()]
                .iter_mut()
                .for_each(|s| *s = T::one());
        }
        glorot(
            &mut rng,
            config.mlp_width,
            1,
            &mut weights[layout.out_weight.range()],
        );
        let mut running = vec![T::zero(); layout.n_running];
        for l in &layout.mlp {
            running[l.running_var.range()]
                .iter_mut()
                .for_each(|v| *v = T::one());
        }
        Ok(ModelParameters {
            config: config.clone(),
            weights,
            running,
        })
    }

    pub(crate) fn layout(&self) -> Layout {
        Layout::new(&self.config)
    }

    /// Named ranges of `weights`, one per trainable tensor.
    pub fn groups(&self) -> Vec<(String, Range<usize>)> {
        self.layout()
            .names
            .into_iter()
            .map(|(n, b)| (n, b.range()))
            .collect()
    }

    /// Deep copy; the two instances share nothing afterwards.
    pub fn clone_params(&self) -> Self {
        self.clone()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.config == other.config
            && self.weights.len() == other.weights.len()
            && self.running.len() == other.running.len()
    }

    pub fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(&self.running)
            .all(|v| v.is_finite())
    }

    pub fn num_weights(&self) -> usize {
        self.weights.len()
    }

    /// Checks that the buffers match the sizes implied by `config`.
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let layout = self.layout();
        if self.weights.len() != layout.n_weights {
            return Err(Error::dims(layout.n_weights, self.weights.len()));
        }
        if self.running.len() != layout.n_running {
            return Err(Error::dims(layout.n_running, self.running.len()));
        }
        Ok(())
    }
}

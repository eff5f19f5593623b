//! Stochastic input noise for the student and teacher networks.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::specnet::NetInput;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubstMode {
    RandomVector,
    ZeroVector,
}

impl std::str::FromStr for SubstMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random_vector" | "random" => Ok(SubstMode::RandomVector),
            "zero_vector" | "zero" => Ok(SubstMode::ZeroVector),
            _ => Err(Error::Config(format!("unknown substitution mode {s:?}"))),
        }
    }
}

impl std::fmt::Display for SubstMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SubstMode::RandomVector => "random_vector",
            SubstMode::ZeroVector => "zero_vector",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub emb_gauss_std: f64,
    pub feat_gauss_std: f64,
    pub word_drop_prob: f64,
    pub word_subst_prob: f64,
    pub subst_mode: SubstMode,
    /// Expected fraction of positions that receive any word-level noise.
    pub target_perturb_fraction: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            emb_gauss_std: 0.1,
            feat_gauss_std: 0.2,
            word_drop_prob: 0.15,
            word_subst_prob: 0.15,
            subst_mode: SubstMode::RandomVector,
            target_perturb_fraction: 0.5,
        }
    }
}

impl NoiseConfig {
    /// No noise at all; [`augment`] is then the identity.
    pub fn zero() -> Self {
        NoiseConfig {
            emb_gauss_std: 0.0,
            feat_gauss_std: 0.0,
            word_drop_prob: 0.0,
            word_subst_prob: 0.0,
            subst_mode: SubstMode::ZeroVector,
            target_perturb_fraction: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("word_drop_prob", self.word_drop_prob),
            ("word_subst_prob", self.word_subst_prob),
            ("target_perturb_fraction", self.target_perturb_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must lie in [0,1], got {p}")));
            }
        }
        for (name, s) in [
            ("emb_gauss_std", self.emb_gauss_std),
            ("feat_gauss_std", self.feat_gauss_std),
        ] {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::Config(format!(
                    "{name} must be nonnegative, got {s}"
                )));
            }
        }
        Ok(())
    }
}

/// What happened to each position of one augmented sentence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AugmentReport {
    pub eligible: usize,
    pub dropped: usize,
    pub substituted: usize,
    pub jittered: usize,
    /// Set when every position was dropped and one was restored.
    pub restored: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Action {
    Keep,
    Drop,
    Substitute,
    Jitter,
}

fn gaussian<T: Scalar, R: Rng + ?Sized>(rng: &mut R, std: f64) -> T {
    let z: f64 = rng.sample(StandardNormal);
    T::lit(std * z)
}

/// Perturbs one sentence; the inputs are not modified.
///
/// Each position is eligible with probability `target_perturb_fraction`.
/// An eligible position is dropped with `word_drop_prob`, otherwise
/// substituted with `word_subst_prob`, otherwise jittered with Gaussian
/// noise. Features always get Gaussian noise. At least one token survives.
pub fn augment<T: Scalar, R: Rng + ?Sized>(
    tokens: ArrayView2<T>,
    features: ArrayView1<T>,
    cfg: &NoiseConfig,
    rng: &mut R,
) -> (NetInput<T>, AugmentReport) {
    let len = tokens.nrows();
    let dim = tokens.ncols();
    let mut report = AugmentReport::default();
    let actions: Vec<Action> = (0..len)
        .map(|_| {
            if !rng.random_bool(cfg.target_perturb_fraction) {
                return Action::Keep;
            }
            report.eligible += 1;
            if rng.random_bool(cfg.word_drop_prob) {
                Action::Drop
            } else if rng.random_bool(cfg.word_subst_prob) {
                Action::Substitute
            } else {
                Action::Jitter
            }
        })
        .collect();

    let mut survivors: Vec<usize> = (0..len).filter(|&i| actions[i] != Action::Drop).collect();
    let mut restored = None;
    if survivors.is_empty() && len > 0 {
        let keep = rng.random_range(0..len);
        survivors.push(keep);
        restored = Some(keep);
        report.restored = true;
    }
    report.dropped = len - survivors.len();

    let mut out = Array2::<T>::zeros((survivors.len(), dim));
    for (row, &pos) in survivors.iter().enumerate() {
        let mut dst = out.row_mut(row);
        let action = if restored == Some(pos) {
            Action::Keep
        } else {
            actions[pos]
        };
        match action {
            Action::Keep | Action::Drop => dst.assign(&tokens.row(pos)),
            Action::Substitute => {
                report.substituted += 1;
                if cfg.subst_mode == SubstMode::RandomVector && cfg.emb_gauss_std > 0.0 {
                    dst.mapv_inplace(|_| gaussian(rng, cfg.emb_gauss_std));
                }
            }
            Action::Jitter => {
                report.jittered += 1;
                dst.assign(&tokens.row(pos));
                if cfg.emb_gauss_std > 0.0 {
                    dst.mapv_inplace(|v| v + gaussian::<T, R>(rng, cfg.emb_gauss_std));
                }
            }
        }
    }

    let mut feats: Array1<T> = features.to_owned();
    if cfg.feat_gauss_std > 0.0 {
        feats.mapv_inplace(|v| v + gaussian::<T, R>(rng, cfg.feat_gauss_std));
    }
    (
        NetInput {
            tokens: out,
            features: feats,
        },
        report,
    )
}

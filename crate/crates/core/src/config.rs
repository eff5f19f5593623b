//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Keys mirror the
//! training, noise and network settings plus the input and output paths;
//! [`RunConfig::render`] writes every key back so a run can be frozen and
//! replayed.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::augment::SubstMode;
use crate::corpusio::{LexiconPaths, ReferenceDistribution};
use crate::error::{Error, Result};
use crate::specnet::NetworkConfig;
use crate::trainer::TrainingConfig;

/// Numeric precision of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f32" => Ok(Precision::F32),
            "f64" => Ok(Precision::F64),
            _ => Err(Error::Config(format!(
                "precision must be f32 or f64, got {s:?}"
            ))),
        }
    }
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        })
    }
}

/// Network shape settings; the embedding dimension comes from the embedding file.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSettings {
    pub hidden_size: usize,
    pub mlp_width: usize,
    pub mlp_depth: usize,
    pub dropout: f64,
    pub projection_dim: usize,
    pub batch_norm: bool,
}

impl Default for NetworkSettings {
    fn default() -> Self {
        let base = NetworkConfig::new(1);
        NetworkSettings {
            hidden_size: base.hidden_size,
            mlp_width: base.mlp_width,
            mlp_depth: base.mlp_depth,
            dropout: base.dropout,
            projection_dim: base.projection_dim,
            batch_norm: base.batch_norm,
        }
    }
}

impl NetworkSettings {
    pub fn build(&self, embedding_dim: usize) -> Result<NetworkConfig> {
        let cfg = NetworkConfig {
            hidden_size: self.hidden_size,
            mlp_width: self.mlp_width,
            mlp_depth: self.mlp_depth,
            dropout: self.dropout,
            projection_dim: self.projection_dim,
            batch_norm: self.batch_norm,
            ..NetworkConfig::new(embedding_dim)
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub source: Option<PathBuf>,
    pub target: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub lexicons: LexiconPaths,
    pub output_dir: PathBuf,
    pub precision: Precision,
    pub network: NetworkSettings,
    pub training: TrainingConfig,
    /// Whether `seed` was set explicitly (file or flag).
    pub seed_set: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            source: None,
            target: None,
            dev: None,
            embeddings: None,
            lexicons: LexiconPaths::default(),
            output_dir: PathBuf::from("run"),
            precision: Precision::F32,
            network: NetworkSettings::default(),
            training: TrainingConfig::default(),
            seed_set: false,
        }
    }
}

fn parse<V: FromStr>(key: &str, value: &str) -> Result<V> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

fn optional_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

/// Every accepted key, in rendering order.
pub const KEYS: &[&str] = &[
    "variant",
    "seed",
    "epochs",
    "batch_size",
    "alpha",
    "c1",
    "c2",
    "beta",
    "learning_rate",
    "adam_beta1",
    "adam_beta2",
    "adam_epsilon",
    "mu_r",
    "sigma_r",
    "emb_gauss_std",
    "feat_gauss_std",
    "word_drop_prob",
    "word_subst_prob",
    "subst_mode",
    "target_perturb_fraction",
    "hidden_size",
    "mlp_width",
    "mlp_depth",
    "dropout",
    "projection_dim",
    "batch_norm",
    "precision",
    "source",
    "target",
    "dev",
    "embeddings",
    "output_dir",
    "stopwords",
    "connectives",
    "polarity",
    "subjective",
    "familiarity",
    "imageability",
    "idf",
];

impl RunConfig {
    /// Sets one key. An empty value for `c1`, `c2`, `epochs` or a path
    /// restores the default.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let t = &mut self.training;
        let n = &mut self.network;
        let lx = &mut self.lexicons;
        match key {
            "variant" => t.variant = parse(key, value)?,
            "seed" => {
                t.seed = parse(key, value)?;
                self.seed_set = true;
            }
            "epochs" => {
                t.epochs = if value.is_empty() {
                    None
                } else {
                    Some(parse(key, value)?)
                }
            }
            "batch_size" => t.batch_size = parse(key, value)?,
            "alpha" => t.alpha = parse(key, value)?,
            "c1" => {
                t.c1 = if value.is_empty() {
                    None
                } else {
                    Some(parse(key, value)?)
                }
            }
            "c2" => {
                t.c2 = if value.is_empty() {
                    None
                } else {
                    Some(parse(key, value)?)
                }
            }
            "beta" => t.beta = parse(key, value)?,
            "learning_rate" => t.optimizer.learning_rate = parse(key, value)?,
            "adam_beta1" => t.optimizer.beta1 = parse(key, value)?,
            "adam_beta2" => t.optimizer.beta2 = parse(key, value)?,
            "adam_epsilon" => t.optimizer.epsilon = parse(key, value)?,
            "mu_r" => t.reference.mu_r = parse(key, value)?,
            "sigma_r" => t.reference.sigma_r = parse(key, value)?,
            "emb_gauss_std" => t.noise.emb_gauss_std = parse(key, value)?,
            "feat_gauss_std" => t.noise.feat_gauss_std = parse(key, value)?,
            "word_drop_prob" => t.noise.word_drop_prob = parse(key, value)?,
            "word_subst_prob" => t.noise.word_subst_prob = parse(key, value)?,
            "subst_mode" => t.noise.subst_mode = value.parse::<SubstMode>()?,
            "target_perturb_fraction" => t.noise.target_perturb_fraction = parse(key, value)?,
            "hidden_size" => n.hidden_size = parse(key, value)?,
            "mlp_width" => n.mlp_width = parse(key, value)?,
            "mlp_depth" => n.mlp_depth = parse(key, value)?,
            "dropout" => n.dropout = parse(key, value)?,
            "projection_dim" => n.projection_dim = parse(key, value)?,
            "batch_norm" => n.batch_norm = parse(key, value)?,
            "precision" => self.precision = value.parse()?,
            "source" => self.source = optional_path(value),
            "target" => self.target = optional_path(value),
            "dev" => self.dev = optional_path(value),
            "embeddings" => self.embeddings = optional_path(value),
            "output_dir" => self.output_dir = PathBuf::from(value),
            "stopwords" => lx.stopwords = optional_path(value),
            "connectives" => lx.connectives = optional_path(value),
            "polarity" => lx.polarity = optional_path(value),
            "subjective" => lx.subjective = optional_path(value),
            "familiarity" => lx.familiarity = optional_path(value),
            "imageability" => lx.imageability = optional_path(value),
            "idf" => lx.idf = optional_path(value),
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str, origin: &Path) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, i + 1, "expected key = value"))?;
            self.set(key.trim(), value)
                .map_err(|e| Error::parse(origin, i + 1, e.to_string()))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text, path)?;
        Ok(cfg)
    }

    /// Validates the combined settings (network shape checked with a dummy width).
    pub fn validate(&self) -> Result<()> {
        ReferenceDistribution::new(
            self.training.reference.mu_r,
            self.training.reference.sigma_r,
        )?;
        self.training.validate()?;
        self.network.build(1).map(|_| ())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let t = &self.training;
        let n = &self.network;
        let lx = &self.lexicons;
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default()
        };
        let opt = |v: Option<String>| v.unwrap_or_default();
        Some(match key {
            "variant" => t.variant.to_string(),
            "seed" => t.seed.to_string(),
            "epochs" => opt(t.epochs.map(|e| e.to_string())),
            "batch_size" => t.batch_size.to_string(),
            "alpha" => t.alpha.to_string(),
            "c1" => opt(t.c1.map(|c| c.to_string())),
            "c2" => opt(t.c2.map(|c| c.to_string())),
            "beta" => t.beta.to_string(),
            "learning_rate" => t.optimizer.learning_rate.to_string(),
            "adam_beta1" => t.optimizer.beta1.to_string(),
            "adam_beta2" => t.optimizer.beta2.to_string(),
            "adam_epsilon" => t.optimizer.epsilon.to_string(),
            "mu_r" => t.reference.mu_r.to_string(),
            "sigma_r" => t.reference.sigma_r.to_string(),
            "emb_gauss_std" => t.noise.emb_gauss_std.to_string(),
            "feat_gauss_std" => t.noise.feat_gauss_std.to_string(),
            "word_drop_prob" => t.noise.word_drop_prob.to_string(),
            "word_subst_prob" => t.noise.word_subst_prob.to_string(),
            "subst_mode" => t.noise.subst_mode.to_string(),
            "target_perturb_fraction" => t.noise.target_perturb_fraction.to_string(),
            "hidden_size" => n.hidden_size.to_string(),
            "mlp_width" => n.mlp_width.to_string(),
            "mlp_depth" => n.mlp_depth.to_string(),
            "dropout" => n.dropout.to_string(),
            "projection_dim" => n.projection_dim.to_string(),
            "batch_norm" => n.batch_norm.to_string(),
            "precision" => self.precision.to_string(),
            "source" => path(&self.source),
            "target" => path(&self.target),
            "dev" => path(&self.dev),
            "embeddings" => path(&self.embeddings),
            "output_dir" => self.output_dir.display().to_string(),
            "stopwords" => path(&lx.stopwords),
            "connectives" => path(&lx.connectives),
            "polarity" => path(&lx.polarity),
            "subjective" => path(&lx.subjective),
            "familiarity" => path(&lx.familiarity),
            "imageability" => path(&lx.imageability),
            "idf" => path(&lx.idf),
            _ => return None,
        })
    }

    /// Every key with its effective value; parses back to an equal config.
    pub fn render(&self) -> String {
        KEYS.iter()
            .map(|k| format!("{k} = {}\n", self.get(k).unwrap_or_default()))
            .collect()
    }
}

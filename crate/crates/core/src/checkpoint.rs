//! Persisted training state and teacher-network prediction.
//!
//! A checkpoint is a single JSON document:
//!
//! | field | content |
//! |---|---|
//! | `format`, `version` | `"specadapt-checkpoint"`, `1` |
//! | `scalar` | `"f32"` or `"f64"` |
//! | `network`, `training` | the configurations used |
//! | `student`, `teacher` | weights and batch-norm running statistics |
//! | `optimizer` | Adam step count and moments |
//! | `feature_stats` | per-slot standardization mean/std from the source set |
//! | `lexicons` | every lexicon and the idf table used for features |
//! | `vocab_hash` | SHA-256 of the embedding vocabulary |

use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpusio::{EmbeddingTable, LexiconResources, Sentence};
use crate::error::{Error, Result};
use crate::features::FeatureStats;
use crate::scalar::Scalar;
use crate::specnet::{self, ModelParameters, NetworkConfig};
use crate::trainer::{encode, AdamState, TrainingConfig};

pub const CHECKPOINT_FORMAT: &str = "specadapt-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct Checkpoint<T> {
    pub format: String,
    pub version: u32,
    pub scalar: String,
    pub network: NetworkConfig,
    pub training: TrainingConfig,
    pub student: ModelParameters<T>,
    pub teacher: ModelParameters<T>,
    pub optimizer: AdamState<T>,
    pub feature_stats: Option<FeatureStats>,
    pub lexicons: LexiconResources,
    pub vocab_hash: String,
    pub epochs_completed: usize,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
    scalar: String,
}

impl<T: Scalar> Checkpoint<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        network: NetworkConfig,
        training: TrainingConfig,
        student: ModelParameters<T>,
        teacher: ModelParameters<T>,
        optimizer: AdamState<T>,
        feature_stats: Option<FeatureStats>,
        lexicons: LexiconResources,
        vocab_hash: String,
        epochs_completed: usize,
    ) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            scalar: T::NAME.to_string(),
            network,
            training,
            student,
            teacher,
            optimizer,
            feature_stats,
            lexicons,
            vocab_hash,
            epochs_completed,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(BufWriter::new(file), self)?;
        Ok(())
    }

    /// Loads and validates a checkpoint written with scalar type `T`.
    pub fn load(path: &Path) -> Result<Self> {
        let header = read_header(path)?;
        if header.scalar != T::NAME {
            return Err(Error::ModelState(format!(
                "checkpoint holds {} parameters, requested {}",
                header.scalar,
                T::NAME
            )));
        }
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let ckpt: Self = serde_json::from_reader(BufReader::new(file))?;
        ckpt.validate()?;
        Ok(ckpt)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != CHECKPOINT_FORMAT || self.version != CHECKPOINT_VERSION {
            return Err(Error::ModelState(format!(
                "unsupported checkpoint {} v{}",
                self.format, self.version
            )));
        }
        if self.student.config != self.network || self.teacher.config != self.network {
            return Err(Error::ModelState(
                "parameter sets disagree with network config".into(),
            ));
        }
        self.student.validate()?;
        self.teacher.validate()?;
        if self.optimizer.m.len() != self.student.num_weights()
            || self.optimizer.v.len() != self.student.num_weights()
        {
            return Err(Error::ModelState(
                "optimizer state does not match the student".into(),
            ));
        }
        Ok(())
    }

    /// Teacher predictions in eval mode, one per sentence.
    pub fn predict(
        &self,
        embeddings: &EmbeddingTable<T>,
        sentences: &[Sentence],
    ) -> Result<Vec<T>> {
        if embeddings.vocab_hash() != self.vocab_hash {
            return Err(Error::ModelState(
                "embedding vocabulary differs from the one used in training".into(),
            ));
        }
        if sentences.is_empty() {
            return Ok(Vec::new());
        }
        let stats = self
            .feature_stats
            .as_ref()
            .ok_or_else(|| Error::ModelState("checkpoint has no feature statistics".into()))?;
        let refs: Vec<&Sentence> = sentences.iter().collect();
        let inputs = encode(&refs, embeddings, &self.lexicons, Some(stats))?;
        specnet::predict_batch(&self.teacher, &inputs, 256)
    }
}

fn read_header(path: &Path) -> Result<Header> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let header: Header = serde_json::from_reader(BufReader::new(file))?;
    if header.format != CHECKPOINT_FORMAT {
        return Err(Error::ModelState(format!(
            "{} is not a checkpoint",
            path.display()
        )));
    }
    if header.version != CHECKPOINT_VERSION {
        return Err(Error::ModelState(format!(
            "unsupported checkpoint version {}",
            header.version
        )));
    }
    Ok(header)
}

/// Scalar type name stored in a checkpoint file.
pub fn checkpoint_scalar(path: &Path) -> Result<String> {
    read_header(path).map(|h| h.scalar)
}

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Word vectors keyed by token, with a fallback vector for unknown words.
#[derive(Clone, Debug)]
pub struct EmbeddingTable<T> {
    words: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Array2<T>,
    unk: Array1<T>,
}

impl<T: Scalar> EmbeddingTable<T> {
    /// Builds a table; the unknown-word vector is the mean of all vectors
    /// (zero when the table is empty).
    pub fn new(dimension: usize, entries: Vec<(String, Vec<T>)>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        let mut words = Vec::with_capacity(entries.len());
        let mut index = HashMap::with_capacity(entries.len());
        let mut flat = Vec::with_capacity(entries.len() * dimension);
        for (word, vec) in entries {
            if vec.len() != dimension {
                return Err(Error::dims(dimension, vec.len()));
            }
            if index.contains_key(&word) {
                log::warn!("duplicate embedding for {word:?}; keeping the first");
                continue;
            }
            index.insert(word.clone(), words.len());
            words.push(word);
            flat.extend(vec);
        }
        let vectors = Array2::from_shape_vec((words.len(), dimension), flat)
            .expect("rows were checked against the dimension");
        let unk = vectors
            .mean_axis(ndarray::Axis(0))
            .unwrap_or_else(|| Array1::zeros(dimension));
        Ok(EmbeddingTable {
            words,
            index,
            vectors,
            unk,
        })
    }

    /// Reads the word2vec text format: a `V D` header, then `token x1 .. xD`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines().enumerate();
        let (declared, dimension) = loop {
            let Some((idx, line)) = lines.next() else {
                return Err(Error::parse(path, 1, "missing `V D` header"));
            };
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parsed = match fields.as_slice() {
                [v, d] => v.parse::<usize>().ok().zip(d.parse::<usize>().ok()),
                _ => None,
            };
            match parsed {
                Some((v, d)) if d > 0 => break (v, d),
                _ => return Err(Error::parse(path, idx + 1, "expected `V D` header")),
            }
        };
        let mut entries = Vec::with_capacity(declared);
        for (idx, line) in lines {
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let values = fields
                .map(|f| f.parse::<f64>().ok().and_then(T::from_f64))
                .collect::<Option<Vec<T>>>()
                .ok_or_else(|| Error::parse(path, idx + 1, "non-numeric vector component"))?;
            if values.len() != dimension {
                return Err(Error::dims(dimension, values.len()));
            }
            entries.push((word.to_string(), values));
        }
        if entries.len() != declared {
            log::warn!(
                "{}: header declares {declared} words, found {}",
                path.display(),
                entries.len()
            );
        }
        Self::new(dimension, entries)
    }

    pub fn dimension(&self) -> usize {
        self.unk.len()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn unk_vector(&self) -> ArrayView1<'_, T> {
        self.unk.view()
    }

    /// Exact match first, then the lowercased token, then the unknown vector.
    pub fn lookup(&self, token: &str) -> ArrayView1<'_, T> {
        let row = self
            .index
            .get(token)
            .or_else(|| self.index.get(&token.to_lowercase()));
        match row {
            Some(&r) => self.vectors.row(r),
            None => self.unk.view(),
        }
    }

    /// Stacks the vectors of `tokens` into a `len × dimension` matrix.
    pub fn embed(&self, tokens: &[String]) -> Array2<T> {
        let mut out = Array2::zeros((tokens.len(), self.dimension()));
        for (mut row, tok) in out.rows_mut().into_iter().zip(tokens) {
            row.assign(&self.lookup(tok));
        }
        out
    }

    /// SHA-256 over the dimension and the vocabulary in table order.
    ///
    /// Checkpoints record this so predictions are never made with a
    /// different vocabulary than the one used in training.
    pub fn vocab_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("{}\n", self.dimension()).as_bytes());
        for w in &self.words {
            hasher.update(w.as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &tempfile::TempDir, body: &str) -> std::path::PathBuf {
        let p = dir.path().join("emb.txt");
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn load_and_lookup() {
        let dir = tempfile::tempdir().unwrap();
        let table = EmbeddingTable::<f64>::load(&write(&dir, "2 3\na 1 0 0\nb 0 1 0")).unwrap();
        assert_eq!(table.dimension(), 3);
        assert_eq!(table.unk_vector().to_vec(), [0.5, 0.5, 0.0]);
        assert_eq!(table.lookup("a").to_vec(), [1.0, 0.0, 0.0]);
        assert_eq!(table.lookup("zzz").to_vec(), [0.5, 0.5, 0.0]);
        assert_eq!(table.lookup("A").to_vec(), [1.0, 0.0, 0.0]);
        let m = table.embed(&["b".into(), "q".into()]);
        assert_eq!(m.shape(), &[2, 3]);
        assert_eq!(m.row(0).to_vec(), [0.0, 1.0, 0.0]);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "2 2\na 1 0\nb 0 x\n");
        match EmbeddingTable::<f32>::load(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inconsistent_dimension() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "2 2\na 1 0\nb 0 1 1\n");
        assert!(matches!(
            EmbeddingTable::<f32>::load(&p),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 3
            })
        ));
    }

    #[test]
    fn vocab_hash_tracks_vocabulary_only() {
        let a = EmbeddingTable::<f64>::new(1, vec![("x".into(), vec![1.0])]).unwrap();
        let b = EmbeddingTable::<f64>::new(1, vec![("x".into(), vec![2.0])]).unwrap();
        let c = EmbeddingTable::<f64>::new(1, vec![("y".into(), vec![1.0])]).unwrap();
        assert_eq!(a.vocab_hash(), b.vocab_hash());
        assert_ne!(a.vocab_hash(), c.vocab_hash());
    }
}

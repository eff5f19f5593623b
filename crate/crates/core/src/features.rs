//! Handcrafted surface features concatenated with the sentence encoding.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpusio::{LexiconResources, Sentence};
use crate::error::{Error, Result};

pub const FEATURE_DIM: usize = 14;

pub const SLOT_NAMES: [&str; FEATURE_DIM] = [
    "n_tokens",
    "n_numbers_norm",
    "n_capitals_norm",
    "n_punct_norm",
    "avg_word_chars",
    "stopword_frac",
    "n_connectives",
    "polarity_frac",
    "subjective_frac",
    "avg_familiarity",
    "avg_imageability",
    "idf_min",
    "idf_max",
    "idf_avg",
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShallowFeatures(pub [f64; FEATURE_DIM]);

impl ShallowFeatures {
    pub fn slot(&self, name: &str) -> Option<f64> {
        SLOT_NAMES
            .iter()
            .position(|s| *s == name)
            .map(|i| self.0[i])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Integer or decimal, optionally with `,`/`.` group separators: "7", "3.5", "4,000".
pub fn is_number(token: &str) -> bool {
    let bytes = token.as_bytes();
    !bytes.is_empty()
        && bytes[0].is_ascii_digit()
        && bytes[bytes.len() - 1].is_ascii_digit()
        && bytes
            .iter()
            .all(|b| b.is_ascii_digit() || *b == b'.' || *b == b',')
        && !bytes
            .windows(2)
            .any(|w| !w[0].is_ascii_digit() && !w[1].is_ascii_digit())
}

pub fn is_punctuation(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| !c.is_alphanumeric())
}

/// Greedy left-to-right longest match of (possibly multiword) connectives.
fn count_connectives(lower: &[String], connectives: &std::collections::BTreeSet<String>) -> usize {
    if connectives.is_empty() {
        return 0;
    }
    let max_words = connectives
        .iter()
        .map(|c| c.split(' ').count())
        .max()
        .unwrap_or(1);
    let mut count = 0;
    let mut i = 0;
    while i < lower.len() {
        let longest = (1..=max_words.min(lower.len() - i))
            .rev()
            .find(|&k| connectives.contains(&lower[i..i + k].join(" ")));
        match longest {
            Some(k) => {
                count += 1;
                i += k;
            }
            None => i += 1,
        }
    }
    count
}

fn mean_over_known(lower: &[String], scores: &std::collections::BTreeMap<String, f64>) -> f64 {
    let known: Vec<f64> = lower
        .iter()
        .filter_map(|t| scores.get(t).copied())
        .collect();
    if known.is_empty() {
        0.0
    } else {
        known.iter().sum::<f64>() / known.len() as f64
    }
}

/// Computes the feature vector for one sentence.
///
/// Every "normalized" count is divided by the token count. Lexicon lookups
/// are case-insensitive.
pub fn extract_features(sentence: &Sentence, res: &LexiconResources) -> Result<ShallowFeatures> {
    let tokens = &sentence.tokens;
    if tokens.is_empty() {
        return Err(Error::EmptySentence);
    }
    let n = tokens.len() as f64;
    let lower: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();

    let numbers = tokens.iter().filter(|t| is_number(t)).count() as f64;
    let capitals = tokens
        .iter()
        .flat_map(|t| t.chars())
        .filter(|c| c.is_uppercase())
        .count() as f64;
    let punct = tokens.iter().filter(|t| is_punctuation(t)).count() as f64;
    let chars = tokens.iter().map(|t| t.chars().count()).sum::<usize>() as f64;
    let frac = |set: &std::collections::BTreeSet<String>| {
        lower.iter().filter(|t| set.contains(*t)).count() as f64 / n
    };

    let idfs: Vec<f64> = lower.iter().map(|t| res.idf.get(t)).collect();
    let idf_min = idfs.iter().copied().fold(f64::INFINITY, f64::min);
    let idf_max = idfs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let idf_avg = (idfs.iter().sum::<f64>() / n).clamp(idf_min, idf_max);

    Ok(ShallowFeatures([
        n,
        numbers / n,
        capitals / n,
        punct / n,
        chars / n,
        frac(&res.stopwords),
        count_connectives(&lower, &res.connectives) as f64,
        frac(&res.polarity_words),
        frac(&res.subjective_words),
        mean_over_known(&lower, &res.familiarity),
        mean_over_known(&lower, &res.imageability),
        idf_min,
        idf_max,
        idf_avg,
    ]))
}

/// Per-slot mean and standard deviation fitted on source training features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl FeatureStats {
    /// Population statistics; slots with zero variance get std 1.
    pub fn fit(batch: &[ShallowFeatures]) -> Result<Self> {
        if batch.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let n = batch.len() as f64;
        let mut mean = vec![0.0; FEATURE_DIM];
        for f in batch {
            for (m, v) in mean.iter_mut().zip(f.0) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut std = vec![0.0; FEATURE_DIM];
        for f in batch {
            for ((s, v), m) in std.iter_mut().zip(f.0).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        for s in std.iter_mut() {
            *s = (*s / n).sqrt();
            if s.is_nan() || *s <= 0.0 {
                *s = 1.0;
            }
        }
        Ok(FeatureStats { mean, std })
    }

    pub fn apply(&self, f: &ShallowFeatures) -> [f64; FEATURE_DIM] {
        std::array::from_fn(|i| (f.0[i] - self.mean[i]) / self.std[i])
    }
}

/// Standardizes a batch with frozen statistics.
pub fn standardize_features(
    batch: &[ShallowFeatures],
    stats: Option<&FeatureStats>,
) -> Result<Vec<[f64; FEATURE_DIM]>> {
    let stats =
        stats.ok_or_else(|| Error::ModelState("feature standardization stats missing".into()))?;
    if stats.mean.len() != FEATURE_DIM || stats.std.len() != FEATURE_DIM {
        return Err(Error::dims(
            FEATURE_DIM,
            stats.mean.len().min(stats.std.len()),
        ));
    }
    Ok(batch.iter().map(|f| stats.apply(f)).collect())
}

/// Writes features as CSV with a `sentence` column followed by the slot names.
pub fn write_features_csv<W: Write>(
    mut out: W,
    rows: &[(&Sentence, ShallowFeatures)],
) -> std::io::Result<()> {
    writeln!(out, "sentence,{}", SLOT_NAMES.join(","))?;
    for (sentence, f) in rows {
        let quoted = format!("\"{}\"", sentence.raw.replace('"', "\"\""));
        let values: Vec<String> = f.0.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{quoted},{}", values.join(","))?;
    }
    Ok(())
}

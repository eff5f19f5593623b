use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::Sentence;
use crate::error::{Error, Result};

/// Inverse document frequencies keyed by lowercased token.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IdfTable {
    pub values: BTreeMap<String, f64>,
    /// Used for tokens absent from `values`.
    pub default: f64,
}

impl IdfTable {
    pub fn get(&self, token: &str) -> f64 {
        self.values
            .get(token)
            .or_else(|| self.values.get(&token.to_lowercase()))
            .copied()
            .unwrap_or(self.default)
    }

    /// Reads `token<TAB>idf` lines. The default for unseen tokens is the
    /// largest idf in the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut values = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (tok, score) = line
                .rsplit_once('\t')
                .ok_or_else(|| Error::parse(path, idx + 1, "expected token<TAB>idf"))?;
            let score: f64 = score
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, idx + 1, "idf is not a number"))?;
            if !(score >= 0.0 && score.is_finite()) {
                return Err(Error::parse(
                    path,
                    idx + 1,
                    "idf must be finite and nonnegative",
                ));
            }
            values.insert(tok.to_lowercase(), score);
        }
        let default = values.values().copied().fold(0.0, f64::max);
        Ok(IdfTable { values, default })
    }
}

/// Document frequencies over `corpus`, one sentence per document.
///
/// `idf(t) = max(0, ln(N / (1 + df(t))))`; unseen tokens get `ln N`.
pub fn compute_idf(corpus: &[Sentence]) -> Result<IdfTable> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for sentence in corpus {
        let distinct: HashSet<String> = sentence.tokens.iter().map(|t| t.to_lowercase()).collect();
        for tok in distinct {
            *df.entry(tok).or_default() += 1;
        }
    }
    let n = corpus.len() as f64;
    let values = df
        .into_iter()
        .map(|(tok, count)| (tok, (n / (1.0 + count as f64)).ln().max(0.0)))
        .collect();
    Ok(IdfTable {
        values,
        default: n.ln(),
    })
}

/// Word lists and scored lexicons used by the shallow features.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LexiconResources {
    pub stopwords: BTreeSet<String>,
    /// Single- or multi-word connectives, lowercased and space-joined.
    pub connectives: BTreeSet<String>,
    pub polarity_words: BTreeSet<String>,
    pub subjective_words: BTreeSet<String>,
    pub familiarity: BTreeMap<String, f64>,
    pub imageability: BTreeMap<String, f64>,
    pub idf: IdfTable,
}

/// Optional file locations for each lexicon.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LexiconPaths {
    pub stopwords: Option<PathBuf>,
    pub connectives: Option<PathBuf>,
    pub polarity: Option<PathBuf>,
    pub subjective: Option<PathBuf>,
    pub familiarity: Option<PathBuf>,
    pub imageability: Option<PathBuf>,
    pub idf: Option<PathBuf>,
}

impl LexiconResources {
    /// Loads every lexicon that has a path. A missing file is not an error:
    /// the lexicon stays empty, its feature reads 0 and one warning is logged.
    /// The idf table is left empty here; callers fall back to [`compute_idf`].
    pub fn load(paths: &LexiconPaths) -> Result<Self> {
        let mut res = LexiconResources::default();
        if let Some(p) = present(paths.stopwords.as_deref(), "stopwords") {
            res.stopwords = load_set(p)?;
        }
        if let Some(p) = present(paths.connectives.as_deref(), "connectives") {
            res.connectives = load_set(p)?;
        }
        if let Some(p) = present(paths.polarity.as_deref(), "polarity") {
            res.polarity_words = load_set(p)?;
        }
        if let Some(p) = present(paths.subjective.as_deref(), "subjective") {
            res.subjective_words = load_set(p)?;
        }
        if let Some(p) = present(paths.familiarity.as_deref(), "familiarity") {
            res.familiarity = load_scores(p)?;
        }
        if let Some(p) = present(paths.imageability.as_deref(), "imageability") {
            res.imageability = load_scores(p)?;
        }
        if let Some(p) = paths.idf.as_deref() {
            res.idf = IdfTable::load(p)?;
        }
        Ok(res)
    }

    pub fn has_idf(&self) -> bool {
        !self.idf.values.is_empty()
    }
}

fn present<'a>(path: Option<&'a Path>, what: &str) -> Option<&'a Path> {
    let path = path?;
    if path.exists() {
        Some(path)
    } else {
        log::warn!(
            "{what} lexicon {} not found; feature will be 0",
            path.display()
        );
        None
    }
}

fn load_set(path: &Path) -> Result<BTreeSet<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| {
            l.split_whitespace()
                .collect::<Vec<_>>()
                .join(" ")
                .to_lowercase()
        })
        .filter(|l| !l.is_empty())
        .collect())
}

fn load_scores(path: &Path) -> Result<BTreeMap<String, f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (tok, score) = line
            .rsplit_once('\t')
            .ok_or_else(|| Error::parse(path, idx + 1, "expected token<TAB>score"))?;
        let score: f64 = score
            .trim()
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| Error::parse(path, idx + 1, "score must be a finite number"))?;
        out.insert(tok.trim().to_lowercase(), score);
    }
    Ok(out)
}

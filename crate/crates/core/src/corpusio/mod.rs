//! Corpus ingestion: tokenization, labels, rating conversion and resource loading.

mod embeddings;
mod lexicon;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use embeddings::EmbeddingTable;
pub use lexicon::{compute_idf, IdfTable, LexiconPaths, LexiconResources};

/// A sentence with its original text and rule-based tokens.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub raw: String,
    pub tokens: Vec<String>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Tokenizes `raw` by whitespace, then splits punctuation into separate tokens.
///
/// Apostrophes and hyphens between letters stay inside the word ("don't",
/// "well-known"); `.` and `,` between digits stay inside the number ("4,000",
/// "3.5"). Every other non-alphanumeric character becomes its own token.
pub fn tokenize(raw: &str) -> Result<Sentence> {
    let tokens = split_tokens(raw);
    if tokens.is_empty() {
        return Err(Error::EmptySentence);
    }
    Ok(Sentence {
        raw: raw.to_string(),
        tokens,
    })
}

/// Same rule as [`tokenize`] but accepts input with no tokens.
pub fn split_tokens(raw: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in raw.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            if !chars[i].is_alphanumeric() {
                tokens.push(chars[i].to_string());
                i += 1;
                continue;
            }
            let start = i;
            i += 1;
            while i < chars.len() {
                let c = chars[i];
                if c.is_alphanumeric() {
                    i += 1;
                    continue;
                }
                let prev = chars[i - 1];
                let next = chars.get(i + 1).copied();
                let joins = match (c, next) {
                    ('\'' | '\u{2019}' | '-', Some(n)) => prev.is_alphabetic() && n.is_alphabetic(),
                    ('.' | ',', Some(n)) => prev.is_ascii_digit() && n.is_ascii_digit(),
                    _ => false,
                };
                if !joins {
                    break;
                }
                i += 2;
            }
            tokens.push(chars[start..i].iter().collect());
        }
    }
    tokens
}

/// Maps a 1..5 crowd rating to `(rating - 1) / 4`.
pub fn rescale_rating(rating: i64) -> Result<f64> {
    if !(1..=5).contains(&rating) {
        return Err(Error::InvalidRating(rating as f64));
    }
    Ok((rating - 1) as f64 / 4.0)
}

/// Outcome of binarizing an averaged 0..6 rating (higher = more general).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Binarized {
    General,
    Specific,
    Excluded,
}

impl Binarized {
    /// Binary training label: general = 0, specific = 1.
    pub fn label(self) -> Option<u8> {
        match self {
            Binarized::General => Some(0),
            Binarized::Specific => Some(1),
            Binarized::Excluded => None,
        }
    }
}

pub fn binarize_source_rating(avg_rating: f64) -> Result<Binarized> {
    if !(0.0..=6.0).contains(&avg_rating) {
        return Err(Error::InvalidRating(avg_rating));
    }
    Ok(if avg_rating > 3.5 {
        Binarized::General
    } else if avg_rating < 2.5 {
        Binarized::Specific
    } else {
        Binarized::Excluded
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Label {
    Binary(u8),
    Real(f64),
}

impl Label {
    pub fn value(self) -> f64 {
        match self {
            Label::Binary(b) => b as f64,
            Label::Real(r) => r,
        }
    }

    /// Parses `0`/`1` as binary labels and any other number in [0,1] as real.
    pub fn parse(text: &str) -> Result<Label> {
        let text = text.trim();
        match text {
            "0" => return Ok(Label::Binary(0)),
            "1" => return Ok(Label::Binary(1)),
            _ => {}
        }
        let value: f64 = text
            .parse()
            .map_err(|_| Error::InvalidLabel(text.to_string()))?;
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidLabel(text.to_string()));
        }
        Ok(Label::Real(value))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainTag {
    Source,
    Target,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub sentence: Sentence,
    pub label: Label,
    pub domain: DomainTag,
}

/// Mean and standard deviation of the specificity distribution the
/// posterior regularizer pulls predictions toward.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceDistribution {
    pub mu_r: f64,
    pub sigma_r: f64,
}

impl ReferenceDistribution {
    pub fn new(mu_r: f64, sigma_r: f64) -> Result<Self> {
        if !(mu_r > 0.0 && mu_r < 1.0) {
            return Err(Error::Config(format!("mu_r must lie in (0,1), got {mu_r}")));
        }
        if !(sigma_r > 0.0 && sigma_r.is_finite()) {
            return Err(Error::Config(format!(
                "sigma_r must be positive, got {sigma_r}"
            )));
        }
        Ok(ReferenceDistribution { mu_r, sigma_r })
    }

    /// News specificity distribution: mean 0.417, standard deviation 0.227.
    pub fn news() -> Self {
        ReferenceDistribution {
            mu_r: 0.417,
            sigma_r: 0.227,
        }
    }
}

impl Default for ReferenceDistribution {
    fn default() -> Self {
        Self::news()
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Reads a `label<TAB>text` file.
///
/// With `domain = Source` every label must be binary; real-valued labels are
/// only accepted for evaluation (target) sets. Blank lines are skipped.
pub fn load_labeled_corpus(path: &Path, domain: DomainTag) -> Result<Vec<LabeledExample>> {
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (label, raw) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, lineno, "expected label<TAB>text"))?;
        let label = Label::parse(label).map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        if domain == DomainTag::Source && !matches!(label, Label::Binary(_)) {
            return Err(Error::parse(path, lineno, "source labels must be 0 or 1"));
        }
        let sentence = tokenize(raw).map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        out.push(LabeledExample {
            sentence,
            label,
            domain,
        });
    }
    Ok(out)
}

/// Reads one sentence per line, skipping blank lines.
pub fn load_unlabeled_corpus(path: &Path) -> Result<Vec<Sentence>> {
    let text = read_to_string(path)?;
    Ok(text
        .lines()
        .filter_map(|line| tokenize(line).ok())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s).unwrap().tokens
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(toks("The cat sat."), ["The", "cat", "sat", "."]);
        assert_eq!(toks("Hi"), ["Hi"]);
        assert!(matches!(tokenize(""), Err(Error::EmptySentence)));
        assert!(matches!(tokenize(" \t\n"), Err(Error::EmptySentence)));
    }

    #[test]
    fn tokenize_numbers_and_contractions() {
        assert_eq!(
            toks("women spend $4,000 (don't ask), well-known 3.5%!"),
            [
                "women",
                "spend",
                "$",
                "4,000",
                "(",
                "don't",
                "ask",
                ")",
                ",",
                "well-known",
                "3.5",
                "%",
                "!"
            ]
        );
        assert_eq!(toks("end..."), ["end", ".", ".", "."]);
        assert_eq!(toks("7."), ["7", "."]);
    }

    #[test]
    fn raw_text_is_kept_verbatim() {
        let raw = "  Spaces\tand\u{00a0}tabs ";
        assert_eq!(tokenize(raw).unwrap().raw, raw);
    }

    #[test]
    fn rescale_examples() {
        assert_eq!(rescale_rating(1).unwrap(), 0.0);
        assert_eq!(rescale_rating(3).unwrap(), 0.5);
        assert_eq!(rescale_rating(5).unwrap(), 1.0);
        let all: Vec<f64> = (1..=5).map(|r| rescale_rating(r).unwrap()).collect();
        assert_eq!(all, [0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(matches!(rescale_rating(0), Err(Error::InvalidRating(_))));
        assert!(matches!(rescale_rating(6), Err(Error::InvalidRating(_))));
    }

    #[test]
    fn binarize_examples() {
        assert_eq!(binarize_source_rating(4.0).unwrap(), Binarized::General);
        assert_eq!(binarize_source_rating(2.0).unwrap(), Binarized::Specific);
        assert_eq!(binarize_source_rating(3.0).unwrap(), Binarized::Excluded);
        assert_eq!(binarize_source_rating(3.5).unwrap(), Binarized::Excluded);
        assert_eq!(binarize_source_rating(2.5).unwrap(), Binarized::Excluded);
        assert_eq!(Binarized::General.label(), Some(0));
        assert_eq!(Binarized::Specific.label(), Some(1));
        assert!(binarize_source_rating(6.5).is_err());
        assert!(binarize_source_rating(-0.1).is_err());
    }

    #[test]
    fn label_parsing() {
        assert_eq!(Label::parse("1").unwrap(), Label::Binary(1));
        assert_eq!(Label::parse("0.25").unwrap(), Label::Real(0.25));
        assert!(Label::parse("1.5").is_err());
        assert!(Label::parse("x").is_err());
    }

    #[test]
    fn labeled_corpus_rules() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("src.tsv");
        fs::write(&src, "1\tThe index rose 3.5%.\n\n0\tThings happen.\n").unwrap();
        let rows = load_labeled_corpus(&src, DomainTag::Source).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].label, Label::Binary(1));

        let bad = dir.path().join("bad.tsv");
        fs::write(&bad, "0.5\tA real label in a source file.\n").unwrap();
        match load_labeled_corpus(&bad, DomainTag::Source) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        let eval = load_labeled_corpus(&bad, DomainTag::Target).unwrap();
        assert_eq!(eval[0].label, Label::Real(0.5));
    }

    proptest! {
        #[test]
        fn rescale_is_strictly_monotone(a in 1i64..=5, b in 1i64..=5) {
            let (ra, rb) = (rescale_rating(a).unwrap(), rescale_rating(b).unwrap());
            prop_assert_eq!(a.cmp(&b), ra.partial_cmp(&rb).unwrap());
        }

        #[test]
        fn binarize_regions_are_contiguous(x in 0.0f64..=6.0, y in 0.0f64..=6.0) {
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            let rank = |b: Binarized| match b {
                Binarized::Specific => 0,
                Binarized::Excluded => 1,
                Binarized::General => 2,
            };
            prop_assert!(rank(binarize_source_rating(lo).unwrap()) <= rank(binarize_source_rating(hi).unwrap()));
        }

        #[test]
        fn tokens_never_contain_whitespace(s in "\\PC{0,40}") {
            for t in split_tokens(&s) {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.chars().any(char::is_whitespace));
            }
        }
    }
}

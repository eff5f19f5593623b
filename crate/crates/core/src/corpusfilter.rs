//! Response-corpus filters by length or predicted specificity, and lexical diversity.

use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::corpusio::split_tokens;
use crate::error::{Error, Result};

/// One dialogue training pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DialoguePair {
    pub context: String,
    pub response: String,
}

impl DialoguePair {
    pub fn response_tokens(&self) -> Vec<String> {
        split_tokens(&self.response)
    }
}

/// Reads `context<TAB>response` lines; blank lines are skipped.
pub fn load_pairs(path: &Path) -> Result<Vec<DialoguePair>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (context, response) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, i + 1, "expected context<TAB>response"))?;
        out.push(DialoguePair {
            context: context.to_string(),
            response: response.to_string(),
        });
    }
    Ok(out)
}

pub fn write_pairs<W: Write>(mut out: W, pairs: &[DialoguePair]) -> std::io::Result<()> {
    for p in pairs {
        writeln!(out, "{}\t{}", p.context, p.response)?;
    }
    Ok(())
}

/// Keeps the `keep_n` highest-scoring items in their original order.
/// Among equal scores at the cut, earlier items win.
pub fn filter_least_specific<E: Clone>(
    examples: &[E],
    scores: &[f64],
    keep_n: usize,
) -> Result<Vec<E>> {
    if examples.len() != scores.len() {
        return Err(Error::dims(examples.len(), scores.len()));
    }
    if keep_n > examples.len() {
        return Err(Error::OutOfRange {
            value: keep_n as f64,
            lo: 0.0,
            hi: examples.len() as f64,
        });
    }
    let mut order: Vec<usize> = (0..examples.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut keep = vec![false; examples.len()];
    for &i in &order[..keep_n] {
        keep[i] = true;
    }
    Ok(examples
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(e, _)| e.clone())
        .collect())
}

/// Keeps pairs whose response has at least `min_len` tokens.
pub fn filter_short(examples: &[DialoguePair], min_len: usize) -> Vec<DialoguePair> {
    examples
        .iter()
        .filter(|p| p.response_tokens().len() >= min_len)
        .cloned()
        .collect()
}

/// Pooled type-token ratio of n-grams of the given order (1 or 2).
pub fn diversity<S: AsRef<str>>(corpus: &[Vec<S>], order: usize) -> Result<f64> {
    if !(1..=2).contains(&order) {
        return Err(Error::Config(format!(
            "diversity order must be 1 or 2, got {order}"
        )));
    }
    let mut types: HashSet<Vec<&str>> = HashSet::new();
    let mut total = 0usize;
    for tokens in corpus {
        for gram in tokens.windows(order) {
            types.insert(gram.iter().map(AsRef::as_ref).collect());
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(types.len() as f64 / total as f64)
}

/// Summary of one filtering run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterReport {
    pub kept_n: usize,
    pub removed_n: usize,
    pub unigram_diversity: f64,
    pub bigram_diversity: f64,
}

impl FilterReport {
    /// Diversity is NaN when the kept responses have no n-grams of that order.
    pub fn new(original: usize, kept: &[DialoguePair]) -> Self {
        let tokens: Vec<Vec<String>> = kept.iter().map(DialoguePair::response_tokens).collect();
        FilterReport {
            kept_n: kept.len(),
            removed_n: original - kept.len(),
            unigram_diversity: diversity(&tokens, 1).unwrap_or(f64::NAN),
            bigram_diversity: diversity(&tokens, 2).unwrap_or(f64::NAN),
        }
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "kept_n\tremoved_n\tunigram_diversity\tbigram_diversity"
        )?;
        writeln!(
            out,
            "{}\t{}\t{:.6}\t{:.6}",
            self.kept_n, self.removed_n, self.unigram_diversity, self.bigram_diversity
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair(resp: &str) -> DialoguePair {
        DialoguePair {
            context: "ctx".into(),
            response: resp.into(),
        }
    }

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn least_specific_examples() {
        let items = vec!["a", "b", "c"];
        let scores = [0.1, 0.9, 0.5];
        assert_eq!(filter_least_specific(&items, &scores, 3).unwrap(), items);
        assert!(filter_least_specific(&items, &scores, 0)
            .unwrap()
            .is_empty());
        assert_eq!(
            filter_least_specific(&items, &scores, 2).unwrap(),
            vec!["b", "c"]
        );
        assert!(filter_least_specific(&items, &scores[..2], 1).is_err());
        assert!(filter_least_specific(&items, &scores, 4).is_err());
    }

    #[test]
    fn ties_keep_earlier() {
        let items = vec![0, 1, 2, 3];
        assert_eq!(
            filter_least_specific(&items, &[0.5, 0.5, 0.9, 0.5], 2).unwrap(),
            vec![0, 2]
        );
    }

    #[test]
    fn short_filter() {
        let pairs = vec![pair("a b c"), pair("a b c d e"), pair("a b c d e f g")];
        assert_eq!(filter_short(&pairs, 0), pairs);
        assert_eq!(filter_short(&pairs, 5), pairs[1..].to_vec());
    }

    #[test]
    fn diversity_examples() {
        assert_eq!(diversity(&[toks("a b a b")], 1).unwrap(), 0.5);
        assert_eq!(diversity(&[toks("x y z")], 1).unwrap(), 1.0);
        assert_eq!(diversity(&[toks("a a a")], 2).unwrap(), 0.5);
        assert!(matches!(
            diversity(&[toks("a"), toks("b")], 2),
            Err(Error::EmptyCorpus)
        ));
        // n-grams never span responses
        assert_eq!(diversity(&[toks("a b"), toks("b a")], 2).unwrap(), 1.0);
    }

    #[test]
    fn report_and_io() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pairs.tsv");
        std::fs::write(&path, "hi\thello there\n\nhow\tfine thanks , you ?\n").unwrap();
        let pairs = load_pairs(&path).unwrap();
        assert_eq!(pairs.len(), 2);
        let report = FilterReport::new(3, &pairs);
        assert_eq!((report.kept_n, report.removed_n), (2, 1));
        let mut out = Vec::new();
        report.write_tsv(&mut out).unwrap();
        assert!(String::from_utf8(out)
            .unwrap()
            .starts_with("kept_n\tremoved_n"));

        std::fs::write(&path, "no tab here\n").unwrap();
        assert!(matches!(
            load_pairs(&path),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    proptest! {
        #[test]
        fn kept_scores_dominate(scores in prop::collection::vec(0u8..10, 0..40), frac in 0.0f64..=1.0) {
            let scores: Vec<f64> = scores.into_iter().map(|s| s as f64 / 10.0).collect();
            let idx: Vec<usize> = (0..scores.len()).collect();
            let keep_n = (frac * scores.len() as f64) as usize;
            let kept = filter_least_specific(&idx, &scores, keep_n).unwrap();
            prop_assert_eq!(kept.len(), keep_n);
            prop_assert!(kept.windows(2).all(|w| w[0] < w[1]));
            let removed: Vec<usize> = idx.iter().copied().filter(|i| !kept.contains(i)).collect();
            for &k in &kept {
                for &r in &removed {
                    prop_assert!(scores[k] > scores[r] || (scores[k] == scores[r] && k < r));
                }
            }
        }

        #[test]
        fn duplicates_never_raise_diversity(
            corpus in prop::collection::vec(prop::collection::vec("[a-d]", 2..6), 1..10),
            pick in 0usize..10,
        ) {
            let dup = corpus[pick % corpus.len()].clone();
            let mut more = corpus.clone();
            more.push(dup);
            for order in 1..=2 {
                let before = diversity(&corpus, order).unwrap();
                let after = diversity(&more, order).unwrap();
                prop_assert!(after <= before + 1e-15);
                prop_assert!(before > 0.0 && before <= 1.0);
            }
        }
    }
}

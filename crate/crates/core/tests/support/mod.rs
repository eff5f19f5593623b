//! Synthetic two-domain specificity corpora with a known latent score.
//!
//! Every sentence is drawn from a propensity `z ~ U(0,1)`: higher `z` means
//! longer sentences, more numbers, fewer stopwords and rarer content words.
//! The latent specificity is then computed from the *observed* tokens only:
//!
//! `latent = ln(n_tokens) + 4·numeric_density + 0.5·mean_idf`
//!
//! so it is a fixed monotone function of token count, numeric density and
//! idf statistics. Source and target share stopwords, numbers and
//! punctuation but use disjoint content vocabularies; target sentences are
//! also a little shorter. Source labels are binary (noisy threshold on the
//! standardized latent); held-out target labels are the latent rescaled to
//! the reference mean and standard deviation and clamped to [0,1].

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use specadapt::corpusio::{
    tokenize, DomainTag, EmbeddingTable, IdfTable, Label, LabeledExample, LexiconResources,
    Sentence,
};
use specadapt::Scalar;

pub const EMBEDDING_DIM: usize = 16;
const VOCAB: usize = 1500;
const STOPWORDS: &[&str] = &[
    "the", "a", "of", "and", "to", "in", "is", "it", "that", "was", "for", "on", "with", "as",
    "be", "at", "by", "this", "had", "not",
];
const PUNCT: &[&str] = &[",", ";", ":"];
const MU_R: f64 = 0.417;
const SIGMA_R: f64 = 0.227;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Source,
    Target,
}

fn content_word(domain: Domain, rank: usize) -> String {
    // letters only, disjoint prefixes per domain
    let prefix = match domain {
        Domain::Source => "sr",
        Domain::Target => "tq",
    };
    let mut s = String::from(prefix);
    let mut r = rank;
    loop {
        s.push((b'a' + (r % 26) as u8) as char);
        r /= 26;
        if r == 0 {
            break;
        }
    }
    s
}

/// Idf by construction: Zipf-like rank → frequency.
fn content_idf(rank: usize) -> f64 {
    (2.0 + rank as f64).ln()
}

const STOPWORD_IDF: f64 = 0.2;
const PUNCT_IDF: f64 = 0.1;
const NUMBER_IDF: f64 = 4.0;
const PERIOD_IDF: f64 = 0.0;

fn is_number(tok: &str) -> bool {
    tok.chars().next().is_some_and(|c| c.is_ascii_digit())
}

/// Idf of a generated token, computed from the generator's own tables.
pub fn token_idf(tok: &str) -> f64 {
    if tok == "." {
        PERIOD_IDF
    } else if PUNCT.contains(&tok) {
        PUNCT_IDF
    } else if STOPWORDS.contains(&tok) {
        STOPWORD_IDF
    } else if is_number(tok) {
        NUMBER_IDF
    } else {
        let rank = tok[2..]
            .bytes()
            .rev()
            .fold(0usize, |acc, b| acc * 26 + (b - b'a') as usize);
        content_idf(rank)
    }
}

/// The latent specificity score of a token sequence.
pub fn latent(tokens: &[String]) -> f64 {
    let n = tokens.len() as f64;
    let numeric = tokens.iter().filter(|t| is_number(t)).count() as f64 / n;
    let mean_idf = tokens.iter().map(|t| token_idf(t)).sum::<f64>() / n;
    n.ln() + 4.0 * numeric + 0.5 * mean_idf
}

fn number_token(rng: &mut ChaCha8Rng) -> String {
    if rng.random_bool(0.3) {
        format!("{}.{}", rng.random_range(1..100), rng.random_range(0..10))
    } else {
        rng.random_range(1..2000).to_string()
    }
}

fn sentence_tokens(domain: Domain, rng: &mut ChaCha8Rng) -> Vec<String> {
    let z: f64 = rng.random();
    let mean_len = match domain {
        Domain::Source => 6.0 + 22.0 * z,
        Domain::Target => 5.0 + 18.0 * z,
    };
    let jitter: f64 = Normal::new(0.0, 2.5).unwrap().sample(rng);
    let len = (mean_len + jitter).round().clamp(3.0, 45.0) as usize;
    let p_num = 0.02 + 0.18 * z;
    let p_stop = 0.45 - 0.25 * z;
    let zipf = 3.0 - 2.2 * z;
    let mut out = Vec::with_capacity(len);
    for _ in 0..len - 1 {
        let u: f64 = rng.random();
        if u < p_num {
            out.push(number_token(rng));
        } else if u < p_num + p_stop {
            out.push(STOPWORDS[rng.random_range(0..STOPWORDS.len())].to_string());
        } else if u < p_num + p_stop + 0.06 {
            out.push(PUNCT[rng.random_range(0..PUNCT.len())].to_string());
        } else {
            let v: f64 = rng.random();
            let rank = ((VOCAB as f64) * v.powf(zipf)) as usize;
            out.push(content_word(domain, rank.min(VOCAB - 1)));
        }
    }
    out.push(".".to_string());
    out
}

fn to_sentence(tokens: &[String]) -> Sentence {
    let s = tokenize(&tokens.join(" ")).expect("generated sentence is nonempty");
    assert_eq!(
        s.tokens, tokens,
        "generated text must tokenize back to its tokens"
    );
    s
}

pub struct SyntheticCorpus<T> {
    pub source: Vec<LabeledExample>,
    pub target_unlabeled: Vec<Sentence>,
    /// Real-valued labels from the latent function.
    pub target_heldout: Vec<LabeledExample>,
    pub embeddings: EmbeddingTable<T>,
    pub lexicons: LexiconResources,
}

impl<T> SyntheticCorpus<T> {
    pub fn heldout_sentences(&self) -> Vec<Sentence> {
        self.target_heldout
            .iter()
            .map(|e| e.sentence.clone())
            .collect()
    }

    pub fn heldout_labels(&self) -> Vec<f64> {
        self.target_heldout
            .iter()
            .map(|e| e.label.value())
            .collect()
    }
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let s = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    (m, s)
}

fn embeddings<T: Scalar>(rng: &mut ChaCha8Rng) -> EmbeddingTable<T> {
    let mut vec = |scale: f64, base: Option<&[f64]>| -> Vec<T> {
        (0..EMBEDDING_DIM)
            .map(|k| {
                let z: f64 = rng.sample(StandardNormal);
                T::lit(base.map_or(0.0, |b| b[k]) + scale * z)
            })
            .collect()
    };
    let number_dir: Vec<f64> = vec(0.5, None).into_iter().map(Scalar::as_f64).collect();
    let mut entries = Vec::new();
    for d in [Domain::Source, Domain::Target] {
        for r in 0..VOCAB {
            entries.push((content_word(d, r), vec(0.5, None)));
        }
    }
    for w in STOPWORDS.iter().chain(PUNCT).chain(&["."]) {
        entries.push((w.to_string(), vec(0.5, None)));
    }
    for n in 1..2000 {
        entries.push((n.to_string(), vec(0.1, Some(&number_dir))));
    }
    EmbeddingTable::new(EMBEDDING_DIM, entries).unwrap()
}

fn lexicons() -> LexiconResources {
    let mut values = BTreeMap::new();
    for d in [Domain::Source, Domain::Target] {
        for r in 0..VOCAB {
            values.insert(content_word(d, r), content_idf(r));
        }
    }
    for w in STOPWORDS {
        values.insert(w.to_string(), STOPWORD_IDF);
    }
    for p in PUNCT {
        values.insert(p.to_string(), PUNCT_IDF);
    }
    values.insert(".".into(), PERIOD_IDF);
    LexiconResources {
        stopwords: STOPWORDS
            .iter()
            .map(|s| s.to_string())
            .collect::<BTreeSet<_>>(),
        // unseen tokens (numbers) take the default
        idf: IdfTable {
            values,
            default: NUMBER_IDF,
        },
        ..LexiconResources::default()
    }
}

/// Source labels: 1 ("specific") when the standardized latent plus logistic
/// noise clears a threshold that leaves roughly 40% positives.
fn binary_label(standardized: f64, rng: &mut ChaCha8Rng) -> u8 {
    let u: f64 = rng.random_range(1e-9..1.0 - 1e-9);
    let noise = 0.3 * (u / (1.0 - u)).ln();
    u8::from(standardized + noise > 0.25)
}

pub fn generate<T: Scalar>(
    seed: u64,
    n_source: usize,
    n_target: usize,
    n_heldout: usize,
) -> SyntheticCorpus<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let embeddings = embeddings::<T>(&mut rng);

    let source_tokens: Vec<Vec<String>> = (0..n_source)
        .map(|_| sentence_tokens(Domain::Source, &mut rng))
        .collect();
    let src_latent: Vec<f64> = source_tokens.iter().map(|t| latent(t)).collect();
    let (sm, ss) = mean_std(&src_latent);
    let source = source_tokens
        .iter()
        .zip(&src_latent)
        .map(|(t, l)| LabeledExample {
            sentence: to_sentence(t),
            label: Label::Binary(binary_label((l - sm) / ss, &mut rng)),
            domain: DomainTag::Source,
        })
        .collect();

    let target_unlabeled = (0..n_target)
        .map(|_| to_sentence(&sentence_tokens(Domain::Target, &mut rng)))
        .collect();

    let held_tokens: Vec<Vec<String>> = (0..n_heldout)
        .map(|_| sentence_tokens(Domain::Target, &mut rng))
        .collect();
    let held_latent: Vec<f64> = held_tokens.iter().map(|t| latent(t)).collect();
    let (hm, hs) = mean_std(&held_latent);
    let target_heldout = held_tokens
        .iter()
        .zip(&held_latent)
        .map(|(t, l)| LabeledExample {
            sentence: to_sentence(t),
            label: Label::Real((MU_R + SIGMA_R * (l - hm) / hs).clamp(0.0, 1.0)),
            domain: DomainTag::Target,
        })
        .collect();

    SyntheticCorpus {
        source,
        target_unlabeled,
        target_heldout,
        embeddings,
        lexicons: lexicons(),
    }
}

//! `specadapt` command-line interface.
//!
//! Exit codes: 0 success, 2 input error, 3 training divergence, 4 model-state
//! mismatch.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use specadapt::checkpoint::checkpoint_scalar;
use specadapt::config::{Precision, RunConfig};
use specadapt::corpusfilter::{self, DialoguePair, FilterReport};
use specadapt::corpusio::{
    compute_idf, load_labeled_corpus, load_unlabeled_corpus, tokenize, DomainTag, EmbeddingTable,
    LexiconPaths, LexiconResources, Sentence,
};
use specadapt::evalmetrics;
use specadapt::features::{extract_features, write_features_csv};
use specadapt::trainer::{self, TrainInputs};
use specadapt::{Checkpoint, Error, Scalar};

const CHECKPOINT_FILE: &str = "model.json";
const LOG_FILE: &str = "train_log.csv";
const FROZEN_CONFIG_FILE: &str = "config.cfg";

#[derive(Parser)]
#[command(
    name = "specadapt",
    version,
    about = "Domain-adaptive sentence specificity prediction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Train student and teacher networks and write a checkpoint.
    Train(TrainArgs),
    /// Score sentences with a trained checkpoint's teacher network.
    Predict(PredictArgs),
    /// Compare predictions with gold labels (Spearman, Kendall tau-b, MAE).
    Eval(EvalArgs),
    /// Score sentences by min-max normalized token count.
    BaselineLength(BaselineArgs),
    /// Filter a context/response corpus by response length or specificity.
    Filter(FilterArgs),
    /// Histogram of predictions with a fitted Gaussian, as CSV.
    Hist(HistArgs),
    /// Export shallow features as CSV.
    Features(FeaturesArgs),
}

#[derive(Args, Default)]
struct LexiconArgs {
    /// One stopword per line.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// One connective (possibly multiword) per line.
    #[arg(long)]
    connectives: Option<PathBuf>,
    #[arg(long)]
    polarity: Option<PathBuf>,
    #[arg(long)]
    subjective: Option<PathBuf>,
    /// token<TAB>score lines.
    #[arg(long)]
    familiarity: Option<PathBuf>,
    /// token<TAB>score lines.
    #[arg(long)]
    imageability: Option<PathBuf>,
    /// token<TAB>idf lines; computed from the corpus when absent.
    #[arg(long)]
    idf: Option<PathBuf>,
}

impl LexiconArgs {
    fn paths(&self) -> LexiconPaths {
        LexiconPaths {
            stopwords: self.stopwords.clone(),
            connectives: self.connectives.clone(),
            polarity: self.polarity.clone(),
            subjective: self.subjective.clone(),
            familiarity: self.familiarity.clone(),
            imageability: self.imageability.clone(),
            idf: self.idf.clone(),
        }
    }

    fn overrides(&self) -> Vec<(&'static str, String)> {
        let named = [
            ("stopwords", &self.stopwords),
            ("connectives", &self.connectives),
            ("polarity", &self.polarity),
            ("subjective", &self.subjective),
            ("familiarity", &self.familiarity),
            ("imageability", &self.imageability),
            ("idf", &self.idf),
        ];
        named
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|p| (k, p.display().to_string())))
            .collect()
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Run configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// se, se_d, se_a, se_ad_kl, se_ad_meanstd or se_ad_noaug.
    #[arg(long)]
    variant: Option<String>,
    /// Binary-labeled source corpus (label<TAB>text).
    #[arg(long)]
    source: Option<PathBuf>,
    /// Unlabeled target corpus, one sentence per line.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Development set with real-valued labels (label<TAB>text).
    #[arg(long)]
    dev: Option<PathBuf>,
    /// Word vectors in word2vec text format.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    precision: Option<String>,
    /// Any configuration key, as key=value; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(flatten)]
    lexicons: LexiconArgs,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Word vectors used in training (checked against the stored vocabulary hash).
    #[arg(long)]
    embeddings: PathBuf,
    /// One sentence per line.
    #[arg(long)]
    input: PathBuf,
    /// Output TSV (sentence<TAB>score); stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// sentence<TAB>score lines.
    #[arg(long)]
    predictions: PathBuf,
    /// label<TAB>sentence lines.
    #[arg(long)]
    gold: PathBuf,
    /// Report TSV (metric<TAB>value<TAB>n).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterMode {
    /// Remove responses shorter than --min-len tokens.
    Short,
    /// Remove the least specific responses, keeping --keep-n.
    General,
}

#[derive(Args)]
struct FilterArgs {
    /// context<TAB>response lines.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_enum)]
    mode: FilterMode,
    #[arg(long, default_value_t = 5)]
    min_len: usize,
    /// Number of pairs to keep in general mode.
    #[arg(long)]
    keep_n: Option<usize>,
    /// In general mode, keep as many pairs as `short` mode would with this length.
    #[arg(long, conflicts_with = "keep_n")]
    match_min_len: Option<usize>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Filtered corpus TSV.
    #[arg(long)]
    output: PathBuf,
    /// Report TSV (kept_n, removed_n, unigram_diversity, bigram_diversity).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct HistArgs {
    /// sentence<TAB>score lines, or one score per line.
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long, default_value_t = 10)]
    bins: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FeaturesArgs {
    /// One sentence per line.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    lexicons: LexiconArgs,
}

/// Failure with its process exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn exit_code(error: &anyhow::Error) -> u8 {
    match error.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::Divergence(_)) => 3,
        Some(Error::ModelState(_)) => 4,
        _ => 2,
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure {
            code: exit_code(&error),
            error,
        }
    }
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        anyhow::Error::from(error).into()
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Eval(a) => cmd_eval(a),
        Command::BaselineLength(a) => cmd_baseline_length(a),
        Command::Filter(a) => cmd_filter(a),
        Command::Hist(a) => cmd_hist(a),
        Command::Features(a) => cmd_features(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn output_writer(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

/// Non-empty lines with their 1-based line numbers; empty lines are reported.
fn read_sentences(path: &Path) -> anyhow::Result<Vec<(usize, Sentence)>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        match tokenize(line) {
            Ok(s) => out.push((i + 1, s)),
            Err(_) => log::warn!("{}:{}: empty line skipped", path.display(), i + 1),
        }
    }
    Ok(out)
}

fn clean_tsv_field(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

// ---------------------------------------------------------------- train

fn resolve_train_config(args: &TrainArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut push = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            overrides.push((k.to_string(), v));
        }
    };
    let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
    push("variant", args.variant.clone());
    push("source", path(&args.source));
    push("target", path(&args.target));
    push("dev", path(&args.dev));
    push("embeddings", path(&args.embeddings));
    push("output_dir", path(&args.output_dir));
    push("seed", args.seed.map(|s| s.to_string()));
    push("epochs", args.epochs.map(|e| e.to_string()));
    push("batch_size", args.batch_size.map(|b| b.to_string()));
    push("precision", args.precision.clone());
    for (k, v) in args.lexicons.overrides() {
        overrides.push((k.to_string(), v));
    }
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got {kv:?}"))?;
        overrides.push((k.trim().to_string(), v.to_string()));
    }
    for (k, v) in overrides {
        cfg.set(&k, &v)
            .with_context(|| format!("command-line override {k}"))?;
    }
    if !cfg.seed_set {
        if let Ok(seed) = std::env::var("SPECADAPT_SEED") {
            cfg.set("seed", &seed).context("SPECADAPT_SEED")?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_train(args: TrainArgs) -> CmdResult {
    let cfg = resolve_train_config(&args)?;
    match cfg.precision {
        Precision::F32 => train_with::<f32>(&cfg),
        Precision::F64 => train_with::<f64>(&cfg),
    }
}

fn train_with<T: Scalar>(cfg: &RunConfig) -> CmdResult {
    let source_path = cfg
        .source
        .as_ref()
        .ok_or_else(|| anyhow!("no source corpus given"))?;
    let emb_path = cfg
        .embeddings
        .as_ref()
        .ok_or_else(|| anyhow!("no embeddings given"))?;
    let variant = cfg.training.variant;
    let source = load_labeled_corpus(source_path, DomainTag::Source)?;
    let target = match &cfg.target {
        Some(p) => load_unlabeled_corpus(p)?,
        None if variant.uses_target() => {
            return Err(anyhow!("variant {variant} needs a target corpus").into());
        }
        None => Vec::new(),
    };
    let dev = cfg
        .dev
        .as_ref()
        .map(|p| load_labeled_corpus(p, DomainTag::Target))
        .transpose()?;
    let embeddings = EmbeddingTable::<T>::load(emb_path)?;
    let lexicons = LexiconResources::load(&cfg.lexicons)?;
    let network = cfg.network.build(embeddings.dimension())?;

    fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("cannot create {}", cfg.output_dir.display()))?;
    fs::write(cfg.output_dir.join(FROZEN_CONFIG_FILE), cfg.render())
        .context("cannot write frozen config")?;
    log::info!(
        "training {variant} for {} epochs on {} source / {} target sentences ({})",
        cfg.training.num_epochs(),
        source.len(),
        target.len(),
        T::NAME
    );

    let log_path = cfg.output_dir.join(LOG_FILE);
    let outcome = trainer::train(
        TrainInputs {
            source: &source,
            target: &target,
            dev: dev.as_deref(),
            embeddings: &embeddings,
            lexicons,
        },
        &network,
        &cfg.training,
        |e| {
            if let Some(d) = e.dev {
                log::info!(
                    "epoch {}: dev spearman {:.4} tau {:.4} mae {:.4}",
                    e.epoch,
                    d.spearman,
                    d.kendall_tau,
                    d.mae
                );
            }
        },
    );
    let outcome = outcome?;
    let mut log_out = BufWriter::new(File::create(&log_path).context("cannot write training log")?);
    trainer::write_log_csv(&mut log_out, &outcome.log).context("cannot write training log")?;
    log_out.flush().context("cannot write training log")?;
    let ckpt_path = cfg.output_dir.join(CHECKPOINT_FILE);
    outcome.checkpoint.save(&ckpt_path)?;
    log::info!("wrote {}", ckpt_path.display());
    Ok(())
}

// ---------------------------------------------------------------- predict

fn cmd_predict(args: PredictArgs) -> CmdResult {
    let sentences = read_sentences(&args.input)?;
    let scores = score_sentences(&args.checkpoint, &args.embeddings, &sentences)?;
    let mut out = output_writer(args.output.as_deref())?;
    for ((_, s), score) in sentences.iter().zip(scores) {
        writeln!(out, "{}\t{score:.4}", clean_tsv_field(&s.raw)).context("write failed")?;
    }
    out.flush().context("write failed")?;
    Ok(())
}

fn score_sentences(
    checkpoint: &Path,
    embeddings: &Path,
    sentences: &[(usize, Sentence)],
) -> Result<Vec<f64>, Failure> {
    let plain: Vec<Sentence> = sentences.iter().map(|(_, s)| s.clone()).collect();
    match checkpoint_scalar(checkpoint)?.as_str() {
        "f32" => score_with::<f32>(checkpoint, embeddings, &plain),
        "f64" => score_with::<f64>(checkpoint, embeddings, &plain),
        other => Err(Error::ModelState(format!("unknown scalar type {other:?}")).into()),
    }
}

fn score_with<T: Scalar>(
    checkpoint: &Path,
    embeddings: &Path,
    sentences: &[Sentence],
) -> Result<Vec<f64>, Failure> {
    let ckpt = Checkpoint::<T>::load(checkpoint)?;
    let table = EmbeddingTable::<T>::load(embeddings)?;
    Ok(ckpt
        .predict(&table, sentences)?
        .into_iter()
        .map(Scalar::as_f64)
        .collect())
}

// ---------------------------------------------------------------- eval

/// `(first column, numeric second column)` pairs from `sentence<TAB>score` lines.
fn read_scored(path: &Path) -> anyhow::Result<Vec<(String, f64)>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (sentence, score) = match line.rsplit_once('\t') {
            Some((s, v)) => (s.to_string(), v),
            None => (String::new(), line),
        };
        let score: f64 = score
            .trim()
            .parse()
            .with_context(|| format!("{}:{}: score is not a number", path.display(), i + 1))?;
        out.push((sentence, score));
    }
    Ok(out)
}

/// Pairs predictions with gold labels by line index when the sentences
/// agree line by line, otherwise by sentence text.
fn join_predictions(
    pred: &[(String, f64)],
    gold: &[(f64, String)],
) -> anyhow::Result<(Vec<f64>, Vec<f64>)> {
    let aligned = pred.len() == gold.len()
        && pred
            .iter()
            .zip(gold)
            .all(|(p, g)| p.0.is_empty() || p.0 == g.1);
    if aligned {
        return Ok((
            pred.iter().map(|p| p.1).collect(),
            gold.iter().map(|g| g.0).collect(),
        ));
    }
    let by_text: std::collections::HashMap<&str, f64> =
        pred.iter().map(|(s, v)| (s.as_str(), *v)).collect();
    let mut p = Vec::with_capacity(gold.len());
    let mut g = Vec::with_capacity(gold.len());
    for (label, sentence) in gold {
        let score = by_text
            .get(sentence.as_str())
            .ok_or_else(|| anyhow!("no prediction for gold sentence {sentence:?}"))?;
        p.push(*score);
        g.push(*label);
    }
    Ok((p, g))
}

fn cmd_eval(args: EvalArgs) -> CmdResult {
    let pred = read_scored(&args.predictions)?;
    let gold: Vec<(f64, String)> = load_labeled_corpus(&args.gold, DomainTag::Target)?
        .into_iter()
        .map(|e| (e.label.value(), clean_tsv_field(&e.sentence.raw)))
        .collect();
    let (p, g) = join_predictions(&pred, &gold)?;
    let n = p.len();
    let rows = [
        ("spearman", evalmetrics::spearman(&p, &g)?),
        ("kendall_tau", evalmetrics::kendall_tau(&p, &g)?),
        ("mae", evalmetrics::mae(&p, &g)?),
    ];
    let mut report = String::from("metric\tvalue\tn\n");
    for (name, value) in rows {
        report.push_str(&format!("{name}\t{value:.6}\t{n}\n"));
    }
    print!("{report}");
    if let Some(path) = &args.output {
        fs::write(path, &report).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

// ---------------------------------------------------------------- baseline

/// Min-max normalized token counts; all 0.5 when every length is equal.
fn length_scores(lengths: &[usize]) -> Vec<f64> {
    let (Some(&lo), Some(&hi)) = (lengths.iter().min(), lengths.iter().max()) else {
        return Vec::new();
    };
    lengths
        .iter()
        .map(|&l| {
            if hi == lo {
                0.5
            } else {
                (l - lo) as f64 / (hi - lo) as f64
            }
        })
        .collect()
}

fn cmd_baseline_length(args: BaselineArgs) -> CmdResult {
    let sentences = read_sentences(&args.input)?;
    let lengths: Vec<usize> = sentences.iter().map(|(_, s)| s.len()).collect();
    let mut out = output_writer(args.output.as_deref())?;
    for ((_, s), score) in sentences.iter().zip(length_scores(&lengths)) {
        writeln!(out, "{}\t{score:.4}", clean_tsv_field(&s.raw)).context("write failed")?;
    }
    out.flush().context("write failed")?;
    Ok(())
}

// ---------------------------------------------------------------- filter

fn cmd_filter(args: FilterArgs) -> CmdResult {
    let pairs = corpusfilter::load_pairs(&args.corpus)?;
    let kept: Vec<DialoguePair> = match args.mode {
        FilterMode::Short => corpusfilter::filter_short(&pairs, args.min_len),
        FilterMode::General => {
            let keep_n = match (args.keep_n, args.match_min_len) {
                (Some(k), _) => k,
                (None, Some(m)) => corpusfilter::filter_short(&pairs, m).len(),
                (None, None) => bail_input("general mode needs --keep-n or --match-min-len")?,
            };
            let (Some(ckpt), Some(emb)) = (&args.checkpoint, &args.embeddings) else {
                return bail_input("general mode needs --checkpoint and --embeddings");
            };
            let mut sentences = Vec::with_capacity(pairs.len());
            for (i, p) in pairs.iter().enumerate() {
                let s =
                    tokenize(&p.response).map_err(|_| anyhow!("pair {}: empty response", i + 1))?;
                sentences.push((i + 1, s));
            }
            let scores = score_sentences(ckpt, emb, &sentences)?;
            corpusfilter::filter_least_specific(&pairs, &scores, keep_n)?
        }
    };
    let mut out =
        BufWriter::new(File::create(&args.output).context("cannot write filtered corpus")?);
    corpusfilter::write_pairs(&mut out, &kept).context("cannot write filtered corpus")?;
    out.flush().context("cannot write filtered corpus")?;
    let report = FilterReport::new(pairs.len(), &kept);
    let mut text = Vec::new();
    report.write_tsv(&mut text).context("report")?;
    print!("{}", String::from_utf8_lossy(&text));
    if let Some(path) = &args.report {
        fs::write(path, &text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn bail_input<T>(msg: &str) -> Result<T, Failure> {
    Err(Failure {
        code: 2,
        error: anyhow!("{msg}"),
    })
}

// ---------------------------------------------------------------- hist

fn cmd_hist(args: HistArgs) -> CmdResult {
    let values: Vec<f64> = read_scored(&args.predictions)?
        .into_iter()
        .map(|(_, v)| v)
        .collect();
    if values.is_empty() {
        return bail_input(&format!("no predictions in {}", args.predictions.display()));
    }
    let hist = evalmetrics::histogram(&values, args.bins)?;
    let mut out = output_writer(args.output.as_deref())?;
    hist.write_csv(&mut out).context("write failed")?;
    out.flush().context("write failed")?;
    eprintln!(
        "n = {}, fitted mean = {:.6}, fitted std = {:.6}",
        values.len(),
        hist.mean,
        hist.std
    );
    Ok(())
}

// ---------------------------------------------------------------- features

fn cmd_features(args: FeaturesArgs) -> CmdResult {
    let sentences: Vec<Sentence> = read_sentences(&args.input)?
        .into_iter()
        .map(|(_, s)| s)
        .collect();
    let mut lexicons = LexiconResources::load(&args.lexicons.paths())?;
    if !lexicons.has_idf() {
        lexicons.idf = compute_idf(&sentences)?;
    }
    let rows = sentences
        .iter()
        .map(|s| extract_features(s, &lexicons).map(|f| (s, f)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = output_writer(args.output.as_deref())?;
    write_features_csv(&mut out, &rows).context("write failed")?;
    out.flush().context("write failed")?;
    Ok(())
}

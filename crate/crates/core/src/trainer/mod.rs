//! Student/teacher self-ensembling with posterior-distribution regularization.

mod batching;
mod ema;
mod losses;
mod optim;

use ndarray::Array1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::augment::{augment, NoiseConfig};
use crate::checkpoint::Checkpoint;
use crate::corpusio::{
    compute_idf, EmbeddingTable, LabeledExample, LexiconResources, ReferenceDistribution, Sentence,
};
use crate::error::{Error, Result};
use crate::evalmetrics;
use crate::features::{extract_features, standardize_features, FeatureStats, ShallowFeatures};
use crate::scalar::Scalar;
use crate::specnet::{self, ForwardOptions, ModelParameters, NetInput, NetworkConfig};

pub use batching::{make_batches, Batch, CyclingSampler};
pub use ema::ema_update;
pub use losses::{
    consistency_loss, consistency_loss_with_grad, distribution_loss_with_grad, kl_reg_loss,
    meanstd_reg_loss, supervised_loss, supervised_loss_with_grad, total_loss, BatchPosteriorStats,
    DistributionLoss, SIGMA_FLOOR,
};
pub use optim::{AdamConfig, AdamState};

/// System variants: which loss terms and which noise are active.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Teacher by moving average only.
    Se,
    /// Mean/std distribution loss, no consistency loss.
    SeD,
    /// Consistency loss, no distribution loss.
    SeA,
    SeAdKl,
    SeAdMeanstd,
    /// As `SeAdMeanstd` without input noise.
    SeAdNoaug,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Se,
        Variant::SeD,
        Variant::SeA,
        Variant::SeAdKl,
        Variant::SeAdMeanstd,
        Variant::SeAdNoaug,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Se => "se",
            Variant::SeD => "se_d",
            Variant::SeA => "se_a",
            Variant::SeAdKl => "se_ad_kl",
            Variant::SeAdMeanstd => "se_ad_meanstd",
            Variant::SeAdNoaug => "se_ad_noaug",
        }
    }

    pub fn uses_consistency(self) -> bool {
        matches!(
            self,
            Variant::SeA | Variant::SeAdKl | Variant::SeAdMeanstd | Variant::SeAdNoaug
        )
    }

    pub fn distribution(self) -> Option<DistributionLoss> {
        match self {
            Variant::Se | Variant::SeA => None,
            Variant::SeAdKl => Some(DistributionLoss::Kl),
            Variant::SeD | Variant::SeAdMeanstd | Variant::SeAdNoaug => {
                Some(DistributionLoss::MeanStd)
            }
        }
    }

    /// Input noise only serves the consistency loss.
    pub fn augments(self) -> bool {
        matches!(self, Variant::SeA | Variant::SeAdKl | Variant::SeAdMeanstd)
    }

    pub fn uses_target(self) -> bool {
        self.uses_consistency() || self.distribution().is_some()
    }

    pub fn default_epochs(self) -> usize {
        match self {
            Variant::Se => 10,
            Variant::SeD => 15,
            _ => 30,
        }
    }

    pub fn default_c2(self) -> f64 {
        match self.distribution() {
            Some(DistributionLoss::Kl) => 10.0,
            Some(DistributionLoss::MeanStd) => 100.0,
            None => 0.0,
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_lowercase().replace(['+', '-'], "_");
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == norm)
            .ok_or_else(|| Error::Config(format!("unknown variant {s:?}")))
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Every training hyperparameter. `c1`, `c2` and `epochs` fall back to the
/// variant defaults when unset; the variant always gates which weights apply.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub variant: Variant,
    pub alpha: f64,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub beta: f64,
    pub batch_size: usize,
    pub epochs: Option<usize>,
    pub optimizer: AdamConfig,
    pub reference: ReferenceDistribution,
    pub noise: NoiseConfig,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self::for_variant(Variant::SeAdMeanstd)
    }
}

impl TrainingConfig {
    pub fn for_variant(variant: Variant) -> Self {
        TrainingConfig {
            variant,
            alpha: 0.999,
            c1: None,
            c2: None,
            beta: 1.0,
            batch_size: 32,
            epochs: None,
            optimizer: AdamConfig::default(),
            reference: ReferenceDistribution::news(),
            noise: NoiseConfig::default(),
            seed: 0,
        }
    }

    /// Effective `(c1, c2)` after variant gating.
    pub fn loss_weights(&self) -> (f64, f64) {
        let c1 = if self.variant.uses_consistency() {
            self.c1.unwrap_or(1000.0)
        } else {
            0.0
        };
        let c2 = if self.variant.distribution().is_some() {
            self.c2.unwrap_or_else(|| self.variant.default_c2())
        } else {
            0.0
        };
        (c1, c2)
    }

    pub fn num_epochs(&self) -> usize {
        self.epochs.unwrap_or_else(|| self.variant.default_epochs())
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!(
                "alpha must lie in [0,1], got {}",
                self.alpha
            )));
        }
        let (c1, c2) = self.loss_weights();
        if !(c1 >= 0.0 && c2 >= 0.0 && self.beta >= 0.0) {
            return Err(Error::Config("c1, c2 and beta must be nonnegative".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if self.variant.distribution().is_some() && c2 > 0.0 && self.batch_size < 2 {
            return Err(Error::Config(
                "distribution loss needs batch_size >= 2".into(),
            ));
        }
        if self.optimizer.learning_rate.is_nan() || self.optimizer.learning_rate <= 0.0 {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        ReferenceDistribution::new(self.reference.mu_r, self.reference.sigma_r)?;
        self.noise.validate()
    }
}

/// Loss components of one step; `total` is recomputed from the parts with
/// the effective weights.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossBreakdown<T> {
    pub l_ce: T,
    pub l_u: T,
    pub l_d: T,
    pub total: T,
    pub posterior: Option<BatchPosteriorStats<T>>,
}

/// How often the expensive parts of a step ran.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepCounters {
    pub steps: u64,
    pub augment_calls: u64,
    pub teacher_forwards: u64,
    pub target_sentences_forwarded: u64,
}

/// Gradient and forward statistics of a step that has not been applied yet.
pub struct PendingStep<T> {
    pub grad: Vec<T>,
    pub breakdown: LossBreakdown<T>,
    pass: specnet::ForwardPass<T>,
}

struct Streams {
    batches: ChaCha8Rng,
    student_noise: ChaCha8Rng,
    teacher_noise: ChaCha8Rng,
    student_dropout: ChaCha8Rng,
    teacher_dropout: ChaCha8Rng,
}

impl Streams {
    fn new(seed: u64) -> Self {
        let stream = |k: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            rng
        };
        Streams {
            batches: stream(1),
            student_noise: stream(2),
            teacher_noise: stream(3),
            student_dropout: stream(4),
            teacher_dropout: stream(5),
        }
    }
}

/// Encoded corpora ready for training.
pub struct TrainingData<T> {
    pub source: Vec<NetInput<T>>,
    /// Binary labels aligned with `source`.
    pub labels: Vec<T>,
    pub target: Vec<NetInput<T>>,
}

/// Per-epoch means over batches.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochSummary {
    pub epoch: usize,
    pub l_ce: f64,
    pub l_u: f64,
    pub l_d: f64,
    pub total: f64,
    /// Mean batch posterior mean and std (NaN when no distribution loss ran).
    pub mu_p: f64,
    pub sigma_p: f64,
    pub dev: Option<DevMetrics>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DevMetrics {
    pub spearman: f64,
    pub kendall_tau: f64,
    pub mae: f64,
}

pub struct Trainer<T> {
    pub config: TrainingConfig,
    pub student: ModelParameters<T>,
    pub teacher: ModelParameters<T>,
    pub optimizer: AdamState<T>,
    pub counters: StepCounters,
    streams: Streams,
    target_stream: Option<CyclingSampler>,
}

impl<T: Scalar> Trainer<T> {
    /// Student initialized from the seed; the teacher starts as its copy.
    pub fn new(network: &NetworkConfig, config: TrainingConfig) -> Result<Self> {
        config.validate()?;
        let student = ModelParameters::init(network, config.seed)?;
        let teacher = student.clone_params();
        let optimizer = AdamState::new(student.num_weights());
        Ok(Trainer {
            streams: Streams::new(config.seed),
            config,
            student,
            teacher,
            optimizer,
            counters: StepCounters::default(),
            target_stream: None,
        })
    }

    /// Forward passes, losses and the student gradient. Neither network is modified.
    pub fn compute_step(
        &mut self,
        source: &[&NetInput<T>],
        labels: &[T],
        target: &[&NetInput<T>],
    ) -> Result<PendingStep<T>> {
        if source.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if source.len() != labels.len() {
            return Err(Error::dims(source.len(), labels.len()));
        }
        let variant = self.config.variant;
        let (c1, c2) = self.config.loss_weights();
        let use_target = variant.uses_target();
        let use_teacher = variant.uses_consistency();
        let noise = variant.augments().then(|| self.config.noise.clone());

        let sentences: Vec<&NetInput<T>> = if use_target {
            source.iter().chain(target).copied().collect()
        } else {
            source.to_vec()
        };
        self.counters.steps += 1;
        if use_target {
            self.counters.target_sentences_forwarded += target.len() as u64;
        }

        let student_in = self.noisy(&sentences, noise.as_ref(), true);
        let pass = specnet::forward_batch(
            &self.student,
            &student_in,
            ForwardOptions::train(),
            &mut self.streams.student_dropout,
        )?;
        let preds = &pass.predictions;
        let n_src = source.len();

        let (l_ce, g_ce) = supervised_loss_with_grad(&preds[..n_src], labels)?;
        let mut d_preds = vec![T::zero(); preds.len()];
        d_preds[..n_src].copy_from_slice(&g_ce);

        let mut l_u = T::zero();
        if use_teacher {
            let teacher_in = self.noisy(&sentences, noise.as_ref(), false);
            self.counters.teacher_forwards += 1;
            let t_pass = specnet::forward_batch(
                &self.teacher,
                &teacher_in,
                ForwardOptions::teacher(),
                &mut self.streams.teacher_dropout,
            )?;
            let (l, g) = consistency_loss_with_grad(preds, &t_pass.predictions)?;
            l_u = l;
            let w = T::lit(c1);
            d_preds.iter_mut().zip(g).for_each(|(d, g)| *d += w * g);
        }

        let mut l_d = T::zero();
        let mut posterior = None;
        if let Some(kind) = variant.distribution() {
            let (l, g, stats) =
                distribution_loss_with_grad(kind, preds, &self.config.reference, self.config.beta)?;
            l_d = l;
            posterior = Some(stats);
            let w = T::lit(c2);
            d_preds.iter_mut().zip(g).for_each(|(d, g)| *d += w * g);
        }

        let total = total_loss(l_ce, l_u, l_d, c1, c2);
        if !(total.is_finite() && l_ce.is_finite() && l_u.is_finite() && l_d.is_finite()) {
            return Err(Error::Divergence(format!(
                "step {}: l_ce={l_ce} l_u={l_u} l_d={l_d} total={total}",
                self.counters.steps
            )));
        }

        let d_logits: Vec<T> = d_preds
            .iter()
            .zip(preds)
            .map(|(d, p)| *d * *p * (T::one() - *p))
            .collect();
        let grad = specnet::backward(&self.student, &pass, &d_logits)?;
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Divergence(format!(
                "step {}: non-finite gradient",
                self.counters.steps
            )));
        }
        Ok(PendingStep {
            grad,
            breakdown: LossBreakdown {
                l_ce,
                l_u,
                l_d,
                total,
                posterior,
            },
            pass,
        })
    }

    fn noisy(
        &mut self,
        sentences: &[&NetInput<T>],
        noise: Option<&NoiseConfig>,
        student: bool,
    ) -> Vec<NetInput<T>> {
        match noise {
            None => sentences.iter().map(|s| (*s).clone()).collect(),
            Some(cfg) => {
                let rng = if student {
                    &mut self.streams.student_noise
                } else {
                    &mut self.streams.teacher_noise
                };
                self.counters.augment_calls += sentences.len() as u64;
                sentences
                    .iter()
                    .map(|s| augment(s.tokens.view(), s.features.view(), cfg, rng).0)
                    .collect()
            }
        }
    }

    /// Optimizer update and batch-norm statistics for the student only.
    pub fn apply_optimizer(&mut self, step: &PendingStep<T>) -> Result<()> {
        self.optimizer.update(
            &self.config.optimizer,
            &mut self.student.weights,
            &step.grad,
        )?;
        specnet::update_running_stats(&mut self.student, &step.pass);
        Ok(())
    }

    /// Moves the teacher toward the student.
    pub fn apply_ema(&mut self) -> Result<()> {
        ema_update(&mut self.teacher, &self.student, self.config.alpha)
    }

    /// Gradient step on the student followed by the teacher's moving average.
    pub fn train_step(
        &mut self,
        source: &[&NetInput<T>],
        labels: &[T],
        target: &[&NetInput<T>],
    ) -> Result<LossBreakdown<T>> {
        let step = self.compute_step(source, labels, target)?;
        self.apply_optimizer(&step)?;
        self.apply_ema()?;
        Ok(step.breakdown)
    }

    pub fn run_epoch(&mut self, data: &TrainingData<T>, epoch: usize) -> Result<EpochSummary> {
        if data.source.len() != data.labels.len() {
            return Err(Error::dims(data.source.len(), data.labels.len()));
        }
        let target_len = if self.config.variant.uses_target() {
            data.target.len()
        } else {
            0
        };
        let sampler = self
            .target_stream
            .get_or_insert_with(|| CyclingSampler::new(target_len));
        let batches = make_batches(
            data.source.len(),
            sampler,
            self.config.batch_size,
            &mut self.streams.batches,
        )?;
        let mut sums = [0.0f64; 4];
        let (mut mu_sum, mut sigma_sum, mut n_stats) = (0.0, 0.0, 0usize);
        for batch in &batches {
            let src: Vec<&NetInput<T>> = batch.source.iter().map(|&i| &data.source[i]).collect();
            let labels: Vec<T> = batch.source.iter().map(|&i| data.labels[i]).collect();
            let tgt: Vec<&NetInput<T>> = batch.target.iter().map(|&i| &data.target[i]).collect();
            let b = self.train_step(&src, &labels, &tgt)?;
            for (s, v) in sums.iter_mut().zip([b.l_ce, b.l_u, b.l_d, b.total]) {
                *s += v.as_f64();
            }
            if let Some(p) = b.posterior {
                mu_sum += p.mu_p.as_f64();
                sigma_sum += p.sigma_p.as_f64();
                n_stats += 1;
            }
        }
        let n = batches.len() as f64;
        let avg = |s: f64, k: usize| if k == 0 { f64::NAN } else { s / k as f64 };
        Ok(EpochSummary {
            epoch,
            l_ce: sums[0] / n,
            l_u: sums[1] / n,
            l_d: sums[2] / n,
            total: sums[3] / n,
            mu_p: avg(mu_sum, n_stats),
            sigma_p: avg(sigma_sum, n_stats),
            dev: None,
        })
    }
}

/// Embeds sentences and attaches standardized features.
pub fn encode<T: Scalar>(
    sentences: &[&Sentence],
    embeddings: &EmbeddingTable<T>,
    lexicons: &LexiconResources,
    stats: Option<&FeatureStats>,
) -> Result<Vec<NetInput<T>>> {
    let feats = sentences
        .iter()
        .map(|s| extract_features(s, lexicons))
        .collect::<Result<Vec<ShallowFeatures>>>()?;
    let standardized = standardize_features(&feats, stats)?;
    Ok(sentences
        .iter()
        .zip(standardized)
        .map(|(s, f)| NetInput {
            tokens: embeddings.embed(&s.tokens),
            features: Array1::from_iter(f.iter().map(|v| T::lit(*v))),
        })
        .collect())
}

/// Corpora and resources for a training run.
pub struct TrainInputs<'a, T> {
    /// Binary-labeled source sentences.
    pub source: &'a [LabeledExample],
    /// Unlabeled target sentences.
    pub target: &'a [Sentence],
    /// Optional real-valued development set.
    pub dev: Option<&'a [LabeledExample]>,
    pub embeddings: &'a EmbeddingTable<T>,
    /// Without an idf table, idf is computed from the target corpus (or the
    /// source corpus when there is no target).
    pub lexicons: LexiconResources,
}

pub struct TrainOutcome<T> {
    pub checkpoint: Checkpoint<T>,
    pub log: Vec<EpochSummary>,
    pub counters: StepCounters,
}

/// Trains for the configured number of epochs and returns the checkpoint.
///
/// Runs on one thread and is bitwise reproducible from the seed.
pub fn train<T: Scalar>(
    inputs: TrainInputs<'_, T>,
    network: &NetworkConfig,
    config: &TrainingConfig,
    mut on_epoch: impl FnMut(&EpochSummary),
) -> Result<TrainOutcome<T>> {
    config.validate()?;
    if inputs.source.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if network.embedding_dim != inputs.embeddings.dimension() {
        return Err(Error::dims(
            network.embedding_dim,
            inputs.embeddings.dimension(),
        ));
    }
    let mut labels = Vec::with_capacity(inputs.source.len());
    for ex in inputs.source {
        match ex.label {
            crate::corpusio::Label::Binary(b) => labels.push(T::lit(b as f64)),
            crate::corpusio::Label::Real(r) => {
                return Err(Error::InvalidLabel(format!(
                    "source label {r} is not binary"
                )))
            }
        }
    }
    let mut lexicons = inputs.lexicons;
    if !lexicons.has_idf() {
        lexicons.idf = if inputs.target.is_empty() {
            let src: Vec<Sentence> = inputs.source.iter().map(|e| e.sentence.clone()).collect();
            compute_idf(&src)?
        } else {
            compute_idf(inputs.target)?
        };
    }

    let source_sentences: Vec<&Sentence> = inputs.source.iter().map(|e| &e.sentence).collect();
    let source_feats = source_sentences
        .iter()
        .map(|s| extract_features(s, &lexicons))
        .collect::<Result<Vec<_>>>()?;
    let stats = FeatureStats::fit(&source_feats)?;
    let target_sentences: Vec<&Sentence> = inputs.target.iter().collect();
    let data = TrainingData {
        source: encode(
            &source_sentences,
            inputs.embeddings,
            &lexicons,
            Some(&stats),
        )?,
        labels,
        target: encode(
            &target_sentences,
            inputs.embeddings,
            &lexicons,
            Some(&stats),
        )?,
    };
    let dev = match inputs.dev {
        Some(dev) if dev.len() >= 2 => {
            let sentences: Vec<&Sentence> = dev.iter().map(|e| &e.sentence).collect();
            let gold: Vec<f64> = dev.iter().map(|e| e.label.value()).collect();
            Some((
                encode(&sentences, inputs.embeddings, &lexicons, Some(&stats))?,
                gold,
            ))
        }
        _ => None,
    };

    let mut trainer = Trainer::<T>::new(network, config.clone())?;
    let mut log = Vec::new();
    for epoch in 1..=config.num_epochs() {
        let mut summary = trainer.run_epoch(&data, epoch)?;
        if let Some((encoded, gold)) = &dev {
            let preds: Vec<f64> = specnet::predict_batch(&trainer.teacher, encoded, 256)?
                .into_iter()
                .map(Scalar::as_f64)
                .collect();
            summary.dev = Some(DevMetrics {
                spearman: evalmetrics::spearman(&preds, gold).unwrap_or(f64::NAN),
                kendall_tau: evalmetrics::kendall_tau(&preds, gold).unwrap_or(f64::NAN),
                mae: evalmetrics::mae(&preds, gold)?,
            });
        }
        log::info!(
            "epoch {epoch}: l_ce={:.4} l_u={:.6} l_d={:.4} total={:.4}",
            summary.l_ce,
            summary.l_u,
            summary.l_d,
            summary.total
        );
        on_epoch(&summary);
        log.push(summary);
    }

    let checkpoint = Checkpoint::new(
        network.clone(),
        config.clone(),
        trainer.student,
        trainer.teacher,
        trainer.optimizer,
        Some(stats),
        lexicons,
        inputs.embeddings.vocab_hash(),
        config.num_epochs(),
    );
    Ok(TrainOutcome {
        checkpoint,
        log,
        counters: trainer.counters,
    })
}

/// Writes the per-epoch log as CSV.
pub fn write_log_csv<W: std::io::Write>(mut out: W, log: &[EpochSummary]) -> std::io::Result<()> {
    writeln!(out, "epoch,l_ce,l_u,l_d,total,dev_spearman,dev_tau,dev_mae")?;
    for e in log {
        let dev = match e.dev {
            Some(d) => format!("{},{},{}", d.spearman, d.kendall_tau, d.mae),
            None => ",,".to_string(),
        };
        writeln!(
            out,
            "{},{},{},{},{},{}",
            e.epoch, e.l_ce, e.l_u, e.l_d, e.total, dev
        )?;
    }
    Ok(())
}

/// Gradient of one objective with respect to the network weights, with
/// dropout off and batch norm on its running statistics.
#[derive(Clone, Copy, Debug)]
pub enum Objective<'a, T> {
    /// Labels for the first `labels.len()` sentences.
    CrossEntropy {
        labels: &'a [T],
    },
    Consistency {
        teacher: &'a [T],
    },
    Distribution {
        kind: DistributionLoss,
        reference: ReferenceDistribution,
        beta: f64,
    },
}

impl<T: Scalar> Objective<'_, T> {
    /// Loss value and gradient with respect to the predictions.
    pub fn evaluate(&self, preds: &[T]) -> Result<(T, Vec<T>)> {
        match self {
            Objective::CrossEntropy { labels } => {
                let n = labels.len().min(preds.len());
                let (l, g) = supervised_loss_with_grad(&preds[..n], labels)?;
                let mut full = vec![T::zero(); preds.len()];
                full[..n].copy_from_slice(&g);
                Ok((l, full))
            }
            Objective::Consistency { teacher } => consistency_loss_with_grad(preds, teacher),
            Objective::Distribution {
                kind,
                reference,
                beta,
            } => {
                distribution_loss_with_grad(*kind, preds, reference, *beta).map(|(l, g, _)| (l, g))
            }
        }
    }
}

/// Loss and weight gradient in frozen mode (deterministic).
pub fn objective_gradient<T: Scalar>(
    params: &ModelParameters<T>,
    inputs: &[NetInput<T>],
    objective: &Objective<'_, T>,
) -> Result<(T, Vec<T>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let pass = specnet::forward_batch(params, inputs, ForwardOptions::frozen(), &mut rng)?;
    let (loss, d_preds) = objective.evaluate(&pass.predictions)?;
    let d_logits: Vec<T> = d_preds
        .iter()
        .zip(&pass.predictions)
        .map(|(d, p)| *d * *p * (T::one() - *p))
        .collect();
    Ok((loss, specnet::backward(params, &pass, &d_logits)?))
}

/// Loss only, in frozen mode.
pub fn objective_value<T: Scalar>(
    params: &ModelParameters<T>,
    inputs: &[NetInput<T>],
    objective: &Objective<'_, T>,
) -> Result<T> {
    let preds = specnet::predict_batch(params, inputs, inputs.len())?;
    objective.evaluate(&preds).map(|(l, _)| l)
}

//! Training objectives and their gradients with respect to the predictions.

use serde::{Deserialize, Serialize};

use crate::corpusio::ReferenceDistribution;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const LOG_FLOOR: f64 = 1e-12;
/// Lower clamp for the batch standard deviation.
pub const SIGMA_FLOOR: f64 = 1e-4;

/// Mean and (n-1) standard deviation of a batch of predictions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatchPosteriorStats<T> {
    pub mu_p: T,
    pub sigma_p: T,
    pub n: usize,
}

impl<T: Scalar> BatchPosteriorStats<T> {
    /// The standard deviation is clamped below at [`SIGMA_FLOOR`].
    pub fn from_predictions(preds: &[T]) -> Result<Self> {
        let n = preds.len();
        if n < 2 {
            return Err(Error::InsufficientBatch(n));
        }
        let nt = T::from_usize(n).expect("batch size");
        let mu = preds.iter().copied().sum::<T>() / nt;
        let ss = preds.iter().map(|p| (*p - mu) * (*p - mu)).sum::<T>();
        let sigma = (ss / (nt - T::one())).sqrt();
        Ok(BatchPosteriorStats {
            mu_p: mu,
            sigma_p: sigma.max(T::lit(SIGMA_FLOOR)),
            n,
        })
    }

    fn sigma_clamped(&self) -> bool {
        self.sigma_p <= T::lit(SIGMA_FLOOR)
    }
}

/// Mean binary cross-entropy with logarithms floored at 1e-12.
pub fn supervised_loss<T: Scalar>(preds: &[T], labels: &[T]) -> Result<T> {
    supervised_loss_with_grad(preds, labels).map(|(l, _)| l)
}

pub fn supervised_loss_with_grad<T: Scalar>(preds: &[T], labels: &[T]) -> Result<(T, Vec<T>)> {
    if preds.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if preds.len() != labels.len() {
        return Err(Error::dims(preds.len(), labels.len()));
    }
    let n = T::from_usize(preds.len()).expect("batch size");
    let floor = T::lit(LOG_FLOOR);
    let one = T::one();
    let mut loss = T::zero();
    let mut grad = Vec::with_capacity(preds.len());
    for (&f, &y) in preds.iter().zip(labels) {
        let q = one - f;
        loss -= y * f.max(floor).ln() + (one - y) * q.max(floor).ln();
        let mut g = T::zero();
        if f > floor {
            g -= y / f;
        }
        if q > floor {
            g += (one - y) / q;
        }
        grad.push(g / n);
    }
    Ok((loss / n, grad))
}

/// Mean squared difference between student and teacher predictions.
pub fn consistency_loss<T: Scalar>(student: &[T], teacher: &[T]) -> Result<T> {
    consistency_loss_with_grad(student, teacher).map(|(l, _)| l)
}

/// Gradient is with respect to the student predictions only.
pub fn consistency_loss_with_grad<T: Scalar>(student: &[T], teacher: &[T]) -> Result<(T, Vec<T>)> {
    if student.len() != teacher.len() {
        return Err(Error::dims(student.len(), teacher.len()));
    }
    if student.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let n = T::from_usize(student.len()).expect("batch size");
    let two = T::lit(2.0);
    let loss = student
        .iter()
        .zip(teacher)
        .map(|(s, t)| (*s - *t) * (*s - *t))
        .sum::<T>()
        / n;
    let grad = student
        .iter()
        .zip(teacher)
        .map(|(s, t)| two * (*s - *t) / n)
        .collect();
    Ok((loss, grad))
}

/// KL(r‖p) between the reference Gaussian and the batch Gaussian.
pub fn kl_reg_loss<T: Scalar>(
    stats: &BatchPosteriorStats<T>,
    reference: &ReferenceDistribution,
) -> Result<T> {
    kl_partials(stats, reference).map(|(l, _, _)| l)
}

fn kl_partials<T: Scalar>(
    stats: &BatchPosteriorStats<T>,
    reference: &ReferenceDistribution,
) -> Result<(T, T, T)> {
    if stats.n < 2 {
        return Err(Error::InsufficientBatch(stats.n));
    }
    let (mu_r, sigma_r) = (T::lit(reference.mu_r), T::lit(reference.sigma_r));
    let (mu, sigma) = (stats.mu_p, stats.sigma_p);
    let diff = mu_r - mu;
    let num = sigma_r * sigma_r + diff * diff;
    let s2 = sigma * sigma;
    let loss = (sigma / sigma_r).ln() + num / (T::lit(2.0) * s2) - T::lit(0.5);
    let d_mu = -diff / s2;
    let d_sigma = T::one() / sigma - num / (s2 * sigma);
    Ok((loss, d_mu, d_sigma))
}

/// `|σ_r − σ_p| + β·|μ_r − μ_p|`.
pub fn meanstd_reg_loss<T: Scalar>(
    stats: &BatchPosteriorStats<T>,
    reference: &ReferenceDistribution,
    beta: f64,
) -> Result<T> {
    meanstd_partials(stats, reference, beta).map(|(l, _, _)| l)
}

fn signum<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

fn meanstd_partials<T: Scalar>(
    stats: &BatchPosteriorStats<T>,
    reference: &ReferenceDistribution,
    beta: f64,
) -> Result<(T, T, T)> {
    if stats.n < 2 {
        return Err(Error::InsufficientBatch(stats.n));
    }
    let (mu_r, sigma_r) = (T::lit(reference.mu_r), T::lit(reference.sigma_r));
    let beta = T::lit(beta);
    let loss = (sigma_r - stats.sigma_p).abs() + beta * (mu_r - stats.mu_p).abs();
    Ok((
        loss,
        beta * signum(stats.mu_p - mu_r),
        signum(stats.sigma_p - sigma_r),
    ))
}

/// Which posterior-distribution penalty to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionLoss {
    Kl,
    MeanStd,
}

/// Distribution loss over a batch of predictions and its gradient.
pub fn distribution_loss_with_grad<T: Scalar>(
    kind: DistributionLoss,
    preds: &[T],
    reference: &ReferenceDistribution,
    beta: f64,
) -> Result<(T, Vec<T>, BatchPosteriorStats<T>)> {
    let stats = BatchPosteriorStats::from_predictions(preds)?;
    let (loss, d_mu, d_sigma) = match kind {
        DistributionLoss::Kl => kl_partials(&stats, reference)?,
        DistributionLoss::MeanStd => meanstd_partials(&stats, reference, beta)?,
    };
    let n = T::from_usize(preds.len()).expect("batch size");
    let d_sigma = if stats.sigma_clamped() {
        T::zero()
    } else {
        d_sigma
    };
    let denom = (n - T::one()) * stats.sigma_p;
    let grad = preds
        .iter()
        .map(|p| d_mu / n + d_sigma * (*p - stats.mu_p) / denom)
        .collect();
    Ok((loss, grad, stats))
}

/// `l_ce + c1·l_u + c2·l_d`.
pub fn total_loss<T: Scalar>(l_ce: T, l_u: T, l_d: T, c1: f64, c2: f64) -> T {
    l_ce + T::lit(c1) * l_u + T::lit(c2) * l_d
}

//! Rank correlations, absolute error and prediction histograms.

use std::cmp::Ordering;
use std::io::Write;

use crate::error::{Error, Result};

fn check_pair(pred: &[f64], gold: &[f64], min: usize) -> Result<()> {
    if pred.len() != gold.len() {
        return Err(Error::dims(pred.len(), gold.len()));
    }
    if pred.len() < min {
        return Err(if pred.is_empty() {
            Error::EmptyBatch
        } else {
            Error::InsufficientBatch(pred.len())
        });
    }
    Ok(())
}

/// Mean absolute error.
pub fn mae(pred: &[f64], gold: &[f64]) -> Result<f64> {
    check_pair(pred, gold, 1)?;
    Ok(pred
        .iter()
        .zip(gold)
        .map(|(p, g)| (p - g).abs())
        .sum::<f64>()
        / pred.len() as f64)
}

/// Number of unordered pairs among runs of equal values in a sorted slice.
fn tied_pairs<K: PartialEq>(sorted: impl Iterator<Item = K>) -> u64 {
    let mut total = 0u64;
    let mut run = 0u64;
    let mut prev: Option<K> = None;
    for k in sorted {
        if prev.as_ref() == Some(&k) {
            run += 1;
        } else {
            total += run * (run + 1) / 2;
            run = 0;
        }
        prev = Some(k);
    }
    total + run * (run + 1) / 2
}

/// Sorts `v` and returns how many inversions the sort removed.
fn merge_count(v: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], buf) + merge_count(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            swaps += (mid - i) as u64;
            buf.push(v[j]);
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

/// Kendall's tau-b, computed in O(n log n).
pub fn kendall_tau(pred: &[f64], gold: &[f64]) -> Result<f64> {
    check_pair(pred, gold, 2)?;
    let n = pred.len() as u64;
    let mut pairs: Vec<(f64, f64)> = pred.iter().copied().zip(gold.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let n0 = n * (n - 1) / 2;
    let tied_x = tied_pairs(pairs.iter().map(|p| p.0));
    let tied_xy = tied_pairs(pairs.iter().copied());
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = Vec::with_capacity(ys.len());
    let swaps = merge_count(&mut ys, &mut buf);
    let tied_y = tied_pairs(ys.iter().copied());

    // Pairs tied in neither coordinate split into concordant and discordant.
    let discordant = swaps;
    let concordant = (n0 + tied_xy) - tied_x - tied_y - discordant;
    tau_b(concordant, discordant, n0 - tied_y, n0 - tied_x)
}

/// `(C − D) / sqrt(not_tied_y · not_tied_x)`, from exact pair counts.
pub(crate) fn tau_b(concordant: u64, discordant: u64, a: u64, b: u64) -> Result<f64> {
    if a == 0 || b == 0 {
        return Err(Error::UndefinedCorrelation);
    }
    let num = concordant as f64 - discordant as f64;
    Ok(num / ((a as f64) * (b as f64)).sqrt())
}

/// Twice the 1-based average rank of each value; ties share their mean rank,
/// so doubling keeps every rank an integer.
pub fn doubled_ranks(values: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len()
            && values[order[end]].total_cmp(&values[order[start]]) == Ordering::Equal
        {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        for &i in &order[start..end] {
            ranks[i] = (start + 1 + end) as u64;
        }
        start = end;
    }
    ranks
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    doubled_ranks(values)
        .into_iter()
        .map(|r| r as f64 / 2.0)
        .collect()
}

/// Pearson correlation of integer scores, with every sum kept exact.
pub fn integer_pearson(x: &[u64], y: &[u64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::dims(x.len(), y.len()));
    }
    let n = x.len() as i128;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0i128, 0i128, 0i128, 0i128, 0i128);
    for (&a, &b) in x.iter().zip(y) {
        let (a, b) = (a as i128, b as i128);
        sx += a;
        sy += b;
        sxx += a * a;
        syy += b * b;
        sxy += a * b;
    }
    let cov = n * sxy - sx * sy;
    let vx = n * sxx - sx * sx;
    let vy = n * syy - sy * sy;
    if vx == 0 || vy == 0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((cov as f64 / ((vx as f64) * (vy as f64)).sqrt()).clamp(-1.0, 1.0))
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 2)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman(pred: &[f64], gold: &[f64]) -> Result<f64> {
    check_pair(pred, gold, 2)?;
    integer_pearson(&doubled_ranks(pred), &doubled_ranks(gold))
}

/// Equal-width histogram over [0,1] with a fitted Gaussian.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub counts: Vec<usize>,
    pub mean: f64,
    /// Sample standard deviation (n − 1); 0 for a single value.
    pub std: f64,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn edges(&self, bin: usize) -> (f64, f64) {
        let w = 1.0 / self.bins() as f64;
        (bin as f64 * w, (bin + 1) as f64 * w)
    }

    /// Fitted normal density at `x` (0 when the fit is degenerate).
    pub fn density(&self, x: f64) -> f64 {
        if self.std <= 0.0 {
            return 0.0;
        }
        let z = (x - self.mean) / self.std;
        (-0.5 * z * z).exp() / (self.std * (2.0 * std::f64::consts::PI).sqrt())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "bin_left,bin_right,count,gaussian_density_at_center")?;
        for (b, count) in self.counts.iter().enumerate() {
            let (lo, hi) = self.edges(b);
            writeln!(out, "{lo},{hi},{count},{}", self.density((lo + hi) / 2.0))?;
        }
        Ok(())
    }
}

/// Bins values in [0,1]; the last bin is closed on the right.
pub fn histogram(values: &[f64], bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::Config("histogram needs at least one bin".into()));
    }
    if values.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut counts = vec![0; bins];
    for &v in values {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfRange {
                value: v,
                lo: 0.0,
                hi: 1.0,
            });
        }
        let b = ((v * bins as f64) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(Histogram { counts, mean, std })
}

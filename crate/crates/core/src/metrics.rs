//! Accuracy, selection rates, disparity statistics and the accuracy/disparity
//! Pareto frontier.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("no rows")]
    Empty,
    #[error("the {0} group has no rows")]
    MissingGroup(&'static str),
}

type Result<T> = std::result::Result<T, MetricsError>;

/// Fraction of predictions that equal the labels.
pub fn accuracy(predictions: &[u8], labels: &[u8]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(MetricsError::LengthMismatch(predictions.len(), labels.len()));
    }
    if predictions.is_empty() {
        return Err(MetricsError::Empty);
    }
    let correct = predictions.iter().zip(labels).filter(|(p, y)| p == y).count();
    Ok(correct as f64 / predictions.len() as f64)
}

/// Per-group positive prediction (approval) rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupRates {
    pub privileged_rate: f64,
    pub protected_rate: f64,
    pub privileged_count: usize,
    pub protected_count: usize,
    pub privileged_positives: usize,
    pub protected_positives: usize,
}

impl GroupRates {
    pub fn from_counts(
        privileged_positives: usize,
        privileged_count: usize,
        protected_positives: usize,
        protected_count: usize,
    ) -> Result<Self> {
        if privileged_count == 0 {
            return Err(MetricsError::MissingGroup("privileged"));
        }
        if protected_count == 0 {
            return Err(MetricsError::MissingGroup("protected"));
        }
        Ok(Self {
            privileged_rate: privileged_positives as f64 / privileged_count as f64,
            protected_rate: protected_positives as f64 / protected_count as f64,
            privileged_count,
            protected_count,
            privileged_positives,
            protected_positives,
        })
    }

    /// Privileged minus protected rate.
    pub fn disparity(&self) -> f64 {
        self.privileged_rate - self.protected_rate
    }
}

/// `groups[i] == 1` marks a privileged row.
pub fn group_rates(predictions: &[u8], groups: &[u8]) -> Result<GroupRates> {
    if predictions.len() != groups.len() {
        return Err(MetricsError::LengthMismatch(predictions.len(), groups.len()));
    }
    let (mut pp, mut pn, mut up, mut un) = (0, 0, 0, 0);
    for (&p, &g) in predictions.iter().zip(groups) {
        if g == 1 {
            pn += 1;
            pp += usize::from(p == 1);
        } else {
            un += 1;
            up += usize::from(p == 1);
        }
    }
    GroupRates::from_counts(pp, pn, up, un)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisparityStats {
    /// Privileged minus protected selection rate.
    pub disparity: f64,
    /// Protected over privileged selection rate; `None` when the privileged
    /// rate is zero.
    pub air: Option<f64>,
    /// Pooled two-proportion z statistic.
    pub z: f64,
    /// Two-sided normal tail probability of `z`.
    pub p_value: f64,
    /// `p_value <= alpha`.
    pub significant: bool,
}

fn std_normal() -> Normal {
    Normal::standard()
}

pub fn disparity_stats(rates: &GroupRates, alpha: f64) -> DisparityStats {
    let disparity = rates.disparity();
    let air = (rates.privileged_rate > 0.0).then(|| rates.protected_rate / rates.privileged_rate);
    let (n1, n2) = (rates.privileged_count as f64, rates.protected_count as f64);
    let pooled = (rates.privileged_rate * n1 + rates.protected_rate * n2) / (n1 + n2);
    let (z, p_value) = if pooled <= 0.0 || pooled >= 1.0 {
        (0.0, 1.0)
    } else {
        let se = (pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)).sqrt();
        let z = disparity / se;
        (z, (2.0 * std_normal().sf(z.abs())).min(1.0))
    };
    DisparityStats { disparity, air, z, p_value, significant: p_value <= alpha }
}

/// Two-sided critical value `z_{1 - alpha/2}`.
pub fn critical_value(alpha: f64) -> f64 {
    std_normal().inverse_cdf(1.0 - alpha / 2.0)
}

/// Normal-approximation confidence interval for an accuracy measured on `n`
/// rows, clipped to [0, 1].
pub fn accuracy_ci(acc: f64, n: usize, alpha: f64) -> (f64, f64) {
    let half = critical_value(alpha) * (acc * (1.0 - acc) / n.max(1) as f64).max(0.0).sqrt();
    ((acc - half).max(0.0), (acc + half).min(1.0))
}

/// Frontier flags for `(accuracy, disparity)` points. A point is on the
/// frontier unless some other point has accuracy at least as high and
/// disparity at least as low, with one of the two strictly better.
/// Exact duplicates of a frontier point are all on the frontier.
pub fn pareto_frontier(points: &[(f64, f64)]) -> Vec<bool> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[b].0.total_cmp(&points[a].0));
    let mut flags = vec![false; points.len()];
    // Lowest disparity among points with strictly higher accuracy.
    let mut best_higher = f64::INFINITY;
    let mut start = 0;
    while start < order.len() {
        let acc = points[order[start]].0;
        let end = start
            + order[start..]
                .iter()
                .take_while(|&&i| points[i].0 == acc)
                .count();
        let tier = &order[start..end];
        let tier_min = tier.iter().map(|&i| points[i].1).fold(f64::INFINITY, f64::min);
        for &i in tier {
            let d = points[i].1;
            flags[i] = !(best_higher <= d || tier_min < d);
        }
        best_higher = best_higher.min(tier_min);
        start = end;
    }
    flags
}

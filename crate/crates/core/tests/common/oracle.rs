//! Brute-force reference implementations and fixtures shared by the
//! integration tests and the acceptance runner. Nothing here calls the code
//! under test except to build inputs.

#![allow(dead_code)]

use std::collections::BTreeSet;

use fairlend::dataset::EncodedMatrix;
use fairlend::search::{CandidatePool, ModelRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two-sided 97.5% standard normal quantile (scipy.stats.norm.ppf).
pub const Z_975: f64 = 1.959963984540054;

/// `true` iff no other point is at least as good on both axes and strictly
/// better on one. O(n^2).
pub fn brute_frontier(points: &[(f64, f64)]) -> Vec<bool> {
    points
        .iter()
        .map(|&(a, d)| {
            !points
                .iter()
                .any(|&(a2, d2)| a2 >= a && d2 <= d && (a2 > a || d2 < d))
        })
        .collect()
}

/// A model placed on a 1/1000 grid: accuracy and disparity in thousandths.
#[derive(Debug, Clone)]
pub struct GridModel {
    pub id: String,
    pub acc: i64,
    pub disp: i64,
}

impl GridModel {
    pub fn record(&self) -> ModelRecord {
        ModelRecord::from_point(&self.id, self.acc as f64 / 1000.0, self.disp as f64 / 1000.0)
    }
}

/// Random grid pool with frequent ties on both axes.
pub fn grid_pool(rng: &mut ChaCha8Rng, n: usize) -> Vec<GridModel> {
    (0..n)
        .map(|i| GridModel {
            id: format!("m{i:03}"),
            acc: rng.random_range(700..=950),
            disp: rng.random_range(0..=300),
        })
        .collect()
}

pub fn to_pool(models: &[GridModel], baseline: &str) -> CandidatePool {
    CandidatePool::from_records(models.iter().map(GridModel::record).collect(), Some(baseline)).unwrap()
}

pub fn most_accurate(models: &[GridModel]) -> &GridModel {
    models
        .iter()
        .max_by(|a, b| a.acc.cmp(&b.acc).then(a.disp.cmp(&b.disp)).then(b.id.cmp(&a.id)))
        .unwrap()
}

/// DI alternatives with an absolute accuracy tolerance, in exact integers.
pub fn di_oracle(models: &[GridModel], b: &GridModel, delta: i64, margin: i64) -> BTreeSet<String> {
    models
        .iter()
        .filter(|m| m.id != b.id && m.disp < b.disp - margin && m.acc >= b.acc - delta)
        .map(|m| m.id.clone())
        .collect()
}

/// UDAP alternatives at slope `k = num / den`: on or above the line through
/// the baseline with accuracy falling `den / num` per unit of disparity.
pub fn udap_oracle(models: &[GridModel], b: &GridModel, num: i64, den: i64) -> BTreeSet<String> {
    models
        .iter()
        .filter(|m| m.id != b.id && m.disp < b.disp)
        .filter(|m| den * (b.disp - m.disp) >= num * (b.acc - m.acc))
        .map(|m| m.id.clone())
        .collect()
}

/// Count-based rates after thresholding `scores >= t` separately per group.
fn rates_at(scores: &[f64], groups: &[u8], t_priv: f64, t_prot: f64) -> (f64, f64) {
    let (mut pp, mut pn, mut up, mut un) = (0.0, 0.0, 0.0, 0.0);
    for (&s, &g) in scores.iter().zip(groups) {
        if g == 1 {
            pn += 1.0;
            if s >= t_priv {
                pp += 1.0;
            }
        } else {
            un += 1.0;
            if s >= t_prot {
                up += 1.0;
            }
        }
    }
    (pp / pn, up / un)
}

/// Smallest achievable `|disparity - target|` over every pair of observed
/// training scores used as group thresholds.
pub fn best_threshold_gap(scores: &[f64], groups: &[u8], target: f64) -> f64 {
    let distinct = |g: u8| {
        let mut v: Vec<f64> = scores.iter().zip(groups).filter(|(_, &gg)| gg == g).map(|(&s, _)| s).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let (priv_t, prot_t) = (distinct(1), distinct(0));
    let mut best = f64::INFINITY;
    for &a in &priv_t {
        for &b in &prot_t {
            let (rp, ru) = rates_at(scores, groups, a, b);
            best = best.min((rp - ru - target).abs());
        }
    }
    best
}

pub fn disparity_at(scores: &[f64], groups: &[u8], t_priv: f64, t_prot: f64) -> f64 {
    let (rp, ru) = rates_at(scores, groups, t_priv, t_prot);
    rp - ru
}

/// Best training accuracy of any single-feature threshold rule.
pub fn best_stump_accuracy(m: &EncodedMatrix) -> f64 {
    let mut best = 0usize;
    for j in 0..m.n_cols {
        let mut cuts: Vec<f64> = (0..m.n_rows).map(|i| m.row(i)[j]).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.push(f64::INFINITY);
        for &c in &cuts {
            for left in 0..2u8 {
                let correct = (0..m.n_rows)
                    .filter(|&i| {
                        let pred = if m.row(i)[j] < c { left } else { 1 - left };
                        pred == m.labels[i]
                    })
                    .count();
                best = best.max(correct);
            }
        }
    }
    best as f64 / m.n_rows as f64
}

/// Two Gaussian blobs, 100 rows each, centres 6 standard deviations apart.
pub fn separable_blobs(seed: u64) -> EncodedMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..200 {
        let y = u8::from(i % 2 == 0);
        let c = if y == 1 { 1.5 } else { -1.5 };
        let mut gauss = || {
            // Box-Muller, kept local so the fixture does not depend on the
            // generator's own normal sampler.
            let u1: f64 = rng.random::<f64>().max(1e-12);
            let u2: f64 = rng.random();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos() * 0.5
        };
        rows.push(vec![c + gauss(), c + gauss()]);
        labels.push(y);
    }
    let groups = (0..200).map(|i| u8::from(i % 3 == 0)).collect();
    EncodedMatrix::from_rows(&rows, labels, groups)
}

/// XOR on the four corners of the unit square, each repeated 25 times.
pub fn xor_fixture() -> EncodedMatrix {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..25 {
        for (x, y) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
            rows.push(vec![f64::from(x), f64::from(y)]);
            labels.push(x ^ y);
        }
    }
    let groups = (0..100).map(|i| u8::from(i % 2 == 0)).collect();
    EncodedMatrix::from_rows(&rows, labels, groups)
}

/// The ten-row metrics fixture: six privileged rows with three approvals,
/// four protected rows with one approval.
pub fn ten_row() -> (Vec<u8>, Vec<u8>, Vec<u8>) {
    let groups = vec![1, 1, 1, 1, 1, 1, 0, 0, 0, 0];
    let preds = vec![1, 1, 1, 0, 0, 0, 1, 0, 0, 0];
    let labels = vec![1, 1, 0, 0, 0, 1, 1, 0, 1, 0];
    (preds, labels, groups)
}

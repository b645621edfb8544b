//! From-scratch binary classifiers and fairness interventions.
//!
//! Every model is score-then-threshold: [`score`] produces a value in [0, 1]
//! and [`predict`] compares it against a global threshold or, after
//! group-threshold postprocessing, a per-group one. A score equal to the
//! threshold predicts approval.

pub mod linear;
pub mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{EncodedMatrix, FeatureSelection};
use crate::par::ExecMode;

pub use linear::LinearParams;
pub use tree::Tree;

#[derive(Debug, Error, PartialEq)]
pub enum LearnerError {
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("training set is empty")]
    EmptyTrainSet,
    #[error("training set contains a single class")]
    SingleClassTrainSet,
    #[error("column mismatch: model expects {expected} columns, matrix has {found}")]
    ColumnMismatch { expected: usize, found: usize },
    #[error("reweighing cell (group={group}, label={label}) is empty")]
    EmptyCell { group: u8, label: u8 },
    #[error("row weights must be finite, positive and one per row")]
    InvalidWeights,
    #[error("threshold postprocessing needs both groups in the training set")]
    MissingGroup,
}

type Result<T> = std::result::Result<T, LearnerError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    LogisticRegression,
    DecisionTree,
    BaggedForest,
    LinearSvm,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::LogisticRegression => "logistic_regression",
            Family::DecisionTree => "decision_tree",
            Family::BaggedForest => "bagged_forest",
            Family::LinearSvm => "linear_svm",
        }
    }

    fn short(self) -> &'static str {
        match self {
            Family::LogisticRegression => "lr",
            Family::DecisionTree => "dt",
            Family::BaggedForest => "rf",
            Family::LinearSvm => "svm",
        }
    }
}

/// Family-specific hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Hyperparams {
    LogisticRegression { learning_rate: f64, iterations: usize, l2: f64 },
    DecisionTree { max_depth: usize },
    BaggedForest { tree_count: usize, max_depth: usize },
    LinearSvm { learning_rate: f64, iterations: usize, l2: f64, margin_weight: f64 },
}

impl Hyperparams {
    pub fn family(&self) -> Family {
        match self {
            Hyperparams::LogisticRegression { .. } => Family::LogisticRegression,
            Hyperparams::DecisionTree { .. } => Family::DecisionTree,
            Hyperparams::BaggedForest { .. } => Family::BaggedForest,
            Hyperparams::LinearSvm { .. } => Family::LinearSvm,
        }
    }

    /// Logistic regression with the default budget.
    pub fn logistic() -> Self {
        Hyperparams::LogisticRegression { learning_rate: 0.1, iterations: 500, l2: 1e-4 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LearnerError::InvalidSpec(msg));
        let check_rate = |lr: f64, it: usize, l2: f64| {
            if !(lr > 0.0 && lr <= 10.0) {
                return bad(format!("learning_rate {lr} outside (0, 10]"));
            }
            if !(1..=100_000).contains(&it) {
                return bad(format!("iterations {it} outside [1, 100000]"));
            }
            if !(l2 >= 0.0 && l2.is_finite()) {
                return bad(format!("l2 {l2} must be finite and >= 0"));
            }
            Ok(())
        };
        let check_depth = |d: usize| {
            if !(1..=32).contains(&d) {
                return bad(format!("max_depth {d} outside [1, 32]"));
            }
            Ok(())
        };
        match *self {
            Hyperparams::LogisticRegression { learning_rate, iterations, l2 } => {
                check_rate(learning_rate, iterations, l2)
            }
            Hyperparams::DecisionTree { max_depth } => check_depth(max_depth),
            Hyperparams::BaggedForest { tree_count, max_depth } => {
                if !(1..=1000).contains(&tree_count) {
                    return bad(format!("tree_count {tree_count} outside [1, 1000]"));
                }
                check_depth(max_depth)
            }
            Hyperparams::LinearSvm { learning_rate, iterations, l2, margin_weight } => {
                check_rate(learning_rate, iterations, l2)?;
                if !(margin_weight > 0.0 && margin_weight.is_finite()) {
                    return bad(format!("margin_weight {margin_weight} must be > 0"));
                }
                Ok(())
            }
        }
    }

    fn describe(&self) -> String {
        match *self {
            Hyperparams::LogisticRegression { learning_rate, iterations, l2 } => {
                format!("lr={learning_rate},it={iterations},l2={l2}")
            }
            Hyperparams::DecisionTree { max_depth } => format!("depth={max_depth}"),
            Hyperparams::BaggedForest { tree_count, max_depth } => {
                format!("trees={tree_count},depth={max_depth}")
            }
            Hyperparams::LinearSvm { learning_rate, iterations, l2, margin_weight } => {
                format!("lr={learning_rate},it={iterations},l2={l2},c={margin_weight}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Intervention {
    None,
    GroupThresholdPostprocess { target_disparity: f64 },
    Reweigh { strength: f64 },
}

impl Intervention {
    pub fn is_some(&self) -> bool {
        !matches!(self, Intervention::None)
    }

    fn describe(&self) -> String {
        match self {
            Intervention::None => "none".into(),
            Intervention::GroupThresholdPostprocess { target_disparity } => {
                format!("post({target_disparity})")
            }
            Intervention::Reweigh { strength } => format!("rw({strength})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub hyper: Hyperparams,
    #[serde(default)]
    pub features: FeatureSelection,
    pub intervention: Intervention,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(hyper: Hyperparams) -> Self {
        Self { hyper, features: FeatureSelection::default(), intervention: Intervention::None, seed: 0 }
    }

    pub fn family(&self) -> Family {
        self.hyper.family()
    }

    /// Stable canonical id, e.g. `lr(lr=0.1,it=500,l2=0.0001)/fs=-credit/iv=none/s=0`.
    pub fn id(&self) -> String {
        format!(
            "{}({})/fs={}/iv={}/s={}",
            self.family().short(),
            self.hyper.describe(),
            self.features.label(),
            self.intervention.describe(),
            self.seed
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.hyper.validate()?;
        match self.intervention {
            Intervention::None => Ok(()),
            Intervention::GroupThresholdPostprocess { target_disparity } => {
                if (0.0..=1.0).contains(&target_disparity) {
                    Ok(())
                } else {
                    Err(LearnerError::InvalidSpec(format!(
                        "target_disparity {target_disparity} outside [0, 1]"
                    )))
                }
            }
            Intervention::Reweigh { strength } => {
                if (0.0..=1.0).contains(&strength) {
                    Ok(())
                } else {
                    Err(LearnerError::InvalidSpec(format!("strength {strength} outside [0, 1]")))
                }
            }
        }
    }
}

/// Learned parameters, laid out per family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelParams {
    LogisticRegression(LinearParams),
    /// Scores are `sigmoid(margin)`.
    LinearSvm(LinearParams),
    DecisionTree(Tree),
    BaggedForest { trees: Vec<Tree> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupThresholds {
    pub privileged: f64,
    pub protected: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub global: f64,
    pub per_group: Option<GroupThresholds>,
}

impl Thresholds {
    pub fn for_group(&self, group: u8) -> f64 {
        match self.per_group {
            Some(t) if group == 1 => t.privileged,
            Some(t) => t.protected,
            None => self.global,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub feature_names: Vec<String>,
    pub params: ModelParams,
    pub thresholds: Thresholds,
}

/// Trains `spec` on `data`, applying its intervention. `weights` optionally
/// scales each row's loss; reweighing multiplies into it.
pub fn train(spec: &ModelSpec, data: &EncodedMatrix, weights: Option<&[f64]>) -> Result<TrainedModel> {
    train_with(spec, data, weights, ExecMode::default())
}

pub fn train_with(
    spec: &ModelSpec,
    data: &EncodedMatrix,
    weights: Option<&[f64]>,
    mode: ExecMode,
) -> Result<TrainedModel> {
    spec.validate()?;
    if data.n_rows == 0 {
        return Err(LearnerError::EmptyTrainSet);
    }
    if !data.labels.contains(&0) || !data.labels.contains(&1) {
        return Err(LearnerError::SingleClassTrainSet);
    }
    let mut w = match weights {
        Some(w) if w.len() != data.n_rows || w.iter().any(|v| !(v.is_finite() && *v > 0.0)) => {
            return Err(LearnerError::InvalidWeights)
        }
        Some(w) => w.to_vec(),
        None => vec![1.0; data.n_rows],
    };
    if let Intervention::Reweigh { strength } = spec.intervention {
        for (a, b) in w.iter_mut().zip(reweigh(data, strength)?) {
            *a *= b;
        }
    }
    let params = match spec.hyper {
        Hyperparams::LogisticRegression { learning_rate, iterations, l2 } => {
            ModelParams::LogisticRegression(linear::fit_logistic(data, &w, learning_rate, iterations, l2))
        }
        Hyperparams::LinearSvm { learning_rate, iterations, l2, margin_weight } => ModelParams::LinearSvm(
            linear::fit_svm(data, &w, learning_rate, iterations, l2, margin_weight),
        ),
        Hyperparams::DecisionTree { max_depth } => ModelParams::DecisionTree(tree::fit_tree(data, &w, max_depth)),
        Hyperparams::BaggedForest { tree_count, max_depth } => ModelParams::BaggedForest {
            trees: tree::fit_forest(data, &w, tree_count, max_depth, spec.seed, mode),
        },
    };
    let model = TrainedModel {
        spec: spec.clone(),
        feature_names: data.column_names(),
        params,
        thresholds: Thresholds { global: 0.5, per_group: None },
    };
    match spec.intervention {
        Intervention::GroupThresholdPostprocess { target_disparity } => {
            postprocess_group_thresholds(&model, data, target_disparity)
        }
        _ => Ok(model),
    }
}

/// Per-row scores in [0, 1].
pub fn score(model: &TrainedModel, matrix: &EncodedMatrix) -> Result<Vec<f64>> {
    if matrix.n_cols != model.feature_names.len() {
        return Err(LearnerError::ColumnMismatch {
            expected: model.feature_names.len(),
            found: matrix.n_cols,
        });
    }
    let rows = 0..matrix.n_rows;
    Ok(match &model.params {
        ModelParams::LogisticRegression(p) | ModelParams::LinearSvm(p) => {
            rows.map(|i| linear::sigmoid(p.margin(matrix.row(i)))).collect()
        }
        ModelParams::DecisionTree(t) => rows.map(|i| t.score(matrix.row(i))).collect(),
        ModelParams::BaggedForest { trees } => rows.map(|i| tree::forest_score(trees, matrix.row(i))).collect(),
    })
}

/// Applies the model's thresholds to precomputed scores.
pub fn threshold_scores(thresholds: &Thresholds, scores: &[f64], groups: &[u8]) -> Vec<u8> {
    scores
        .iter()
        .zip(groups)
        .map(|(&s, &g)| u8::from(s >= thresholds.for_group(g)))
        .collect()
}

/// 0/1 predictions; groups come from `matrix.groups`.
pub fn predict(model: &TrainedModel, matrix: &EncodedMatrix) -> Result<Vec<u8>> {
    let scores = score(model, matrix)?;
    Ok(threshold_scores(&model.thresholds, &scores, &matrix.groups))
}

/// Candidate thresholds for one group: its distinct observed scores, each
/// with the resulting positive and correct counts.
struct GroupSweep {
    n: usize,
    thresholds: Vec<f64>,
    positives: Vec<usize>,
    correct: Vec<usize>,
}

fn sweep(scores: &[f64], labels: &[u8], groups: &[u8], group: u8) -> GroupSweep {
    let mut rows: Vec<(f64, u8)> = scores
        .iter()
        .zip(labels)
        .zip(groups)
        .filter(|(_, &g)| g == group)
        .map(|((&s, &y), _)| (s, y))
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = rows.len();
    let total_pos = rows.iter().filter(|r| r.1 == 1).count();
    let mut out = GroupSweep { n, thresholds: Vec::new(), positives: Vec::new(), correct: Vec::new() };
    // Rows strictly below the current threshold and their negatives.
    let (mut below, mut below_pos) = (0usize, 0usize);
    let mut i = 0;
    while i < n {
        let t = rows[i].0;
        let below_neg = below - below_pos;
        out.thresholds.push(t);
        out.positives.push(n - below);
        out.correct.push((total_pos - below_pos) + below_neg);
        while i < n && rows[i].0 == t {
            below += 1;
            below_pos += usize::from(rows[i].1 == 1);
            i += 1;
        }
    }
    out
}

/// Chooses per-group thresholds among observed training scores minimizing
/// `|disparity - target|`; ties go to higher accuracy, then to the higher
/// privileged threshold, then the higher protected threshold. Scores and
/// learned parameters are untouched.
pub fn postprocess_group_thresholds(
    model: &TrainedModel,
    train: &EncodedMatrix,
    target_disparity: f64,
) -> Result<TrainedModel> {
    let scores = score(model, train)?;
    let privileged = sweep(&scores, &train.labels, &train.groups, 1);
    let protected = sweep(&scores, &train.labels, &train.groups, 0);
    if privileged.n == 0 || protected.n == 0 {
        return Err(LearnerError::MissingGroup);
    }
    const TIE: f64 = 1e-12;
    let mut best: Option<(f64, usize, usize, usize)> = None;
    for (a, &pp) in privileged.positives.iter().enumerate() {
        let rate_p = pp as f64 / privileged.n as f64;
        for (b, &up) in protected.positives.iter().enumerate() {
            let gap = (rate_p - up as f64 / protected.n as f64 - target_disparity).abs();
            let correct = privileged.correct[a] + protected.correct[b];
            let better = match best {
                None => true,
                Some((bg, bc, ba, bb)) => {
                    if gap < bg - TIE {
                        true
                    } else if gap <= bg + TIE {
                        (correct, privileged.thresholds[a], protected.thresholds[b])
                            > (bc, privileged.thresholds[ba], protected.thresholds[bb])
                    } else {
                        false
                    }
                }
            };
            if better {
                best = Some((gap, correct, a, b));
            }
        }
    }
    let (_, _, a, b) = best.expect("both groups nonempty");
    let mut out = model.clone();
    out.thresholds.per_group = Some(GroupThresholds {
        privileged: privileged.thresholds[a],
        protected: protected.thresholds[b],
    });
    Ok(out)
}

/// Reweighing weights: `(n_g * n_y) / (n * n_gy)` per (group, label) cell,
/// interpolated toward 1 by `1 - strength`.
pub fn reweigh(train: &EncodedMatrix, strength: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&strength) {
        return Err(LearnerError::InvalidSpec(format!("strength {strength} outside [0, 1]")));
    }
    let mut cells = [[0usize; 2]; 2];
    for (&g, &y) in train.groups.iter().zip(&train.labels) {
        cells[g as usize][y as usize] += 1;
    }
    for g in 0..2u8 {
        for y in 0..2u8 {
            if cells[g as usize][y as usize] == 0 {
                return Err(LearnerError::EmptyCell { group: g, label: y });
            }
        }
    }
    let n = train.n_rows as f64;
    let n_g = |g: usize| (cells[g][0] + cells[g][1]) as f64;
    let n_y = |y: usize| (cells[0][y] + cells[1][y]) as f64;
    Ok(train
        .groups
        .iter()
        .zip(&train.labels)
        .map(|(&g, &y)| {
            let (g, y) = (g as usize, y as usize);
            let base = n_g(g) * n_y(y) / (n * cells[g][y] as f64);
            (1.0 - strength) + strength * base
        })
        .collect())
}

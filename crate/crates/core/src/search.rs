//! Model search over a configuration grid and candidate-pool assembly.
//!
//! Each configuration search (family x feature set x intervention grid)
//! keeps its top `retention` share by holdout accuracy. The union of
//! survivors is then filtered against the most accurate model in the pool.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{hex_digest, DatasetError, EncodedMatrix, FeatureSelection, PreparedData, Tag};
use crate::learners::{self, Family, Hyperparams, Intervention, LearnerError, ModelSpec};
use crate::metrics::{self, DisparityStats, GroupRates, MetricsError};
use crate::par::{self, ExecMode};
use crate::report::quantize;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search plan: {0}")]
    InvalidPlan(String),
    #[error("candidate pool is empty")]
    EmptyPool,
    #[error(transparent)]
    Data(#[from] DatasetError),
    #[error("training `{id}`: {source}")]
    Training { id: String, source: LearnerError },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("unknown model id `{0}`")]
    UnknownId(String),
    #[error("no off-frontier model within {0} of the best accuracy")]
    NoOffFrontierCandidate(f64),
}

type Result<T> = std::result::Result<T, SearchError>;

/// How the global accuracy-drop filter reads its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropMode {
    /// Keep `accuracy >= (1 - tolerance) * max`.
    #[default]
    Relative,
    /// Keep `accuracy >= max - tolerance`.
    Absolute,
}

/// Lists per hyperparameter; the grid is their cross product. Absent lists
/// fall back to the family defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperGrid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l2: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree_count: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin_weight: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterventionGrid {
    /// Include the unmitigated variant.
    pub none: bool,
    pub postprocess_targets: Vec<f64>,
    pub reweigh_strengths: Vec<f64>,
}

impl Default for InterventionGrid {
    fn default() -> Self {
        Self { none: true, postprocess_targets: Vec::new(), reweigh_strengths: Vec::new() }
    }
}

impl InterventionGrid {
    fn expand(&self) -> Vec<Intervention> {
        let mut out = Vec::new();
        if self.none {
            out.push(Intervention::None);
        }
        out.extend(
            self.postprocess_targets
                .iter()
                .map(|&t| Intervention::GroupThresholdPostprocess { target_disparity: t }),
        );
        out.extend(self.reweigh_strengths.iter().map(|&s| Intervention::Reweigh { strength: s }));
        out
    }
}

fn default_replicates() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSearch {
    pub name: String,
    pub family: Family,
    #[serde(default)]
    pub exclude_tags: BTreeSet<Tag>,
    #[serde(default)]
    pub numeric_only: bool,
    #[serde(default)]
    pub grid: HyperGrid,
    #[serde(default)]
    pub interventions: InterventionGrid,
    #[serde(default)]
    pub seed_base: u64,
    /// Seeds `seed_base .. seed_base + replicates` per grid point.
    #[serde(default = "default_replicates")]
    pub replicates: usize,
}

fn list<T: Clone>(name: &str, given: &Option<Vec<T>>, default: T) -> Result<Vec<T>> {
    match given {
        Some(v) if v.is_empty() => Err(SearchError::InvalidPlan(format!("grid list `{name}` is empty"))),
        Some(v) => Ok(v.clone()),
        None => Ok(vec![default]),
    }
}

impl ConfigSearch {
    pub fn features(&self) -> FeatureSelection {
        FeatureSelection { exclude_tags: self.exclude_tags.clone(), numeric_only: self.numeric_only }
    }

    fn hyper_grid(&self) -> Result<Vec<Hyperparams>> {
        let g = &self.grid;
        let mut out = Vec::new();
        match self.family {
            Family::LogisticRegression => {
                for &learning_rate in &list("learning_rate", &g.learning_rate, 0.1)? {
                    for &iterations in &list("iterations", &g.iterations, 500)? {
                        for &l2 in &list("l2", &g.l2, 1e-4)? {
                            out.push(Hyperparams::LogisticRegression { learning_rate, iterations, l2 });
                        }
                    }
                }
            }
            Family::DecisionTree => {
                for &max_depth in &list("max_depth", &g.max_depth, 5)? {
                    out.push(Hyperparams::DecisionTree { max_depth });
                }
            }
            Family::BaggedForest => {
                for &tree_count in &list("tree_count", &g.tree_count, 100)? {
                    for &max_depth in &list("max_depth", &g.max_depth, 5)? {
                        out.push(Hyperparams::BaggedForest { tree_count, max_depth });
                    }
                }
            }
            Family::LinearSvm => {
                for &learning_rate in &list("learning_rate", &g.learning_rate, 0.1)? {
                    for &iterations in &list("iterations", &g.iterations, 300)? {
                        for &l2 in &list("l2", &g.l2, 1e-3)? {
                            for &margin_weight in &list("margin_weight", &g.margin_weight, 1.0)? {
                                out.push(Hyperparams::LinearSvm {
                                    learning_rate,
                                    iterations,
                                    l2,
                                    margin_weight,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Cross product of hyperparameters, interventions and replicate seeds.
    pub fn expand(&self) -> Result<Vec<ModelSpec>> {
        let interventions = self.interventions.expand();
        if interventions.is_empty() {
            return Err(SearchError::InvalidPlan(format!("search `{}` has no interventions", self.name)));
        }
        if self.replicates == 0 {
            return Err(SearchError::InvalidPlan(format!("search `{}` has zero replicates", self.name)));
        }
        let mut specs = Vec::new();
        for hyper in self.hyper_grid()? {
            for &intervention in &interventions {
                for r in 0..self.replicates {
                    let spec = ModelSpec {
                        hyper,
                        features: self.features(),
                        intervention,
                        seed: self.seed_base + r as u64,
                    };
                    spec.validate().map_err(|e| {
                        SearchError::InvalidPlan(format!("search `{}`: {e}", self.name))
                    })?;
                    specs.push(spec);
                }
            }
        }
        Ok(specs)
    }
}

fn default_retention() -> f64 {
    0.05
}

fn default_drop_tolerance() -> f64 {
    0.10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchPlan {
    #[serde(rename = "search", default)]
    pub searches: Vec<ConfigSearch>,
    #[serde(default = "default_retention")]
    pub retention: f64,
    #[serde(default = "default_drop_tolerance")]
    pub drop_tolerance: f64,
    #[serde(default)]
    pub drop_mode: DropMode,
}

impl Default for SearchPlan {
    fn default() -> Self {
        Self {
            searches: Vec::new(),
            retention: default_retention(),
            drop_tolerance: default_drop_tolerance(),
            drop_mode: DropMode::Relative,
        }
    }
}

impl SearchPlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.retention > 0.0 && self.retention <= 1.0) {
            return Err(SearchError::InvalidPlan(format!("retention {} outside (0, 1]", self.retention)));
        }
        if !(self.drop_tolerance >= 0.0 && self.drop_tolerance < 1.0) {
            return Err(SearchError::InvalidPlan(format!(
                "drop_tolerance {} outside [0, 1)",
                self.drop_tolerance
            )));
        }
        for s in &self.searches {
            s.expand()?;
        }
        Ok(())
    }

    /// Number of models kept from a search of `n`: `ceil(retention * n)`.
    pub fn retained(&self, n: usize) -> usize {
        if n == 0 {
            return 0;
        }
        // The slack keeps products like 0.05 * 40 from rounding up to 3.
        ((self.retention * n as f64 - 1e-9).ceil() as usize).clamp(1, n)
    }

    fn passes_drop(&self, accuracy: f64, max_accuracy: f64) -> bool {
        let floor = match self.drop_mode {
            DropMode::Relative => (1.0 - self.drop_tolerance) * max_accuracy,
            DropMode::Absolute => max_accuracy - self.drop_tolerance,
        };
        accuracy >= floor - 1e-12
    }

    pub fn total_models(&self) -> Result<usize> {
        self.searches.iter().map(|s| s.expand().map(|v| v.len())).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

/// One candidate model measured on the shared holdout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub id: String,
    pub family: Family,
    pub spec: ModelSpec,
    /// Trained with a fairness intervention.
    pub intervention: bool,
    /// Searches whose retention step kept this model.
    pub searches: Vec<String>,
    pub accuracy: f64,
    pub rates: GroupRates,
    pub stats: DisparityStats,
    pub accuracy_ci: Interval,
    pub on_frontier: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Holdout predictions as a `0`/`1` string, row order of the holdout.
    pub predictions: String,
    /// Hex SHA-256 of `predictions`.
    pub prediction_digest: String,
}

impl ModelRecord {
    pub fn disparity(&self) -> f64 {
        self.stats.disparity
    }

    pub fn air(&self) -> Option<f64> {
        self.stats.air
    }

    /// Metrics computed from holdout predictions; all reals rounded to six
    /// significant digits.
    pub fn measure(spec: &ModelSpec, predictions: &[u8], holdout: &HoldoutVectors, alpha: f64) -> Result<Self> {
        let labels = bits_to_vec(&holdout.labels);
        let groups = bits_to_vec(&holdout.groups);
        let accuracy = metrics::accuracy(predictions, &labels)?;
        let raw_rates = metrics::group_rates(predictions, &groups)?;
        let stats = metrics::disparity_stats(&raw_rates, alpha);
        let (low, high) = metrics::accuracy_ci(accuracy, labels.len(), alpha);
        let rates = GroupRates {
            privileged_rate: quantize(raw_rates.privileged_rate),
            protected_rate: quantize(raw_rates.protected_rate),
            ..raw_rates
        };
        let predictions = vec_to_bits(predictions);
        Ok(ModelRecord {
            id: spec.id(),
            family: spec.family(),
            spec: spec.clone(),
            intervention: spec.intervention.is_some(),
            searches: Vec::new(),
            accuracy: quantize(accuracy),
            rates,
            stats: DisparityStats {
                disparity: quantize(stats.disparity),
                air: stats.air.map(quantize),
                z: quantize(stats.z),
                p_value: quantize(stats.p_value),
                significant: stats.significant,
            },
            accuracy_ci: Interval { low: quantize(low), high: quantize(high) },
            on_frontier: false,
            label: None,
            prediction_digest: hex_digest(predictions.as_bytes()),
            predictions,
        })
    }

    /// Recomputes every metric from the stored predictions.
    pub fn recompute(&self, holdout: &HoldoutVectors, alpha: f64) -> Result<Self> {
        let mut fresh = Self::measure(&self.spec, &bits_to_vec(&self.predictions), holdout, alpha)?;
        fresh.id = self.id.clone();
        fresh.searches = self.searches.clone();
        fresh.on_frontier = self.on_frontier;
        fresh.label = self.label.clone();
        Ok(fresh)
    }

    /// A record placed directly at `(accuracy, disparity)`, for hand-built
    /// pools. Rates are centred on 0.5 over 1000 rows per group.
    pub fn from_point(id: &str, accuracy: f64, disparity: f64) -> Self {
        const N: usize = 1000;
        let rates = GroupRates {
            privileged_rate: 0.5 + disparity / 2.0,
            protected_rate: 0.5 - disparity / 2.0,
            privileged_count: N,
            protected_count: N,
            privileged_positives: ((0.5 + disparity / 2.0) * N as f64).round() as usize,
            protected_positives: ((0.5 - disparity / 2.0) * N as f64).round() as usize,
        };
        let mut stats = metrics::disparity_stats(&rates, 0.05);
        stats.disparity = disparity;
        let (low, high) = metrics::accuracy_ci(accuracy, 2 * N, 0.05);
        ModelRecord {
            id: id.to_string(),
            family: Family::LogisticRegression,
            spec: ModelSpec::new(Hyperparams::logistic()),
            intervention: false,
            searches: Vec::new(),
            accuracy,
            rates,
            stats,
            accuracy_ci: Interval { low, high },
            on_frontier: false,
            label: None,
            predictions: String::new(),
            prediction_digest: String::new(),
        }
    }
}

pub fn vec_to_bits(v: &[u8]) -> String {
    v.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
}

pub fn bits_to_vec(s: &str) -> Vec<u8> {
    s.bytes().map(|b| u8::from(b == b'1')).collect()
}

/// Holdout labels and groups, kept so every record can be re-measured.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoldoutVectors {
    pub labels: String,
    pub groups: String,
}

impl HoldoutVectors {
    pub fn from_matrix(m: &EncodedMatrix) -> Self {
        Self { labels: vec_to_bits(&m.labels), groups: vec_to_bits(&m.groups) }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub schema_hash: String,
    pub split_seed: u64,
    pub holdout_fraction: f64,
    pub train_rows: usize,
    pub holdout_rows: usize,
    pub dropped_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchProvenance {
    pub name: String,
    pub total: usize,
    pub kept: usize,
    pub kept_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePool {
    pub fingerprint: DatasetFingerprint,
    pub holdout: HoldoutVectors,
    /// Significance level used for the stored CIs and `significant` flags.
    pub metrics_alpha: f64,
    /// Sorted by id.
    pub records: Vec<ModelRecord>,
    pub baseline_id: String,
    pub provenance: Vec<SearchProvenance>,
    /// Groups of ids whose holdout predictions are identical.
    pub behavioral_duplicates: Vec<Vec<String>>,
}

impl CandidatePool {
    /// A pool over hand-built records; computes frontier flags and picks the
    /// max-accuracy baseline unless `baseline_id` is given.
    pub fn from_records(mut records: Vec<ModelRecord>, baseline_id: Option<&str>) -> Result<Self> {
        if records.is_empty() {
            return Err(SearchError::EmptyPool);
        }
        records.sort_by(|a, b| a.id.cmp(&b.id));
        mark_frontier(&mut records);
        let mut pool = CandidatePool {
            fingerprint: DatasetFingerprint {
                schema_hash: String::new(),
                split_seed: 0,
                holdout_fraction: 0.0,
                train_rows: 0,
                holdout_rows: 0,
                dropped_rows: 0,
            },
            holdout: HoldoutVectors { labels: String::new(), groups: String::new() },
            metrics_alpha: 0.05,
            records,
            baseline_id: String::new(),
            provenance: Vec::new(),
            behavioral_duplicates: Vec::new(),
        };
        pool.baseline_id = match baseline_id {
            Some(id) => select_baseline(&pool, &BaselinePolicy::SpecifiedId(id.to_string()))?,
            None => select_baseline(&pool, &BaselinePolicy::MaxAccuracy)?,
        };
        Ok(pool)
    }

    pub fn record(&self, id: &str) -> Option<&ModelRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn baseline(&self) -> &ModelRecord {
        self.record(&self.baseline_id).expect("baseline id is a pool record")
    }

    pub fn max_accuracy(&self) -> f64 {
        self.records.iter().map(|r| r.accuracy).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn with_baseline(mut self, policy: &BaselinePolicy) -> Result<Self> {
        self.baseline_id = select_baseline(&self, policy)?;
        Ok(self)
    }
}

fn mark_frontier(records: &mut [ModelRecord]) {
    let points: Vec<(f64, f64)> = records.iter().map(|r| (r.accuracy, r.disparity())).collect();
    for (r, on) in records.iter_mut().zip(metrics::pareto_frontier(&points)) {
        r.on_frontier = on;
    }
}

/// Ranking inside one search: accuracy desc, then disparity asc, then id.
fn retention_order(a: &ModelRecord, b: &ModelRecord) -> std::cmp::Ordering {
    b.accuracy
        .total_cmp(&a.accuracy)
        .then(a.disparity().total_cmp(&b.disparity()))
        .then_with(|| a.id.cmp(&b.id))
}

pub fn run_search(plan: &SearchPlan, data: &PreparedData) -> Result<CandidatePool> {
    run_search_with(plan, data, 0.05, ExecMode::default())
}

/// Trains every spec of `plan`, measures it on the holdout of `data` and
/// assembles the filtered pool. The output does not depend on `mode`.
pub fn run_search_with(
    plan: &SearchPlan,
    data: &PreparedData,
    alpha: f64,
    mode: ExecMode,
) -> Result<CandidatePool> {
    plan.validate()?;
    let jobs: Vec<(usize, ModelSpec)> = plan
        .searches
        .iter()
        .enumerate()
        .map(|(i, s)| s.expand().map(|specs| specs.into_iter().map(move |spec| (i, spec))))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    if jobs.is_empty() {
        return Err(SearchError::EmptyPool);
    }

    let featuresets: Vec<FeatureSelection> = jobs
        .iter()
        .map(|(_, s)| s.features.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let encoded: BTreeMap<FeatureSelection, (EncodedMatrix, EncodedMatrix)> = featuresets
        .iter()
        .cloned()
        .zip(par::map(mode, &featuresets, |fs| data.encode(fs)))
        .map(|(fs, r)| r.map(|m| (fs, m)))
        .collect::<std::result::Result<_, _>>()?;
    let (_, any_holdout) = encoded.values().next().expect("at least one featureset");
    let holdout = HoldoutVectors::from_matrix(any_holdout);

    let measured: Vec<Result<ModelRecord>> = par::map(mode, &jobs, |(_, spec)| {
        let (train, test) = &encoded[&spec.features];
        let wrap = |source| SearchError::Training { id: spec.id(), source };
        // Forest trees already fan out when the outer loop is sequential.
        let inner = if mode.is_parallel() { ExecMode::Sequential } else { mode };
        let model = learners::train_with(spec, train, None, inner).map_err(wrap)?;
        let preds = learners::predict(&model, test).map_err(wrap)?;
        ModelRecord::measure(spec, &preds, &holdout, alpha)
    });
    let measured: Vec<ModelRecord> = measured.into_iter().collect::<Result<_>>()?;

    let mut by_search: Vec<Vec<&ModelRecord>> = vec![Vec::new(); plan.searches.len()];
    for ((s, _), rec) in jobs.iter().zip(&measured) {
        by_search[*s].push(rec);
    }
    let mut union: BTreeMap<String, ModelRecord> = BTreeMap::new();
    let mut provenance = Vec::with_capacity(plan.searches.len());
    for (search, mut recs) in plan.searches.iter().zip(by_search) {
        let total = recs.len();
        recs.sort_by(|a, b| retention_order(a, b));
        // Identical specs inside one search collapse to a single record.
        recs.dedup_by(|a, b| a.id == b.id);
        let keep = plan.retained(recs.len());
        let kept: Vec<&ModelRecord> = recs.into_iter().take(keep).collect();
        provenance.push(SearchProvenance {
            name: search.name.clone(),
            total,
            kept: kept.len(),
            kept_ids: kept.iter().map(|r| r.id.clone()).collect(),
        });
        for r in kept {
            union
                .entry(r.id.clone())
                .or_insert_with(|| r.clone())
                .searches
                .push(search.name.clone());
        }
    }

    let max_acc = union.values().map(|r| r.accuracy).fold(f64::NEG_INFINITY, f64::max);
    let mut records: Vec<ModelRecord> = union
        .into_values()
        .filter(|r| plan.passes_drop(r.accuracy, max_acc))
        .collect();
    if records.is_empty() {
        return Err(SearchError::EmptyPool);
    }
    mark_frontier(&mut records);

    let mut by_digest: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for r in &records {
        by_digest.entry(&r.prediction_digest).or_default().push(r.id.clone());
    }
    let behavioral_duplicates = by_digest.into_values().filter(|ids| ids.len() > 1).collect();

    let mut pool = CandidatePool {
        fingerprint: DatasetFingerprint {
            schema_hash: data.schema.fingerprint(),
            split_seed: data.split.seed,
            holdout_fraction: data.split.holdout_fraction,
            train_rows: data.partition.train.len(),
            holdout_rows: data.partition.holdout.len(),
            dropped_rows: data.table.dropped_count,
        },
        holdout,
        metrics_alpha: alpha,
        records,
        baseline_id: String::new(),
        provenance,
        behavioral_duplicates,
    };
    pool.baseline_id = select_baseline(&pool, &BaselinePolicy::MaxAccuracy)?;
    Ok(pool)
}

/// How the baseline (deployed) model is chosen.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BaselinePolicy {
    /// Highest accuracy; ties go to higher disparity, then lowest id.
    #[default]
    MaxAccuracy,
    SpecifiedId(String),
    /// Most accurate non-frontier model within `eps` of the best accuracy.
    OffFrontierNear(f64),
}

impl fmt::Display for BaselinePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaselinePolicy::MaxAccuracy => f.write_str("max-accuracy"),
            BaselinePolicy::SpecifiedId(id) => write!(f, "id:{id}"),
            BaselinePolicy::OffFrontierNear(eps) => write!(f, "off-frontier:{eps}"),
        }
    }
}

impl FromStr for BaselinePolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "max-accuracy" {
            Ok(BaselinePolicy::MaxAccuracy)
        } else if let Some(id) = s.strip_prefix("id:") {
            Ok(BaselinePolicy::SpecifiedId(id.to_string()))
        } else if let Some(eps) = s.strip_prefix("off-frontier:") {
            match eps.parse::<f64>() {
                Ok(e) if e >= 0.0 && e.is_finite() => Ok(BaselinePolicy::OffFrontierNear(e)),
                _ => Err(format!("invalid off-frontier epsilon `{eps}`")),
            }
        } else {
            Err(format!(
                "unknown baseline policy `{s}` (expected max-accuracy, id:<id> or off-frontier:<eps>)"
            ))
        }
    }
}

impl TryFrom<String> for BaselinePolicy {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<BaselinePolicy> for String {
    fn from(p: BaselinePolicy) -> String {
        p.to_string()
    }
}

/// Baseline ordering: accuracy desc, disparity desc, id asc.
fn baseline_order(a: &ModelRecord, b: &ModelRecord) -> std::cmp::Ordering {
    b.accuracy
        .total_cmp(&a.accuracy)
        .then(b.disparity().total_cmp(&a.disparity()))
        .then_with(|| a.id.cmp(&b.id))
}

pub fn select_baseline(pool: &CandidatePool, policy: &BaselinePolicy) -> Result<String> {
    match policy {
        BaselinePolicy::MaxAccuracy => pool
            .records
            .iter()
            .min_by(|a, b| baseline_order(a, b))
            .map(|r| r.id.clone())
            .ok_or(SearchError::EmptyPool),
        BaselinePolicy::SpecifiedId(id) => pool
            .record(id)
            .map(|r| r.id.clone())
            .ok_or_else(|| SearchError::UnknownId(id.clone())),
        BaselinePolicy::OffFrontierNear(eps) => {
            let max = pool.max_accuracy();
            pool.records
                .iter()
                .filter(|r| !r.on_frontier && r.accuracy >= max - eps - 1e-12)
                .min_by(|a, b| baseline_order(a, b))
                .map(|r| r.id.clone())
                .ok_or(SearchError::NoOffFrontierCandidate(*eps))
        }
    }
}

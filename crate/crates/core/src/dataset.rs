//! Tabular data ingestion: schema, CSV loading, encoding, splitting and a
//! synthetic credit-data generator.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Level used for missing categorical cells.
pub const MISSING_LEVEL: &str = "__missing__";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("target column `{column}` does not take exactly two classes after mapping `{positive_label}`")]
    NonBinaryTarget { column: String, positive_label: String },
    #[error("table has no usable rows")]
    EmptyTable,
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("column `{column}` row {row}: `{value}` is not numeric")]
    InvalidNumeric { column: String, row: usize, value: String },
    #[error("degenerate split: {0}")]
    DegenerateSplit(String),
    #[error("`{path}`: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("`{path}`: {message}")]
    Parse { path: String, message: String },
}

type Result<T> = std::result::Result<T, DatasetError>;

/// Feature tags used for ablations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Credit,
    Employment,
    Loan,
    Demographic,
}

impl Tag {
    pub const ALL: [Tag; 4] = [Tag::Credit, Tag::Employment, Tag::Loan, Tag::Demographic];

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Credit => "credit",
            Tag::Employment => "employment",
            Tag::Loan => "loan",
            Tag::Demographic => "demographic",
        }
    }
}

/// Which feature columns a model may see: everything except columns
/// carrying an excluded tag, optionally restricted to numeric columns.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FeatureSelection {
    #[serde(default)]
    pub exclude_tags: BTreeSet<Tag>,
    #[serde(default)]
    pub numeric_only: bool,
}

impl FeatureSelection {
    pub fn excluding(tags: impl IntoIterator<Item = Tag>) -> Self {
        Self { exclude_tags: tags.into_iter().collect(), numeric_only: false }
    }

    pub fn admits(&self, feature: &FeatureSpec) -> bool {
        feature.tags.is_disjoint(&self.exclude_tags)
            && (!self.numeric_only || feature.kind == FeatureKind::Numeric)
    }

    /// Short label used inside model ids: `full`, `-credit-loan`, `numeric`.
    pub fn label(&self) -> String {
        let mut out = String::new();
        if self.numeric_only {
            out.push_str("numeric");
        }
        for t in &self.exclude_tags {
            out.push('-');
            out.push_str(t.as_str());
        }
        if out.is_empty() {
            out.push_str("full");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    #[serde(default)]
    pub tags: BTreeSet<Tag>,
}

/// Column roles of a credit dataset. The protected attribute is binarized as
/// `privileged_value` versus every other value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub target_column: String,
    pub positive_label: String,
    pub protected_column: String,
    pub privileged_value: String,
    pub features: Vec<FeatureSpec>,
}

impl DatasetSchema {
    pub fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(DatasetError::InvalidSchema("at least one feature column is required".into()));
        }
        let mut seen = BTreeSet::new();
        seen.insert(self.target_column.as_str());
        if !seen.insert(self.protected_column.as_str()) {
            return Err(DatasetError::InvalidSchema(
                "target and protected columns must differ".into(),
            ));
        }
        for f in &self.features {
            if f.name == self.target_column || f.name == self.protected_column {
                return Err(DatasetError::InvalidSchema(format!(
                    "`{}` cannot be both a feature and the target/protected column",
                    f.name
                )));
            }
            if !seen.insert(f.name.as_str()) {
                return Err(DatasetError::InvalidSchema(format!("duplicate column `{}`", f.name)));
            }
        }
        Ok(())
    }

    /// Parses a schema from TOML, or JSON when `json` is set.
    pub fn parse(text: &str, json: bool) -> std::result::Result<Self, String> {
        if json {
            serde_json::from_str(text).map_err(|e| e.to_string())
        } else {
            toml::from_str(text).map_err(|e| e.to_string())
        }
    }

    /// Reads and validates a schema file (`.json` or TOML).
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let json = path.extension().is_some_and(|e| e == "json");
        let schema = Self::parse(&text, json).map_err(|message| DatasetError::Parse {
            path: path.display().to_string(),
            message,
        })?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("schema serializes")
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("schema serializes");
        hex_digest(json.as_bytes())
    }

    /// Feature columns admitted by `selection`.
    pub fn active_features(&self, selection: &FeatureSelection) -> Vec<&FeatureSpec> {
        self.features.iter().filter(|f| selection.admits(f)).collect()
    }

    fn required_columns(&self) -> impl Iterator<Item = &str> {
        [self.target_column.as_str(), self.protected_column.as_str()]
            .into_iter()
            .chain(self.features.iter().map(|f| f.name.as_str()))
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// A rectangular table of string cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Rows dropped at load time for a missing target or protected value.
    pub dropped_count: usize,
}

impl DataTable {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<String>>) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == columns.len()));
        Self { columns, rows, dropped_count: 0 }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    fn require(&self, name: &str) -> Result<usize> {
        self.column_index(name)
            .ok_or_else(|| DatasetError::MissingColumn(name.to_string()))
    }

    /// 1 for the positive (approval) class, 0 otherwise.
    pub fn labels(&self, schema: &DatasetSchema) -> Result<Vec<u8>> {
        let idx = self.require(&schema.target_column)?;
        Ok(self
            .rows
            .iter()
            .map(|r| u8::from(r[idx].trim() == schema.positive_label))
            .collect())
    }

    /// 1 for the privileged group, 0 for the protected group.
    pub fn groups(&self, schema: &DatasetSchema) -> Result<Vec<u8>> {
        let idx = self.require(&schema.protected_column)?;
        Ok(self
            .rows
            .iter()
            .map(|r| u8::from(r[idx].trim() == schema.privileged_value))
            .collect())
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

pub fn is_missing(cell: &str) -> bool {
    matches!(cell.trim(), "" | "NA" | "?")
}

/// Loads a CSV file with a header row and checks it against `schema`.
pub fn load_table(path: impl AsRef<Path>, schema: &DatasetSchema) -> Result<DataTable> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_table_from_reader(file, schema)
}

pub fn load_table_from_reader<R: Read>(reader: R, schema: &DatasetSchema) -> Result<DataTable> {
    schema.validate()?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let columns: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut table = DataTable::new(columns, Vec::new());
    for col in schema.required_columns() {
        table.require(col)?;
    }
    let t_idx = table.require(&schema.target_column)?;
    let p_idx = table.require(&schema.protected_column)?;
    for record in rdr.records() {
        let row: Vec<String> = record?.iter().map(str::to_string).collect();
        if is_missing(&row[t_idx]) || is_missing(&row[p_idx]) {
            table.dropped_count += 1;
            continue;
        }
        table.rows.push(row);
    }
    if table.rows.is_empty() {
        return Err(DatasetError::EmptyTable);
    }
    let labels = table.labels(schema)?;
    if !labels.contains(&0) || !labels.contains(&1) {
        return Err(DatasetError::NonBinaryTarget {
            column: schema.target_column.clone(),
            positive_label: schema.positive_label.clone(),
        });
    }
    Ok(table)
}

/// One encoded source column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EncodedBlock {
    Numeric {
        name: String,
        offset: usize,
        mean: f64,
        std: f64,
        constant: bool,
    },
    Categorical {
        name: String,
        offset: usize,
        /// Sorted lexicographically; level `i` maps to column `offset + i`.
        levels: Vec<String>,
    },
}

impl EncodedBlock {
    fn name(&self) -> &str {
        match self {
            EncodedBlock::Numeric { name, .. } | EncodedBlock::Categorical { name, .. } => name,
        }
    }

    fn width(&self) -> usize {
        match self {
            EncodedBlock::Numeric { .. } => 1,
            EncodedBlock::Categorical { levels, .. } => levels.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EncodeWarning {
    /// Numeric column whose training stddev is zero; emitted as zeros.
    ConstantNumericColumn(String),
}

/// Encoding learned from training rows: one-hot maps and standardization
/// statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub blocks: Vec<EncodedBlock>,
    pub n_cols: usize,
    pub selection: FeatureSelection,
    pub warnings: Vec<EncodeWarning>,
}

impl Encoder {
    /// Fits the encoder on the rows `fit_rows` of `table`.
    pub fn fit(
        table: &DataTable,
        schema: &DatasetSchema,
        selection: &FeatureSelection,
        fit_rows: &[usize],
    ) -> Result<Self> {
        let mut blocks = Vec::new();
        let mut warnings = Vec::new();
        let mut offset = 0;
        for feature in schema.active_features(selection) {
            let col = table.require(&feature.name)?;
            let block = match feature.kind {
                FeatureKind::Numeric => {
                    let mut values = Vec::with_capacity(fit_rows.len());
                    for &r in fit_rows {
                        if let Some(v) = parse_numeric(&table.rows[r][col], &feature.name, r)? {
                            values.push(v);
                        }
                    }
                    let (mean, std) = mean_std(&values);
                    let constant = std <= 1e-12 * mean.abs().max(1.0);
                    if constant {
                        warnings.push(EncodeWarning::ConstantNumericColumn(feature.name.clone()));
                    }
                    EncodedBlock::Numeric { name: feature.name.clone(), offset, mean, std, constant }
                }
                FeatureKind::Categorical => {
                    let levels: BTreeSet<String> =
                        fit_rows.iter().map(|&r| category(&table.rows[r][col])).collect();
                    EncodedBlock::Categorical {
                        name: feature.name.clone(),
                        offset,
                        levels: levels.into_iter().collect(),
                    }
                }
            };
            offset += block.width();
            blocks.push(block);
        }
        Ok(Self { blocks, n_cols: offset, selection: selection.clone(), warnings })
    }

    /// Encoded column names; categorical columns read `name=level`.
    pub fn column_names(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.n_cols);
        for b in &self.blocks {
            match b {
                EncodedBlock::Numeric { name, .. } => out.push(name.clone()),
                EncodedBlock::Categorical { name, levels, .. } => {
                    out.extend(levels.iter().map(|l| format!("{name}={l}")))
                }
            }
        }
        out
    }

    /// Encodes `rows` of `table`. Missing numerics are imputed with the
    /// training mean; unseen categorical levels produce an all-zero block.
    pub fn transform(
        &self,
        table: &DataTable,
        schema: &DatasetSchema,
        rows: &[usize],
    ) -> Result<EncodedMatrix> {
        let cols: Vec<usize> = self
            .blocks
            .iter()
            .map(|b| table.require(b.name()))
            .collect::<Result<_>>()?;
        let all_labels = table.labels(schema)?;
        let all_groups = table.groups(schema)?;
        let mut features = vec![0.0; rows.len() * self.n_cols];
        for (i, &r) in rows.iter().enumerate() {
            let out = &mut features[i * self.n_cols..(i + 1) * self.n_cols];
            for (block, &col) in self.blocks.iter().zip(&cols) {
                let cell = &table.rows[r][col];
                match block {
                    EncodedBlock::Numeric { name, offset, mean, std, constant } => {
                        let v = parse_numeric(cell, name, r)?.unwrap_or(*mean);
                        out[*offset] = if *constant { 0.0 } else { (v - mean) / std };
                    }
                    EncodedBlock::Categorical { offset, levels, .. } => {
                        let level = category(cell);
                        if let Ok(pos) = levels.binary_search(&level) {
                            out[offset + pos] = 1.0;
                        }
                    }
                }
            }
        }
        Ok(EncodedMatrix {
            n_rows: rows.len(),
            n_cols: self.n_cols,
            features,
            labels: rows.iter().map(|&r| all_labels[r]).collect(),
            groups: rows.iter().map(|&r| all_groups[r]).collect(),
            encoder: self.clone(),
        })
    }

    /// Recovers the categorical level of every categorical block for one
    /// encoded row. `None` marks an all-zero (unseen) block.
    pub fn decode_categorical(&self, row: &[f64]) -> BTreeMap<String, Option<String>> {
        let mut out = BTreeMap::new();
        for b in &self.blocks {
            if let EncodedBlock::Categorical { name, offset, levels } = b {
                let level = levels
                    .iter()
                    .enumerate()
                    .find(|(i, _)| row[offset + i] == 1.0)
                    .map(|(_, l)| l.clone());
                out.insert(name.clone(), level);
            }
        }
        out
    }
}

fn category(cell: &str) -> String {
    if is_missing(cell) {
        MISSING_LEVEL.to_string()
    } else {
        cell.trim().to_string()
    }
}

fn parse_numeric(cell: &str, column: &str, row: usize) -> Result<Option<f64>> {
    if is_missing(cell) {
        return Ok(None);
    }
    cell.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(Some)
        .ok_or_else(|| DatasetError::InvalidNumeric {
            column: column.to_string(),
            row,
            value: cell.to_string(),
        })
}

/// Mean and population standard deviation; (0, 0) for an empty slice.
fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Row-major encoded features with labels (1 = approval) and groups
/// (1 = privileged).
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub features: Vec<f64>,
    pub labels: Vec<u8>,
    pub groups: Vec<u8>,
    pub encoder: Encoder,
}

impl EncodedMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn column_names(&self) -> Vec<String> {
        self.encoder.column_names()
    }

    pub fn select_rows(&self, rows: &[usize]) -> EncodedMatrix {
        let mut features = Vec::with_capacity(rows.len() * self.n_cols);
        for &r in rows {
            features.extend_from_slice(self.row(r));
        }
        EncodedMatrix {
            n_rows: rows.len(),
            n_cols: self.n_cols,
            features,
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            groups: rows.iter().map(|&r| self.groups[r]).collect(),
            encoder: self.encoder.clone(),
        }
    }

    /// Builds a matrix directly from dense rows; used for fixtures.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<u8>, groups: Vec<u8>) -> Self {
        let n_cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == n_cols), "ragged rows");
        assert_eq!(rows.len(), labels.len());
        assert_eq!(rows.len(), groups.len());
        let blocks = (0..n_cols)
            .map(|j| EncodedBlock::Numeric {
                name: format!("x{j}"),
                offset: j,
                mean: 0.0,
                std: 1.0,
                constant: false,
            })
            .collect();
        EncodedMatrix {
            n_rows: rows.len(),
            n_cols,
            features: rows.concat(),
            labels,
            groups,
            encoder: Encoder { blocks, n_cols, selection: FeatureSelection::default(), warnings: Vec::new() },
        }
    }
}

/// Encodes every row of `table` without the columns tagged in `excluded`,
/// fitting statistics on all rows.
pub fn encode(
    table: &DataTable,
    schema: &DatasetSchema,
    excluded: &BTreeSet<Tag>,
) -> Result<EncodedMatrix> {
    let selection = FeatureSelection { exclude_tags: excluded.clone(), numeric_only: false };
    let rows: Vec<usize> = (0..table.n_rows()).collect();
    Encoder::fit(table, schema, &selection, &rows)?.transform(table, schema, &rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { holdout_fraction: 0.2, seed: 42 }
    }
}

/// Sorted, disjoint row indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub train: Vec<usize>,
    pub holdout: Vec<usize>,
}

impl SplitSpec {
    /// Seeded shuffle partition of `labels.len()` rows. Each side must hold
    /// both groups and both labels.
    pub fn partition(&self, labels: &[u8], groups: &[u8]) -> Result<Partition> {
        if !(self.holdout_fraction > 0.0 && self.holdout_fraction < 1.0) {
            return Err(DatasetError::DegenerateSplit(format!(
                "holdout fraction {} outside (0, 1)",
                self.holdout_fraction
            )));
        }
        let n = labels.len();
        if n == 0 {
            return Err(DatasetError::EmptyTable);
        }
        let n_holdout = (self.holdout_fraction * n as f64).round() as usize;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(self.seed));
        let mut holdout = order[..n_holdout].to_vec();
        let mut train = order[n_holdout..].to_vec();
        holdout.sort_unstable();
        train.sort_unstable();
        for (side, rows) in [("train", &train), ("holdout", &holdout)] {
            if rows.is_empty() {
                return Err(DatasetError::DegenerateSplit(format!("{side} side is empty")));
            }
            for (what, values) in [("group", groups), ("label", labels)] {
                let ones = rows.iter().filter(|&&r| values[r] == 1).count();
                if ones == 0 || ones == rows.len() {
                    return Err(DatasetError::DegenerateSplit(format!(
                        "{side} side is missing one {what}"
                    )));
                }
            }
        }
        Ok(Partition { train, holdout })
    }
}

/// Splits an encoded matrix into (train, holdout).
pub fn split(matrix: &EncodedMatrix, spec: &SplitSpec) -> Result<(EncodedMatrix, EncodedMatrix)> {
    let p = spec.partition(&matrix.labels, &matrix.groups)?;
    Ok((matrix.select_rows(&p.train), matrix.select_rows(&p.holdout)))
}

/// A loaded table with a fixed train/holdout partition. Every feature-set
/// ablation is encoded against the same partition, with statistics fitted
/// on training rows only.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub table: DataTable,
    pub schema: DatasetSchema,
    pub split: SplitSpec,
    pub partition: Partition,
}

impl PreparedData {
    pub fn new(table: DataTable, schema: DatasetSchema, split: SplitSpec) -> Result<Self> {
        schema.validate()?;
        let labels = table.labels(&schema)?;
        let groups = table.groups(&schema)?;
        let partition = split.partition(&labels, &groups)?;
        Ok(Self { table, schema, split, partition })
    }

    pub fn encode(&self, selection: &FeatureSelection) -> Result<(EncodedMatrix, EncodedMatrix)> {
        let enc = Encoder::fit(&self.table, &self.schema, selection, &self.partition.train)?;
        Ok((
            enc.transform(&self.table, &self.schema, &self.partition.train)?,
            enc.transform(&self.table, &self.schema, &self.partition.holdout)?,
        ))
    }
}

/// Columns produced by [`synth_generate`].
pub fn synthetic_schema() -> DatasetSchema {
    use FeatureKind::*;
    let f = |name: &str, kind, tags: &[Tag]| FeatureSpec {
        name: name.to_string(),
        kind,
        tags: tags.iter().copied().collect(),
    };
    DatasetSchema {
        target_column: "approved".into(),
        positive_label: "yes".into(),
        protected_column: "sex".into(),
        privileged_value: "male".into(),
        features: vec![
            f("credit_score", Numeric, &[Tag::Credit]),
            f("credit_history", Categorical, &[Tag::Credit]),
            f("employment_years", Numeric, &[Tag::Employment]),
            f("job", Categorical, &[Tag::Employment]),
            f("loan_amount", Numeric, &[Tag::Loan]),
            f("loan_purpose", Categorical, &[Tag::Loan]),
            f("debt_to_income", Numeric, &[Tag::Loan]),
            f("age", Numeric, &[Tag::Demographic]),
        ],
    }
}

/// Synthetic table plus the ground truth it was drawn from.
#[derive(Debug, Clone)]
pub struct SyntheticDraw {
    pub table: DataTable,
    /// True approval probability per row.
    pub probabilities: Vec<f64>,
    /// Label a Bayes-optimal predictor would assign (probability >= 0.5).
    pub bayes_labels: Vec<u8>,
    pub groups: Vec<u8>,
}

/// Generates a credit table with a logistic ground truth. `bias_strength`
/// adds a privileged-group offset to the approval logit and shifts the
/// credit and employment features, so it also leaks through proxies. With
/// `bias_strength = 0` features and labels are independent of the group.
pub fn synth_generate(
    n: usize,
    group_balance: f64,
    signal_strength: f64,
    bias_strength: f64,
    seed: u64,
) -> DataTable {
    synth_draw(n, group_balance, signal_strength, bias_strength, seed).table
}

pub fn synth_draw(
    n: usize,
    group_balance: f64,
    signal_strength: f64,
    bias_strength: f64,
    seed: u64,
) -> SyntheticDraw {
    assert!(n >= 10, "synthetic tables need at least 10 rows");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let schema = synthetic_schema();
    let mut columns: Vec<String> = schema.features.iter().map(|f| f.name.clone()).collect();
    columns.push(schema.protected_column.clone());
    columns.push(schema.target_column.clone());

    let mut rows = Vec::with_capacity(n);
    let mut probabilities = Vec::with_capacity(n);
    let mut bayes_labels = Vec::with_capacity(n);
    let mut groups = Vec::with_capacity(n);
    for _ in 0..n {
        let privileged = rng.random_bool(group_balance.clamp(0.0, 1.0));
        let g = if privileged { 0.5 } else { -0.5 };
        let shift = bias_strength * g;

        let credit = normal.sample(&mut rng) + 0.8 * shift;
        let history = match credit + 0.7 * normal.sample(&mut rng) {
            v if v < -0.6 => "poor",
            v if v < 0.6 => "fair",
            _ => "good",
        };
        let employment = (6.0 + 4.0 * (normal.sample(&mut rng) + 0.5 * shift)).max(0.0);
        let job = match rng.random_range(0..10) + if shift > 0.0 { 1 } else { 0 } {
            0..=2 => "unskilled",
            3..=7 => "skilled",
            _ => "self_employed",
        };
        let amount = (15_000.0 + 6_000.0 * normal.sample(&mut rng)).max(500.0);
        let purpose = ["auto", "education", "home"][rng.random_range(0..3)];
        let dti = (0.35 + 0.12 * normal.sample(&mut rng)).clamp(0.0, 1.5);
        let age = (18.0 + 45.0 * rng.random::<f64>()).round();

        let linear = 0.9 * credit
            + match history {
                "poor" => -0.6,
                "good" => 0.4,
                _ => 0.0,
            }
            + 0.12 * (employment - 6.0)
            + if job == "unskilled" { -0.3 } else { 0.1 }
            - (amount - 15_000.0) / 12_000.0
            - 3.0 * (dti - 0.35)
            + 0.01 * (age - 40.0);
        let logit = signal_strength * linear + bias_strength * g + 0.2;
        let p = 1.0 / (1.0 + (-logit).exp());
        let label = rng.random_bool(p);

        let employment_cell = if rng.random_bool(0.01) {
            String::new()
        } else {
            format!("{employment:.2}")
        };
        rows.push(vec![
            format!("{:.1}", 650.0 + 60.0 * credit),
            history.to_string(),
            employment_cell,
            job.to_string(),
            format!("{amount:.0}"),
            purpose.to_string(),
            format!("{dti:.3}"),
            format!("{age:.0}"),
            if privileged { "male" } else { "female" }.to_string(),
            if label { "yes" } else { "no" }.to_string(),
        ]);
        probabilities.push(p);
        bayes_labels.push(u8::from(p >= 0.5));
        groups.push(u8::from(privileged));
    }
    SyntheticDraw { table: DataTable::new(columns, rows), probabilities, bayes_labels, groups }
}

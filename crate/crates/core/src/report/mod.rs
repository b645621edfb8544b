//! Audit report: canonical JSON, an SVG scatter and a plain-text summary.

mod summary;
mod svg;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::dataset::{DatasetSchema, SplitSpec};
use crate::doctrine::{self, DiConfig, DivergenceReport, Geometry, UdapConfig, Verdict};
use crate::search::{BaselinePolicy, CandidatePool};

pub use summary::emit_summary;
pub use svg::{emit_svg_scatter, render_svg};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("`{path}`: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("report is incomplete: {0} missing")]
    IncompleteReport(&'static str),
    #[error("report json: {0}")]
    Serde(#[from] serde_json::Error),
}

type Result<T> = std::result::Result<T, ReportError>;

/// Rounds to six significant digits. Non-finite values and zero pass through.
pub fn quantize(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub schema: DatasetSchema,
    pub split: SplitSpec,
    /// Defaults and operationalizations in force for this run.
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoctrineConfigs {
    pub di: DiConfig,
    pub udap: UdapConfig,
    pub baseline_policy: BaselinePolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub di: Verdict,
    pub udap: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub generated_at: String,
    pub dataset: DatasetMeta,
    pub pool: CandidatePool,
    pub configs: DoctrineConfigs,
    pub verdicts: Option<Verdicts>,
    pub divergence: Option<DivergenceReport>,
    pub geometry: Option<Geometry>,
}

impl AuditReport {
    /// Evaluates both doctrines on `pool`, labels the highlighted models and
    /// returns the complete report.
    pub fn assemble(
        dataset: DatasetMeta,
        mut pool: CandidatePool,
        configs: DoctrineConfigs,
        generated_at: impl Into<String>,
    ) -> Self {
        let eval = doctrine::evaluate(&pool, &configs.di, &configs.udap);
        let geometry = doctrine::acceptability_geometry(pool.baseline(), &configs.di, &configs.udap);
        assign_labels(&mut pool, &eval.divergence);
        let report = AuditReport {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            generated_at: generated_at.into(),
            dataset,
            pool,
            configs,
            verdicts: Some(Verdicts { di: eval.di, udap: eval.udap }),
            divergence: Some(eval.divergence),
            geometry: Some(geometry),
        };
        // Hold derived floats at their serialized precision so that a parsed
        // report compares equal to the assembled one.
        canonicalize(&report).expect("report serializes")
    }

    pub fn check_complete(&self) -> Result<()> {
        if self.verdicts.is_none() {
            return Err(ReportError::IncompleteReport("verdicts"));
        }
        if self.divergence.is_none() {
            return Err(ReportError::IncompleteReport("divergence"));
        }
        if self.geometry.is_none() {
            return Err(ReportError::IncompleteReport("geometry"));
        }
        Ok(())
    }
}

/// Letters the most accurate model of each highlighted bucket: `A` accepted by
/// both doctrines, `B` by UDAP only, `C` by DI only.
fn assign_labels(pool: &mut CandidatePool, div: &DivergenceReport) {
    for r in &mut pool.records {
        r.label = None;
    }
    for (letter, ids) in [("A", &div.both), ("B", &div.udap_only), ("C", &div.di_only)] {
        let best = ids
            .iter()
            .filter_map(|id| pool.record(id))
            .max_by(|a, b| a.accuracy.total_cmp(&b.accuracy).then_with(|| b.id.cmp(&a.id)))
            .map(|r| r.id.clone());
        if let Some(id) = best {
            let rec = pool.records.iter_mut().find(|r| r.id == id).expect("id from pool");
            rec.label = Some(letter.to_string());
        }
    }
}

fn canonical(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> =
                map.into_iter().map(|(k, v)| (k, canonical(v))).collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().collect::<Map<_, _>>())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonical).collect()),
        Value::Number(n) if n.is_f64() => {
            let x = quantize(n.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        other => other,
    }
}

/// Passes `value` through the canonical number form used by the report JSON.
pub fn canonicalize<T: Serialize + serde::de::DeserializeOwned>(value: &T) -> Result<T> {
    Ok(serde_json::from_value(canonical(serde_json::to_value(value)?))?)
}

/// Pretty JSON with sorted keys and six-significant-digit floats. Fails on an
/// incomplete report.
pub fn to_canonical_json(report: &AuditReport) -> Result<String> {
    report.check_complete()?;
    canonical_json(report)
}

/// Canonical form for any serializable value: sorted keys, quantized floats,
/// pretty printed with a trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = serde_json::to_string_pretty(&canonical(serde_json::to_value(value)?))?;
    out.push('\n');
    Ok(out)
}

pub fn parse_report(text: &str) -> Result<AuditReport> {
    Ok(serde_json::from_str(text)?)
}

pub fn emit_json(report: &AuditReport, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &to_canonical_json(report)?)
}

pub fn load_report(path: impl AsRef<Path>) -> Result<AuditReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_report(&text)
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::dataset::synthetic_schema;
    use crate::search::ModelRecord;

    pub fn report() -> AuditReport {
        let records = vec![
            ModelRecord::from_point("b", 0.90, 0.15),
            ModelRecord::from_point("m1", 0.895, 0.147),
            ModelRecord::from_point("m2", 0.85, 0.02),
            ModelRecord::from_point("m3", 0.898, 0.12),
        ];
        let pool = CandidatePool::from_records(records, Some("b")).unwrap();
        let di = DiConfig {
            lda_rules: vec![doctrine::LdaRule::AbsoluteTolerance { delta: 0.01 }],
            ..DiConfig::default()
        };
        let udap = UdapConfig { slopes: vec![1.0], ..UdapConfig::default() };
        AuditReport::assemble(
            DatasetMeta { schema: synthetic_schema(), split: SplitSpec::default(), notes: vec![] },
            pool,
            DoctrineConfigs { di, udap, baseline_policy: BaselinePolicy::SpecifiedId("b".into()) },
            "2026-01-01T00:00:00Z",
        )
    }
}

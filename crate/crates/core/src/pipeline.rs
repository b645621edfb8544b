//! End-to-end audit: load, split, search, choose the baseline, evaluate and
//! assemble the report.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{DataTable, DatasetSchema, PreparedData, SplitSpec, Tag};
use crate::doctrine::{DiConfig, UdapConfig};
use crate::learners::Family;
use crate::par::ExecMode;
use crate::report::{AuditReport, DatasetMeta, DoctrineConfigs};
use crate::search::{
    self, BaselinePolicy, ConfigSearch, DropMode, HyperGrid, InterventionGrid, SearchPlan,
};
use crate::{Error, Result};

fn default_retention() -> f64 {
    SearchPlan::default().retention
}

fn default_drop_tolerance() -> f64 {
    SearchPlan::default().drop_tolerance
}

/// Everything an audit run needs besides the data. Read from TOML or JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditPlan {
    #[serde(default = "default_retention")]
    pub retention: f64,
    #[serde(default = "default_drop_tolerance")]
    pub drop_tolerance: f64,
    #[serde(default)]
    pub drop_mode: DropMode,
    #[serde(default)]
    pub baseline_policy: BaselinePolicy,
    #[serde(default)]
    pub split: SplitSpec,
    #[serde(default)]
    pub di: DiConfig,
    #[serde(default)]
    pub udap: UdapConfig,
    #[serde(rename = "search", default)]
    pub searches: Vec<ConfigSearch>,
}

impl AuditPlan {
    pub fn search_plan(&self) -> SearchPlan {
        SearchPlan {
            searches: self.searches.clone(),
            retention: self.retention,
            drop_tolerance: self.drop_tolerance,
            drop_mode: self.drop_mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.search_plan().validate()?;
        self.di.validate().map_err(Error::Config)?;
        self.udap.validate().map_err(Error::Config)?;
        Ok(())
    }

    pub fn parse(text: &str, json: bool) -> Result<Self> {
        let plan: Self = if json {
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("`{}`: {e}", path.display())))?;
        let json = path.extension().is_some_and(|e| e == "json");
        Self::parse(&text, json).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("`{}`: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plan serializes")
    }
}

fn search(name: &str, family: Family, exclude: &[Tag], grid: HyperGrid, iv: InterventionGrid) -> ConfigSearch {
    ConfigSearch {
        name: name.into(),
        family,
        exclude_tags: exclude.iter().copied().collect::<BTreeSet<_>>(),
        numeric_only: false,
        grid,
        interventions: iv,
        seed_base: 0,
        replicates: 1,
    }
}

fn interventions(post: &[f64], reweigh: &[f64]) -> InterventionGrid {
    InterventionGrid { none: true, postprocess_targets: post.to_vec(), reweigh_strengths: reweigh.to_vec() }
}

/// The plan shipped with `synth`: four families, feature ablations by tag,
/// and both interventions. Trains 79 models.
pub fn default_plan() -> AuditPlan {
    let lr = |rates: &[f64], l2: &[f64]| HyperGrid {
        learning_rate: Some(rates.to_vec()),
        iterations: Some(vec![300]),
        l2: Some(l2.to_vec()),
        ..HyperGrid::default()
    };
    let depth = |d: &[usize]| HyperGrid { max_depth: Some(d.to_vec()), ..HyperGrid::default() };
    let limited = [Tag::Credit, Tag::Employment, Tag::Demographic];
    let mut numeric = search("lr-numeric", Family::LogisticRegression, &[], lr(&[0.1, 0.3], &[1e-4]), interventions(&[], &[]));
    numeric.numeric_only = true;
    let mut forests = search(
        "rf-full",
        Family::BaggedForest,
        &[],
        HyperGrid { tree_count: Some(vec![100]), max_depth: Some(vec![3, 5]), ..HyperGrid::default() },
        interventions(&[], &[1.0]),
    );
    forests.replicates = 2;
    let searches = vec![
        search(
            "lr-full",
            Family::LogisticRegression,
            &[],
            lr(&[0.05, 0.1, 0.3], &[1e-4, 1e-2]),
            interventions(&[0.0, 0.05, 0.1], &[0.5, 1.0]),
        ),
        search("lr-no-credit", Family::LogisticRegression, &[Tag::Credit], lr(&[0.1, 0.3], &[1e-4]), interventions(&[], &[1.0])),
        search("lr-no-employment", Family::LogisticRegression, &[Tag::Employment], lr(&[0.1, 0.3], &[1e-4]), interventions(&[], &[1.0])),
        search("lr-limited", Family::LogisticRegression, &limited, lr(&[0.1, 0.3], &[1e-4]), interventions(&[], &[])),
        numeric,
        search("dt-full", Family::DecisionTree, &[], depth(&[2, 3, 4, 5, 6]), interventions(&[0.05], &[])),
        search("dt-no-credit", Family::DecisionTree, &[Tag::Credit], depth(&[3, 5]), interventions(&[], &[])),
        forests,
        search(
            "rf-no-employment",
            Family::BaggedForest,
            &[Tag::Employment],
            HyperGrid { tree_count: Some(vec![100]), max_depth: Some(vec![5]), ..HyperGrid::default() },
            interventions(&[], &[]),
        ),
        search(
            "svm-full",
            Family::LinearSvm,
            &[],
            HyperGrid {
                learning_rate: Some(vec![0.05, 0.1]),
                l2: Some(vec![1e-3, 1e-2]),
                ..HyperGrid::default()
            },
            interventions(&[0.05], &[]),
        ),
        search("svm-no-credit", Family::LinearSvm, &[Tag::Credit], HyperGrid::default(), interventions(&[], &[1.0])),
    ];
    AuditPlan {
        retention: default_retention(),
        drop_tolerance: default_drop_tolerance(),
        drop_mode: DropMode::Relative,
        baseline_policy: BaselinePolicy::MaxAccuracy,
        split: SplitSpec::default(),
        di: DiConfig::default(),
        udap: UdapConfig::default(),
        searches,
    }
}

fn notes(plan: &AuditPlan) -> Vec<String> {
    let sign = if plan.di.absolute_disparity && plan.udap.absolute_disparity {
        "absolute"
    } else if plan.di.absolute_disparity || plan.udap.absolute_disparity {
        "absolute for one doctrine, signed for the other"
    } else {
        "signed"
    };
    vec![
        format!("disparity is the privileged approval rate minus the protected approval rate ({sign})"),
        "significance uses a pooled two-proportion z-test; accuracy intervals use the normal approximation".into(),
        format!("DI practical significance combinator: {:?}", plan.di.combinator),
        format!("baseline policy: {}", plan.baseline_policy),
        format!(
            "retention {} per search, accuracy-drop tolerance {} ({:?})",
            plan.retention, plan.drop_tolerance, plan.drop_mode
        ),
        "metrics are rounded to six significant digits".into(),
    ]
}

/// Runs a full audit over `table`. `generated_at` is copied into the report
/// verbatim so repeated runs can be byte-identical.
pub fn run_audit(
    table: DataTable,
    schema: DatasetSchema,
    plan: &AuditPlan,
    generated_at: &str,
    mode: ExecMode,
) -> Result<AuditReport> {
    plan.validate()?;
    let data = PreparedData::new(table, schema, plan.split)?;
    let pool = search::run_search_with(&plan.search_plan(), &data, plan.di.alpha, mode)?
        .with_baseline(&plan.baseline_policy)?;
    let meta = DatasetMeta { schema: data.schema.clone(), split: plan.split, notes: notes(plan) };
    let configs = DoctrineConfigs {
        di: plan.di.clone(),
        udap: plan.udap.clone(),
        baseline_policy: plan.baseline_policy.clone(),
    };
    Ok(AuditReport::assemble(meta, pool, configs, generated_at))
}

//! Disparate impact (DI) and UDAP unfairness as parameterized rules.
//!
//! Both doctrines share a three-step shape: a threshold showing of harm
//! (trigger), a gate that can end the inquiry (business justification for
//! DI, reasonable avoidability for UDAP), and a test of alternatives. Under
//! DI an alternative must reduce disparity while staying within an accuracy
//! bound; under UDAP it must sit on or above a linear tradeoff line through
//! the baseline that trades `k` points of disparity per point of accuracy.
//!
//! All boundary comparisons are inclusive except the AIR test and the
//! disparity-reduction requirement, which are strict.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::metrics;
use crate::search::{CandidatePool, ModelRecord};

/// Absorbs representation error at inclusive boundaries.
const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerCombinator {
    DifferenceOnly,
    AirOnly,
    #[default]
    Either,
}

/// Business-performance rule for a less discriminatory alternative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LdaRule {
    /// `acc(m) >= acc(b) - delta`.
    AbsoluteTolerance { delta: f64 },
    /// `acc(m) >=` the lower end of the baseline's accuracy CI.
    WithinCi,
    /// `acc(m) >= accuracy` of an earlier system.
    BeatsPrevious { accuracy: f64 },
}

impl LdaRule {
    pub fn label(&self) -> String {
        match self {
            LdaRule::AbsoluteTolerance { delta } => format!("delta={delta}"),
            LdaRule::WithinCi => "within_ci".into(),
            LdaRule::BeatsPrevious { accuracy } => format!("beats_previous={accuracy}"),
        }
    }

    /// Accuracy floor relative to `baseline`.
    pub fn floor(&self, baseline: &ModelRecord, alpha: f64) -> f64 {
        match *self {
            LdaRule::AbsoluteTolerance { delta } => baseline.accuracy - delta,
            LdaRule::WithinCi => baseline_ci(baseline, alpha).0,
            LdaRule::BeatsPrevious { accuracy } => accuracy,
        }
    }
}

/// Accuracy CI of `baseline` over its holdout size.
pub fn baseline_ci(baseline: &ModelRecord, alpha: f64) -> (f64, f64) {
    let n = baseline.rates.privileged_count + baseline.rates.protected_count;
    metrics::accuracy_ci(baseline.accuracy, n, alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiConfig {
    /// Practical-significance disparity threshold.
    pub tau_pf: f64,
    pub air_threshold: f64,
    pub alpha: f64,
    pub combinator: TriggerCombinator,
    pub business_justification: bool,
    pub lda_rules: Vec<LdaRule>,
    /// Required disparity reduction beyond strict improvement.
    pub disparity_margin: f64,
    /// Test `|disparity|` instead of the signed value.
    pub absolute_disparity: bool,
}

impl Default for DiConfig {
    fn default() -> Self {
        Self {
            tau_pf: 0.10,
            air_threshold: 0.90,
            alpha: 0.05,
            combinator: TriggerCombinator::Either,
            business_justification: true,
            lda_rules: vec![
                LdaRule::AbsoluteTolerance { delta: 0.01 },
                LdaRule::AbsoluteTolerance { delta: 0.02 },
            ],
            disparity_margin: 0.0,
            absolute_disparity: false,
        }
    }
}

impl DiConfig {
    pub fn validate(&self) -> Result<(), String> {
        unit("tau_pf", self.tau_pf)?;
        if !(self.air_threshold > 0.0 && self.air_threshold <= 1.0) {
            return Err(format!("air_threshold {} outside (0, 1]", self.air_threshold));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(format!("alpha {} outside (0, 1)", self.alpha));
        }
        if self.lda_rules.is_empty() {
            return Err("at least one DI alternative rule is required".into());
        }
        for rule in &self.lda_rules {
            match *rule {
                LdaRule::AbsoluteTolerance { delta } if !(delta >= 0.0 && delta.is_finite()) => {
                    return Err(format!("delta {delta} must be >= 0"))
                }
                LdaRule::BeatsPrevious { accuracy } => unit("previous accuracy", accuracy)?,
                _ => {}
            }
        }
        if !(self.disparity_margin >= 0.0 && self.disparity_margin.is_finite()) {
            return Err(format!("disparity_margin {} must be >= 0", self.disparity_margin));
        }
        Ok(())
    }

    pub fn severity(&self, r: &ModelRecord) -> f64 {
        severity(r, self.absolute_disparity)
    }
}

/// Shape of the UDAP cost-benefit rule. Only the linear tradeoff exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TradeoffKind {
    #[default]
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UdapConfig {
    /// Substantial-injury disparity threshold.
    pub tau_inj: f64,
    pub reasonably_avoidable: bool,
    /// Disparity points required per accuracy point lost (`k`).
    pub slopes: Vec<f64>,
    pub tradeoff: TradeoffKind,
    pub absolute_disparity: bool,
}

impl Default for UdapConfig {
    fn default() -> Self {
        Self {
            tau_inj: 0.15,
            reasonably_avoidable: false,
            slopes: vec![4.0, 1.0],
            tradeoff: TradeoffKind::Linear,
            absolute_disparity: false,
        }
    }
}

impl UdapConfig {
    pub fn validate(&self) -> Result<(), String> {
        unit("tau_inj", self.tau_inj)?;
        if self.slopes.is_empty() {
            return Err("at least one UDAP slope is required".into());
        }
        for &k in &self.slopes {
            if !(k > 0.0 && k.is_finite()) {
                return Err(format!("UDAP slope k = {k} must be > 0"));
            }
        }
        Ok(())
    }

    pub fn severity(&self, r: &ModelRecord) -> f64 {
        severity(r, self.absolute_disparity)
    }
}

fn unit(name: &str, v: f64) -> Result<(), String> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(format!("{name} {v} outside [0, 1]"))
    }
}

fn severity(r: &ModelRecord, absolute: bool) -> f64 {
    if absolute {
        r.disparity().abs()
    } else {
        r.disparity()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Doctrine {
    DisparateImpact,
    Udap,
}

/// One test inside a trigger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerCheck {
    pub test: String,
    pub measured: Option<f64>,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerResult {
    pub fired: bool,
    pub checks: Vec<TriggerCheck>,
}

/// Fires iff `p <= alpha` and the practical-significance test selected by
/// the combinator passes: difference `>= tau_pf`, AIR `< air_threshold`.
pub fn di_trigger(baseline: &ModelRecord, config: &DiConfig) -> TriggerResult {
    let p = baseline.stats.p_value;
    let significance = TriggerCheck {
        test: "p_value".into(),
        measured: Some(p),
        threshold: config.alpha,
        passed: p <= config.alpha + EPS,
    };
    let d = config.severity(baseline);
    let difference = TriggerCheck {
        test: "difference".into(),
        measured: Some(d),
        threshold: config.tau_pf,
        passed: d >= config.tau_pf - EPS,
    };
    let air = baseline.air();
    let air_check = TriggerCheck {
        test: "air".into(),
        measured: air,
        threshold: config.air_threshold,
        passed: air.is_some_and(|a| a < config.air_threshold - EPS),
    };
    let practical = match config.combinator {
        TriggerCombinator::DifferenceOnly => difference.passed,
        TriggerCombinator::AirOnly => air_check.passed,
        TriggerCombinator::Either => difference.passed || air_check.passed,
    };
    let fired = significance.passed && practical;
    let mut checks = vec![significance];
    match config.combinator {
        TriggerCombinator::DifferenceOnly => checks.push(difference),
        TriggerCombinator::AirOnly => checks.push(air_check),
        TriggerCombinator::Either => checks.extend([difference, air_check]),
    }
    TriggerResult { fired, checks }
}

/// Fires iff disparity `>= tau_inj`. No significance conjunct.
pub fn udap_trigger(baseline: &ModelRecord, config: &UdapConfig) -> TriggerResult {
    let d = config.severity(baseline);
    let check = TriggerCheck {
        test: "substantial_injury".into(),
        measured: Some(d),
        threshold: config.tau_inj,
        passed: d >= config.tau_inj - EPS,
    };
    TriggerResult { fired: check.passed, checks: vec![check] }
}

/// Whether `m` is a DI alternative to `b` under `rule`.
pub fn di_accepts(m: &ModelRecord, b: &ModelRecord, rule: &LdaRule, config: &DiConfig) -> bool {
    m.id != b.id
        && config.severity(m) < config.severity(b) - config.disparity_margin - EPS
        && m.accuracy >= rule.floor(b, config.alpha) - EPS
}

/// `(disp(b) - disp(m)) - k * (acc(b) - acc(m))`.
pub fn udap_score(m: &ModelRecord, b: &ModelRecord, k: f64, config: &UdapConfig) -> f64 {
    (config.severity(b) - config.severity(m)) - k * (b.accuracy - m.accuracy)
}

/// Whether `m` is a UDAP alternative to `b` at slope `k`: a genuine
/// disparity reduction on or above the tradeoff line.
pub fn udap_accepts(m: &ModelRecord, b: &ModelRecord, k: f64, config: &UdapConfig) -> bool {
    m.id != b.id
        && config.severity(m) < config.severity(b) - EPS
        && udap_score(m, b, k, config) >= -EPS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleOutcome {
    pub rule: String,
    /// UDAP slope and its reciprocal `c = 1 / k`; absent for DI rules.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub acceptable_ids: Vec<String>,
}

/// Per-rule acceptable sets and their union.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeSet {
    pub rules: Vec<RuleOutcome>,
    pub acceptable_ids: Vec<String>,
}

fn collect(rules: Vec<RuleOutcome>) -> AlternativeSet {
    let union: BTreeSet<&String> = rules.iter().flat_map(|r| &r.acceptable_ids).collect();
    let acceptable_ids = union.into_iter().cloned().collect();
    AlternativeSet { rules, acceptable_ids }
}

pub fn di_alternatives(pool: &CandidatePool, baseline: &ModelRecord, config: &DiConfig) -> AlternativeSet {
    collect(
        config
            .lda_rules
            .iter()
            .map(|rule| RuleOutcome {
                rule: rule.label(),
                k: None,
                c: None,
                acceptable_ids: pool
                    .records
                    .iter()
                    .filter(|m| di_accepts(m, baseline, rule, config))
                    .map(|m| m.id.clone())
                    .collect(),
            })
            .collect(),
    )
}

pub fn udap_alternatives(pool: &CandidatePool, baseline: &ModelRecord, config: &UdapConfig) -> AlternativeSet {
    collect(
        config
            .slopes
            .iter()
            .map(|&k| RuleOutcome {
                rule: format!("k={k}"),
                k: Some(k),
                c: Some(1.0 / k),
                acceptable_ids: pool
                    .records
                    .iter()
                    .filter(|m| udap_accepts(m, baseline, k, config))
                    .map(|m| m.id.clone())
                    .collect(),
            })
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateResult {
    pub passed: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Conclusion {
    NotTriggered,
    JustifiedNoAlternative,
    LiableAlternativeExists,
    GateBlocks { reason: String },
}

impl Conclusion {
    pub fn describe(&self) -> String {
        match self {
            Conclusion::NotTriggered => "not triggered".into(),
            Conclusion::JustifiedNoAlternative => "triggered, no acceptable alternative".into(),
            Conclusion::LiableAlternativeExists => "triggered, acceptable alternative exists".into(),
            Conclusion::GateBlocks { reason } => format!("triggered, blocked at gate: {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub doctrine: Doctrine,
    pub baseline_id: String,
    pub trigger: TriggerResult,
    /// Absent when the trigger did not fire.
    pub gate: Option<GateResult>,
    pub alternatives: AlternativeSet,
    pub conclusion: Conclusion,
}

pub const GATE_NO_JUSTIFICATION: &str = "business justification not established";
pub const GATE_AVOIDABLE: &str = "reasonably avoidable";

fn empty(rules: Vec<RuleOutcome>) -> AlternativeSet {
    AlternativeSet {
        rules: rules.into_iter().map(|r| RuleOutcome { acceptable_ids: Vec::new(), ..r }).collect(),
        acceptable_ids: Vec::new(),
    }
}

fn conclude(
    doctrine: Doctrine,
    baseline: &ModelRecord,
    trigger: TriggerResult,
    gate: GateResult,
    alternatives: AlternativeSet,
) -> Verdict {
    let (gate, alternatives, conclusion) = if !trigger.fired {
        (None, empty(alternatives.rules), Conclusion::NotTriggered)
    } else if !gate.passed {
        let reason = gate.reason.clone();
        (Some(gate), empty(alternatives.rules), Conclusion::GateBlocks { reason })
    } else if alternatives.acceptable_ids.is_empty() {
        (Some(gate), alternatives, Conclusion::JustifiedNoAlternative)
    } else {
        (Some(gate), alternatives, Conclusion::LiableAlternativeExists)
    };
    Verdict {
        doctrine,
        baseline_id: baseline.id.clone(),
        trigger,
        gate,
        alternatives,
        conclusion,
    }
}

pub fn di_verdict(pool: &CandidatePool, baseline: &ModelRecord, config: &DiConfig) -> Verdict {
    let gate = if config.business_justification {
        GateResult { passed: true, reason: "business justification assumed".into() }
    } else {
        GateResult { passed: false, reason: GATE_NO_JUSTIFICATION.into() }
    };
    conclude(
        Doctrine::DisparateImpact,
        baseline,
        di_trigger(baseline, config),
        gate,
        di_alternatives(pool, baseline, config),
    )
}

pub fn udap_verdict(pool: &CandidatePool, baseline: &ModelRecord, config: &UdapConfig) -> Verdict {
    let gate = if config.reasonably_avoidable {
        GateResult { passed: false, reason: GATE_AVOIDABLE.into() }
    } else {
        GateResult { passed: true, reason: "not reasonably avoidable by consumers".into() }
    };
    conclude(
        Doctrine::Udap,
        baseline,
        udap_trigger(baseline, config),
        gate,
        udap_alternatives(pool, baseline, config),
    )
}

/// Rule scores of one non-baseline model against the baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelScores {
    pub id: String,
    pub accuracy_loss: f64,
    pub disparity_reduction: f64,
    /// One flag per DI rule, in config order.
    pub di_rules: Vec<bool>,
    /// One score per UDAP slope, in config order.
    pub udap_scores: Vec<f64>,
}

/// Partition of the non-baseline pool by which doctrine accepts each model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub di_only: Vec<String>,
    pub udap_only: Vec<String>,
    pub both: Vec<String>,
    pub neither: Vec<String>,
    pub scores: Vec<ModelScores>,
}

pub fn divergence(
    pool: &CandidatePool,
    baseline: &ModelRecord,
    di: &Verdict,
    udap: &Verdict,
    di_config: &DiConfig,
    udap_config: &UdapConfig,
) -> DivergenceReport {
    let di_set: BTreeSet<&str> = di.alternatives.acceptable_ids.iter().map(String::as_str).collect();
    let udap_set: BTreeSet<&str> = udap.alternatives.acceptable_ids.iter().map(String::as_str).collect();
    let mut out = DivergenceReport {
        di_only: Vec::new(),
        udap_only: Vec::new(),
        both: Vec::new(),
        neither: Vec::new(),
        scores: Vec::new(),
    };
    for m in pool.records.iter().filter(|m| m.id != baseline.id) {
        let bucket = match (di_set.contains(m.id.as_str()), udap_set.contains(m.id.as_str())) {
            (true, true) => &mut out.both,
            (true, false) => &mut out.di_only,
            (false, true) => &mut out.udap_only,
            (false, false) => &mut out.neither,
        };
        bucket.push(m.id.clone());
        out.scores.push(ModelScores {
            id: m.id.clone(),
            accuracy_loss: baseline.accuracy - m.accuracy,
            disparity_reduction: di_config.severity(baseline) - di_config.severity(m),
            di_rules: di_config.lda_rules.iter().map(|r| di_accepts(m, baseline, r, di_config)).collect(),
            udap_scores: udap_config.slopes.iter().map(|&k| udap_score(m, baseline, k, udap_config)).collect(),
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub di: Verdict,
    pub udap: Verdict,
    pub divergence: DivergenceReport,
}

/// Runs both doctrines against the pool's baseline.
pub fn evaluate(pool: &CandidatePool, di_config: &DiConfig, udap_config: &UdapConfig) -> Evaluation {
    let baseline = pool.baseline();
    let di = di_verdict(pool, baseline, di_config);
    let udap = udap_verdict(pool, baseline, udap_config);
    let divergence = divergence(pool, baseline, &di, &udap, di_config, udap_config);
    Evaluation { di, udap, divergence }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub disparity: f64,
    pub accuracy: f64,
}

/// Horizontal DI cut-off at a fixed accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyLine {
    pub rule: String,
    pub accuracy: f64,
}

/// UDAP tradeoff line through the baseline in (disparity, accuracy) space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffLine {
    pub k: f64,
    pub c: f64,
    /// d(accuracy) / d(disparity) = 1 / k.
    pub slope: f64,
    pub anchor: Point,
}

impl TradeoffLine {
    pub fn accuracy_at(&self, disparity: f64) -> f64 {
        self.anchor.accuracy - self.slope * (self.anchor.disparity - disparity)
    }
}

/// Vertical trigger threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisparityLine {
    pub doctrine: Doctrine,
    pub label: String,
    pub disparity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub baseline: Point,
    pub di_lines: Vec<AccuracyLine>,
    pub udap_lines: Vec<TradeoffLine>,
    pub trigger_lines: Vec<DisparityLine>,
}

/// Plot primitives for both doctrines around `baseline`.
pub fn acceptability_geometry(baseline: &ModelRecord, di: &DiConfig, udap: &UdapConfig) -> Geometry {
    let anchor = Point { disparity: di.severity(baseline), accuracy: baseline.accuracy };
    Geometry {
        baseline: anchor,
        di_lines: di
            .lda_rules
            .iter()
            .map(|r| AccuracyLine { rule: r.label(), accuracy: r.floor(baseline, di.alpha) })
            .collect(),
        udap_lines: udap
            .slopes
            .iter()
            .map(|&k| TradeoffLine {
                k,
                c: 1.0 / k,
                slope: 1.0 / k,
                anchor: Point { disparity: udap.severity(baseline), accuracy: baseline.accuracy },
            })
            .collect(),
        trigger_lines: vec![
            DisparityLine { doctrine: Doctrine::DisparateImpact, label: "tau_pf".into(), disparity: di.tau_pf },
            DisparityLine { doctrine: Doctrine::Udap, label: "tau_inj".into(), disparity: udap.tau_inj },
        ],
    }
}

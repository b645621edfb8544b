use std::fmt::Write as _;

use super::{AuditReport, ReportError, Result};
use crate::doctrine::{Conclusion, Verdict};

const LISTED: usize = 5;

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".to_string(), |v| format!("{v:.4}"))
}

fn id_list(ids: &[String]) -> String {
    if ids.is_empty() {
        return "none".into();
    }
    let mut out = ids.iter().take(LISTED).cloned().collect::<Vec<_>>().join(", ");
    if ids.len() > LISTED {
        let _ = write!(out, " (+{} more)", ids.len() - LISTED);
    }
    out
}

fn verdict_block(s: &mut String, title: &str, v: &Verdict) {
    let _ = writeln!(s, "{title}: {}", v.conclusion.describe());
    for c in &v.trigger.checks {
        let _ = writeln!(
            s,
            "  trigger {}: measured {} vs threshold {:.4} -> {}",
            c.test,
            fmt_opt(c.measured),
            c.threshold,
            if c.passed { "pass" } else { "fail" }
        );
    }
    if let Some(gate) = &v.gate {
        let _ = writeln!(s, "  gate: {} ({})", if gate.passed { "open" } else { "blocks" }, gate.reason);
    }
    if !matches!(v.conclusion, Conclusion::NotTriggered | Conclusion::GateBlocks { .. }) {
        for r in &v.alternatives.rules {
            let _ = writeln!(s, "  rule {}: {} acceptable", r.rule, r.acceptable_ids.len());
        }
        let _ = writeln!(s, "  acceptable alternatives: {}", id_list(&v.alternatives.acceptable_ids));
    }
}

/// Human-readable account of the audit.
pub fn emit_summary(report: &AuditReport) -> Result<String> {
    let verdicts = report.verdicts.as_ref().ok_or(ReportError::IncompleteReport("verdicts"))?;
    let div = report.divergence.as_ref().ok_or(ReportError::IncompleteReport("divergence"))?;
    let pool = &report.pool;
    let fp = &pool.fingerprint;
    let b = pool.baseline();

    let mut s = String::new();
    let _ = writeln!(s, "Fairness audit summary");
    let _ = writeln!(s, "generated {} (tool {})", report.generated_at, report.tool_version);
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "Data: schema {}, split seed {}, holdout fraction {}, {} train / {} holdout rows, {} dropped",
        &fp.schema_hash[..fp.schema_hash.len().min(12)],
        fp.split_seed,
        fp.holdout_fraction,
        fp.train_rows,
        fp.holdout_rows,
        fp.dropped_rows
    );
    let frontier = pool.records.iter().filter(|r| r.on_frontier).count();
    let interventions = pool.records.iter().filter(|r| r.intervention).count();
    let _ = writeln!(
        s,
        "Pool: {} models ({} on the frontier, {} with an intervention)",
        pool.records.len(),
        frontier,
        interventions
    );
    for p in &pool.provenance {
        let _ = writeln!(s, "  search {}: kept {} of {}", p.name, p.kept, p.total);
    }
    if !pool.behavioral_duplicates.is_empty() {
        let _ = writeln!(
            s,
            "  {} groups of models make identical holdout predictions",
            pool.behavioral_duplicates.len()
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "Baseline: {} ({})", b.id, report.configs.baseline_policy);
    let _ = writeln!(
        s,
        "  accuracy {:.4} [{:.4}, {:.4}], disparity {:.4}, AIR {}, z {:.3}, p {:.3e}",
        b.accuracy,
        b.accuracy_ci.low,
        b.accuracy_ci.high,
        b.disparity(),
        fmt_opt(b.air()),
        b.stats.z,
        b.stats.p_value
    );
    let _ = writeln!(s);
    verdict_block(&mut s, "Disparate impact", &verdicts.di);
    let _ = writeln!(s);
    verdict_block(&mut s, "UDAP unfairness", &verdicts.udap);
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "Divergence: {} DI only, {} UDAP only, {} both, {} neither",
        div.di_only.len(),
        div.udap_only.len(),
        div.both.len(),
        div.neither.len()
    );
    if verdicts.di.alternatives.acceptable_ids.is_empty() && verdicts.udap.alternatives.acceptable_ids.is_empty() {
        let _ = writeln!(s, "  both doctrines accept no alternatives");
    }
    let _ = writeln!(s, "  DI only: {}", id_list(&div.di_only));
    let _ = writeln!(s, "  UDAP only: {}", id_list(&div.udap_only));
    let _ = writeln!(s, "  both: {}", id_list(&div.both));
    let labelled: Vec<String> = pool
        .records
        .iter()
        .filter_map(|r| r.label.as_ref().map(|l| format!("{l} = {}", r.id)))
        .collect();
    if !labelled.is_empty() {
        let _ = writeln!(s, "  plot labels: {}", labelled.join("; "));
    }
    if !report.dataset.notes.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(s, "Notes:");
        for n in &report.dataset.notes {
            let _ = writeln!(s, "  - {n}");
        }
    }
    Ok(s)
}

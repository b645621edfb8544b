//! Read-only HTTP API over one saved report. Verdicts are recomputed by the
//! engine on every request; nothing a request does is stored.

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{RawQuery, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use fairlend::doctrine::{acceptability_geometry, evaluate, DivergenceReport, Geometry, LdaRule, Verdict};
use fairlend::report::{canonical_json, AuditReport};
use fairlend::search::BaselinePolicy;
use serde::Serialize;
use tower_http::services::ServeDir;

/// Body of `GET /api/verdict`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictBody {
    pub baseline_id: String,
    pub di: Verdict,
    pub udap: Verdict,
    pub divergence: DivergenceReport,
    pub geometry: Geometry,
}

/// Recomputes both doctrines on the stored pool with the stored configs,
/// overridden by the parameters in `query`. Errors describe the bad parameter.
pub fn verdict(report: &AuditReport, query: &str) -> Result<VerdictBody, String> {
    let mut di = report.configs.di.clone();
    let mut udap = report.configs.udap.clone();
    let mut deltas = Vec::new();
    let mut slopes = Vec::new();
    let mut policy = None;
    for (key, value) in form_urlencoded::parse(query.as_bytes()) {
        let value = value.trim();
        if value.is_empty() {
            continue;
        }
        match key.as_ref() {
            "di_delta" => deltas.extend(numbers(&key, value)?),
            "udap_k" => slopes.extend(numbers(&key, value)?),
            "tau_pf" => di.tau_pf = number(&key, value)?,
            "tau_inj" => udap.tau_inj = number(&key, value)?,
            "baseline" => policy = Some(baseline(report, value)?),
            other => return Err(format!("unknown parameter `{other}`")),
        }
    }
    if !deltas.is_empty() {
        di.lda_rules = deltas.into_iter().map(|delta| LdaRule::AbsoluteTolerance { delta }).collect();
    }
    if !slopes.is_empty() {
        udap.slopes = slopes;
    }
    di.validate()?;
    udap.validate()?;
    let pool = report.pool.clone();
    let pool = match &policy {
        Some(p) => pool.with_baseline(p).map_err(|e| e.to_string())?,
        None => pool,
    };
    let eval = evaluate(&pool, &di, &udap);
    let geometry = acceptability_geometry(pool.baseline(), &di, &udap);
    Ok(VerdictBody {
        baseline_id: pool.baseline_id.clone(),
        di: eval.di,
        udap: eval.udap,
        divergence: eval.divergence,
        geometry,
    })
}

fn number(key: &str, value: &str) -> Result<f64, String> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("`{key}`: `{value}` is not a finite number")),
    }
}

/// Comma-separated list; repeated keys accumulate at the call site.
fn numbers(key: &str, value: &str) -> Result<Vec<f64>, String> {
    value.split(',').map(str::trim).filter(|v| !v.is_empty()).map(|v| number(key, v)).collect()
}

/// A policy string, or a bare model id from the pool.
fn baseline(report: &AuditReport, value: &str) -> Result<BaselinePolicy, String> {
    match value.parse::<BaselinePolicy>() {
        Ok(p) => Ok(p),
        Err(_) if report.pool.record(value).is_some() => Ok(BaselinePolicy::SpecifiedId(value.to_string())),
        Err(e) => Err(e),
    }
}

struct AppState {
    report: AuditReport,
    report_json: String,
}

fn json(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error_body(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}

async fn get_report(State(state): State<Arc<AppState>>) -> Response {
    json(StatusCode::OK, state.report_json.clone())
}

async fn get_verdict(State(state): State<Arc<AppState>>, RawQuery(query): RawQuery) -> Response {
    match verdict(&state.report, query.as_deref().unwrap_or("")) {
        Ok(body) => match canonical_json(&body) {
            Ok(text) => json(StatusCode::OK, text),
            Err(e) => json(StatusCode::INTERNAL_SERVER_ERROR, error_body(&e.to_string())),
        },
        Err(e) => json(StatusCode::BAD_REQUEST, error_body(&e)),
    }
}

const FALLBACK_INDEX: &str = r#"<!doctype html>
<html><head><meta charset="utf-8"><title>fairlend</title></head>
<body>
<h1>fairlend report server</h1>
<p>No explorer bundle is configured. Set FAIRLEND_EXPLORER_DIR to serve one.</p>
<ul>
<li><a href="/api/report">/api/report</a></li>
<li><a href="/api/verdict?udap_k=4">/api/verdict?udap_k=4</a></li>
</ul>
</body></html>
"#;

/// Routes for one immutable report. `explorer` is a directory of static
/// assets; without it `/` serves a short index page.
pub fn router(report: AuditReport, explorer: Option<PathBuf>) -> Router {
    let report_json = canonical_json(&report).expect("loaded report serializes");
    let state = Arc::new(AppState { report, report_json });
    let api = Router::new()
        .route("/api/report", get(get_report))
        .route("/api/verdict", get(get_verdict))
        .with_state(state);
    match explorer {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(FALLBACK_INDEX) })),
    }
}

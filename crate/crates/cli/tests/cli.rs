use std::path::Path;
use std::process::Command;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use fairlend::dataset::{synth_generate, synthetic_schema};
use fairlend::doctrine::{evaluate, UdapConfig};
use fairlend::pipeline::{default_plan, run_audit};
use fairlend::report::{load_report, AuditReport};
use fairlend::ExecMode;
use fairlend_cli::serve::router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

fn fairlend(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fairlend"))
        .args(args)
        .env("FAIRLEND_TIMESTAMP", "2026-01-01T00:00:00Z")
        .env_remove("FAIRLEND_SEED")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn audit_on_synthetic_fixture_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = dir.path().join("fixture");
    assert_eq!(fairlend(&["synth", "--out", s(&fixture)]).status.code(), Some(0));
    let out = dir.path().join("run");
    let res = fairlend(&[
        "audit",
        "--data",
        s(&fixture.join("synthetic.csv")),
        "--schema",
        s(&fixture.join("schema.toml")),
        "--plan",
        s(&fixture.join("plan.toml")),
        "--out",
        s(&out),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    for name in ["report.json", "plot.svg", "summary.txt"] {
        assert!(out.join(name).is_file(), "{name}");
    }
    let report = load_report(out.join("report.json")).unwrap();
    assert_eq!(report.generated_at, "2026-01-01T00:00:00Z");

    let replot = dir.path().join("replot");
    let res = fairlend(&["plot", "--data", s(&out.join("report.json")), "--out", s(&replot)]);
    assert_eq!(res.status.code(), Some(0));
    assert_eq!(std::fs::read(replot.join("plot.svg")).unwrap(), std::fs::read(out.join("plot.svg")).unwrap());
}

#[test]
fn missing_schema_is_a_data_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent-schema.toml");
    let res = fairlend(&["audit", "--data", "x.csv", "--schema", s(&missing)]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains(s(&missing)), "{err}");
    assert!(err.contains("dataset"), "{err}");
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(fairlend(&["audit", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(fairlend(&["--help"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let res = fairlend(&["synth", "--out", s(dir.path())]);
    assert_eq!(res.status.code(), Some(0));
    let res = fairlend(&[
        "audit",
        "--data",
        s(&dir.path().join("synthetic.csv")),
        "--schema",
        s(&dir.path().join("schema.toml")),
        "--udap-k=-1",
    ]);
    assert_eq!(res.status.code(), Some(1), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stderr).contains("config"));
}

fn report() -> AuditReport {
    let table = synth_generate(2000, 0.5, 1.0, 1.0, 42);
    run_audit(table, synthetic_schema(), &default_plan(), "2026-01-01T00:00:00Z", ExecMode::Parallel).unwrap()
}

async fn get(report: &AuditReport, uri: &str) -> (StatusCode, String) {
    let res = router(report.clone(), None)
        .oneshot(Request::builder().uri(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

fn ids(v: &Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect()
}

#[tokio::test]
async fn verdict_endpoint_matches_engine() {
    let report = report();
    let (status, body) = get(&report, "/api/verdict?udap_k=4").await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_str(&body).unwrap();
    let udap = UdapConfig { slopes: vec![4.0], ..report.configs.udap.clone() };
    let eval = evaluate(&report.pool, &report.configs.di, &udap);
    assert_eq!(ids(&v["udap"]["alternatives"]["acceptable_ids"]), eval.udap.alternatives.acceptable_ids);
    assert_eq!(ids(&v["di"]["alternatives"]["acceptable_ids"]), eval.di.alternatives.acceptable_ids);
    assert_eq!(ids(&v["divergence"]["both"]), eval.divergence.both);
    assert_eq!(v["geometry"]["udap_lines"].as_array().unwrap().len(), 1);

    let (_, again) = get(&report, "/api/verdict?udap_k=4").await;
    assert_eq!(body, again);

    let (_, many) = get(&report, "/api/verdict?di_delta=0.01,0.05&di_delta=0.1&udap_k=1&tau_pf=0.05").await;
    let many: Value = serde_json::from_str(&many).unwrap();
    assert_eq!(many["geometry"]["di_lines"].as_array().unwrap().len(), 3);
}

#[tokio::test]
async fn verdict_endpoint_rejects_bad_params() {
    let report = report();
    for uri in [
        "/api/verdict?udap_k=abc",
        "/api/verdict?udap_k=-2",
        "/api/verdict?tau_pf=2",
        "/api/verdict?baseline=nobody",
        "/api/verdict?colour=red",
    ] {
        let (status, body) = get(&report, uri).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{uri}: {body}");
        assert!(serde_json::from_str::<Value>(&body).unwrap()["error"].is_string());
    }
}

#[tokio::test]
async fn report_endpoint_serves_the_report() {
    let report = report();
    let (status, body) = get(&report, "/api/report").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(fairlend::report::parse_report(&body).unwrap(), report);
    let other = &report.pool.records.iter().find(|r| r.id != report.pool.baseline_id).unwrap().id;
    let query: String = form_urlencoded::Serializer::new(String::new()).append_pair("baseline", other).finish();
    let (status, body) = get(&report, &format!("/api/verdict?{query}")).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["baseline_id"].as_str().unwrap(), other);
    let (status, _) = get(&report, "/").await;
    assert_eq!(status, StatusCode::OK);
}

//! Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Checks compare against brute-force oracles, never against the
//! engine itself.

#[path = "../../core/tests/common/oracle.rs"]
mod oracle;

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use fairlend::dataset::{encode, synth_generate, synthetic_schema};
use fairlend::doctrine::{
    acceptability_geometry, di_alternatives, di_trigger, evaluate, udap_alternatives, udap_trigger, DiConfig, LdaRule,
    UdapConfig,
};
use fairlend::learners::{postprocess_group_thresholds, predict, score, train, Hyperparams, ModelSpec};
use fairlend::metrics::{accuracy, accuracy_ci, disparity_stats, group_rates, pareto_frontier, GroupRates};
use fairlend::report::{load_report, AuditReport};
use fairlend::search::ModelRecord;
use oracle::{
    best_stump_accuracy, best_threshold_gap, brute_frontier, di_oracle, disparity_at, grid_pool, ten_row, to_pool,
    udap_oracle, xor_fixture, GridModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn close(a: f64, b: f64, what: &str) -> Result<(), String> {
    ensure((a - b).abs() <= 1e-6, format!("{what}: {a} vs {b}"))
}

fn set(ids: &[String]) -> BTreeSet<String> {
    ids.iter().cloned().collect()
}

fn frontier_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut largest = 0;
    for pool in 0..100 {
        let n = rng.random_range(0..=500);
        largest = largest.max(n);
        // Half the pools sit on a coarse grid so ties and duplicates occur.
        let coarse = pool % 2 == 0;
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                if coarse {
                    (f64::from(rng.random_range(0..25u32)) / 25.0, f64::from(rng.random_range(0..25u32)) / 25.0)
                } else {
                    (rng.random::<f64>(), rng.random::<f64>())
                }
            })
            .collect();
        ensure(pareto_frontier(&pts) == brute_frontier(&pts), format!("pool {pool} (n = {n}) differs"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), format!("took {elapsed:?}"))?;
    Ok(format!("100 pools up to n = {largest} in {elapsed:.2?}"))
}

fn metric_fixtures() -> Outcome {
    let (preds, labels, groups) = ten_row();
    let rates = group_rates(&preds, &groups).map_err(|e| e.to_string())?;
    close(rates.privileged_rate, 3.0 / 6.0, "privileged rate")?;
    close(rates.protected_rate, 1.0 / 4.0, "protected rate")?;
    let s = disparity_stats(&rates, 0.05);
    close(s.disparity, 0.25, "disparity")?;
    close(s.air.ok_or("air undefined")?, 0.5, "air")?;
    // Reference values from statsmodels proportions_ztest and proportion_confint.
    close(s.z, 0.7905694150420948, "ten-row z")?;
    close(s.p_value, 0.42919530044034926, "ten-row p")?;
    let acc = accuracy(&preds, &labels).map_err(|e| e.to_string())?;
    close(acc, 0.7, "accuracy")?;
    let (lo, hi) = accuracy_ci(acc, 10, 0.05);
    close(lo, 0.41597423491067453, "ci low")?;
    close(hi, 0.9840257650893254, "ci high")?;
    let s = disparity_stats(&GroupRates::from_counts(60, 100, 40, 100).map_err(|e| e.to_string())?, 0.05);
    close(s.disparity, 0.2, "60/40 disparity")?;
    close(s.air.ok_or("air undefined")?, 40.0 / 60.0, "60/40 air")?;
    close(s.z, 2.8284271247461894, "60/40 z")?;
    close(s.p_value, 0.004677734981047275, "60/40 p")?;
    Ok(format!("z = {:.4}, p = {:.4}", s.z, s.p_value))
}

fn record_with_counts(pp: usize, pn: usize, qp: usize, qn: usize) -> ModelRecord {
    let rates = GroupRates::from_counts(pp, pn, qp, qn).expect("both groups present");
    let mut r = ModelRecord::from_point("b", 0.9, rates.disparity());
    r.stats = disparity_stats(&rates, 0.05);
    r.rates = rates;
    r
}

fn rule_constants() -> Outcome {
    let di = DiConfig::default();
    let udap = UdapConfig::default();
    // AIR pinned at 0.90 so only the difference prong can fire.
    let at_tau = record_with_counts(1000, 1000, 900, 1000);
    ensure(at_tau.stats.p_value <= 0.05, "fixture not significant")?;
    ensure(di_trigger(&at_tau, &di).fired, "DI does not fire at disparity 0.10")?;
    ensure(!di_trigger(&record_with_counts(1000, 1000, 901, 1000), &di).fired, "DI fires at 0.099")?;
    let not_significant = record_with_counts(5, 10, 3, 10);
    ensure(!di_trigger(&not_significant, &di).fired, "DI fires without significance")?;
    // Disparity 0.05 cannot fire on its own; AIR below 0.90 must.
    ensure(!di_trigger(&record_with_counts(500, 1000, 450, 1000), &di).fired, "DI fires at AIR = 0.90")?;
    ensure(di_trigger(&record_with_counts(500, 1000, 449, 1000), &di).fired, "DI silent at AIR 0.898")?;
    ensure(udap_trigger(&ModelRecord::from_point("b", 0.9, 0.15), &udap).fired, "UDAP silent at 0.15")?;
    ensure(!udap_trigger(&ModelRecord::from_point("b", 0.9, 0.149), &udap).fired, "UDAP fires at 0.149")?;
    ensure(udap.slopes.contains(&4.0) && udap.slopes.contains(&1.0), "default slopes are not {4, 1}")?;

    let base = ModelRecord::from_point("b", 0.90, 0.15);
    let g = acceptability_geometry(&base, &di, &udap);
    let line = |k: f64| g.udap_lines.iter().find(|l| l.k == k).ok_or(format!("no line for k = {k}"));
    let (four, one) = (line(4.0)?, line(1.0)?);
    // Four points of disparity reduction buy one point of accuracy; one for one.
    ensure(four.accuracy_at(0.11) == 0.89 && four.accuracy_at(0.15) == 0.90, "k = 4 line is off")?;
    ensure(one.accuracy_at(0.14) == 0.89 && one.accuracy_at(0.15) == 0.90, "k = 1 line is off")?;
    ensure(four.c == 0.25 && one.c == 1.0, "slope constants differ")?;
    Ok("DI 0.10 / AIR 0.90 / UDAP 0.15; k = 4 and k = 1 lines exact".into())
}

fn random_pools(seed: u64) -> Vec<(Vec<GridModel>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..50)
        .map(|_| {
            let n = rng.random_range(2..60);
            let models = grid_pool(&mut rng, n);
            let b = rng.random_range(0..n);
            (models, b)
        })
        .collect()
}

fn di_cfg(deltas: &[f64]) -> DiConfig {
    DiConfig { lda_rules: deltas.iter().map(|&delta| LdaRule::AbsoluteTolerance { delta }).collect(), ..DiConfig::default() }
}

fn udap_cfg(slopes: &[f64]) -> UdapConfig {
    UdapConfig { slopes: slopes.to_vec(), ..UdapConfig::default() }
}

fn monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (i, (models, bi)) in random_pools(20).into_iter().enumerate() {
        let pool = to_pool(&models, &models[bi].id);
        let base = pool.baseline();
        let (d1, d2): (f64, f64) = (rng.random_range(0.0..0.08), rng.random_range(0.0..0.08));
        let small = set(&di_alternatives(&pool, base, &di_cfg(&[d1.min(d2)])).acceptable_ids);
        let large = set(&di_alternatives(&pool, base, &di_cfg(&[d1.max(d2)])).acceptable_ids);
        ensure(small.is_subset(&large), format!("pool {i}: DI set shrinks as delta grows"))?;
    }
    for (i, (models, bi)) in random_pools(21).into_iter().enumerate() {
        let pool = to_pool(&models, &models[bi].id);
        let base = pool.baseline();
        let (k1, k2) = (rng.random_range(0.1..10.0), rng.random_range(0.1..10.0));
        let lenient = set(&udap_alternatives(&pool, base, &udap_cfg(&[f64::min(k1, k2)])).acceptable_ids);
        let strict = set(&udap_alternatives(&pool, base, &udap_cfg(&[f64::max(k1, k2)])).acceptable_ids);
        ensure(strict.is_subset(&lenient), format!("pool {i}: UDAP set grows with k"))?;
    }
    for (i, (models, _)) in random_pools(22).into_iter().enumerate() {
        // Every pool member serves as a baseline; the fired sets must nest.
        let pool = to_pool(&models, &models[0].id);
        let (t1, t2) = (rng.random_range(0.0..0.3), rng.random_range(0.0..0.3));
        let (lo, hi) = (f64::min(t1, t2), f64::max(t1, t2));
        let fired = |di: &DiConfig, udap: &UdapConfig| -> (BTreeSet<String>, BTreeSet<String>) {
            let d = pool.records.iter().filter(|r| di_trigger(r, di).fired).map(|r| r.id.clone()).collect();
            let u = pool.records.iter().filter(|r| udap_trigger(r, udap).fired).map(|r| r.id.clone()).collect();
            (d, u)
        };
        let (d_lo, u_lo) = fired(&DiConfig { tau_pf: lo, ..DiConfig::default() }, &UdapConfig { tau_inj: lo, ..UdapConfig::default() });
        let (d_hi, u_hi) = fired(&DiConfig { tau_pf: hi, ..DiConfig::default() }, &UdapConfig { tau_inj: hi, ..UdapConfig::default() });
        ensure(d_hi.is_subset(&d_lo) && u_hi.is_subset(&u_lo), format!("pool {i}: trigger not monotone in tau"))?;
        let (a1, a2) = (rng.random_range(0.5..1.0), rng.random_range(0.5..1.0));
        let air = |t: f64| fired(&DiConfig { air_threshold: t, ..DiConfig::default() }, &UdapConfig::default()).0;
        ensure(air(f64::min(a1, a2)).is_subset(&air(f64::max(a1, a2))), format!("pool {i}: AIR prong not monotone"))?;
    }
    Ok("50 pools per property, exact set inclusion".into())
}

fn gm(id: &str, acc: i64, disp: i64) -> GridModel {
    GridModel { id: id.into(), acc, disp }
}

fn divergence_fixture() -> Outcome {
    let models = vec![gm("b", 900, 150), gm("m1", 895, 147), gm("m2", 850, 20), gm("m3", 898, 120)];
    let pool = to_pool(&models, "b");
    let eval = evaluate(&pool, &di_cfg(&[0.01]), &udap_cfg(&[1.0]));
    let di_set = di_oracle(&models, &models[0], 10, 0);
    let udap_set = udap_oracle(&models, &models[0], 1, 1);
    ensure(set(&eval.di.alternatives.acceptable_ids) == di_set, "DI set differs from oracle")?;
    ensure(set(&eval.udap.alternatives.acceptable_ids) == udap_set, "UDAP set differs from oracle")?;
    let di_only: BTreeSet<String> = di_set.difference(&udap_set).cloned().collect();
    let udap_only: BTreeSet<String> = udap_set.difference(&di_set).cloned().collect();
    ensure(set(&eval.divergence.di_only) == di_only, "DI-only bucket differs")?;
    ensure(set(&eval.divergence.udap_only) == udap_only, "UDAP-only bucket differs")?;
    ensure(!di_only.is_empty() && !udap_only.is_empty(), "a one-sided bucket is empty")?;
    Ok(format!("DI only {di_only:?}, UDAP only {udap_only:?}"))
}

fn fairlend(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_fairlend"))
        .args(args)
        .env("FAIRLEND_TIMESTAMP", "2026-01-01T00:00:00Z")
        .env_remove("FAIRLEND_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), format!("`fairlend {}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)))
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

fn audit_into(dir: &Path, name: &str, extra: &[&str]) -> Result<AuditReport, String> {
    let fixture = dir.join("fixture");
    if !fixture.join("synthetic.csv").exists() {
        fairlend(&["synth", "--out", p(&fixture)])?;
    }
    let out = dir.join(name);
    let (data, schema, plan) = (fixture.join("synthetic.csv"), fixture.join("schema.toml"), fixture.join("plan.toml"));
    let mut args = vec!["audit", "--data", p(&data), "--schema", p(&schema), "--plan", p(&plan), "--out", p(&out)];
    args.extend_from_slice(extra);
    fairlend(&args)?;
    load_report(out.join("report.json")).map_err(|e| e.to_string())
}

fn pipeline_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let report = audit_into(dir.path(), "first", &[])?;
    audit_into(dir.path(), "second", &[])?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(600), format!("took {elapsed:?}"))?;
    let read = |name: &str| std::fs::read(dir.path().join(name).join("report.json")).map_err(|e| e.to_string());
    ensure(read("first")? == read("second")?, "report JSON differs between runs")?;
    let trained: usize = report.pool.provenance.iter().map(|s| s.total).sum();
    ensure(trained >= 40, format!("only {trained} models trained"))?;
    let rows = report.pool.fingerprint.holdout_rows + report.pool.fingerprint.train_rows;
    ensure(rows == 2000, format!("dataset has {rows} rows"))?;
    let pool = &report.pool;
    ensure(!pool.records.is_empty(), "pool is empty")?;
    let max = pool.records.iter().map(|r| r.accuracy).fold(f64::NEG_INFINITY, f64::max);
    ensure(pool.records.iter().all(|r| r.accuracy >= 0.9 * max - 1e-12), "a record falls outside the 10% drop filter")?;
    ensure(pool.baseline().accuracy == max, "baseline is not the most accurate model")?;
    Ok(format!("{trained} models trained, {} kept, two audits in {elapsed:.1?}", pool.records.len()))
}

fn intervention_efficacy() -> Outcome {
    let table = synth_generate(2000, 0.5, 1.0, 1.5, 42);
    let m = encode(&table, &synthetic_schema(), &BTreeSet::new()).map_err(|e| e.to_string())?;
    let base = train(&ModelSpec::new(Hyperparams::logistic()), &m, None).map_err(|e| e.to_string())?;
    let before = group_rates(&predict(&base, &m).map_err(|e| e.to_string())?, &m.groups)
        .map_err(|e| e.to_string())?
        .disparity();
    ensure(before >= 0.25, format!("train disparity before is {before}"))?;
    let scores = score(&base, &m).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for target in [0.0, 0.05, 0.1] {
        let post = postprocess_group_thresholds(&base, &m, target).map_err(|e| e.to_string())?;
        let t = post.thresholds.per_group.ok_or("no group thresholds")?;
        let gap = (disparity_at(&scores, &m.groups, t.privileged, t.protected) - target).abs();
        ensure(gap <= 0.02, format!("target {target}: gap {gap}"))?;
        let oracle = best_threshold_gap(&scores, &m.groups, target);
        ensure((gap - oracle).abs() <= 1e-9, format!("target {target}: {gap} vs oracle {oracle}"))?;
        worst = worst.max(gap);
    }
    Ok(format!("disparity {before:.3} before; worst gap to target {worst:.4}"))
}

fn learner_sanity() -> Outcome {
    let blobs = oracle::separable_blobs(1);
    let lr = train(&ModelSpec::new(Hyperparams::logistic()), &blobs, None).map_err(|e| e.to_string())?;
    let lr_acc = accuracy(&predict(&lr, &blobs).map_err(|e| e.to_string())?, &blobs.labels).map_err(|e| e.to_string())?;
    ensure(lr_acc >= 0.95, format!("logistic regression {lr_acc}"))?;
    let xor = xor_fixture();
    let stump = train(&ModelSpec::new(Hyperparams::DecisionTree { max_depth: 1 }), &xor, None).map_err(|e| e.to_string())?;
    let st_acc = accuracy(&predict(&stump, &xor).map_err(|e| e.to_string())?, &xor.labels).map_err(|e| e.to_string())?;
    ensure(st_acc <= 0.75, format!("stump on XOR {st_acc}"))?;
    ensure(best_stump_accuracy(&xor) <= 0.75, "XOR fixture admits a good stump")?;
    Ok(format!("logistic {lr_acc:.3} on blobs, stump {st_acc:.3} on XOR"))
}

fn num(node: &roxmltree::Node, attr: &str) -> Result<f64, String> {
    node.attribute(attr)
        .ok_or(format!("missing {attr}"))?
        .parse()
        .map_err(|e| format!("{attr}: {e}"))
}

fn svg_structure() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let deltas = ["0.01", "0.02", "0.05"];
    let ks = ["4", "1", "2"];
    let mut extra = Vec::new();
    for d in &deltas {
        extra.extend(["--di-delta", d]);
    }
    for k in &ks {
        extra.extend(["--udap-k", k]);
    }
    let report = audit_into(dir.path(), "run", &extra)?;
    let text = std::fs::read_to_string(dir.path().join("run").join("plot.svg")).map_err(|e| e.to_string())?;
    let doc = roxmltree::Document::parse(&text).map_err(|e| e.to_string())?;
    let classed = |c: &str| -> Vec<roxmltree::Node> {
        doc.descendants()
            .filter(|n| n.attribute("class").is_some_and(|v| v.split_whitespace().any(|x| x == c)))
            .collect()
    };
    let points = classed("point");
    let n = report.pool.records.len();
    ensure(points.len() == n, format!("{} points for {n} models", points.len()))?;
    let ids: BTreeSet<&str> = points.iter().filter_map(|p| p.attribute("data-id")).collect();
    ensure(ids.len() == n, "point ids are not distinct")?;

    let di_lines = classed("di-line");
    ensure(di_lines.len() == deltas.len(), format!("{} DI lines", di_lines.len()))?;
    let base = report.pool.baseline().accuracy;
    let mut floors = di_lines.iter().map(|l| num(l, "data-accuracy")).collect::<Result<Vec<_>, _>>()?;
    floors.sort_by(f64::total_cmp);
    let mut want: Vec<f64> = deltas.iter().map(|d| base - d.parse::<f64>().unwrap()).collect();
    want.sort_by(f64::total_cmp);
    ensure(floors.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-5), format!("DI floors {floors:?}"))?;

    let udap_lines = classed("udap-line");
    let got_k: BTreeSet<String> = udap_lines.iter().filter_map(|l| l.attribute("data-k").map(str::to_string)).collect();
    let want_k: BTreeSet<String> = ks.iter().map(|k| k.to_string()).collect();
    ensure(udap_lines.len() == ks.len() && got_k == want_k, format!("UDAP lines {got_k:?}"))?;

    let axis = classed("x-axis");
    ensure(axis.len() == 1 && axis[0].attribute("data-orientation") == Some("reversed"), "x axis not marked reversed")?;
    let mut ticks = classed("x-tick")
        .iter()
        .map(|t| Ok((num(t, "x")?, t.text().unwrap_or("").parse::<f64>().map_err(|e| e.to_string())?)))
        .collect::<Result<Vec<_>, String>>()?;
    ticks.sort_by(|a, b| a.0.total_cmp(&b.0));
    ensure(ticks.len() >= 2 && ticks.windows(2).all(|w| w[0].1 > w[1].1), "tick values do not decrease rightward")?;
    // Placement agrees: a less severe point sits further right.
    let severity = |p: &roxmltree::Node| num(p, "data-disparity");
    let position = |p: &roxmltree::Node| num(p, "cx").or_else(|_| centroid(p));
    let mut placed = points.iter().map(|p| Ok((severity(p)?, position(p)?))).collect::<Result<Vec<_>, String>>()?;
    placed.sort_by(|a, b| a.0.total_cmp(&b.0));
    ensure(placed.windows(2).all(|w| w[0].0 == w[1].0 || w[0].1 > w[1].1 - 1e-6), "points are not placed on a reversed axis")?;
    Ok(format!("{n} points, {} DI and {} UDAP lines, reversed axis", di_lines.len(), udap_lines.len()))
}

fn centroid(polygon: &roxmltree::Node) -> Result<f64, String> {
    let pts = polygon.attribute("points").ok_or("glyph without position")?;
    let xs: Vec<f64> = pts
        .split_whitespace()
        .map(|pair| pair.split(',').next().unwrap_or("").parse::<f64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    ensure(!xs.is_empty(), "empty polygon")?;
    Ok(xs.iter().sum::<f64>() / xs.len() as f64)
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("frontier oracle equivalence", frontier_oracle),
        ("metric fixtures", metric_fixtures),
        ("rule constants", rule_constants),
        ("monotonicity suite", monotonicity),
        ("divergence reproduction", divergence_fixture),
        ("pipeline determinism", pipeline_determinism),
        ("intervention efficacy", intervention_efficacy),
        ("learner sanity", learner_sanity),
        ("svg structure", svg_structure),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|payload| {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(format!("panic: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    let _ = panic::take_hook();
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Command-line front end: synthetic fixtures, searches, audits, plots and
//! the report server.

pub mod serve;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fairlend::dataset::{load_table, synth_generate, synthetic_schema, DatasetSchema, PreparedData};
use fairlend::doctrine::LdaRule;
use fairlend::pipeline::{default_plan, run_audit, AuditPlan};
use fairlend::report::{self, emit_json, emit_summary, emit_svg_scatter, load_report};
use fairlend::search::{self, BaselinePolicy, SearchError};
use fairlend::{Error, ExecMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// Pins the seed used by `synth` and for the split.
pub const SEED_ENV: &str = "FAIRLEND_SEED";
/// Pins the report timestamp so repeated audits are byte-identical.
pub const TIMESTAMP_ENV: &str = "FAIRLEND_TIMESTAMP";
/// Directory of explorer assets served by `serve`.
pub const EXPLORER_ENV: &str = "FAIRLEND_EXPLORER_DIR";

const SYNTH_ROWS: usize = 2000;
const SYNTH_BIAS: f64 = 1.0;
const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "fairlend", version, about = "Audit a model pool under disparate impact and UDAP unfairness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic credit table with its schema and the default plan.
    Synth(Opts),
    /// Train the plan's searches and write the candidate pool.
    Search(Opts),
    /// Full audit: report.json, plot.svg and summary.txt.
    Audit(Opts),
    /// Redraw the scatter from a saved report.
    Plot(Opts),
    /// Serve a saved report and the explorer over HTTP.
    Serve(Opts),
}

#[derive(Debug, Clone, Args)]
struct Opts {
    /// CSV table, or report.json for `plot` and `serve`.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Dataset schema (TOML).
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Audit plan (TOML or JSON). Defaults to the built-in plan.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// DI accuracy tolerance; repeat for several rules.
    #[arg(long = "di-delta")]
    di_delta: Vec<f64>,
    /// UDAP slope k; repeat for several lines.
    #[arg(long = "udap-k")]
    udap_k: Vec<f64>,
    #[arg(long = "tau-pf")]
    tau_pf: Option<f64>,
    #[arg(long = "tau-inj")]
    tau_inj: Option<f64>,
    #[arg(long = "air-threshold")]
    air_threshold: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// max-accuracy, id:<id> or off-frontier:<eps>.
    #[arg(long = "baseline-policy")]
    baseline_policy: Option<BaselinePolicy>,
    #[arg(long, env = SEED_ENV)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 8080)]
    port: u16,
}

/// A failure tagged with the stage that raised it and its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub stage: &'static str,
    pub message: String,
}

impl CliError {
    fn usage(stage: &'static str, message: impl fmt::Display) -> Self {
        Self { code: EXIT_USAGE, stage, message: message.to_string() }
    }

    fn data(stage: &'static str, message: impl fmt::Display) -> Self {
        Self { code: EXIT_DATA, stage, message: message.to_string() }
    }

    fn internal(stage: &'static str, message: impl fmt::Display) -> Self {
        Self { code: EXIT_INTERNAL, stage, message: message.to_string() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed: {}", self.stage, self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let stage = e.stage();
        let code = match &e {
            Error::Dataset(_) | Error::Config(_) => EXIT_DATA,
            Error::Search(s) => search_code(s),
            Error::Learner(_) | Error::Metrics(_) | Error::Report(_) => EXIT_INTERNAL,
        };
        let message = match &e {
            Error::Dataset(inner) => inner.to_string(),
            Error::Learner(inner) => inner.to_string(),
            Error::Metrics(inner) => inner.to_string(),
            Error::Search(inner) => inner.to_string(),
            Error::Report(inner) => inner.to_string(),
            Error::Config(msg) => msg.clone(),
        };
        Self { code, stage, message }
    }
}

fn search_code(e: &SearchError) -> i32 {
    match e {
        SearchError::Training { .. } | SearchError::Metrics(_) => EXIT_INTERNAL,
        _ => EXIT_DATA,
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code. Errors are printed to stderr.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("fairlend: {e}");
            e.code
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Synth(o) => synth(&o),
        Command::Search(o) => search_cmd(&o),
        Command::Audit(o) => audit(&o),
        Command::Plot(o) => plot(&o),
        Command::Serve(o) => serve_cmd(&o),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::internal("output", format!("`{}`: {e}", dir.display())))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| CliError::internal("output", format!("`{}`: {e}", path.display())))
}

fn synth(o: &Opts) -> Result<()> {
    ensure_dir(&o.out)?;
    let seed = o.seed.unwrap_or(DEFAULT_SEED);
    let table = synth_generate(SYNTH_ROWS, 0.5, 1.0, SYNTH_BIAS, seed);
    let mut plan = default_plan();
    plan.split.seed = seed;
    write(&o.out.join("synthetic.csv"), &table.to_csv())?;
    write(&o.out.join("schema.toml"), &synthetic_schema().to_toml())?;
    write(&o.out.join("plan.toml"), &plan.to_toml())?;
    println!("wrote synthetic.csv, schema.toml and plan.toml to {}", o.out.display());
    Ok(())
}

/// Loads the plan (or the default) and applies command-line overrides.
fn resolve_plan(o: &Opts) -> Result<AuditPlan> {
    let mut plan = match &o.plan {
        Some(path) => AuditPlan::from_path(path)?,
        None => default_plan(),
    };
    if !o.di_delta.is_empty() {
        plan.di.lda_rules = o.di_delta.iter().map(|&delta| LdaRule::AbsoluteTolerance { delta }).collect();
    }
    if !o.udap_k.is_empty() {
        plan.udap.slopes.clone_from(&o.udap_k);
    }
    if let Some(v) = o.tau_pf {
        plan.di.tau_pf = v;
    }
    if let Some(v) = o.tau_inj {
        plan.udap.tau_inj = v;
    }
    if let Some(v) = o.air_threshold {
        plan.di.air_threshold = v;
    }
    if let Some(v) = o.alpha {
        plan.di.alpha = v;
    }
    if let Some(p) = &o.baseline_policy {
        plan.baseline_policy = p.clone();
    }
    if let Some(seed) = o.seed {
        plan.split.seed = seed;
    }
    // Overrides come from the command line, so a bad value is a usage error.
    plan.validate().map_err(|e| CliError { code: EXIT_USAGE, ..CliError::from(e) })?;
    Ok(plan)
}

fn load_inputs(o: &Opts) -> Result<(fairlend::dataset::DataTable, DatasetSchema)> {
    let schema_path = o.schema.as_ref().ok_or_else(|| CliError::usage("args", "--schema is required"))?;
    let data_path = o.data.as_ref().ok_or_else(|| CliError::usage("args", "--data is required"))?;
    let schema = DatasetSchema::from_path(schema_path).map_err(|e| CliError::from(Error::from(e)))?;
    let table = load_table(data_path, &schema).map_err(|e| CliError::from(Error::from(e)))?;
    Ok((table, schema))
}

fn timestamp() -> String {
    std::env::var(TIMESTAMP_ENV)
        .unwrap_or_else(|_| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
}

fn search_cmd(o: &Opts) -> Result<()> {
    let plan = resolve_plan(o)?;
    let (table, schema) = load_inputs(o)?;
    ensure_dir(&o.out)?;
    let data = PreparedData::new(table, schema, plan.split).map_err(|e| CliError::from(Error::from(e)))?;
    let pool = search::run_search_with(&plan.search_plan(), &data, plan.di.alpha, ExecMode::default())
        .and_then(|p| p.with_baseline(&plan.baseline_policy))
        .map_err(|e| CliError::from(Error::from(e)))?;
    let json = report::canonical_json(&pool).map_err(|e| CliError::internal("report", e))?;
    let path = o.out.join("pool.json");
    write(&path, &json)?;
    println!("{} models kept, baseline {}; wrote {}", pool.records.len(), pool.baseline_id, path.display());
    Ok(())
}

fn audit(o: &Opts) -> Result<()> {
    let plan = resolve_plan(o)?;
    let (table, schema) = load_inputs(o)?;
    ensure_dir(&o.out)?;
    let report = run_audit(table, schema, &plan, &timestamp(), ExecMode::default())?;
    let out = |name: &str| o.out.join(name);
    emit_json(&report, out("report.json")).map_err(|e| CliError::internal("report", e))?;
    emit_svg_scatter(&report, out("plot.svg")).map_err(|e| CliError::internal("plot", e))?;
    let summary = emit_summary(&report).map_err(|e| CliError::internal("summary", e))?;
    write(&out("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

fn load_saved(o: &Opts) -> Result<report::AuditReport> {
    let path = o.data.as_ref().ok_or_else(|| CliError::usage("args", "--data <report.json> is required"))?;
    load_report(path).map_err(|e| CliError::data("load report", e))
}

fn plot(o: &Opts) -> Result<()> {
    let report = load_saved(o)?;
    ensure_dir(&o.out)?;
    let path = o.out.join("plot.svg");
    emit_svg_scatter(&report, &path).map_err(|e| CliError::data("plot", e))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn serve_cmd(o: &Opts) -> Result<()> {
    let report = load_saved(o)?;
    report.check_complete().map_err(|e| CliError::data("load report", e))?;
    let explorer = std::env::var_os(EXPLORER_ENV).map(PathBuf::from);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::internal("serve", e))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", o.port))
            .await
            .map_err(|e| CliError::internal("serve", format!("port {}: {e}", o.port)))?;
        println!("serving on http://127.0.0.1:{}", o.port);
        axum::serve(listener, serve::router(report, explorer)).await.map_err(|e| CliError::internal("serve", e))
    })
}

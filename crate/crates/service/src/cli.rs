//! Command-line interface. Exit status: 0 success, 1 validation, 2 not
//! identifiable, 3 infeasible recourse.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use causal_explain::data::CsvOptions;
use causal_explain::explain::{render_table, Level, OrderPolicy};
use causal_explain::oracle::generate::{f1, f1_unconfounded, german_syn, GermanSynConfig, RandomScmConfig};
use causal_explain::oracle::bounds_harness;
use causal_explain::schema::Label;
use causal_explain::scores::QuerySpec;
use causal_explain::{
    AdjustmentSet, EventSpec, OutcomeSpec, RecourseConfig, Scm, ScoreKind, ScoreMode, ZeroMassPolicy,
};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::error::{Result, ServiceError};
use crate::http::{self, AppState, ServeConfig};
use crate::ops::{self, ExplainRequest, Individual, RecourseRequest, ScoresRequest, WhatIfRequest};
use crate::render;
use crate::session::{Bundle, Session, SessionConfig};

/// Slack for the bounds check in `simulate --validate-bounds`.
const BOUNDS_SLACK: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "causal-explain", version, about = "Causal explanation scores and recourse for black-box decisions")]
pub struct Cli {
    /// Causal graph over the features (JSON).
    #[arg(long, global = true, value_name = "FILE")]
    graph: Option<PathBuf>,
    /// Dataset (CSV with a header naming every graph variable).
    #[arg(long, global = true, value_name = "FILE")]
    data: Option<PathBuf>,
    /// Black-box model file (JSON).
    #[arg(long, global = true, value_name = "FILE")]
    blackbox: Option<PathBuf>,
    /// Additive smoothing for every estimate.
    #[arg(long, global = true, value_name = "LAMBDA")]
    smoothing: Option<f64>,
    /// Drop empty adjustment cells instead of failing.
    #[arg(long, global = true)]
    skip_empty_cells: bool,
    /// Seed for sampling and the bounds harness.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scores (or bounds) for one contrast query.
    Scores(ScoresArgs),
    /// Per-attribute explanation reports.
    Explain {
        #[command(subcommand)]
        level: ExplainCommand,
    },
    /// Least-cost actions that make a positive outcome likely enough.
    Recourse(RecourseArgs),
    /// Prediction and sufficiency after overriding some values.
    Whatif(WhatIfArgs),
    /// Work with a structural model: sample, ground truth, bounds check.
    Simulate(SimulateArgs),
    /// Run the HTTP API.
    Serve(ServeArgs),
}

/// `NAME=VALUE`.
fn pair(s: &str) -> std::result::Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    if k.trim().is_empty() {
        return Err(format!("empty name in `{s}`"));
    }
    Ok((k.trim().to_string(), v.trim().to_string()))
}

#[derive(Debug, Args)]
struct QueryArgs {
    /// Treatment value, `ATTR=VALUE`; repeat for several attributes.
    #[arg(long = "x", value_name = "ATTR=VALUE", value_parser = pair)]
    x: Vec<(String, String)>,
    /// Baseline value, `ATTR=VALUE`.
    #[arg(long = "x-prime", value_name = "ATTR=VALUE", value_parser = pair)]
    x_prime: Vec<(String, String)>,
    /// Context restriction, `VAR=VALUE`; repeating a variable allows any of
    /// the values.
    #[arg(long, value_name = "VAR=VALUE", value_parser = pair)]
    context: Vec<(String, String)>,
    /// Positive outcome threshold.
    #[arg(long)]
    threshold: Option<String>,
}

impl QueryArgs {
    fn spec(&self) -> Result<QuerySpec> {
        if self.x.is_empty() || self.x_prime.is_empty() {
            return Err(ServiceError::BadRequest(
                "a query needs --x and --x-prime (or a --request file)".into(),
            ));
        }
        let map = |v: &[(String, String)]| v.iter().map(|(k, l)| (k.clone(), Label::Text(l.clone()))).collect();
        Ok(QuerySpec {
            x: map(&self.x),
            x_prime: map(&self.x_prime),
            context: event(&self.context),
            threshold: self.threshold.clone().map(Label::Text),
        })
    }
}

fn event(pairs: &[(String, String)]) -> EventSpec {
    let mut grouped: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for (k, v) in pairs {
        grouped.entry(k).or_default().push(v.clone());
    }
    grouped
        .into_iter()
        .fold(EventSpec::new(), |e, (k, vs)| e.with_any(k.to_string(), vs))
}

#[derive(Debug, Args)]
struct ScoresArgs {
    /// Full request as accepted by the HTTP API (JSON file).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["x", "x_prime", "context", "threshold", "query"])]
    request: Option<PathBuf>,
    /// Query file (JSON with `x`, `x_prime`, `context`, `threshold`).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["x", "x_prime", "context", "threshold"])]
    query: Option<PathBuf>,
    #[command(flatten)]
    q: QueryArgs,
    /// Estimate kind: point, bounds or naive [default: point]
    #[arg(long, value_parser = parse_mode)]
    mode: Option<ScoreMode>,
    /// Adjustment variable; repeat for a set. Defaults to the graph's
    /// choice.
    #[arg(long, value_name = "VAR")]
    adjust: Vec<String>,
    /// Adjust for nothing.
    #[arg(long, conflicts_with = "adjust")]
    no_adjust: bool,
}

fn parse_mode(s: &str) -> std::result::Result<ScoreMode, String> {
    s.parse().map_err(|e: causal_explain::Error| e.to_string())
}

fn parse_score(s: &str) -> std::result::Result<ScoreKind, String> {
    s.parse().map_err(|e: causal_explain::Error| e.to_string())
}

fn parse_order(s: &str) -> std::result::Result<OrderPolicy, String> {
    serde_json::from_value(json!(s)).map_err(|_| {
        format!("unknown order `{s}` (expected infer, declared or declared_if_ordered)")
    })
}

#[derive(Debug, Args)]
struct ExplainArgs {
    /// Full request as accepted by the HTTP API (JSON file).
    #[arg(long, value_name = "FILE")]
    request: Option<PathBuf>,
    /// Score to rank by: nec, suf or nesuf [default: nesuf]
    #[arg(long, value_parser = parse_score)]
    score: Option<ScoreKind>,
    /// Estimate kind: point, bounds or naive [default: point]
    #[arg(long, value_parser = parse_mode)]
    mode: Option<ScoreMode>,
    /// Value order policy: infer, declared or declared_if_ordered.
    #[arg(long, value_parser = parse_order)]
    order: Option<OrderPolicy>,
}

#[derive(Debug, Subcommand)]
enum ExplainCommand {
    /// Every attribute over the whole population.
    Global(ExplainArgs),
    /// Attributes within a sub-population.
    Contextual {
        #[command(flatten)]
        common: ExplainArgs,
        #[arg(long, value_name = "VAR=VALUE", value_parser = pair)]
        context: Vec<(String, String)>,
        /// One attribute instead of all outside the context.
        #[arg(long)]
        attribute: Option<String>,
    },
    /// Contributions of one individual's values.
    Local {
        #[command(flatten)]
        common: ExplainArgs,
        /// Inline JSON object or a JSON file.
        #[arg(long, value_name = "JSON|FILE")]
        individual: Option<String>,
    },
}

#[derive(Debug, Args)]
struct RecourseArgs {
    /// Full request as accepted by the HTTP API (JSON file).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["individual", "config", "actionable", "alpha", "cost"])]
    request: Option<PathBuf>,
    /// Inline JSON object or a JSON file.
    #[arg(long, value_name = "JSON|FILE")]
    individual: Option<String>,
    /// Recourse configuration (JSON file).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["actionable", "alpha", "cost"])]
    config: Option<PathBuf>,
    /// Actionable attribute; repeat for several.
    #[arg(long, value_name = "ATTR")]
    actionable: Vec<String>,
    /// Required sufficiency in (0, 1].
    #[arg(long)]
    alpha: Option<f64>,
    /// Cost expression for one attribute, `ATTR=EXPR`.
    #[arg(long, value_name = "ATTR=EXPR", value_parser = pair)]
    cost: Vec<(String, String)>,
}

#[derive(Debug, Args)]
struct WhatIfArgs {
    /// Full request as accepted by the HTTP API (JSON file).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["individual", "set"])]
    request: Option<PathBuf>,
    /// Inline JSON object or a JSON file.
    #[arg(long, value_name = "JSON|FILE")]
    individual: Option<String>,
    /// Override, `ATTR=VALUE`.
    #[arg(long, value_name = "ATTR=VALUE", value_parser = pair)]
    set: Vec<(String, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Fixture {
    F1,
    F1Unconfounded,
    German,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Structural model file (JSON).
    #[arg(long, value_name = "FILE", conflicts_with = "fixture", required_unless_present = "fixture")]
    scm: Option<PathBuf>,
    /// Bundled model instead of a file.
    #[arg(long, value_enum)]
    fixture: Option<Fixture>,
    /// Monotonicity violation probability for the german fixture.
    #[arg(long, default_value_t = 0.0)]
    violation: f64,
    /// Outcome variable of the model.
    #[arg(long, default_value = "O")]
    outcome: String,
    /// Draw this many rows.
    #[arg(long, value_name = "N")]
    sample: Option<usize>,
    /// Where to write the sample; standard output otherwise.
    #[arg(long, value_name = "FILE", requires = "sample")]
    out: Option<PathBuf>,
    /// Write the model's graph (JSON).
    #[arg(long, value_name = "FILE")]
    export_graph: Option<PathBuf>,
    /// Write the model itself (JSON).
    #[arg(long, value_name = "FILE")]
    export_scm: Option<PathBuf>,
    /// Exact scores for the query given by --x, --x-prime, --context.
    #[arg(long)]
    ground_truth: bool,
    #[command(flatten)]
    q: QueryArgs,
    /// Check computed bounds against exact scores on random queries.
    #[arg(long)]
    validate_bounds: bool,
    /// Random queries for --validate-bounds
    #[arg(long, default_value_t = 100)]
    trials: usize,
}

#[derive(Debug, Args)]
struct ServeArgs {
    /// Address to bind
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    /// Port to bind; 0 picks a free one
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Session snapshots and files referenced by `{"path"}` live here.
    #[arg(long, value_name = "DIR")]
    data_dir: Option<PathBuf>,
    /// Static assets served outside /v1.
    #[arg(long = "static", value_name = "DIR")]
    static_dir: Option<PathBuf>,
    /// Concurrent computations; defaults to the number of CPUs.
    #[arg(long)]
    workers: Option<usize>,
    /// Allowed browser origin; repeat for several. Any origin when unset.
    #[arg(long, value_name = "ORIGIN")]
    cors_origin: Vec<String>,
    /// Accept `process` black boxes in session requests.
    #[arg(long)]
    allow_process: bool,
}

/// What a command produced; errors may still carry output.
struct Outcome {
    stdout: String,
    error: Option<ServiceError>,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, error: None }
    }
}

impl From<Result<String>> for Outcome {
    fn from(r: Result<String>) -> Self {
        match r {
            Ok(stdout) => Outcome::ok(stdout),
            Err(e) => Outcome {
                stdout: String::new(),
                error: Some(e),
            },
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ServiceError::BadRequest(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| ServiceError::BadRequest(format!("{}: {e}", path.display())))
}

/// Inline JSON when the argument starts with `{`, a file path otherwise.
fn individual(arg: Option<&str>) -> Result<Individual> {
    let arg = arg.ok_or_else(|| ServiceError::BadRequest("--individual is required".into()))?;
    if arg.trim_start().starts_with('{') {
        Ok(serde_json::from_str(arg).map_err(|e| ServiceError::BadRequest(format!("--individual: {e}")))?)
    } else {
        read_json(Path::new(arg))
    }
}

fn usage_error(message: &str) -> i32 {
    let mut cmd = Cli::command();
    eprintln!("error: {message}\n\n{}", cmd.render_usage());
    1
}

impl Cli {
    fn session_config(&self) -> SessionConfig {
        SessionConfig {
            smoothing: self.smoothing.unwrap_or(0.0),
            zero_mass_policy: if self.skip_empty_cells {
                ZeroMassPolicy::SkipAndRenormalize
            } else {
                ZeroMassPolicy::Error
            },
            binning: BTreeMap::new(),
        }
    }

    /// Paths of the session files, or the name of the first missing flag.
    fn bundle_paths(&self) -> std::result::Result<(&Path, &Path, &Path), &'static str> {
        Ok((
            self.graph.as_deref().ok_or("--graph")?,
            self.data.as_deref().ok_or("--data")?,
            self.blackbox.as_deref().ok_or("--blackbox")?,
        ))
    }

    fn load(&self) -> Result<std::sync::Arc<Session>> {
        let (g, d, b) = self
            .bundle_paths()
            .map_err(|flag| ServiceError::BadRequest(format!("{flag} is required")))?;
        Session::from_bundle(Bundle::from_paths(g, d, b, self.session_config())?)
    }

    fn emit<T: Serialize>(&self, value: &T, table: impl FnOnce(&T) -> String) -> String {
        match self.format {
            Format::Json => render::json(value),
            Format::Table => table(value),
        }
    }
}

fn scores_request(a: &ScoresArgs) -> Result<ScoresRequest> {
    if let Some(p) = &a.request {
        return read_json(p);
    }
    let query = match &a.query {
        Some(p) => read_json(p)?,
        None => a.q.spec()?,
    };
    let adjustment = if a.no_adjust {
        Some(AdjustmentSet::empty())
    } else if a.adjust.is_empty() {
        None
    } else {
        Some(AdjustmentSet(a.adjust.iter().cloned().collect()))
    };
    Ok(ScoresRequest {
        query,
        mode: a.mode.unwrap_or_default(),
        adjustment,
    })
}

fn explain_request(common: &ExplainArgs) -> Result<ExplainRequest> {
    let mut r: ExplainRequest = match &common.request {
        Some(p) => read_json(p)?,
        None => ExplainRequest::default(),
    };
    r.score = common.score.or(r.score);
    r.mode = common.mode.or(r.mode);
    r.order = common.order.or(r.order);
    Ok(r)
}

fn recourse_request(a: &RecourseArgs) -> Result<RecourseRequest> {
    if let Some(p) = &a.request {
        return read_json(p);
    }
    let individual = individual(a.individual.as_deref())?;
    let config = match &a.config {
        Some(p) => read_json(p)?,
        None => {
            let alpha = a
                .alpha
                .ok_or_else(|| ServiceError::BadRequest("recourse needs --config or --alpha".into()))?;
            if a.actionable.is_empty() {
                return Err(ServiceError::BadRequest("recourse needs at least one --actionable".into()));
            }
            a.cost
                .iter()
                .try_fold(RecourseConfig::new(a.actionable.clone(), alpha), |c, (k, e)| c.with_cost(k.clone(), e))?
        }
    };
    Ok(RecourseRequest { individual, config })
}

fn whatif_request(a: &WhatIfArgs) -> Result<WhatIfRequest> {
    if let Some(p) = &a.request {
        return read_json(p);
    }
    Ok(WhatIfRequest {
        individual: individual(a.individual.as_deref())?,
        overrides: a.set.iter().map(|(k, v)| (k.clone(), Label::Text(v.clone()))).collect(),
    })
}

fn load_scm(a: &SimulateArgs) -> Result<Scm> {
    Ok(match (&a.scm, a.fixture) {
        (Some(p), _) => Scm::load(p).map_err(|e| ServiceError::BadRequest(format!("{}: {e}", p.display())))?,
        (None, Some(Fixture::F1)) => f1(),
        (None, Some(Fixture::F1Unconfounded)) => f1_unconfounded(),
        (None, Some(Fixture::German)) => german_syn(&GermanSynConfig { violation: a.violation })?.scm,
        (None, None) => return Err(ServiceError::BadRequest("simulate needs --scm or --fixture".into())),
    })
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Result<Outcome> {
    let scm = load_scm(a)?;
    let mut report = serde_json::Map::new();
    let mut stdout = String::new();
    if let Some(p) = &a.export_graph {
        std::fs::write(p, render::json(&scm.graph().to_file()))?;
        report.insert("graph".into(), json!(p));
    }
    if let Some(p) = &a.export_scm {
        std::fs::write(p, render::json(&scm.to_file()?))?;
        report.insert("scm".into(), json!(p));
    }
    if let Some(n) = a.sample {
        let data = scm.sample_dataset(n, cli.seed)?;
        let mut buf = Vec::new();
        data.write_csv(&mut buf, &CsvOptions::default())?;
        match &a.out {
            Some(p) => {
                std::fs::write(p, &buf)?;
                report.insert("sample".into(), json!({ "rows": n, "out": p }));
            }
            None => stdout = String::from_utf8(buf).expect("csv output is utf-8"),
        }
    }
    let mut violations = 0;
    if a.ground_truth {
        let var = scm.schema().get(&a.outcome)?.clone();
        let threshold = var.domain().last().cloned().unwrap_or_default();
        let outcome = OutcomeSpec::new(var, None, &threshold)?;
        let q = a.q.spec()?.resolve(&outcome)?;
        let truth = scm.ground_truth_scores::<f64>(&q)?;
        report.insert("ground_truth".into(), json!({ "query": q.spec(), "scores": truth }));
    }
    if a.validate_bounds {
        let h = bounds_harness(Some(&scm), &a.outcome, &RandomScmConfig::default(), a.trials, cli.seed, BOUNDS_SLACK)?;
        violations = h.violations.len();
        report.insert("validation".into(), serde_json::to_value(&h)?);
    }
    if !report.is_empty() {
        if !stdout.is_empty() {
            return Err(ServiceError::BadRequest(
                "--sample without --out cannot be combined with other reports".into(),
            ));
        }
        stdout = match cli.format {
            Format::Json => render::json(&report),
            Format::Table => simulate_table(&report),
        };
    } else if stdout.is_empty() {
        return Err(ServiceError::BadRequest(
            "nothing to do: pass --sample, --export-graph, --export-scm, --ground-truth or --validate-bounds".into(),
        ));
    }
    let error = (violations > 0).then(|| ServiceError::BadRequest(format!("{violations} bound violations")));
    Ok(Outcome { stdout, error })
}

fn simulate_table(report: &serde_json::Map<String, serde_json::Value>) -> String {
    let mut out = String::new();
    for (k, v) in report {
        match k.as_str() {
            "ground_truth" => {
                for kind in ScoreKind::ALL {
                    out.push_str(&format!("{:<6} {}\n", kind.name(), v["scores"][kind.name()]));
                }
            }
            "validation" => out.push_str(&format!(
                "bounds check: {} trials, {} checked, {} skipped, {} violations\n",
                v["trials"],
                v["checked"],
                v["skipped"],
                v["violations"].as_array().map_or(0, Vec::len)
            )),
            _ => out.push_str(&format!("{k}: {v}\n")),
        }
    }
    out
}

fn serve(cli: &Cli, a: &ServeArgs) -> Result<String> {
    let config = ServeConfig {
        data_dir: a.data_dir.clone(),
        static_dir: a.static_dir.clone(),
        workers: a.workers.unwrap_or_else(|| ServeConfig::default().workers),
        cors_origins: a.cors_origin.clone(),
        allow_process: a.allow_process,
    };
    if let Some(d) = &config.static_dir {
        if !d.is_dir() {
            return Err(ServiceError::BadRequest(format!("{} is not a directory", d.display())));
        }
    }
    let state = AppState::new(config)?;
    if cli.graph.is_some() || cli.data.is_some() || cli.blackbox.is_some() {
        let session = cli.load()?;
        eprintln!("session {}", session.id);
        state.insert(session)?;
    }
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(http::serve(state, SocketAddr::new(a.host, a.port), |addr| {
        eprintln!("listening on http://{addr}");
    }))?;
    Ok(String::new())
}

fn command(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Scores(a) => (|| {
            let req = scores_request(a)?;
            let s = cli.load()?;
            Ok(cli.emit(&ops::scores(&s, &req)?, render::score_table))
        })()
        .into(),
        Command::Explain { level } => (|| {
            let (lvl, req) = match level {
                ExplainCommand::Global(c) => (Level::Global, explain_request(c)?),
                ExplainCommand::Contextual {
                    common,
                    context,
                    attribute,
                } => {
                    let mut r = explain_request(common)?;
                    if !context.is_empty() {
                        r.context = event(context);
                    }
                    r.attribute = attribute.clone().or(r.attribute);
                    (Level::Contextual, r)
                }
                ExplainCommand::Local { common, individual: ind } => {
                    let mut r = explain_request(common)?;
                    if ind.is_some() || r.individual.is_none() {
                        r.individual = Some(individual(ind.as_deref())?);
                    }
                    (Level::Local, r)
                }
            };
            let s = cli.load()?;
            Ok(cli.emit(&ops::explain(&s, lvl, &req)?, render_table))
        })()
        .into(),
        Command::Recourse(a) => {
            let solved = recourse_request(a).and_then(|req| ops::recourse(&*cli.load()?, &req));
            match solved {
                Ok(plan) => Outcome::ok(cli.emit(&plan, render::plan_table)),
                // The infeasible plan is still the command's output.
                Err(ServiceError::Infeasible(plan)) => Outcome {
                    stdout: cli.emit(&*plan, render::plan_table),
                    error: Some(ServiceError::Infeasible(plan)),
                },
                Err(e) => Err(e).into(),
            }
        }
        Command::Whatif(a) => (|| {
            let req = whatif_request(a)?;
            let s = cli.load()?;
            Ok(cli.emit(&ops::what_if(&s, &req)?, render::whatif_table))
        })()
        .into(),
        Command::Simulate(a) => simulate(cli, a).unwrap_or_else(|e| Err(e).into()),
        Command::Serve(a) => serve(cli, a).into(),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    if !matches!(cli.command, Command::Simulate(_) | Command::Serve(_)) {
        if let Err(flag) = cli.bundle_paths() {
            return usage_error(&format!("the following required argument was not provided: {flag} <FILE>"));
        }
    }
    let out = command(&cli);
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.stdout.as_bytes());
    let _ = stdout.flush();
    match out.error {
        None => 0,
        Some(e) => {
            eprintln!("error [{}]: {e}", e.code());
            e.exit_code()
        }
    }
}

//! The `physquiz` command line.
//!
//! Exit codes: 0 success, 1 other failure (I/O, invalid files, eval
//! mismatch), 2 usage, 3 concept not found, 4 no question possible,
//! 5 Wikidata unavailable.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use physquiz_core::dimension::parse_unit_answer;
use physquiz_core::grader::{grade_with, parse_value, GradingPolicy};
use physquiz_core::quiz::QuestionTemplate;
use physquiz_core::Symbol;
use serde::Serialize;

use crate::api::{self, AppState, ConceptResponse, ExplanationView, QuestionView, API_SCHEMA_VERSION, UNIT_HINT};
use crate::config::{Config, ConfigError, FixtureSource, Layer};
use crate::engine::{Engine, EngineError};
use crate::eval::{evaluate_corpus, render_csv, render_json, render_table, ExpectedFlags};
use crate::live::WikidataClient;
use crate::session::InMemorySessionStore;
use crate::snapshot::{snapshot_fixture, Snapshot, SnapshotError, BUNDLED_EXPECTED_FLAGS};
use crate::store::{ConceptStore, LayeredStore, LookupError, SnapshotStore};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_FOUND: i32 = 3;
pub const EXIT_NOT_QUIZZABLE: i32 = 4;
pub const EXIT_UPSTREAM: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "physquiz", version, about = "Physics quiz questions from the defining formulas of Wikidata concepts")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML configuration file (also PHYSQUIZ_CONFIG)
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Snapshot to read concepts from: a path, `bundled` or `none`
    #[arg(long, global = true, value_name = "PATH")]
    pub fixture: Option<String>,
    /// Query Wikidata for concepts the snapshot lacks
    #[arg(long, global = true)]
    pub live: bool,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Inclusive range for given values, e.g. 1..10
    #[arg(long, global = true, value_name = "LO..HI", allow_hyphen_values = true)]
    pub range: Option<String>,
    /// Relative grading tolerance, e.g. 1/100 or 0.01
    #[arg(long, global = true)]
    pub tolerance: Option<String>,
    /// Machine-readable output
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a question for a concept
    Generate {
        /// Concept label or QID
        #[arg(long)]
        concept: String,
        /// Identifier to ask for; random when omitted
        #[arg(long)]
        target: Option<String>,
        /// Also print the solution and explanation
        #[arg(long)]
        show_solution: bool,
    },
    /// Grade an answer against a known solution
    Grade {
        #[arg(long, allow_hyphen_values = true)]
        value: String,
        #[arg(long, allow_hyphen_values = true)]
        unit: String,
        #[arg(long, allow_hyphen_values = true)]
        solution_value: String,
        #[arg(long, allow_hyphen_values = true)]
        solution_unit: String,
    },
    /// Show the record and analysis for a concept
    Lookup {
        /// Concept label or QID
        #[arg(long)]
        concept: String,
    },
    /// Write a snapshot file from concept lookups
    Snapshot {
        #[arg(long, short)]
        output: PathBuf,
        /// Concepts to include (repeatable); default: every record of the fixture
        #[arg(long = "concept")]
        concepts: Vec<String>,
    },
    /// Run the evaluation harness over the fixture
    Eval {
        #[arg(long, conflicts_with = "json")]
        csv: bool,
        /// Compare against expected flags and fail on differences
        #[arg(long)]
        check: bool,
        /// Expected flags file; defaults to the bundled one for the bundled fixture
        #[arg(long, value_name = "FILE")]
        expected: Option<PathBuf>,
    },
    /// Serve the HTTP API
    Serve {
        #[arg(long, value_name = "ADDR")]
        bind: Option<String>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Lookup(#[from] LookupError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("evaluation differs from the expected flags:\n{}", .0.join("\n"))]
    Mismatch(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Config(ConfigError::Value { .. }) => EXIT_USAGE,
            CliError::Lookup(LookupError::EmptyQuery) => EXIT_USAGE,
            CliError::Lookup(LookupError::ConceptNotFound | LookupError::AmbiguousLabel { .. }) => EXIT_NOT_FOUND,
            CliError::Lookup(LookupError::NetworkError(_)) => EXIT_UPSTREAM,
            CliError::Engine(_) => EXIT_NOT_QUIZZABLE,
            CliError::Config(_) | CliError::Snapshot(_) | CliError::Io(_) | CliError::Mismatch(_) => EXIT_FAILURE,
        }
    }

    fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) | CliError::Config(ConfigError::Value { .. }) => "usage",
            CliError::Config(_) => "config",
            CliError::Lookup(LookupError::EmptyQuery) => "usage",
            CliError::Lookup(LookupError::ConceptNotFound) => "concept_not_found",
            CliError::Lookup(LookupError::AmbiguousLabel { .. }) => "ambiguous_label",
            CliError::Lookup(LookupError::NetworkError(_)) => "upstream_unavailable",
            CliError::Engine(EngineError::NotQuizzable(_)) => "non_quizzable",
            CliError::Engine(EngineError::Untranslatable(_)) => "untranslatable_formula",
            CliError::Engine(_) => "question_unavailable",
            CliError::Snapshot(_) => "snapshot",
            CliError::Io(_) => "io",
            CliError::Mismatch(_) => "eval_mismatch",
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// `env` looks up environment variables.
pub fn run<I, T>(args: I, env: &dyn Fn(&str) -> Option<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let json = cli.global.json;
    match execute(cli, env, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = if json {
                let (reason, candidates) = match &e {
                    CliError::Engine(EngineError::NotQuizzable(reason)) => (Some(reason.to_string()), None),
                    CliError::Lookup(LookupError::AmbiguousLabel { candidates, .. }) => {
                        (None, Some(candidates.clone()))
                    }
                    _ => (None, None),
                };
                let body = api::ErrorBody { code: e.code().into(), message: e.to_string(), reason, candidates };
                writeln!(err, "{}", serde_json::to_string(&body).expect("error body serializes"))
            } else {
                writeln!(err, "error: {e}")
            };
            e.exit_code()
        }
    }
}

fn resolve_config(
    global: &GlobalArgs,
    bind: Option<&String>,
    env: &dyn Fn(&str) -> Option<String>,
) -> Result<Config, CliError> {
    let file = global.config.clone().or_else(|| env("PHYSQUIZ_CONFIG").filter(|v| !v.is_empty()).map(PathBuf::from));
    let flags = Layer {
        fixture: global.fixture.clone(),
        live: global.live.then_some(true),
        range: global.range.clone(),
        tolerance: global.tolerance.clone(),
        bind: bind.cloned(),
        ..Layer::default()
    };
    Ok(Config::resolve(file.as_deref(), &Layer::from_env(env)?, &flags)?)
}

fn load_snapshot(source: &FixtureSource) -> Result<Snapshot, SnapshotError> {
    match source {
        FixtureSource::Bundled => Ok(Snapshot::bundled()),
        FixtureSource::Path(path) => Snapshot::load(path),
    }
}

pub fn build_store(config: &Config) -> Result<Arc<dyn ConceptStore>, CliError> {
    let live = || WikidataClient::new(config.live_config());
    Ok(match &config.fixture {
        None => Arc::new(live()),
        Some(source) => {
            let fixture = SnapshotStore::new(load_snapshot(source)?);
            if config.live {
                Arc::new(LayeredStore { fixture, live: live() })
            } else {
                Arc::new(fixture)
            }
        }
    })
}

pub fn build_engine(config: &Config) -> Result<Engine, CliError> {
    let mut engine = Engine::with_tolerance(config.tolerance()?);
    engine.heuristic_derivatives = config.heuristic_derivatives;
    if let Some(path) = &config.template {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.clone(), source })?;
        engine.template = QuestionTemplate::parse(&text)
            .map_err(|e| ConfigError::File { path: path.clone(), message: e.to_string() })?;
    }
    Ok(engine)
}

fn print_json(out: &mut dyn Write, value: &impl Serialize) -> Result<(), CliError> {
    writeln!(out, "{}", serde_json::to_string_pretty(value).expect("output serializes"))?;
    Ok(())
}

#[derive(Serialize)]
struct GenerateOutput {
    schema_version: u32,
    question: QuestionView,
    #[serde(skip_serializing_if = "Option::is_none")]
    explanation: Option<ExplanationView>,
}

#[derive(Serialize)]
struct GradeOutput {
    schema_version: u32,
    value_correct: bool,
    unit_correct: bool,
    messages: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    relative_error: Option<f64>,
}

fn execute(cli: Cli, env: &dyn Fn(&str) -> Option<String>, out: &mut dyn Write) -> Result<(), CliError> {
    let bind = match &cli.command {
        Command::Serve { bind } => bind.clone(),
        _ => None,
    };
    let config = resolve_config(&cli.global, bind.as_ref(), env)?;
    let json = cli.global.json;
    match cli.command {
        Command::Generate { concept, target, show_solution } => {
            let target: Option<Symbol> = target
                .as_deref()
                .map(str::parse)
                .transpose()
                .map_err(|e| CliError::Usage(format!("invalid --target: {e}")))?;
            let engine = build_engine(&config)?;
            let record = build_store(&config)?.lookup(&concept)?;
            let seed = cli.global.seed.unwrap_or_else(rand::random);
            let question = engine.generate(&record, target.as_ref(), config.range.inclusive(), seed)?;
            let explanation = show_solution.then(|| ExplanationView::of(&question));
            if json {
                let output = GenerateOutput {
                    schema_version: API_SCHEMA_VERSION,
                    question: QuestionView::of(&question),
                    explanation,
                };
                return print_json(out, &output);
            }
            writeln!(out, "{}", question.question_text)?;
            writeln!(out, "{UNIT_HINT}")?;
            writeln!(out, "seed: {seed}")?;
            if let Some(e) = explanation {
                writeln!(out, "\nSolution: {} = {} {}", question.target.symbol, e.solution_value, e.solution_unit)?;
                writeln!(out, "Explanation, from {} <{}>:", e.reference, e.reference_url)?;
                for (i, step) in e.steps.iter().enumerate() {
                    writeln!(out, "  {}. {}: {}", i + 1, step.description, step.rendered)?;
                }
            }
            Ok(())
        }
        Command::Grade { value, unit, solution_value, solution_unit } => {
            let solution =
                parse_value(&solution_value).map_err(|e| CliError::Usage(format!("invalid --solution-value: {e}")))?;
            let solution_dim = parse_unit_answer(&solution_unit)
                .map_err(|e| CliError::Usage(format!("invalid --solution-unit: {e}")))?;
            let report =
                grade_with(&value, &unit, &solution, &solution_dim, &GradingPolicy::relative(config.tolerance()?));
            if json {
                return print_json(
                    out,
                    &GradeOutput {
                        schema_version: API_SCHEMA_VERSION,
                        value_correct: report.value_correct,
                        unit_correct: report.unit_correct,
                        messages: report.messages,
                        relative_error: report.relative_error,
                    },
                );
            }
            let verdict = |ok: bool| if ok { "correct" } else { "incorrect" };
            writeln!(out, "value: {}", verdict(report.value_correct))?;
            writeln!(out, "unit: {}", verdict(report.unit_correct))?;
            for message in &report.messages {
                writeln!(out, "{message}")?;
            }
            Ok(())
        }
        Command::Lookup { concept } => {
            let engine = build_engine(&config)?;
            let record = build_store(&config)?.lookup(&concept)?;
            if json {
                print_json(out, &ConceptResponse::of(&engine, record, config.range))
            } else {
                print_json(out, &record)
            }
        }
        Command::Snapshot { output, concepts } => {
            let records = if concepts.is_empty() {
                let source = config
                    .fixture
                    .as_ref()
                    .ok_or_else(|| CliError::Usage("name concepts with --concept or configure a fixture".into()))?;
                load_snapshot(source)?.records
            } else {
                let store = build_store(&config)?;
                concepts.iter().map(|c| store.lookup(c)).collect::<Result<Vec<_>, _>>()?
            };
            let snapshot = snapshot_fixture(&records, &output)?;
            writeln!(out, "wrote {} records to {}", snapshot.records.len(), output.display())?;
            Ok(())
        }
        Command::Eval { csv, check, expected } => {
            let source = config.fixture.as_ref().ok_or_else(|| CliError::Usage("eval needs a fixture".into()))?;
            let snapshot = load_snapshot(source)?;
            let engine = build_engine(&config)?;
            let report =
                evaluate_corpus(&engine, &snapshot.records, cli.global.seed.unwrap_or(0), config.range.inclusive());
            let rendered = if json {
                render_json(&report)
            } else if csv {
                render_csv(&report)
            } else {
                render_table(&report)
            };
            out.write_all(rendered.as_bytes())?;
            if check || expected.is_some() {
                let text = match (&expected, source) {
                    (Some(path), _) => std::fs::read_to_string(path)?,
                    (None, FixtureSource::Bundled) => BUNDLED_EXPECTED_FLAGS.to_string(),
                    (None, FixtureSource::Path(_)) => {
                        return Err(CliError::Usage("--check with a custom fixture needs --expected".into()))
                    }
                };
                let expected = ExpectedFlags::from_json(&text)
                    .map_err(|e| CliError::Usage(format!("invalid expected flags: {e}")))?;
                let mismatches = expected.mismatches(&report);
                if !mismatches.is_empty() {
                    return Err(CliError::Mismatch(mismatches));
                }
            }
            Ok(())
        }
        Command::Serve { .. } => serve(&config),
    }
}

fn serve(config: &Config) -> Result<(), CliError> {
    let _ = tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_env("PHYSQUIZ_LOG").unwrap_or_else(|_| "info".into()))
        .try_init();
    let state = AppState {
        engine: Arc::new(build_engine(config)?),
        store: build_store(config)?,
        sessions: Arc::new(InMemorySessionStore::new(config.session_ttl)),
        default_range: config.range,
        clock: api::system_clock(),
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&config.bind).await?;
        tracing::info!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, api::router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    })?;
    Ok(())
}

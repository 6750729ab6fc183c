//! JSON API under `/api/v1`.
//!
//! | method | path                     | body            | success              |
//! |--------|--------------------------|-----------------|----------------------|
//! | POST   | `/api/v1/question`       | [`QuestionRequest`] | [`QuestionResponse`] |
//! | POST   | `/api/v1/answer`         | [`AnswerRequest`]   | [`AnswerResponse`]   |
//! | GET    | `/api/v1/concepts/{query}` |               | [`ConceptResponse`]  |
//! | GET    | `/api/v1/health`         |                 | [`HealthResponse`]   |
//!
//! Errors are `{"code": ..., "message": ...}` with status 400 (bad input),
//! 404 (unknown concept or session), 410 (expired session), 422 (concept
//! found but no question possible) or 503 (Wikidata unavailable).

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use physquiz_core::quiz::QuizError;
use physquiz_core::solver::QuizzabilityVerdict;
use physquiz_core::{check_quizzable, count_question_space, render_explanation, ConceptRecord, QuizQuestion, Symbol};
use serde::{Deserialize, Serialize};

use crate::config::ValueRange;
use crate::engine::{Engine, EngineError};
use crate::session::{QuizSession, SessionError, SessionStore};
use crate::store::{completeness, Candidate, Completeness, ConceptStore, LookupError};

pub const API_SCHEMA_VERSION: u32 = 1;

/// How unit answers are written; shown with every question.
pub const UNIT_HINT: &str =
    "Enter the unit in SI symbols with ^ for exponents, e.g. m s^-1 or kg m^2 s^-2. Named units such as N or J also work.";

pub type Clock = Arc<dyn Fn() -> u64 + Send + Sync>;

pub fn system_clock() -> Clock {
    Arc::new(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
}

#[derive(Clone)]
pub struct AppState {
    pub engine: Arc<Engine>,
    pub store: Arc<dyn ConceptStore>,
    pub sessions: Arc<dyn SessionStore>,
    pub default_range: ValueRange,
    pub clock: Clock,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/v1/question", post(create_question))
        .route("/api/v1/answer", post(answer))
        .route("/api/v1/concepts/{query}", get(concept))
        .route("/api/v1/health", get(health))
        .with_state(state)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuestionRequest {
    /// Label or QID.
    pub concept: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    /// Inclusive `[low, high]` for the given values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[i64; 2]>,
    /// Omit for a fresh random question.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptRef {
    pub qid: String,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetView {
    pub symbol: String,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GivenView {
    pub symbol: String,
    pub name: String,
    pub value: String,
    pub unit: String,
}

/// What a student may see of a question. Carries no solution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionView {
    pub concept: ConceptRef,
    pub question_text: String,
    pub target: TargetView,
    pub givens: Vec<GivenView>,
    pub unit_hint: String,
    pub seed: u64,
    pub range: [i64; 2],
}

impl QuestionView {
    pub fn of(q: &QuizQuestion) -> Self {
        QuestionView {
            concept: ConceptRef { qid: q.concept_qid.clone(), label: q.concept_label.clone() },
            question_text: q.question_text.clone(),
            target: TargetView { symbol: q.target.symbol.to_string(), name: q.target.name.clone() },
            givens: q
                .givens
                .iter()
                .map(|g| GivenView {
                    symbol: g.info.symbol.to_string(),
                    name: g.info.name.clone(),
                    value: g.value.to_string(),
                    unit: g.unit.text.clone(),
                })
                .collect(),
            unit_hint: UNIT_HINT.into(),
            seed: q.seed,
            range: [*q.range.start(), *q.range.end()],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionResponse {
    pub schema_version: u32,
    pub session_id: String,
    #[serde(flatten)]
    pub question: QuestionView,
    pub expires_in_secs: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerRequest {
    pub session_id: String,
    pub value: String,
    pub unit: String,
    /// Return the explanation even when the answer is wrong.
    #[serde(default)]
    pub reveal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepView {
    pub description: String,
    pub rendered: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplanationView {
    pub reference: String,
    pub reference_url: String,
    pub steps: Vec<StepView>,
    pub solution_value: String,
    pub solution_unit: String,
}

impl ExplanationView {
    pub fn of(q: &QuizQuestion) -> Self {
        let e = render_explanation(q);
        ExplanationView {
            reference: e.reference,
            reference_url: e.reference_url,
            steps: e.steps.into_iter().map(|s| StepView { description: s.description, rendered: s.rendered }).collect(),
            solution_value: e.final_value,
            solution_unit: e.final_unit.text,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerResponse {
    pub schema_version: u32,
    pub session_id: String,
    pub value_correct: bool,
    pub unit_correct: bool,
    /// `Value incorrect!` and/or `Unit incorrect!`.
    pub messages: Vec<String>,
    pub attempts: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation: Option<ExplanationView>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationView {
    pub cleaned: String,
    pub rules_applied: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConceptResponse {
    pub schema_version: u32,
    pub record: ConceptRecord,
    pub completeness: Completeness,
    pub translation: TranslationView,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<QuizzabilityVerdict>,
    /// Solved form per identifier.
    pub rearrangements: BTreeMap<String, String>,
    /// Questions available over the default range, as a decimal string.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub question_space: Option<String>,
}

impl ConceptResponse {
    pub fn of(engine: &Engine, record: ConceptRecord, range: ValueRange) -> Self {
        let translation = engine.translate(&record);
        let verdict = match &translation.equation {
            Ok(eq) => Some(check_quizzable(eq)),
            Err(e) => QuizzabilityVerdict::from_parse_error(e),
        };
        let rset = engine.rearrange(&record).ok();
        let rearrangements = rset
            .iter()
            .flat_map(|r| r.solved_for.iter())
            .map(|(s, eq)| (s.to_string(), physquiz_core::expr::render_equation_infix(eq)))
            .collect();
        ConceptResponse {
            schema_version: API_SCHEMA_VERSION,
            completeness: completeness(&record),
            translation: TranslationView {
                cleaned: translation.cleaning.cleaned.clone(),
                rules_applied: translation.cleaning.rules_applied.clone(),
                equation: translation.equation.as_ref().ok().map(physquiz_core::expr::render_equation_infix),
                error: translation.equation.as_ref().err().map(|e| e.to_string()),
            },
            verdict,
            rearrangements,
            question_space: rset.map(|r| count_question_space(&r, range.inclusive()).to_string()),
            record,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub schema_version: u32,
    pub status: String,
    pub store: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concepts: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    /// Quizzability reason for `non_quizzable`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<Candidate>>,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody { code: code.into(), message: message.into(), reason: None, candidates: None },
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<LookupError> for ApiError {
    fn from(e: LookupError) -> Self {
        match e {
            LookupError::EmptyQuery => ApiError::bad_request(e.to_string()),
            LookupError::ConceptNotFound => ApiError::new(StatusCode::NOT_FOUND, "concept_not_found", e.to_string()),
            LookupError::AmbiguousLabel { ref candidates, .. } => {
                let mut error = ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "ambiguous_label", e.to_string());
                error.body.candidates = Some(candidates.clone());
                error
            }
            LookupError::NetworkError(_) => {
                ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "upstream_unavailable", e.to_string())
            }
        }
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let unprocessable = |code: &str| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, e.to_string());
        match &e {
            EngineError::NotQuizzable(reason) => {
                let mut error = unprocessable("non_quizzable");
                error.body.reason = Some(reason.to_string());
                error
            }
            EngineError::Untranslatable(_) => unprocessable("untranslatable_formula"),
            EngineError::Quiz(QuizError::TargetNotSolvable(_)) => unprocessable("target_not_solvable"),
            EngineError::Quiz(QuizError::EmptyRange) => ApiError::bad_request(e.to_string()),
            EngineError::Quiz(_) => unprocessable("question_unavailable"),
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::UnknownSession(_) => ApiError::new(StatusCode::NOT_FOUND, "unknown_session", e.to_string()),
            SessionError::SessionExpired(_) => ApiError::new(StatusCode::GONE, "session_expired", e.to_string()),
        }
    }
}

async fn lookup(state: &AppState, query: String) -> Result<ConceptRecord, ApiError> {
    let store = state.store.clone();
    // live lookups block on HTTP
    tokio::task::spawn_blocking(move || store.lookup(&query))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(ApiError::from)
}

async fn create_question(
    State(state): State<AppState>,
    payload: Result<Json<QuestionRequest>, JsonRejection>,
) -> Result<Json<QuestionResponse>, ApiError> {
    let Json(request) = payload.map_err(|e| ApiError::bad_request(e.body_text()))?;
    if request.concept.trim().is_empty() {
        return Err(ApiError::bad_request("concept must not be empty"));
    }
    let target: Option<Symbol> = request
        .target
        .as_deref()
        .map(str::parse)
        .transpose()
        .map_err(|e| ApiError::bad_request(format!("invalid target: {e}")))?;
    let range = match request.range {
        Some([low, high]) if low > high => {
            return Err(ApiError::bad_request(format!("range [{low}, {high}] is empty")))
        }
        Some([low, high]) => ValueRange { low, high },
        None => state.default_range,
    };
    let seed = request.seed.unwrap_or_else(rand::random);
    let record = lookup(&state, request.concept).await?;
    let question = state.engine.generate(&record, target.as_ref(), range.inclusive(), seed)?;
    let session = state.sessions.create(question, (state.clock)());
    Ok(Json(question_response(&session, state.sessions.ttl().as_secs())))
}

fn question_response(session: &QuizSession, ttl: u64) -> QuestionResponse {
    QuestionResponse {
        schema_version: API_SCHEMA_VERSION,
        session_id: session.session_id.clone(),
        question: QuestionView::of(&session.question),
        expires_in_secs: ttl,
    }
}

async fn answer(
    State(state): State<AppState>,
    payload: Result<Json<AnswerRequest>, JsonRejection>,
) -> Result<Json<AnswerResponse>, ApiError> {
    let Json(request) = payload.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let session = state.sessions.record_attempt(&request.session_id, (state.clock)())?;
    let report = state.engine.grade(&session.question, &request.value, &request.unit);
    let solved = report.value_correct && report.unit_correct;
    Ok(Json(AnswerResponse {
        schema_version: API_SCHEMA_VERSION,
        session_id: session.session_id.clone(),
        value_correct: report.value_correct,
        unit_correct: report.unit_correct,
        messages: report.messages,
        attempts: session.attempts,
        explanation: (solved || request.reveal).then(|| ExplanationView::of(&session.question)),
    }))
}

async fn concept(State(state): State<AppState>, Path(query): Path<String>) -> Result<Json<ConceptResponse>, ApiError> {
    let record = lookup(&state, query).await?;
    Ok(Json(ConceptResponse::of(&state.engine, record, state.default_range)))
}

async fn health(State(state): State<AppState>) -> Json<HealthResponse> {
    Json(HealthResponse {
        schema_version: API_SCHEMA_VERSION,
        status: "ok".into(),
        store: state.store.mode().into(),
        concepts: state.store.len_hint(),
    })
}

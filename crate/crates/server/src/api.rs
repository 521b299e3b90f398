//! JSON HTTP API over the event store. Every mutating route accepts an
//! `Idempotency-Key` header; a retry with the same key and body gets the
//! first response back.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, PoisonError};

use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::Utc;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use hyperdesc_core::eval::{
    run_reasoning, run_t2i, similarity_by_chunk, LanguageModel, OverlapModel, ReasoningInstance, T2iInput,
};
use hyperdesc_core::export::{build_benchmark, export_training_mixture, render_bundle, to_jsonl, TaskTag};
use hyperdesc_core::metrics::{corpus_readability, corpus_stats, LexiconTagger};
use hyperdesc_core::report::{agreement_curves, render_corpus_table, render_readability_table, render_sxs_report};
use hyperdesc_core::seeding::{seed_caption_or_unavailable, ClientPolicy};
use hyperdesc_core::sxs::{aggregate_sxs, create_sxs, sxs_delta, SxSItem, SxSSource};
use hyperdesc_core::workflow::{seed_task1, ObjectEdit, SeedFlag, Task1State};
use hyperdesc_core::{
    Command, Error, FiveMetricRating, ImageRecord, Metric, Project, ProjectConfig, SeedCaption, Store, Subset,
};

use crate::config::Clients;
use crate::ui;

pub struct AppState {
    store: Mutex<Store>,
    clients: Clients,
    policy: ClientPolicy,
    seed: u64,
    api_token: Option<String>,
}

impl AppState {
    pub fn new(store: Store, clients: Clients, policy: ClientPolicy, seed: u64, api_token: Option<String>) -> Self {
        Self {
            store: Mutex::new(store),
            clients,
            policy,
            seed,
            api_token,
        }
    }

    fn store(&self) -> std::sync::MutexGuard<'_, Store> {
        self.store.lock().unwrap_or_else(PoisonError::into_inner)
    }

    fn read<T>(&self, project_id: &str, f: impl FnOnce(&Project) -> Result<T, ApiError>) -> Result<T, ApiError> {
        let store = self.store();
        f(store.project(project_id)?)
    }

    fn recall(&self, key: Option<&str>, fingerprint: &Value) -> Result<Option<Value>, ApiError> {
        match key {
            Some(k) => Ok(self.store().recall(k, fingerprint)?),
            None => Ok(None),
        }
    }

    fn commit(&self, key: Option<&str>, fingerprint: Value, command: Command) -> Result<Value, ApiError> {
        let fingerprint = key.map(|_| fingerprint);
        Ok(self.store().execute_as(key, fingerprint, command)?)
    }
}

// ---------------------------------------------------------------------------
// Errors

#[derive(Debug)]
pub enum ApiError {
    Core(Error),
    BadRequest(String),
    Unauthorized,
    Unavailable(String),
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError::Core(e)
    }
}

pub fn status_for(e: &Error) -> StatusCode {
    match e {
        Error::InvalidArgument(_) | Error::Validation(_) | Error::InvalidPair(_) => StatusCode::BAD_REQUEST,
        Error::Conflict(_) | Error::StateViolation(_) | Error::PoolExhausted(_) => StatusCode::CONFLICT,
        Error::AssignmentViolation { .. } => StatusCode::FORBIDDEN,
        Error::UnmatchedForm(_) => StatusCode::UNPROCESSABLE_ENTITY,
        Error::NotFound(_) => StatusCode::NOT_FOUND,
        Error::Client(_) => StatusCode::BAD_GATEWAY,
        Error::Internal(_) | Error::Io(_) | Error::Json(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::Core(e) => {
                let mut body = json!({"error": e.kind(), "message": e.to_string()});
                if let Error::Validation(v) = &e {
                    body["violations"] = json!(v);
                }
                (status_for(&e), body)
            }
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, json!({"error": "bad_request", "message": m})),
            ApiError::Unauthorized => (
                StatusCode::UNAUTHORIZED,
                json!({"error": "unauthorized", "message": "missing or wrong bearer token"}),
            ),
            ApiError::Unavailable(m) => {
                (StatusCode::SERVICE_UNAVAILABLE, json!({"error": "unavailable", "message": m}))
            }
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult = Result<Response, ApiError>;

fn ok(value: impl Serialize) -> ApiResult {
    Ok(Json(json!(value)).into_response())
}

fn created(value: Value) -> ApiResult {
    Ok((StatusCode::CREATED, Json(value)).into_response())
}

// ---------------------------------------------------------------------------
// Extractors

/// JSON body parsed into `T`, keeping the raw value as the retry identity.
pub struct Body<T>(pub T, pub Value);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        let Json(raw) = Json::<Value>::from_request(req, state)
            .await
            .map_err(|e| ApiError::BadRequest(e.body_text()))?;
        let parsed = serde_json::from_value(raw.clone()).map_err(|e| ApiError::BadRequest(e.to_string()))?;
        Ok(Body(parsed, raw))
    }
}

fn idempotency_key(headers: &HeaderMap) -> Option<String> {
    headers
        .get("idempotency-key")
        .and_then(|v| v.to_str().ok())
        .map(str::to_string)
}

fn fingerprint(route: String, body: &Value) -> Value {
    json!({"route": route, "body": body})
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Core(Error::Internal(format!("worker failed: {e}"))))
}

async fn require_token(State(state): State<Arc<AppState>>, req: Request, next: Next) -> Response {
    if let Some(token) = &state.api_token {
        let expected = format!("Bearer {token}");
        let given = req.headers().get(header::AUTHORIZATION).and_then(|v| v.to_str().ok());
        if given != Some(expected.as_str()) {
            return ApiError::Unauthorized.into_response();
        }
    }
    next.run(req).await
}

// ---------------------------------------------------------------------------
// Router

pub fn router(state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/projects", post(create_project).get(list_projects))
        .route("/projects/{pid}", get(get_project))
        .route("/projects/{pid}/images", post(register_images))
        .route("/projects/{pid}/task1/{image}", get(get_task1))
        .route("/projects/{pid}/task1/{image}/seed", post(task1_seed))
        .route("/projects/{pid}/task1/{image}/edits", post(task1_edit))
        .route("/projects/{pid}/task1/{image}/finalize", post(task1_finalize))
        .route("/projects/{pid}/task2/{image}/start", post(task2_start))
        .route("/projects/{pid}/task2/{image}/next", get(task2_next))
        .route("/projects/{pid}/task2/{image}/rounds", post(task2_round))
        .route("/projects/{pid}/sxs/items", post(sxs_create))
        .route("/projects/{pid}/sxs/items/{id}/presented", get(sxs_presented))
        .route("/projects/{pid}/ui/task1/{image}", get(ui_task1))
        .route("/projects/{pid}/ui/task2/{image}", get(ui_task2))
        .route("/projects/{pid}/ui/sxs/{id}", get(ui_sxs))
        .route("/projects/{pid}/sxs/items/{id}/judgment", post(sxs_judge))
        .route("/projects/{pid}/model-descriptions", post(model_description))
        .route("/projects/{pid}/subsets", post(define_subset))
        .route("/projects/{pid}/active-learning/events", get(active_learning_events))
        .route("/projects/{pid}/active-learning/{batch}/ack", post(active_learning_ack))
        .route("/projects/{pid}/reports/corpus-stats", get(report_corpus_stats))
        .route("/projects/{pid}/reports/readability", get(report_readability))
        .route("/projects/{pid}/reports/sxs", get(report_sxs))
        .route("/projects/{pid}/reports/agreement-curves", get(report_agreement))
        .route("/projects/{pid}/export/benchmark", get(export_benchmark_route))
        .route("/projects/{pid}/export/training", get(export_training_route))
        .route("/eval/reasoning/run", post(eval_reasoning))
        .route("/eval/t2i/run", post(eval_t2i))
        .route_layer(middleware::from_fn_with_state(state.clone(), require_token));
    Router::new()
        .route("/health", get(|| async { Json(json!({"status": "ok"})) }))
        .merge(api)
        .with_state(state)
}

// ---------------------------------------------------------------------------
// Projects and images

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateProject {
    project_id: String,
    name: String,
    #[serde(default)]
    config: ProjectConfig,
}

async fn create_project(State(s): State<Arc<AppState>>, headers: HeaderMap, Body(req, raw): Body<CreateProject>) -> ApiResult {
    let fp = fingerprint("POST /projects".into(), &raw);
    let value = s.commit(
        idempotency_key(&headers).as_deref(),
        fp,
        Command::CreateProject { project_id: req.project_id, name: req.name, config: req.config },
    )?;
    created(value)
}

async fn list_projects(State(s): State<Arc<AppState>>) -> ApiResult {
    let store = s.store();
    let list: Vec<Value> = store.projects().map(|p| json!({"project_id": p.project_id, "name": p.name})).collect();
    ok(json!({"projects": list}))
}

async fn get_project(State(s): State<Arc<AppState>>, Path(pid): Path<String>) -> ApiResult {
    s.read(&pid, |p| {
        ok(json!({
            "project_id": p.project_id,
            "name": p.name,
            "config": p.config,
            "images": p.images.len(),
            "task1": p.task1.len(),
            "task1_finalized": p.task1.values().filter(|t| t.finalized).count(),
            "task2": p.task2.len(),
            "task2_closed": p.task2.values().filter(|t| !t.status.is_open()).count(),
            "sxs": p.sxs.len(),
            "sxs_rated": p.sxs.values().filter(|i| i.is_rated()).count(),
        }))
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegisterImages {
    images: Vec<ImageRecord>,
}

async fn register_images(
    State(s): State<Arc<AppState>>,
    Path(pid): Path<String>,
    headers: HeaderMap,
    Body(req, raw): Body<RegisterImages>,
) -> ApiResult {
    let fp = fingerprint(format!("POST /projects/{pid}/images"), &raw);
    let key = idempotency_key(&headers);
    ok(s.commit(key.as_deref(), fp, Command::RegisterImages { project_id: pid, images: req.images })?)
}

// ---------------------------------------------------------------------------
// Task 1

async fn get_task1(State(s): State<Arc<AppState>>, Path((pid, image)): Path<(String, String)>) -> ApiResult {
    s.read(&pid, |p| {
        let t = p.task1.get(&image).ok_or_else(|| Error::NotFound(format!("task 1 for {image:?}")))?;
        ok(t)
    })
}

async fn task1_seed(
    State(s): State<Arc<AppState>>,
    Path((pid, image_id)): Path<(String, String)>,
    headers: HeaderMap,
) -> ApiResult {
    let key = idempotency_key(&headers);
    let fp = fingerprint(format!("POST /projects/{pid}/task1/{image_id}/seed"), &Value::Null);
    if let Some(v) = s.recall(key.as_deref(), &fp)? {
        return ok(v);
    }
    let image = s.read(&pid, |p| Ok(p.image(&image_id)?.clone()))?;
    let (detector, captioner, policy) = (s.clients.detector.clone(), s.clients.captioner.clone(), s.policy);
    let state = blocking(move || match (detector, captioner) {
        (Some(d), Some(c)) => seed_task1(&image, d.as_ref(), c.as_ref(), &policy),
        _ => Task1State::new(&image.image_id, Vec::new(), SeedFlag::Unavailable),
    })
    .await?;
    ok(s.commit(key.as_deref(), fp, Command::InstallTask1 { project_id: pid, state })?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EditRequest {
    #[serde(default)]
    expected_version: Option<u64>,
    annotator: String,
    edit: ObjectEdit,
}

async fn task1_edit(
    State(s): State<Arc<AppState>>,
    Path((pid, image_id)): Path<(String, String)>,
    headers: HeaderMap,
    Body(req, raw): Body<EditRequest>,
) -> ApiResult {
    let fp = fingerprint(format!("POST /projects/{pid}/task1/{image_id}/edits"), &raw);
    let command = Command::Task1Edit {
        project_id: pid,
        image_id,
        expected_version: req.expected_version,
        annotator: req.annotator,
        edit: req.edit,
    };
    ok(s.commit(idempotency_key(&headers).as_deref(), fp, command)?)
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct VersionOnly {
    #[serde(default)]
    expected_version: Option<u64>,
}

async fn task1_finalize(
    State(s): State<Arc<AppState>>,
    Path((pid, image_id)): Path<(String, String)>,
    headers: HeaderMap,
    Body(req, raw): Body<VersionOnly>,
) -> ApiResult {
    let fp = fingerprint(format!("POST /projects/{pid}/task1/{image_id}/finalize"), &raw);
    let command = Command::Task1Finalize {
        project_id: pid,
        image_id,
        expected_version: req.expected_version,
        at: Utc::now(),
    };
    ok(s.commit(idempotency_key(&headers).as_deref(), fp, command)?)
}

// ---------------------------------------------------------------------------
// Task 2

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct StartRequest {
    /// A caller-supplied seed; otherwise the configured captioner is asked.
    #[serde(default)]
    seed: Option<SeedCaption>,
}

async fn task2_start(
    State(s): State<Arc<AppState>>,
    Path((pid, image_id)): Path<(String, String)>,
    headers: HeaderMap,
    Body(req, raw): Body<StartRequest>,
) -> ApiResult {
    let key = idempotency_key(&headers);
    let fp = fingerprint(format!("POST /projects/{pid}/task2/{image_id}/start"), &raw);
    if let Some(v) = s.recall(key.as_deref(), &fp)? {
        return ok(v);
    }
    let image = s.read(&pid, |p| Ok(p.image(&image_id)?.clone()))?;
    let seed = match (req.seed, s.clients.captioner.clone()) {
        (Some(seed), _) => seed,
        (None, Some(c)) => {
            let policy = s.policy;
            blocking(move || seed_caption_or_unavailable(&image, c.as_ref(), &policy)).await?
        }
        (None, None) => SeedCaption::unavailable(),
    };
    let state = s.commit(key.as_deref(), fp, Command::Task2Start { project_id: pid, image_id, seed })?;
    // The stored state holds the seed's model version; the response is the
    // rater view instead.
    ok(json!({"version": state["version"], "status": state["status"]}))
}

async fn task2_next(State(s): State<Arc<AppState>>, Path((pid, image_id)): Path<(String, String)>) -> ApiResult {
    s.read(&pid, |p| {
        let t = p.task2.get(&image_id).ok_or_else(|| Error::NotFound(format!("task 2 for {image_id:?}")))?;
        ok(t.next_view(s.seed)?)
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RoundRequest {
    #[serde(default)]
    expected_version: Option<u64>,
    annotator: String,
    text: String,
    elapsed_seconds: f64,
}

async fn task2_round(
    State(s): State<Arc<AppState>>,
    Path((pid, image_id)): Path<(String, String)>,
    headers: HeaderMap,
    Body(req, raw): Body<RoundRequest>,
) -> ApiResult {
    let fp = fingerprint(format!("POST /projects/{pid}/task2/{image_id}/rounds"), &raw);
    let command = Command::Task2Submit {
        project_id: pid,
        image_id,
        expected_version: req.expected_version,
        annotator: req.annotator,
        text: req.text,
        elapsed_seconds: req.elapsed_seconds,
        at: Utc::now(),
    };
    ok(s.commit(idempotency_key(&headers).as_deref(), fp, command)?)
}

// ---------------------------------------------------------------------------
// Side by side

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SxsCreate {
    item_id: String,
    image_id: String,
    source_1: SxSSource,
    source_2: SxSSource,
}

async fn sxs_create(
    State(s): State<Arc<AppState>>,
    Path(pid): Path<String>,
    headers: HeaderMap,
    Body(req, raw): Body<SxsCreate>,
) -> ApiResult {
    let fp = fingerprint(format!("POST /projects/{pid}/sxs/items"), &raw);
    let item = create_sxs(&req.item_id, &req.image_id, req.source_1, req.source_2, s.seed)?;
    let value = s.commit(idempotency_key(&headers).as_deref(), fp, Command::SxsAdd { project_id: pid, item })?;
    created(value)
}

async fn sxs_presented(State(s): State<Arc<AppState>>, Path((pid, id)): Path<(String, String)>) -> ApiResult {
    s.read(&pid, |p| {
        let item = p.sxs.get(&id).ok_or_else(|| Error::NotFound(format!("sxs item {id:?}")))?;
        ok(item.presented())
    })
}

// ---------------------------------------------------------------------------
// Screens, rendered from the same projections as the JSON routes

#[derive(Deserialize)]
struct UiQuery {
    #[serde(default)]
    annotator: String,
    #[serde(default = "canvas_side")]
    width: f64,
    #[serde(default = "canvas_side")]
    height: f64,
}

fn canvas_side() -> f64 {
    1000.0
}

fn html(body: String) -> Result<Response, ApiError> {
    Ok(([(header::CONTENT_TYPE, "text/html; charset=utf-8")], body).into_response())
}

async fn ui_task1(
    State(s): State<Arc<AppState>>,
    Path((pid, image_id)): Path<(String, String)>,
    Query(q): Query<UiQuery>,
) -> ApiResult {
    let page = s.read(&pid, |p| {
        let t = p.task1.get(&image_id).ok_or_else(|| Error::NotFound(format!("task 1 for {image_id:?}")))?;
        let canvas = ui::Canvas { width: q.width, height: q.height };
        Ok(ui::Task1Editor::new(&pid, &q.annotator, t, canvas).render())
    })?;
    html(page)
}

async fn ui_task2(
    State(s): State<Arc<AppState>>,
    Path((pid, image_id)): Path<(String, String)>,
    Query(q): Query<UiQuery>,
) -> ApiResult {
    let page = s.read(&pid, |p| {
        let t = p.task2.get(&image_id).ok_or_else(|| Error::NotFound(format!("task 2 for {image_id:?}")))?;
        Ok(ui::Task2Editor::new(&pid, &q.annotator, t.next_view(s.seed)?).render())
    })?;
    html(page)
}

async fn ui_sxs(State(s): State<Arc<AppState>>, Path((pid, id)): Path<(String, String)>) -> ApiResult {
    let page = s.read(&pid, |p| {
        let item = p.sxs.get(&id).ok_or_else(|| Error::NotFound(format!("sxs item {id:?}")))?;
        Ok(ui::SxsRater::new(&pid, item.presented()).render())
    })?;
    html(page)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JudgeRequest {
    #[serde(default)]
    expected_version: Option<u64>,
    /// In the presented frame: negative favors text A.
    rating: FiveMetricRating,
    justification: String,
}

async fn sxs_judge(
    State(s): State<Arc<AppState>>,
    Path((pid, id)): Path<(String, String)>,
    headers: HeaderMap,
    Body(req, raw): Body<JudgeRequest>,
) -> ApiResult {
    let fp = fingerprint(format!("POST /projects/{pid}/sxs/items/{id}/judgment"), &raw);
    let command = Command::SxsJudge {
        project_id: pid,
        item_id: id,
        expected_version: req.expected_version,
        rating: req.rating,
        justification: req.justification,
    };
    ok(s.commit(idempotency_key(&headers).as_deref(), fp, command)?)
}

// ---------------------------------------------------------------------------
// Model descriptions, subsets, active learning

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDescription {
    image_id: String,
    model: String,
    text: String,
}

async fn model_description(
    State(s): State<Arc<AppState>>,
    Path(pid): Path<String>,
    headers: HeaderMap,
    Body(req, raw): Body<ModelDescription>,
) -> ApiResult {
    let fp = fingerprint(format!("POST /projects/{pid}/model-descriptions"), &raw);
    let command = Command::AddModelDescription { project_id: pid, image_id: req.image_id, model: req.model, text: req.text };
    ok(s.commit(idempotency_key(&headers).as_deref(), fp, command)?)
}

async fn define_subset(
    State(s): State<Arc<AppState>>,
    Path(pid): Path<String>,
    headers: HeaderMap,
    Body(subset, raw): Body<Subset>,
) -> ApiResult {
    let fp = fingerprint(format!("POST /projects/{pid}/subsets"), &raw);
    ok(s.commit(idempotency_key(&headers).as_deref(), fp, Command::DefineSubset { project_id: pid, subset })?)
}

async fn active_learning_events(State(s): State<Arc<AppState>>, Path(pid): Path<String>) -> ApiResult {
    s.read(&pid, |p| ok(json!({"events": p.completions.pending_events()})))
}

async fn active_learning_ack(
    State(s): State<Arc<AppState>>,
    Path((pid, batch)): Path<(String, u64)>,
    headers: HeaderMap,
) -> ApiResult {
    let fp = fingerprint(format!("POST /projects/{pid}/active-learning/{batch}/ack"), &Value::Null);
    let command = Command::AcknowledgeBatch { project_id: pid, batch_id: batch };
    ok(s.commit(idempotency_key(&headers).as_deref(), fp, command)?)
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct CorpusQuery {
    /// Use this model's descriptions instead of the final human ones.
    #[serde(default)]
    model: Option<String>,
}

async fn report_corpus_stats(
    State(s): State<Arc<AppState>>,
    Path(pid): Path<String>,
    Query(q): Query<CorpusQuery>,
) -> ApiResult {
    s.read(&pid, |p| {
        let docs = p.corpus(q.model.as_deref());
        let row = corpus_stats(&docs, &LexiconTagger)?;
        let name = q.model.as_deref().unwrap_or(&p.name);
        ok(json!({"dataset": name, "row": row, "table": render_corpus_table(&[(name, row)])}))
    })
}

async fn report_readability(
    State(s): State<Arc<AppState>>,
    Path(pid): Path<String>,
    Query(q): Query<CorpusQuery>,
) -> ApiResult {
    s.read(&pid, |p| {
        let docs = p.corpus(q.model.as_deref());
        let scores = corpus_readability(&docs)?;
        let name = q.model.as_deref().unwrap_or(&p.name);
        ok(json!({"dataset": name, "n": docs.len(), "scores": scores, "table": render_readability_table(&[(name, scores)])}))
    })
}

async fn report_sxs(State(s): State<Arc<AppState>>, Path(pid): Path<String>) -> ApiResult {
    s.read(&pid, |p| {
        let mut groups: BTreeMap<(String, String), Vec<SxSItem>> = BTreeMap::new();
        for item in p.sxs.values().filter(|i| i.is_rated()) {
            groups
                .entry((item.source_1.origin.clone(), item.source_2.origin.clone()))
                .or_default()
                .push(item.clone());
        }
        let mut out = Vec::new();
        for ((left, right), items) in groups {
            let agg = aggregate_sxs(&items)?;
            let deltas: BTreeMap<&str, i64> = Metric::ALL.iter().map(|&m| (m.name(), sxs_delta(&agg, m))).collect();
            out.push(json!({
                "source_1": left,
                "source_2": right,
                "aggregate": agg,
                "deltas": deltas,
                "table": render_sxs_report(&left, &right, &agg),
            }));
        }
        ok(json!({"comparisons": out}))
    })
}

async fn report_agreement(State(s): State<Arc<AppState>>, Path(pid): Path<String>) -> ApiResult {
    s.read(&pid, |p| ok(json!({"rounds": agreement_curves(p.task2.values())})))
}

// ---------------------------------------------------------------------------
// Export

async fn export_benchmark_route(State(s): State<Arc<AppState>>, Path(pid): Path<String>) -> ApiResult {
    // One lock for the whole build: a consistent snapshot.
    s.read(&pid, |p| {
        let bundle = build_benchmark(p);
        ok(json!({"manifest": bundle.manifest, "files": render_bundle(&bundle)?}))
    })
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct TrainingQuery {
    /// Comma separated task tags; all seven when absent.
    #[serde(default)]
    tasks: Option<String>,
    /// Comma separated corruption fractions.
    #[serde(default)]
    fractions: Option<String>,
}

fn split_list(s: &Option<String>) -> Vec<&str> {
    s.as_deref()
        .map(|s| s.split(',').map(str::trim).filter(|t| !t.is_empty()).collect())
        .unwrap_or_default()
}

async fn export_training_route(
    State(s): State<Arc<AppState>>,
    Path(pid): Path<String>,
    Query(q): Query<TrainingQuery>,
) -> ApiResult {
    let tasks = match split_list(&q.tasks) {
        t if t.is_empty() => TaskTag::ALL.to_vec(),
        t => t.into_iter().map(TaskTag::parse).collect::<Result<Vec<_>, _>>()?,
    };
    let fractions = split_list(&q.fractions)
        .into_iter()
        .map(|f| f.parse::<f64>().map_err(|_| ApiError::BadRequest(format!("bad fraction {f:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let body = s.read(&pid, |p| Ok(to_jsonl(&export_training_mixture(p, &tasks, &fractions)?)?))?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response())
}

// ---------------------------------------------------------------------------
// Evaluation

fn yes() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReasoningRequest {
    instances: Vec<ReasoningInstance>,
    #[serde(default = "yes")]
    use_description: bool,
    /// Use the built-in deterministic model instead of the endpoint.
    #[serde(default)]
    mock: bool,
}

async fn eval_reasoning(State(s): State<Arc<AppState>>, Body(req, _): Body<ReasoningRequest>) -> ApiResult {
    let model: Arc<dyn LanguageModel> = if req.mock {
        Arc::new(OverlapModel)
    } else {
        s.clients
            .language_model
            .clone()
            .ok_or_else(|| ApiError::Unavailable("no language model endpoint configured".into()))?
    };
    let policy = s.policy;
    let run = blocking(move || run_reasoning(&req.instances, model.as_ref(), &policy, req.use_description)).await??;
    ok(run)
}

fn five() -> usize {
    5
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct T2iRequest {
    inputs: Vec<T2iInput>,
    #[serde(default = "five")]
    max_chunks: usize,
}

async fn eval_t2i(State(s): State<Arc<AppState>>, Body(req, _): Body<T2iRequest>) -> ApiResult {
    let (Some(generator), Some(embedder)) = (s.clients.generator.clone(), s.clients.embedder.clone()) else {
        return Err(ApiError::Unavailable("image generator and embedder endpoints are required".into()));
    };
    let policy = s.policy;
    let samples =
        blocking(move || run_t2i(&req.inputs, generator.as_ref(), embedder.as_ref(), &policy, req.max_chunks)).await??;
    let means: Vec<Value> = similarity_by_chunk(&samples)
        .into_iter()
        .map(|((system, chunk), mean)| json!({"system": system, "chunk": chunk, "mean_similarity": mean}))
        .collect();
    ok(json!({"samples": samples, "similarity": means}))
}

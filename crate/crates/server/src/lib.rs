//! HTTP/JSON service over clarification-dialogue sessions.
//!
//! Every session lives behind its own async mutex, so commands against one
//! session run one at a time while other sessions proceed independently.
//! Each committed change is written to the data directory before the
//! response goes out. Training runs on a plain thread and publishes its
//! progress through a watch channel.

mod error;
mod jobs;
mod store;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use stl_dialogue::dialogue::{Answer, AnswerPayload, DialogueError, DialogueSession, SessionConfig};
use stl_dialogue::nl::Frontend;
use stl_dialogue::rl::{Hyperparams, Projection, TaskMonitor};
use stl_dialogue::stl::parse_formula_with;
use stl_dialogue::world::{
    record, states_to_trace, Action, Demonstration, GridSpec, StartSpec, Step, WorldState, WorldVocabulary, ATOMS,
};
use tokio::sync::{watch, Mutex};

pub use error::ApiError;
pub use store::{record_json, Artifacts, JobState, RolloutView, SessionRecord, Store, StoreError, TrainStatus};

/// Directory for session documents. Unset means sessions live in memory.
pub const DATA_DIR_ENV: &str = "STL_DIALOGUE_DATA";

pub(crate) struct Job {
    cancel: Arc<AtomicBool>,
    status: watch::Receiver<TrainStatus>,
}

pub struct Entry {
    record: SessionRecord,
    job: Option<Job>,
}

impl Entry {
    pub fn record(&self) -> &SessionRecord {
        &self.record
    }
}

pub struct Service {
    store: Store,
    grid: GridSpec,
    frontend: Frontend,
    sessions: RwLock<HashMap<String, Arc<Mutex<Entry>>>>,
}

impl Service {
    /// Loads every session already in the store. Jobs that were running
    /// when the previous process stopped are marked failed.
    pub fn new(store: Store, grid: GridSpec, frontend: Frontend) -> Result<Arc<Self>, StoreError> {
        let mut sessions = HashMap::new();
        for mut rec in store.load_all()? {
            if rec.training.state == JobState::Running {
                rec.training.state = JobState::Failed;
                rec.training.error = Some("interrupted by a restart".into());
                rec.version += 1;
                store.save(&rec)?;
            }
            sessions.insert(rec.id.clone(), Arc::new(Mutex::new(Entry { record: rec, job: None })));
        }
        Ok(Arc::new(Service { store, grid, frontend, sessions: RwLock::new(sessions) }))
    }

    /// Default grid and language models, with the store taken from
    /// [`DATA_DIR_ENV`].
    pub fn from_env() -> Result<Arc<Self>, StoreError> {
        let store = match std::env::var_os(DATA_DIR_ENV) {
            Some(dir) => Store::open(PathBuf::from(dir))?,
            None => Store::in_memory(),
        };
        Service::new(store, GridSpec::default(), Frontend::default())
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().expect("session map").keys().cloned().collect();
        ids.sort();
        ids
    }

    fn entry(&self, id: &str) -> Result<Arc<Mutex<Entry>>, ApiError> {
        self.sessions.read().expect("session map").get(id).cloned().ok_or_else(|| ApiError::not_found(id))
    }

    /// Applies `f` to a copy of the record and persists it; the in-memory
    /// record only changes if both succeed.
    fn commit<T>(
        &self,
        e: &mut Entry,
        f: impl FnOnce(&mut SessionRecord) -> Result<T, ApiError>,
    ) -> Result<T, ApiError> {
        let mut next = e.record.clone();
        let out = f(&mut next)?;
        next.version += 1;
        self.store.save(&next)?;
        e.record = next;
        Ok(out)
    }
}

pub fn app(service: Arc<Service>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/nl", post(submit_nl))
        .route("/sessions/{id}/questions", get(questions))
        .route("/sessions/{id}/answers", post(answer))
        .route("/sessions/{id}/demos", post(add_demo))
        .route("/sessions/{id}/candidates", get(candidates))
        .route("/sessions/{id}/formula", get(formula))
        .route("/sessions/{id}/train", post(start_training).delete(cancel_training))
        .route("/sessions/{id}/train/status", get(training_status))
        .route("/sessions/{id}/policy", get(policy))
        .route("/world", get(world))
        .with_state(service)
}

type Reply = Result<(StatusCode, Json<Value>), ApiError>;

fn ok(v: Value) -> Reply {
    Ok((StatusCode::OK, Json(v)))
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("request body: {e}")))
}

/// Like [`parse`], but an empty body means the default.
fn parse_or_default<T: DeserializeOwned + Default>(body: &Bytes) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        Ok(T::default())
    } else {
        parse(body)
    }
}

fn session_view(rec: &SessionRecord) -> Value {
    let s = &rec.session;
    json!({
        "id": rec.id,
        "version": rec.version,
        "stage": s.stage,
        "task": s.task_nl,
        "pending": s.pending_questions(),
        "selected": s.selected.as_ref().map(|f| f.to_string()),
        "note": s.note,
        "metrics": s.metrics,
    })
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct CreateRequest {
    #[serde(default)]
    config: SessionConfig,
    ground_truth: Option<String>,
}

async fn create_session(State(svc): State<Arc<Service>>, body: Bytes) -> Reply {
    let req: CreateRequest = parse_or_default(&body)?;
    let mut session = DialogueSession::new(svc.grid.clone(), req.config);
    if let Some(gt) = &req.ground_truth {
        let f = parse_formula_with(gt, &WorldVocabulary)?;
        if !f.is_ground() {
            return Err(DialogueError::NotGround(f.to_string()).into());
        }
        session = session.with_ground_truth(f);
    }
    let rec = SessionRecord {
        id: uuid::Uuid::new_v4().simple().to_string(),
        version: 1,
        session,
        training: TrainStatus::default(),
        artifacts: Artifacts::default(),
    };
    svc.store.save(&rec)?;
    let view = session_view(&rec);
    svc.sessions.write().expect("session map").insert(rec.id.clone(), Arc::new(Mutex::new(Entry { record: rec, job: None })));
    Ok((StatusCode::CREATED, Json(view)))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NlRequest {
    text: String,
}

async fn submit_nl(State(svc): State<Arc<Service>>, Path(id): Path<String>, body: Bytes) -> Reply {
    let req: NlRequest = parse(&body)?;
    let entry = svc.entry(&id)?;
    let mut e = entry.lock().await;
    svc.commit(&mut e, |rec| Ok(rec.session.submit_task(&req.text, &svc.frontend)?))?;
    ok(session_view(&e.record))
}

async fn questions(State(svc): State<Arc<Service>>, Path(id): Path<String>) -> Reply {
    let entry = svc.entry(&id)?;
    let e = entry.lock().await;
    let s = &e.record.session;
    ok(json!({ "stage": s.stage, "questions": s.pending_questions() }))
}

/// An answer either as a typed payload or as free text interpreted against
/// the question it answers.
#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct AnswerRequest {
    question_id: usize,
    payload: Option<AnswerPayload>,
    text: Option<String>,
}

async fn answer(State(svc): State<Arc<Service>>, Path(id): Path<String>, body: Bytes) -> Reply {
    let req: AnswerRequest = parse(&body)?;
    let entry = svc.entry(&id)?;
    let mut e = entry.lock().await;
    let payload = match (req.payload, req.text) {
        (Some(p), None) => p,
        (None, Some(text)) => {
            let q = e
                .record
                .session
                .pending_questions()
                .iter()
                .find(|q| q.id == req.question_id)
                .ok_or(DialogueError::NotPending(req.question_id))?;
            AnswerPayload::parse_for(&q.kind, &text)
                .ok_or_else(|| ApiError::unprocessable(format!("cannot read `{text}` as an answer to question {}", q.id)))?
        }
        _ => return Err(ApiError::bad_request("give exactly one of `payload` and `text`")),
    };
    let answer = Answer { question_id: req.question_id, payload };
    svc.commit(&mut e, |rec| Ok(rec.session.answer(answer, &svc.frontend)?))?;
    ok(session_view(&e.record))
}

fn yes() -> bool {
    true
}

/// A demonstration as actions replayed from a start state, or as recorded
/// state-action steps that must agree with the dynamics.
#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct DemoRequest {
    #[serde(default = "yes")]
    positive: bool,
    #[serde(default)]
    start: StartSpec,
    actions: Option<Vec<Action>>,
    steps: Option<Vec<Step>>,
}

async fn add_demo(State(svc): State<Arc<Service>>, Path(id): Path<String>, body: Bytes) -> Reply {
    let req: DemoRequest = parse(&body)?;
    let entry = svc.entry(&id)?;
    let mut e = entry.lock().await;
    let g = &e.record.session.grid;
    let demo = match (req.actions, req.steps) {
        (Some(actions), None) => record(g, &req.start.apply(g)?, &actions)?,
        (None, Some(steps)) => Demonstration { steps },
        _ => return Err(ApiError::bad_request("give exactly one of `actions` and `steps`")),
    };
    let trace: Vec<_> = states_to_trace(&demo.states(), g).records.iter().map(record_json).collect();
    let actions = demo.actions();
    let index = svc.commit(&mut e, |rec| {
        rec.session.add_demo(demo, req.positive)?;
        let s = &rec.session;
        Ok(if req.positive { s.demos_positive.len() } else { s.demos_negative.len() } - 1)
    })?;
    ok(json!({
        "index": index,
        "positive": req.positive,
        "stage": e.record.session.stage,
        "actions": actions,
        "trace": trace,
    }))
}

async fn candidates(State(svc): State<Arc<Service>>, Path(id): Path<String>) -> Reply {
    let entry = svc.entry(&id)?;
    let e = entry.lock().await;
    let s = &e.record.session;
    ok(json!({
        "stage": s.stage,
        "enumeratedFormulas": s.metrics.enumerated_formulas,
        "candidates": s.candidates.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        "pruned": s.pruned.iter().map(|p| p.template.to_string()).collect::<Vec<_>>(),
    }))
}

async fn formula(State(svc): State<Arc<Service>>, Path(id): Path<String>) -> Reply {
    let entry = svc.entry(&id)?;
    let e = entry.lock().await;
    let s = &e.record.session;
    ok(json!({
        "stage": s.stage,
        "formula": s.selected.as_ref().map(|f| f.to_string()),
        "note": s.note,
        "metrics": s.metrics,
        "transcript": s.transcript,
    }))
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct TrainRequest {
    #[serde(default)]
    hyperparams: Hyperparams,
    /// Train on this formula instead of the selected one.
    formula: Option<String>,
    #[serde(default)]
    start: StartSpec,
}

fn current_status(e: &Entry) -> TrainStatus {
    match &e.job {
        Some(job) => job.status.borrow().clone(),
        None => e.record.training.clone(),
    }
}

async fn start_training(State(svc): State<Arc<Service>>, Path(id): Path<String>, body: Bytes) -> Reply {
    let req: TrainRequest = parse_or_default(&body)?;
    let entry = svc.entry(&id)?;
    let mut e = entry.lock().await;
    if e.job.is_some() {
        return Err(ApiError::conflict("a training job is already running"));
    }
    let phi = match &req.formula {
        Some(text) => parse_formula_with(text, &WorldVocabulary)?,
        None => e.record.session.selected.clone().ok_or_else(|| ApiError::conflict("no formula has been selected"))?,
    };
    let g = e.record.session.grid.clone();
    req.hyperparams.validate()?;
    TaskMonitor::new(&phi, &g)?;
    Projection::for_formula(&phi, &g)?;
    let s0: WorldState = req.start.apply(&g)?;
    let status = TrainStatus {
        state: JobState::Running,
        formula: Some(phi.to_string()),
        episodes: req.hyperparams.episodes,
        ..TrainStatus::default()
    };
    svc.commit(&mut e, |rec| {
        rec.training = status.clone();
        Ok(())
    })?;
    let job = jobs::spawn(svc.clone(), entry.clone(), g, s0, phi, req.hyperparams, status.clone());
    e.job = Some(job);
    Ok((StatusCode::ACCEPTED, Json(json!(status))))
}

async fn training_status(State(svc): State<Arc<Service>>, Path(id): Path<String>) -> Reply {
    let entry = svc.entry(&id)?;
    let e = entry.lock().await;
    ok(json!(current_status(&e)))
}

async fn cancel_training(State(svc): State<Arc<Service>>, Path(id): Path<String>) -> Reply {
    let entry = svc.entry(&id)?;
    let e = entry.lock().await;
    let job = e.job.as_ref().ok_or_else(|| ApiError::conflict("no training job is running"))?;
    job.cancel.store(true, Ordering::Relaxed);
    Ok((StatusCode::ACCEPTED, Json(json!(current_status(&e)))))
}

async fn policy(State(svc): State<Arc<Service>>, Path(id): Path<String>) -> Reply {
    let entry = svc.entry(&id)?;
    let e = entry.lock().await;
    if e.job.is_some() {
        return Err(ApiError::conflict("training is still running"));
    }
    let a = &e.record.artifacts;
    let policy = a.policy.as_ref().ok_or_else(|| ApiError::conflict("no policy has been trained"))?;
    ok(json!({ "formula": a.formula, "policy": policy, "rollout": a.rollout }))
}

#[derive(Serialize)]
struct AtomInfo {
    name: &'static str,
    params: Vec<&'static str>,
}

async fn world(State(svc): State<Arc<Service>>) -> Reply {
    let g = &svc.grid;
    let atoms: Vec<AtomInfo> =
        ATOMS.iter().map(|a| AtomInfo { name: a.name, params: a.params.iter().map(|p| p.0).collect() }).collect();
    ok(json!({
        "grid": g,
        "initial": WorldState::initial(g),
        "actions": Action::ALL,
        "atoms": atoms,
        "stateSpaceSize": g.state_space_size().to_string(),
    }))
}

use std::collections::VecDeque;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stl_dialogue::dialogue::DialogueSession;
use stl_dialogue::rl::{CurvePoint, Rollout};
use stl_dialogue::stl::Record;
use stl_dialogue::world::{states_to_trace, Action, GridSpec, WorldState};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("session store {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("session file {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum JobState {
    Idle,
    Running,
    Finished,
    Cancelled,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrainStatus {
    pub state: JobState,
    pub formula: Option<String>,
    pub episode: usize,
    pub episodes: usize,
    pub goals: usize,
    pub curve_tail: VecDeque<CurvePoint>,
    pub error: Option<String>,
}

impl Default for TrainStatus {
    fn default() -> Self {
        TrainStatus {
            state: JobState::Idle,
            formula: None,
            episode: 0,
            episodes: 0,
            goals: 0,
            curve_tail: VecDeque::new(),
            error: None,
        }
    }
}

/// JSON object for one trace record: facts as booleans, signals as numbers.
pub fn record_json(r: &Record) -> serde_json::Map<String, serde_json::Value> {
    let mut obj = serde_json::Map::new();
    for (k, v) in &r.facts {
        obj.insert(k.clone(), (*v).into());
    }
    for (k, v) in &r.signals {
        obj.insert(k.clone(), (*v).into());
    }
    obj
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RolloutView {
    pub satisfied: bool,
    pub robustness: f64,
    pub actions: Vec<Action>,
    pub states: Vec<WorldState>,
    pub trace: Vec<serde_json::Map<String, serde_json::Value>>,
}

impl RolloutView {
    pub fn new(r: &Rollout, g: &GridSpec) -> Self {
        RolloutView {
            satisfied: r.satisfied,
            robustness: r.robustness,
            actions: r.actions.clone(),
            states: r.states.clone(),
            trace: states_to_trace(&r.states, g).records.iter().map(record_json).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Artifacts {
    pub formula: Option<String>,
    pub policy: Option<String>,
    pub rollout: Option<RolloutView>,
}

/// Everything persisted for one session. `version` grows by one with every
/// committed change.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionRecord {
    pub id: String,
    pub version: u64,
    pub session: DialogueSession,
    pub training: TrainStatus,
    pub artifacts: Artifacts,
}

/// One JSON document per session in a directory, or nothing at all when
/// the service runs without a data directory.
#[derive(Debug, Clone, Default)]
pub struct Store {
    dir: Option<PathBuf>,
}

impl Store {
    pub fn in_memory() -> Self {
        Store { dir: None }
    }

    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|source| StoreError::Io { path: dir.clone(), source })?;
        Ok(Store { dir: Some(dir) })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn path(dir: &Path, id: &str) -> PathBuf {
        dir.join(format!("{id}.json"))
    }

    /// Writes to a temporary file, syncs it and renames it over the old
    /// document, so a reader sees either the previous or the new version.
    pub fn save(&self, rec: &SessionRecord) -> Result<(), StoreError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let path = Store::path(dir, &rec.id);
        let tmp = dir.join(format!("{}.json.tmp", rec.id));
        let io = |source| StoreError::Io { path: path.clone(), source };
        let text = serde_json::to_vec_pretty(rec).map_err(|source| StoreError::Json { path: path.clone(), source })?;
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(&text).map_err(io)?;
        f.sync_all().map_err(io)?;
        fs::rename(&tmp, &path).map_err(io)?;
        Ok(())
    }

    /// All stored sessions. Leftover temporary files are discarded.
    pub fn load_all(&self) -> Result<Vec<SessionRecord>, StoreError> {
        let Some(dir) = &self.dir else { return Ok(Vec::new()) };
        let io = |source| StoreError::Io { path: dir.clone(), source };
        let mut out = Vec::new();
        for entry in fs::read_dir(dir).map_err(io)? {
            let path = entry.map_err(io)?.path();
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            if name.ends_with(".json.tmp") {
                let _ = fs::remove_file(&path);
                continue;
            }
            if !name.ends_with(".json") {
                continue;
            }
            let text = fs::read_to_string(&path).map_err(|source| StoreError::Io { path: path.clone(), source })?;
            let rec: SessionRecord =
                serde_json::from_str(&text).map_err(|source| StoreError::Json { path: path.clone(), source })?;
            out.push(rec);
        }
        out.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(out)
    }
}

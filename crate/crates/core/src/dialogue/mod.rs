//! Clarification dialogue: question planning, answers from a person or an
//! oracle, valuation and formula selection against demonstrations.

pub mod oracle;
pub mod pipeline;
pub mod question;
pub mod select;
pub mod session;

use thiserror::Error;

use crate::nl::NlError;
use crate::synthesis::SynthesisError;
use crate::world::WorldError;

pub use oracle::{oracle_answer, Answerer, OracleUser, ScriptedAnswerer};
pub use pipeline::{load_demos, run_pipeline, DemoEntry, LabeledDemo};
pub use question::{Answer, AnswerPayload, Exchange, Question, QuestionKind};
pub use select::{formulas_match, normalize, select_best_stl};
pub use session::{DialogueSession, Metrics, SessionConfig, Stage};

#[derive(Debug, Error)]
pub enum DialogueError {
    #[error(transparent)]
    Nl(#[from] NlError),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("question {0} is not pending")]
    NotPending(usize),
    #[error("answer `{payload}` does not fit {kind} question {id}")]
    PayloadMismatch { id: usize, kind: &'static str, payload: String },
    #[error("cannot {op} while the session is {stage:?}")]
    BadStage { op: &'static str, stage: Stage },
    #[error("ground truth must be ground: {0}")]
    NotGround(String),
    #[error("atom `{0}` does not occur in the ground truth")]
    AtomAbsent(String),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("unknown item `{0}`")]
    UnknownItem(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("session file: {0}")]
    Json(#[from] serde_json::Error),
}

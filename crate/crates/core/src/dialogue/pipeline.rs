use serde::{Deserialize, Serialize};

use crate::nl::Frontend;
use crate::stl::Formula;
use crate::world::{record, Action, Demonstration, GridSpec, StartSpec, WorldError};

use super::oracle::Answerer;
use super::question::Answer;
use super::session::{DialogueSession, SessionConfig, Stage};
use super::DialogueError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledDemo {
    pub demo: Demonstration,
    pub positive: bool,
}

fn yes() -> bool {
    true
}

/// One demonstration as written in demo files: start overrides, actions and
/// a label (positive unless stated).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DemoEntry {
    #[serde(default = "yes")]
    pub positive: bool,
    #[serde(default)]
    pub start: StartSpec,
    pub actions: Vec<Action>,
}

impl DemoEntry {
    pub fn record(&self, g: &GridSpec) -> Result<LabeledDemo, WorldError> {
        let demo = record(g, &self.start.apply(g)?, &self.actions)?;
        Ok(LabeledDemo { demo, positive: self.positive })
    }
}

#[derive(Debug, Deserialize)]
struct DemoFile {
    demo: Vec<DemoEntry>,
}

/// Reads a demo file: either TOML with `[[demo]]` tables, or a JSONL
/// state-action recording (taken as one positive demonstration).
pub fn load_demos(text: &str, g: &GridSpec) -> Result<Vec<LabeledDemo>, DialogueError> {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#'));
    if first.is_some_and(|l| l.starts_with('{')) {
        let demo = Demonstration::from_jsonl(text)?;
        demo.validate(g)?;
        return Ok(vec![LabeledDemo { demo, positive: true }]);
    }
    let file: DemoFile =
        toml::from_str(text).map_err(|e| DialogueError::World(WorldError::DemoFile { line: 0, msg: e.to_string() }))?;
    Ok(file.demo.iter().map(|d| d.record(g)).collect::<Result<_, _>>()?)
}

/// Drives one session to completion: demos first, then the instruction,
/// then questions answered one at a time. Stops early (stage `Clarifying`)
/// if the answerer has no answer.
pub fn run_pipeline(
    task_nl: &str,
    demos: &[LabeledDemo],
    answerer: &mut dyn Answerer,
    fe: &Frontend,
    grid: &GridSpec,
    config: SessionConfig,
) -> Result<(Option<Formula>, DialogueSession), DialogueError> {
    let mut session = DialogueSession::new(grid.clone(), config);
    if let Some(gt) = answerer.ground_truth() {
        session.ground_truth = Some(gt.clone());
    }
    for d in demos {
        session.add_demo(d.demo.clone(), d.positive)?;
    }
    session.submit_task(task_nl, fe)?;
    while session.stage == Stage::Clarifying {
        let q = session.pending[0].clone();
        match answerer.answer(&q)? {
            Some(payload) => session.answer(Answer { question_id: q.id, payload }, fe)?,
            None => break,
        }
    }
    Ok((session.selected.clone(), session))
}

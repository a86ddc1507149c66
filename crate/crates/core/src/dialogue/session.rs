use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::nl::{Analysis, AtomPrediction, Frontend, NlError, ParamTarget};
use crate::stl::{Arg, Atom, Formula};
use crate::synthesis::{
    arg_slot_kind, compute_length_bounds, enumerate_pstl, prune_causal, CausalDependency, Literal, Op, PrunedTemplate,
    SlotKind, SlotValue, SynthesisBounds, Template, Valuation, DEFAULT_PROBE_HORIZON,
};
use crate::world::{atom_spec, prefixes_as_negatives, slotted_atom, Demonstration, GridSpec};

use super::question::{Answer, AnswerPayload, Exchange, Question, QuestionKind};
use super::select::{formulas_match, select_best_stl};
use super::DialogueError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Stage {
    AwaitingTask,
    Clarifying,
    AwaitingDemos,
    Selected,
    NoFormula,
}

impl Stage {
    pub fn is_terminal(self) -> bool {
        matches!(self, Stage::Selected | Stage::NoFormula)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SessionConfig {
    /// Phrases whose atom confidence is at or below this get a paraphrase
    /// question.
    pub epsilon: f64,
    pub probe_horizon: u32,
    /// Treat proper prefixes of positive demos as negatives (skipped when
    /// the task has an `always` operator).
    pub prefix_negatives: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig { epsilon: 0.3, probe_horizon: DEFAULT_PROBE_HORIZON, prefix_negatives: true }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Metrics {
    pub enumerated_formulas: Option<usize>,
    pub user_interactions: usize,
    pub runtime_seconds: f64,
    pub success: Option<bool>,
}

/// One clarification dialogue: the instruction, what was predicted from it,
/// the candidate templates, answers so far, demonstrations and the result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DialogueSession {
    pub config: SessionConfig,
    pub grid: GridSpec,
    pub task_nl: Option<String>,
    pub stage: Stage,
    pub analysis: Option<Analysis>,
    pub literals: Vec<Literal>,
    pub operators: Vec<Op>,
    pub bounds: Option<SynthesisBounds>,
    pub candidates: Vec<Template>,
    pub pruned: Vec<PrunedTemplate>,
    pub valuation: Valuation,
    pub demos_positive: Vec<Demonstration>,
    pub demos_negative: Vec<Demonstration>,
    pub pending: Vec<Question>,
    pub transcript: Vec<Exchange>,
    pub selected: Option<Formula>,
    pub ground_truth: Option<Formula>,
    pub metrics: Metrics,
    /// Why the session ended without a formula, when it did.
    pub note: Option<String>,
    next_id: usize,
    rephrased: bool,
    enumerated: bool,
}

fn literal_for(p: &AtomPrediction, index: usize) -> Option<Literal> {
    let spec = atom_spec(&p.atom)?;
    Some(Literal { atom: slotted_atom(spec, index), negated: p.negated })
}

fn atom_slots(a: &Atom) -> Vec<(usize, &str)> {
    match a {
        Atom::Prop { args, .. } => args
            .iter()
            .enumerate()
            .filter_map(|(i, arg)| match arg {
                Arg::Slot(s) => Some((i, s.as_str())),
                _ => None,
            })
            .collect(),
        Atom::Cmp { .. } => Vec::new(),
    }
}

impl DialogueSession {
    pub fn new(grid: GridSpec, config: SessionConfig) -> Self {
        DialogueSession {
            config,
            grid,
            task_nl: None,
            stage: Stage::AwaitingTask,
            analysis: None,
            literals: Vec::new(),
            operators: Vec::new(),
            bounds: None,
            candidates: Vec::new(),
            pruned: Vec::new(),
            valuation: Valuation::new(),
            demos_positive: Vec::new(),
            demos_negative: Vec::new(),
            pending: Vec::new(),
            transcript: Vec::new(),
            selected: None,
            ground_truth: None,
            metrics: Metrics::default(),
            note: None,
            next_id: 0,
            rephrased: false,
            enumerated: false,
        }
    }

    pub fn with_ground_truth(mut self, f: Formula) -> Self {
        self.ground_truth = Some(f);
        self
    }

    pub fn pending_questions(&self) -> &[Question] {
        &self.pending
    }

    #[cfg(not(target_arch = "wasm32"))]
    fn timed<T>(&mut self, f: impl FnOnce(&mut Self) -> Result<T, DialogueError>) -> Result<T, DialogueError> {
        let start = std::time::Instant::now();
        let r = f(self);
        self.metrics.runtime_seconds += start.elapsed().as_secs_f64();
        r
    }

    // No monotonic clock in the browser sandbox; runtime stays at zero.
    #[cfg(target_arch = "wasm32")]
    fn timed<T>(&mut self, f: impl FnOnce(&mut Self) -> Result<T, DialogueError>) -> Result<T, DialogueError> {
        f(self)
    }

    fn ask(&mut self, kind: QuestionKind, single_deadline: bool) {
        self.pending.push(Question::new(self.next_id, kind, single_deadline));
        self.next_id += 1;
    }

    fn finish(&mut self, selected: Option<Formula>, note: Option<String>) {
        self.pending.clear();
        self.stage = if selected.is_some() { Stage::Selected } else { Stage::NoFormula };
        self.note = if selected.is_some() { None } else { note };
        self.metrics.success = self.ground_truth.as_ref().map(|gt| selected.as_ref().is_some_and(|f| formulas_match(f, gt)));
        self.selected = selected;
    }

    /// Accepts the instruction and runs prediction and, unless a phrase needs
    /// rephrasing first, enumeration and question planning.
    pub fn submit_task(&mut self, nl: &str, fe: &Frontend) -> Result<(), DialogueError> {
        if self.stage != Stage::AwaitingTask {
            return Err(DialogueError::BadStage { op: "submit a task", stage: self.stage });
        }
        self.task_nl = Some(nl.to_string());
        self.timed(|s| s.start_task(nl, fe))
    }

    fn start_task(&mut self, nl: &str, fe: &Frontend) -> Result<(), DialogueError> {
        let analysis = match fe.analyze(nl) {
            Ok(a) => a,
            Err(NlError::EmptyInput | NlError::NoVerb) if !self.rephrased => {
                self.ask(QuestionKind::Paraphrase { phrase: nl.to_string(), index: None }, false);
                self.stage = Stage::Clarifying;
                return Ok(());
            }
            Err(e @ (NlError::EmptyInput | NlError::NoVerb)) => {
                self.finish(None, Some(e.to_string()));
                return Ok(());
            }
            Err(e) => return Err(e.into()),
        };
        self.literals.clear();
        self.valuation.clear();
        for (i, p) in analysis.phrases.iter().enumerate() {
            let lit = literal_for(&p.prediction, i).ok_or_else(|| DialogueError::UnknownAtom(p.prediction.atom.clone()))?;
            self.literals.push(lit);
            self.extract_atom_params(i, &[&p.phrase.text(), nl], fe);
        }
        self.operators = analysis.operators.clone();
        for (i, p) in analysis.phrases.iter().enumerate() {
            if p.prediction.confidence <= self.config.epsilon {
                self.ask(QuestionKind::Paraphrase { phrase: p.phrase.text(), index: Some(i) }, false);
            }
        }
        self.analysis = Some(analysis);
        if self.pending.is_empty() {
            self.synthesize(fe)
        } else {
            self.stage = Stage::Clarifying;
            Ok(())
        }
    }

    /// Binds the literal's argument slots from the first text that mentions
    /// them.
    fn extract_atom_params(&mut self, index: usize, texts: &[&str], fe: &Frontend) {
        let atom = self.literals[index].atom.clone();
        for text in texts {
            for (slot, v) in fe.params.extract_parameters(text, ParamTarget::Atom(&atom)) {
                self.valuation.entry(slot).or_insert(v);
            }
        }
    }

    fn synthesize(&mut self, fe: &Frontend) -> Result<(), DialogueError> {
        let a = self.analysis.as_ref().expect("analysis precedes synthesis");
        let bounds = match compute_length_bounds(a.phrases.len(), a.conjunctions.len(), a.adverbs.len()) {
            Ok(b) => b,
            Err(e) => {
                self.finish(None, Some(e.to_string()));
                return Ok(());
            }
        };
        self.bounds = Some(bounds);
        let templates = match enumerate_pstl(&self.literals, &self.operators, bounds) {
            Ok(t) => t,
            Err(e) => {
                self.finish(None, Some(e.to_string()));
                return Ok(());
            }
        };
        if !self.enumerated {
            self.metrics.enumerated_formulas = Some(templates.len());
            self.enumerated = true;
        }
        self.candidates = templates;
        self.plan(fe);
        self.advance()
    }

    fn max_temporal(&self) -> usize {
        self.candidates.iter().map(Template::temporal_count).max().unwrap_or(0)
    }

    fn plan(&mut self, fe: &Frontend) {
        if self.operators.contains(&Op::And) {
            for i in 0..self.literals.len() {
                for j in i + 1..self.literals.len() {
                    let (a, b) = (self.literals[i].atom.name().to_string(), self.literals[j].atom.name().to_string());
                    if a != b {
                        self.ask(QuestionKind::TaskOrder { before: a, after: b }, false);
                    }
                }
            }
        }
        let mut atom_qs = Vec::new();
        for lit in &self.literals {
            for (arg, slot) in atom_slots(&lit.atom) {
                // Item arguments wait for demonstrations, which can name them.
                if !self.valuation.contains_key(slot) && arg_slot_kind(slot) != SlotKind::ItemName {
                    atom_qs.push(QuestionKind::AtomParam { atom: lit.atom.name().to_string(), slot: slot.to_string(), arg });
                }
            }
        }
        for q in atom_qs {
            self.ask(q, false);
        }
        let text = self.task_nl.clone().unwrap_or_default();
        let max = self.max_temporal();
        for k in 1..=max {
            let slot = format!("t{k}");
            let found = fe.params.extract_parameters(&text, ParamTarget::Interval { slot: &slot, occurrence: k });
            if found.is_empty() {
                self.ask(QuestionKind::OpParam { occurrence: k, slot }, max == 1);
            } else {
                self.valuation.extend(found);
            }
        }
    }

    /// An item slot is inferred when exactly one item is picked up in every
    /// positive demonstration.
    fn infer_item(&self) -> Option<String> {
        let mut common: Option<Vec<String>> = None;
        for d in &self.demos_positive {
            let start = d.start()?;
            let picked: Vec<String> = self
                .grid
                .item_names()
                .filter(|n| !start.carries(n) && d.steps.iter().any(|s| s.state.carries(n)))
                .map(str::to_string)
                .collect();
            common = Some(match common {
                None => picked,
                Some(c) => c.into_iter().filter(|n| picked.contains(n)).collect(),
            });
        }
        match common {
            Some(c) if c.len() == 1 => c.into_iter().next(),
            _ => None,
        }
    }

    fn unresolved_item_slots(&self) -> Vec<(String, String, usize)> {
        let mut out = Vec::new();
        for lit in &self.literals {
            for (arg, slot) in atom_slots(&lit.atom) {
                if arg_slot_kind(slot) == SlotKind::ItemName && !self.valuation.contains_key(slot) {
                    out.push((lit.atom.name().to_string(), slot.to_string(), arg));
                }
            }
        }
        out
    }

    /// Moves the session forward once nothing is pending: resolve deferred
    /// item slots, wait for demos, or select.
    fn advance(&mut self) -> Result<(), DialogueError> {
        let max = self.max_temporal();
        self.pending.retain(|q| !matches!(q.kind, QuestionKind::OpParam { occurrence, .. } if occurrence > max));
        if self.candidates.is_empty() {
            self.finish(None, Some("no candidate formulas remain".into()));
            return Ok(());
        }
        if !self.pending.is_empty() {
            self.stage = Stage::Clarifying;
            return Ok(());
        }
        if self.demos_positive.is_empty() {
            self.stage = Stage::AwaitingDemos;
            return Ok(());
        }
        let items = self.unresolved_item_slots();
        if !items.is_empty() {
            let inferred = self.infer_item();
            for (atom, slot, arg) in items {
                match (&inferred, atom.as_str()) {
                    (Some(item), "itemOnRobot") => {
                        self.valuation.insert(slot, SlotValue::Name(item.clone()));
                    }
                    _ => self.ask(QuestionKind::AtomParam { atom, slot, arg }, false),
                }
            }
            if !self.pending.is_empty() {
                self.stage = Stage::Clarifying;
                return Ok(());
            }
        }
        self.select();
        Ok(())
    }

    fn select(&mut self) {
        let mut negatives = self.demos_negative.clone();
        if self.config.prefix_negatives && !self.operators.contains(&Op::Always) {
            for d in &self.demos_positive {
                negatives.extend(prefixes_as_negatives(d));
            }
        }
        let f = select_best_stl(&self.candidates, &self.valuation, &self.demos_positive, &negatives, &self.grid);
        self.finish(f, Some("no candidate satisfies the demonstrations".into()));
    }

    pub fn answer(&mut self, answer: Answer, fe: &Frontend) -> Result<(), DialogueError> {
        let pos = self
            .pending
            .iter()
            .position(|q| q.id == answer.question_id)
            .ok_or(DialogueError::NotPending(answer.question_id))?;
        if !answer.payload.fits(&self.pending[pos].kind) {
            return Err(DialogueError::PayloadMismatch {
                id: answer.question_id,
                kind: self.pending[pos].kind.label(),
                payload: answer.payload.to_string(),
            });
        }
        let q = self.pending.remove(pos);
        self.transcript.push(Exchange { question: q.clone(), answer: answer.payload.clone() });
        self.metrics.user_interactions = self.transcript.len();
        self.timed(|s| s.apply(q, answer.payload, fe))
    }

    fn apply(&mut self, q: Question, payload: AnswerPayload, fe: &Frontend) -> Result<(), DialogueError> {
        match (q.kind, payload) {
            (QuestionKind::Paraphrase { index: None, .. }, AnswerPayload::Phrase(text)) => {
                self.rephrased = true;
                return self.start_task(&text, fe);
            }
            (QuestionKind::Paraphrase { index: None, phrase }, _) => {
                self.finish(None, Some(format!("could not interpret \"{phrase}\"")));
                return Ok(());
            }
            (QuestionKind::Paraphrase { index: Some(i), .. }, AnswerPayload::Phrase(text)) => {
                let p = match fe.analyze(&text) {
                    Ok(a) if !a.phrases.is_empty() => a.phrases[0].prediction.clone(),
                    _ => fe.lexicon.predict_atom(&text),
                };
                if let Some(lit) = literal_for(&p, i) {
                    for (_, slot) in atom_slots(&self.literals[i].atom) {
                        self.valuation.remove(slot);
                    }
                    self.literals[i] = lit;
                    let nl = self.task_nl.clone().unwrap_or_default();
                    self.extract_atom_params(i, &[&text, &nl], fe);
                }
            }
            (QuestionKind::Paraphrase { .. }, _) => {}
            (QuestionKind::TaskOrder { before, after }, AnswerPayload::YesNo(true)) => {
                let report = prune_causal(&self.candidates, &CausalDependency::new(before, after), self.config.probe_horizon)?;
                self.candidates = report.survivors;
                self.pruned.extend(report.pruned);
            }
            (QuestionKind::TaskOrder { .. }, _) => {}
            (QuestionKind::AtomParam { slot, .. }, AnswerPayload::Value(v)) => {
                self.valuation.insert(slot, SlotValue::Int(v));
            }
            (QuestionKind::AtomParam { slot, .. }, AnswerPayload::Item(name)) => {
                let name = self
                    .grid
                    .item_names()
                    .find(|n| n.eq_ignore_ascii_case(&name))
                    .map(str::to_string)
                    .or_else(|| fe.params.item_for_alias(&name).map(str::to_string))
                    .ok_or(DialogueError::UnknownItem(name))?;
                self.valuation.insert(slot, SlotValue::Name(name));
            }
            (QuestionKind::AtomParam { .. }, _) => {
                self.finish(None, Some("an atom parameter was declined".into()));
                return Ok(());
            }
            (QuestionKind::OpParam { slot, .. }, AnswerPayload::Window { hi, .. }) => {
                self.valuation.insert(slot, SlotValue::Int(hi as i64));
            }
            (QuestionKind::OpParam { slot, .. }, _) => {
                self.candidates.retain(|t| !t.interval_slots().contains(&slot.as_str()));
            }
        }
        if self.pending.iter().any(|q| matches!(q.kind, QuestionKind::Paraphrase { .. })) {
            return Ok(());
        }
        if !self.enumerated {
            return self.synthesize(fe);
        }
        self.advance()
    }

    /// Adds a labelled demonstration; it must replay under the session's grid.
    pub fn add_demo(&mut self, demo: Demonstration, positive: bool) -> Result<(), DialogueError> {
        if self.stage.is_terminal() {
            return Err(DialogueError::BadStage { op: "add a demonstration", stage: self.stage });
        }
        demo.validate(&self.grid)?;
        if positive {
            self.demos_positive.push(demo);
        } else {
            self.demos_negative.push(demo);
        }
        if self.stage == Stage::AwaitingDemos && positive {
            self.timed(|s| s.advance())?;
        }
        Ok(())
    }

    /// Writes the session as JSON, replacing `path` atomically.
    pub fn save(&self, path: &Path) -> Result<(), DialogueError> {
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, serde_json::to_string_pretty(self)?)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, DialogueError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stl::parse_formula;
    use crate::world::{record, Action, WorldState};
    use Action::*;

    fn running_demo(g: &GridSpec) -> Demonstration {
        let acts = [
            MoveN, MoveN, MoveN, MoveW, MoveW, ToggleLamp, MoveE, MoveE, MoveS, MoveS, MoveS, MoveS, MoveS, MoveE, MoveE,
            PickUp,
        ];
        record(g, &WorldState::initial(g), &acts).unwrap()
    }

    fn reply(s: &mut DialogueSession, payload: AnswerPayload, fe: &Frontend) {
        let id = s.pending[0].id;
        s.answer(Answer { question_id: id, payload }, fe).unwrap();
    }

    #[test]
    fn running_example_nl_before_demo() {
        let fe = Frontend::default();
        let g = GridSpec::default();
        let mut s = DialogueSession::new(g.clone(), SessionConfig::default());
        s.submit_task("turn on the lamp and pick up the cube", &fe).unwrap();
        assert_eq!(s.bounds, Some(SynthesisBounds { l: 3, u: 5 }));
        let kinds: Vec<_> = s.pending.iter().map(|q| q.kind.label()).collect();
        assert_eq!(kinds, vec!["taskOrder", "opParam", "opParam"]);
        reply(&mut s, AnswerPayload::YesNo(true), &fe);
        reply(&mut s, AnswerPayload::Window { lo: 0, hi: 15 }, &fe);
        reply(&mut s, AnswerPayload::Window { lo: 0, hi: 10 }, &fe);
        assert_eq!(s.stage, Stage::AwaitingDemos);
        s.add_demo(running_demo(&g), true).unwrap();
        assert_eq!(s.stage, Stage::Selected);
        assert_eq!(s.selected, Some(parse_formula("F[0,15](lampOn & F[0,10](itemOnRobot(purpleCube)))").unwrap()));
        assert_eq!(s.metrics.user_interactions, 3);
        assert_eq!(s.metrics.enumerated_formulas, Some(14));
        assert_eq!(s.candidates.len(), 8);
    }

    #[test]
    fn single_task_asks_one_question() {
        let fe = Frontend::default();
        let mut s = DialogueSession::new(GridSpec::default(), SessionConfig::default());
        s.submit_task("Pick up the purple cube.", &fe).unwrap();
        assert_eq!(s.pending.len(), 1);
        assert_eq!(s.pending[0].prompt, "In how many seconds should the robot complete the task?");
        let mut s = DialogueSession::new(GridSpec::default(), SessionConfig::default());
        s.submit_task("Pick up the purple cube within 15 seconds.", &fe).unwrap();
        assert!(s.pending.is_empty());
        assert_eq!(s.stage, Stage::AwaitingDemos);
    }

    #[test]
    fn answer_errors() {
        let fe = Frontend::default();
        let mut s = DialogueSession::new(GridSpec::default(), SessionConfig::default());
        assert!(matches!(s.answer(Answer { question_id: 0, payload: AnswerPayload::YesNo(true) }, &fe), Err(DialogueError::NotPending(0))));
        s.submit_task("turn on the lamp and pick up the cube", &fe).unwrap();
        let r = s.answer(Answer { question_id: 0, payload: AnswerPayload::Value(3) }, &fe);
        assert!(matches!(r, Err(DialogueError::PayloadMismatch { .. })));
        reply(&mut s, AnswerPayload::YesNo(true), &fe);
        let r = s.answer(Answer { question_id: 0, payload: AnswerPayload::YesNo(true) }, &fe);
        assert!(matches!(r, Err(DialogueError::NotPending(0))));
        assert!(matches!(s.submit_task("again", &fe), Err(DialogueError::BadStage { .. })));
    }

    #[test]
    fn gibberish_gets_one_paraphrase() {
        let fe = Frontend::default();
        let mut s = DialogueSession::new(GridSpec::default(), SessionConfig::default());
        s.submit_task("the lamp", &fe).unwrap();
        assert!(matches!(s.pending[0].kind, QuestionKind::Paraphrase { index: None, .. }));
        reply(&mut s, AnswerPayload::Phrase("blue wug".into()), &fe);
        assert_eq!(s.stage, Stage::NoFormula);
        assert_eq!(s.transcript.len(), 1);
    }

    #[test]
    fn persistence_round_trip() {
        let fe = Frontend::default();
        let mut s = DialogueSession::new(GridSpec::default(), SessionConfig::default());
        s.submit_task("turn on the lamp and pick up the cube", &fe).unwrap();
        reply(&mut s, AnswerPayload::YesNo(true), &fe);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        s.save(&path).unwrap();
        let back = DialogueSession::load(&path).unwrap();
        assert_eq!(back, s);
        assert!(!dir.path().join("s.json.tmp").exists());
    }
}

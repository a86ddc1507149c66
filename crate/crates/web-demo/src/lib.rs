//! Browser bindings for the static demo page: draw a demonstration by
//! stepping the world, check a formula against it, and synthesize a formula
//! from an instruction with a hidden formula answering the questions.
//!
//! [`Playground`] holds the logic and is plain Rust; [`Demo`] wraps it for
//! JavaScript and passes everything across as JSON strings.

use serde::Serialize;
use serde_json::Value;
use stl_dialogue::dialogue::{run_pipeline, Exchange, LabeledDemo, OracleUser, SessionConfig};
use stl_dialogue::nl::Frontend;
use stl_dialogue::stl::{parse_formula_with, robustness, satisfies, Trace};
use stl_dialogue::world::{record, state_record, states_to_trace, step, Action, GridSpec, WorldState, WorldVocabulary};
use wasm_bindgen::prelude::*;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub sat: bool,
    /// `None` when infinite (an empty window).
    pub robustness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SynthesisResult {
    pub formula: Option<String>,
    pub note: Option<String>,
    pub enumerated_formulas: Option<usize>,
    pub candidates: Vec<String>,
    pub user_interactions: usize,
    pub transcript: Vec<Exchange>,
}

pub fn check_trace(formula: &str, trace: &Trace) -> Result<CheckResult, String> {
    let phi = parse_formula_with(formula, &WorldVocabulary).map_err(|e| e.to_string())?;
    let sat = satisfies(&phi, trace, 0).map_err(|e| e.to_string())?;
    let rho = robustness(&phi, trace, 0).map_err(|e| e.to_string())?;
    Ok(CheckResult { sat, robustness: rho.is_finite().then_some(rho) })
}

pub fn action_named(name: &str) -> Result<Action, String> {
    Action::ALL.into_iter().find(|a| a.name() == name).ok_or_else(|| format!("unknown action `{name}`"))
}

/// A world being stepped by hand; the visited states form the current
/// demonstration.
pub struct Playground {
    grid: GridSpec,
    frontend: Frontend,
    states: Vec<WorldState>,
    actions: Vec<Action>,
}

impl Default for Playground {
    fn default() -> Self {
        Playground::new(GridSpec::default())
    }
}

impl Playground {
    pub fn new(grid: GridSpec) -> Self {
        let s0 = WorldState::initial(&grid);
        Playground { grid, frontend: Frontend::default(), states: vec![s0], actions: Vec::new() }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn state(&self) -> &WorldState {
        self.states.last().expect("never empty")
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    /// Applies `a` and returns the new state's trace record.
    pub fn step(&mut self, a: Action) -> Value {
        let next = step(self.state(), a, &self.grid);
        self.states.push(next);
        self.actions.push(a);
        self.record_json()
    }

    pub fn undo(&mut self) {
        if self.actions.pop().is_some() {
            self.states.pop();
        }
    }

    pub fn reset(&mut self) {
        self.states.truncate(1);
        self.actions.clear();
    }

    pub fn record_json(&self) -> Value {
        let r = state_record(self.state(), &self.grid);
        let mut obj = serde_json::Map::new();
        obj.extend(r.facts.into_iter().map(|(k, v)| (k, v.into())));
        obj.extend(r.signals.into_iter().map(|(k, v)| (k, v.into())));
        Value::Object(obj)
    }

    /// Checks a formula on the states visited so far.
    pub fn check(&self, formula: &str) -> Result<CheckResult, String> {
        check_trace(formula, &states_to_trace(&self.states, &self.grid))
    }

    /// Runs the dialogue on the current demonstration, with `oracle`
    /// answering every question.
    pub fn synthesize(&self, nl: &str, oracle: &str) -> Result<SynthesisResult, String> {
        let gt = parse_formula_with(oracle, &WorldVocabulary).map_err(|e| format!("oracle formula: {e}"))?;
        let mut user = OracleUser::new(gt, self.frontend.lexicon.clone()).map_err(|e| e.to_string())?;
        let demo = record(&self.grid, &self.states[0], &self.actions).map_err(|e| e.to_string())?;
        let demos = [LabeledDemo { demo, positive: true }];
        let (f, session) = run_pipeline(nl, &demos, &mut user, &self.frontend, &self.grid, SessionConfig::default())
            .map_err(|e| e.to_string())?;
        Ok(SynthesisResult {
            formula: f.map(|f| f.to_string()),
            note: session.note,
            enumerated_formulas: session.metrics.enumerated_formulas,
            candidates: session.candidates.iter().map(|t| t.to_string()).collect(),
            user_interactions: session.metrics.user_interactions,
            transcript: session.transcript,
        })
    }
}

fn to_js<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

#[wasm_bindgen]
pub struct Demo {
    inner: Playground,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Demo {
        Demo { inner: Playground::default() }
    }

    /// Grid layout as JSON.
    pub fn grid(&self) -> String {
        to_js(self.inner.grid())
    }

    /// Current world state as JSON.
    pub fn state(&self) -> String {
        to_js(self.inner.state())
    }

    /// Atoms true in the current state, as a JSON object.
    pub fn facts(&self) -> String {
        self.inner.record_json().to_string()
    }

    /// Space-separated action names of the current demonstration.
    pub fn actions(&self) -> String {
        self.inner.actions().iter().map(|a| a.name()).collect::<Vec<_>>().join(" ")
    }

    pub fn step(&mut self, action: &str) -> Result<String, JsError> {
        let a = action_named(action).map_err(|e| JsError::new(&e))?;
        Ok(self.inner.step(a).to_string())
    }

    pub fn undo(&mut self) {
        self.inner.undo();
    }

    pub fn reset(&mut self) {
        self.inner.reset();
    }

    pub fn check(&self, formula: &str) -> Result<String, JsError> {
        self.inner.check(formula).map(|r| to_js(&r)).map_err(|e| JsError::new(&e))
    }

    pub fn synthesize(&self, nl: &str, oracle: &str) -> Result<String, JsError> {
        self.inner.synthesize(nl, oracle).map(|r| to_js(&r)).map_err(|e| JsError::new(&e))
    }
}

impl Default for Demo {
    fn default() -> Self {
        Demo::new()
    }
}

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::stl::{atom_key, Arg, Atom, Record, Trace};

use super::atoms::{atom_eval, ATOMS};
use super::grid::{Cell, GridSpec};
use super::state::{step, Action, ItemPos, WorldState};
use super::WorldError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub state: WorldState,
    pub action: Action,
}

/// A finite sequence of state-action pairs. [`record`] closes every demo
/// with the final state paired with `wait`, so the effect of the last real
/// action is visible in the trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demonstration {
    pub steps: Vec<Step>,
}

impl Demonstration {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn start(&self) -> Option<&WorldState> {
        self.steps.first().map(|s| &s.state)
    }

    pub fn last(&self) -> Option<&WorldState> {
        self.steps.last().map(|s| &s.state)
    }

    pub fn states(&self) -> Vec<WorldState> {
        self.steps.iter().map(|s| s.state.clone()).collect()
    }

    /// The actions that lead from each state to the next (the terminal
    /// pair's action is not included).
    pub fn actions(&self) -> Vec<Action> {
        self.steps.iter().take(self.steps.len().saturating_sub(1)).map(|s| s.action).collect()
    }

    /// Every consecutive pair must agree with [`step`].
    pub fn validate(&self, g: &GridSpec) -> Result<(), WorldError> {
        let first = self.steps.first().ok_or(WorldError::EmptyDemo)?;
        first.state.check(g)?;
        for (i, w) in self.steps.windows(2).enumerate() {
            if step(&w[0].state, w[0].action, g) != w[1].state {
                return Err(WorldError::Inconsistent { index: i });
            }
        }
        Ok(())
    }

    pub fn from_jsonl(text: &str) -> Result<Self, WorldError> {
        let mut steps = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let s: Step = serde_json::from_str(line)
                .map_err(|e| WorldError::DemoFile { line: i + 1, msg: e.to_string() })?;
            steps.push(s);
        }
        if steps.is_empty() {
            return Err(WorldError::EmptyDemo);
        }
        Ok(Demonstration { steps })
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(&serde_json::to_string(s).expect("steps serialize"));
            out.push('\n');
        }
        out
    }
}

/// Runs `actions` from `start`, yielding `actions.len() + 1` steps.
pub fn record(g: &GridSpec, start: &WorldState, actions: &[Action]) -> Result<Demonstration, WorldError> {
    start.check(g)?;
    let mut steps = Vec::with_capacity(actions.len() + 1);
    let mut s = start.clone();
    for &a in actions {
        let next = step(&s, a, g);
        steps.push(Step { state: s, action: a });
        s = next;
    }
    steps.push(Step { state: s, action: Action::Wait });
    Ok(Demonstration { steps })
}

/// All proper prefixes (lengths `1..len`), shortest first.
pub fn prefixes_as_negatives(d: &Demonstration) -> Vec<Demonstration> {
    (1..d.len()).map(|k| Demonstration { steps: d.steps[..k].to_vec() }).collect()
}

/// One variant per `(position, waits)` entry: `waits` wait actions are
/// spliced in before action `position` and the demo is re-recorded.
pub fn inject_delays(d: &Demonstration, delays: &[(usize, usize)], g: &GridSpec) -> Result<Vec<Demonstration>, WorldError> {
    let start = d.start().ok_or(WorldError::EmptyDemo)?;
    let actions = d.actions();
    let mut out = Vec::with_capacity(delays.len());
    for &(pos, waits) in delays {
        if pos > actions.len() {
            return Err(WorldError::DelayOutOfRange { position: pos, len: d.len() });
        }
        if waits == 0 {
            return Err(WorldError::DelayOutOfRange { position: pos, len: d.len() });
        }
        let mut acts = actions[..pos].to_vec();
        acts.extend(std::iter::repeat_n(Action::Wait, waits));
        acts.extend_from_slice(&actions[pos..]);
        out.push(record(g, start, &acts)?);
    }
    Ok(out)
}

/// Trace record for one state: every zero-argument atom, `robotAt` for the
/// current cell, `itemOnRobot` for every item, `itemAt` for items lying on a
/// cell, and the `x`/`y` signals.
pub fn state_record(s: &WorldState, g: &GridSpec) -> Record {
    let mut r = Record::default();
    for spec in ATOMS.iter().filter(|a| a.params.is_empty()) {
        let atom = Atom::prop(spec.name);
        r.set_fact(spec.name, atom_eval(s, &atom, g).expect("registered atom"));
    }
    r.set_fact(format!("robotAt({},{})", s.robot.0, s.robot.1), true);
    for item in g.item_names() {
        let on = Atom::prop_with("itemOnRobot", vec![Arg::Name(item.to_string())]);
        r.set_fact(atom_key(&on).expect("ground"), s.carries(item));
        if let Some(ItemPos::At(c)) = s.items.get(item) {
            r.set_fact(format!("itemAt({item},{},{})", c.0, c.1), true);
        }
    }
    r.set_signal("x", s.robot.0 as f64);
    r.set_signal("y", s.robot.1 as f64);
    r
}

pub fn demo_to_trace(d: &Demonstration, g: &GridSpec) -> Result<Trace, WorldError> {
    d.validate(g)?;
    Ok(states_to_trace(&d.states(), g))
}

pub fn states_to_trace(states: &[WorldState], g: &GridSpec) -> Trace {
    Trace::new(states.iter().map(|s| state_record(s, g)).collect())
}

/// Overrides applied to the grid's initial state.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StartSpec {
    pub robot: Option<Cell>,
    pub lamp_on: Option<bool>,
    pub fire_on: Option<bool>,
    pub door_open: Option<bool>,
    pub charger_plugged: Option<bool>,
    #[serde(default)]
    pub items: BTreeMap<String, ItemPos>,
}

impl StartSpec {
    pub fn apply(&self, g: &GridSpec) -> Result<WorldState, WorldError> {
        let mut s = WorldState::initial(g);
        if let Some(r) = self.robot {
            s.robot = r;
        }
        s.lamp_on = self.lamp_on.unwrap_or(s.lamp_on);
        s.fire_on = self.fire_on.unwrap_or(s.fire_on);
        s.door_open = self.door_open.unwrap_or(s.door_open);
        s.charger_plugged = self.charger_plugged.unwrap_or(s.charger_plugged);
        for (name, pos) in &self.items {
            if g.item_index(name).is_none() {
                return Err(WorldError::UnknownItem(name.clone()));
            }
            s.items.insert(name.clone(), *pos);
        }
        s.check(g)?;
        Ok(s)
    }
}

/// A demonstration described by its start overrides and action list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoSpec {
    #[serde(default)]
    pub start: StartSpec,
    pub actions: Vec<Action>,
}

impl DemoSpec {
    pub fn record(&self, g: &GridSpec) -> Result<Demonstration, WorldError> {
        record(g, &self.start.apply(g)?, &self.actions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stl::TraceView;
    use Action::*;

    fn g() -> GridSpec {
        GridSpec::default()
    }

    #[test]
    fn record_appends_terminal_step() {
        let g = g();
        let d = record(&g, &WorldState::initial(&g), &[MoveN, MoveN]).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.actions(), vec![MoveN, MoveN]);
        assert_eq!(d.last().unwrap().robot, (3, 1));
        d.validate(&g).unwrap();
        assert_eq!(demo_to_trace(&d, &g).unwrap().len(), 3);
    }

    #[test]
    fn inconsistent_demo_is_rejected() {
        let g = g();
        let mut d = record(&g, &WorldState::initial(&g), &[MoveN, MoveN]).unwrap();
        d.steps[1].action = MoveS;
        assert_eq!(d.validate(&g), Err(WorldError::Inconsistent { index: 1 }));
        assert!(demo_to_trace(&d, &g).is_err());
    }

    #[test]
    fn prefixes() {
        let g = g();
        let d = record(&g, &WorldState::initial(&g), &[MoveN, MoveN, MoveE, MoveE]).unwrap();
        assert_eq!(prefixes_as_negatives(&d).len(), 4);
        let two = record(&g, &WorldState::initial(&g), &[MoveN]).unwrap();
        let p = prefixes_as_negatives(&two);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].steps, two.steps[..1].to_vec());
        let one = Demonstration { steps: two.steps[..1].to_vec() };
        assert!(prefixes_as_negatives(&one).is_empty());
    }

    #[test]
    fn delays() {
        let g = g();
        let d = record(&g, &WorldState::initial(&g), &[MoveN, MoveE]).unwrap();
        let v = inject_delays(&d, &[(1, 2)], &g).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].len(), 5);
        assert_eq!(v[0].actions(), vec![MoveN, Wait, Wait, MoveE]);
        assert!(inject_delays(&d, &[], &g).unwrap().is_empty());
        assert!(matches!(inject_delays(&d, &[(3, 1)], &g), Err(WorldError::DelayOutOfRange { .. })));
    }

    #[test]
    fn records_carry_atoms_and_signals() {
        let g = g();
        let s = WorldState::initial(&g);
        let r = state_record(&s, &g);
        assert_eq!(r.facts["robotAt(3,3)"], true);
        assert_eq!(r.facts["itemOnRobot(purpleCube)"], false);
        assert_eq!(r.facts["itemAt(purpleCube,5,5)"], true);
        assert_eq!(r.facts["robotStanding"], true);
        assert_eq!(r.signals["x"], 3.0);
        assert_eq!(r.facts.keys().filter(|k| !k.contains('(')).count(), 12);
    }

    #[test]
    fn jsonl_round_trip() {
        let g = g();
        let d = record(&g, &WorldState::initial(&g), &[MoveS, MoveW]).unwrap();
        let back = Demonstration::from_jsonl(&d.to_jsonl()).unwrap();
        assert_eq!(back, d);
        assert!(matches!(Demonstration::from_jsonl("{}"), Err(WorldError::DemoFile { line: 1, .. })));
    }

    #[test]
    fn start_overrides() {
        let g = g();
        let spec: DemoSpec = toml::from_str(
            "actions = [\"moveS\"]\n[start]\nrobot = [3, 6]\nlampOn = true\nitems = { doorKey = \"robot\", greenCube = [6, 6] }\n",
        )
        .unwrap();
        let d = spec.record(&g).unwrap();
        let s0 = d.start().unwrap();
        assert!(s0.lamp_on && s0.carries("doorKey"));
        assert_eq!(s0.items["greenCube"], ItemPos::At((6, 6)));
        assert_eq!(d.last().unwrap().robot, (3, 7));
        let bad = StartSpec { robot: Some((2, 2)), ..Default::default() };
        assert!(bad.apply(&g).is_err());
    }
}

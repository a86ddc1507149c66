use std::collections::HashMap;
use std::fmt::Write as _;

use crate::world::{Action, GridSpec, WorldState};

use super::projection::Projection;
use super::RlError;

pub const N_ACTIONS: usize = Action::ALL.len();

/// Index of the largest value; ties go to the earlier action.
pub fn argmax(q: &[f64; N_ACTIONS]) -> usize {
    let mut best = 0;
    for i in 1..N_ACTIONS {
        if q[i] > q[best] {
            best = i;
        }
    }
    best
}

/// Anything that picks an action for a projected state.
pub trait Policy {
    fn projection(&self) -> &Projection;
    fn choose(&self, key: u64) -> Action;

    fn act(&self, s: &WorldState, g: &GridSpec) -> Action {
        self.choose(self.projection().key(s, g))
    }
}

/// Action values per projected state. Missing rows read as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct QFunction {
    pub projection: Projection,
    pub table: HashMap<u64, [f64; N_ACTIONS]>,
}

impl QFunction {
    pub fn new(projection: Projection) -> Self {
        QFunction { projection, table: HashMap::new() }
    }

    pub fn values(&self, key: u64) -> [f64; N_ACTIONS] {
        self.table.get(&key).copied().unwrap_or([0.0; N_ACTIONS])
    }

    pub fn get(&self, key: u64, a: usize) -> f64 {
        self.table.get(&key).map_or(0.0, |r| r[a])
    }

    pub fn max_value(&self, key: u64) -> f64 {
        self.table.get(&key).map_or(0.0, |r| r[argmax(r)])
    }

    pub fn row_mut(&mut self, key: u64) -> &mut [f64; N_ACTIONS] {
        self.table.entry(key).or_insert([0.0; N_ACTIONS])
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Rows sorted by state key.
    fn sorted(&self) -> Vec<(u64, &[f64; N_ACTIONS])> {
        let mut rows: Vec<_> = self.table.iter().map(|(k, v)| (*k, v)).collect();
        rows.sort_by_key(|r| r.0);
        rows
    }

    pub fn greedy(&self) -> GreedyPolicy {
        GreedyPolicy {
            projection: self.projection.clone(),
            best: self.table.iter().map(|(k, r)| (*k, (Action::ALL[argmax(r)], r[argmax(r)]))).collect(),
        }
    }

    /// Tab-separated `stateKey bestAction qValue` lines after a commented
    /// header naming the task and the projection.
    pub fn export(&self, formula: &str) -> String {
        let mut out = String::new();
        writeln!(out, "# formula: {formula}").unwrap();
        writeln!(out, "# projection: {}", serde_json::to_string(&self.projection).expect("projection serializes"))
            .unwrap();
        out.push_str("stateKey\tbestAction\tqValue\n");
        for (k, r) in self.sorted() {
            let a = argmax(r);
            writeln!(out, "{k}\t{}\t{}", Action::ALL[a], r[a]).unwrap();
        }
        out
    }
}

impl Policy for QFunction {
    fn projection(&self) -> &Projection {
        &self.projection
    }

    fn choose(&self, key: u64) -> Action {
        Action::ALL[self.table.get(&key).map_or(0, argmax)]
    }
}

/// Best action per state, as read back from an exported policy.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyPolicy {
    pub projection: Projection,
    pub best: HashMap<u64, (Action, f64)>,
}

impl Policy for GreedyPolicy {
    fn projection(&self) -> &Projection {
        &self.projection
    }

    fn choose(&self, key: u64) -> Action {
        self.best.get(&key).map_or(Action::ALL[0], |b| b.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyFile {
    pub formula: Option<String>,
    pub policy: GreedyPolicy,
}

impl PolicyFile {
    pub fn parse(text: &str) -> Result<Self, RlError> {
        let mut formula = None;
        let mut projection = None;
        let mut best = HashMap::new();
        let mut header_seen = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let bad = |msg: String| RlError::PolicyFile { line: i + 1, msg };
            if line.is_empty() {
                continue;
            }
            if let Some(c) = line.strip_prefix('#') {
                let c = c.trim();
                if let Some(f) = c.strip_prefix("formula:") {
                    formula = Some(f.trim().to_string());
                } else if let Some(p) = c.strip_prefix("projection:") {
                    projection = Some(serde_json::from_str(p.trim()).map_err(|e| bad(format!("projection: {e}")))?);
                }
                continue;
            }
            if !header_seen {
                if line.split('\t').collect::<Vec<_>>() != ["stateKey", "bestAction", "qValue"] {
                    return Err(bad("expected header stateKey, bestAction, qValue".into()));
                }
                header_seen = true;
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(bad(format!("expected 3 columns, found {}", cols.len())));
            }
            let key: u64 = cols[0].parse().map_err(|e| bad(format!("state key: {e}")))?;
            let action: Action = cols[1].parse().map_err(|e| bad(format!("{e}")))?;
            let q: f64 = cols[2].parse().map_err(|e| bad(format!("q value: {e}")))?;
            if !q.is_finite() {
                return Err(bad("q value is not finite".into()));
            }
            if best.insert(key, (action, q)).is_some() {
                return Err(bad(format!("duplicate state key {key}")));
            }
        }
        let projection = projection.ok_or(RlError::PolicyFile { line: 0, msg: "missing projection header".into() })?;
        Ok(PolicyFile { formula, policy: GreedyPolicy { projection, best } })
    }
}

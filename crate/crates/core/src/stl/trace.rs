use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{Map, Value};
use thiserror::Error;

use super::ast::{Arg, Atom};
use super::monitor::MonitorError;

/// Read access to a discrete-time trace, one record per second.
///
/// The monitor only needs two lookups; the RL loop implements this over
/// packed bit vectors while files and demonstrations use [`Trace`].
pub trait TraceView {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Truth of a ground environment atom at time `t`.
    fn holds(&self, t: usize, atom: &Atom) -> Result<bool, MonitorError>;

    /// Value of numeric signal `name` at time `t`.
    fn signal(&self, t: usize, name: &str) -> Result<f64, MonitorError>;
}

/// A single timestep: Boolean facts keyed by ground atom text
/// (`lampOn`, `robotAt(3,4)`) plus named numeric signals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record {
    pub facts: BTreeMap<String, bool>,
    pub signals: BTreeMap<String, f64>,
}

impl Record {
    pub fn set_fact(&mut self, key: impl Into<String>, value: bool) -> &mut Self {
        self.facts.insert(key.into(), value);
        self
    }

    pub fn set_signal(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.signals.insert(key.into(), value);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub records: Vec<Record>,
}

#[derive(Debug, Error)]
pub enum TraceFileError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("trace file contains no records")]
    Empty,
}

/// Key under which a ground atom's truth is stored in a [`Record`].
pub fn atom_key(atom: &Atom) -> Result<String, MonitorError> {
    match atom {
        Atom::Prop { name, args } if args.is_empty() => Ok(name.clone()),
        Atom::Prop { name, args } => {
            let mut key = format!("{name}(");
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    key.push(',');
                }
                match a {
                    Arg::Int(v) => write!(key, "{v}").unwrap(),
                    Arg::Name(s) => key.push_str(s),
                    Arg::Slot(s) => return Err(MonitorError::Unresolved(format!("?{s}"))),
                }
            }
            key.push(')');
            Ok(key)
        }
        Atom::Cmp { signal, .. } => Ok(signal.clone()),
    }
}

impl Trace {
    pub fn new(records: Vec<Record>) -> Self {
        Trace { records }
    }

    /// Parses the line-oriented trace format: one JSON object per line whose
    /// Boolean members are facts and numeric members are signals. Blank lines
    /// and lines starting with `#` are skipped.
    pub fn from_jsonl(text: &str) -> Result<Self, TraceFileError> {
        let mut records = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |msg: String| TraceFileError::Malformed { line: idx + 1, msg };
            let obj: Map<String, Value> = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
            let mut rec = Record::default();
            for (k, v) in obj {
                match v {
                    Value::Bool(b) => {
                        rec.facts.insert(k, b);
                    }
                    Value::Number(n) => {
                        let x = n.as_f64().ok_or_else(|| malformed(format!("`{k}` is not a finite number")))?;
                        rec.signals.insert(k, x);
                    }
                    other => return Err(malformed(format!("`{k}` has unsupported value {other}"))),
                }
            }
            records.push(rec);
        }
        if records.is_empty() {
            return Err(TraceFileError::Empty);
        }
        Ok(Trace { records })
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for rec in &self.records {
            let mut obj = Map::new();
            for (k, v) in &rec.facts {
                obj.insert(k.clone(), Value::Bool(*v));
            }
            for (k, v) in &rec.signals {
                obj.insert(k.clone(), serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number));
            }
            out.push_str(&Value::Object(obj).to_string());
            out.push('\n');
        }
        out
    }

    /// The first `len` records.
    pub fn prefix(&self, len: usize) -> Trace {
        Trace { records: self.records[..len.min(self.records.len())].to_vec() }
    }
}

impl TraceView for Trace {
    fn len(&self) -> usize {
        self.records.len()
    }

    /// Facts absent from a record are false (closed world).
    fn holds(&self, t: usize, atom: &Atom) -> Result<bool, MonitorError> {
        let rec = self.records.get(t).ok_or(MonitorError::TimeOutOfRange { t, len: self.records.len() })?;
        let key = atom_key(atom)?;
        Ok(rec.facts.get(&key).copied().unwrap_or(false))
    }

    fn signal(&self, t: usize, name: &str) -> Result<f64, MonitorError> {
        let rec = self.records.get(t).ok_or(MonitorError::TimeOutOfRange { t, len: self.records.len() })?;
        rec.signals.get(name).copied().ok_or_else(|| MonitorError::MissingSignal(name.to_string()))
    }
}

/// Builds a trace over a single numeric signal; handy for tests and examples.
pub fn numeric_trace(name: &str, values: &[f64]) -> Trace {
    Trace::new(
        values
            .iter()
            .map(|&v| {
                let mut r = Record::default();
                r.set_signal(name, v);
                r
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip() {
        let text = "{\"lampOn\": true, \"robotAt(0,0)\": false, \"x\": 1.5}\n# comment\n\n{\"lampOn\": false, \"x\": 2}\n";
        let tr = Trace::from_jsonl(text).unwrap();
        assert_eq!(tr.len(), 2);
        assert!(tr.holds(0, &Atom::prop("lampOn")).unwrap());
        assert_eq!(tr.signal(1, "x").unwrap(), 2.0);
        let again = Trace::from_jsonl(&tr.to_jsonl()).unwrap();
        assert_eq!(again, tr);
    }

    #[test]
    fn closed_world_and_errors() {
        let tr = Trace::from_jsonl("{\"a\": true}").unwrap();
        assert!(!tr.holds(0, &Atom::prop("b")).unwrap());
        assert!(matches!(tr.holds(3, &Atom::prop("a")), Err(MonitorError::TimeOutOfRange { .. })));
        assert!(matches!(tr.signal(0, "x"), Err(MonitorError::MissingSignal(_))));
        let slot = Atom::prop_with("robotAt", vec![Arg::Slot("x".into()), Arg::Int(0)]);
        assert!(matches!(tr.holds(0, &slot), Err(MonitorError::Unresolved(_))));
        assert!(matches!(Trace::from_jsonl(""), Err(TraceFileError::Empty)));
        assert!(matches!(Trace::from_jsonl("{\"a\": \"s\"}"), Err(TraceFileError::Malformed { line: 1, .. })));
    }

    #[test]
    fn atom_keys() {
        let a = Atom::prop_with("itemAt", vec![Arg::Name("purpleCube".into()), Arg::Int(5), Arg::Int(5)]);
        assert_eq!(atom_key(&a).unwrap(), "itemAt(purpleCube,5,5)");
    }
}

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stl::{Arg, Atom, Bound, Formula, Interval, Threshold};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SlotKind {
    IntervalBound,
    Coordinate,
    ItemName,
    Threshold,
}

/// Kind of an atom-argument slot. Argument slots whose name starts with
/// `item` hold item names; every other argument slot holds a coordinate.
pub fn arg_slot_kind(name: &str) -> SlotKind {
    if name.starts_with("item") {
        SlotKind::ItemName
    } else {
        SlotKind::Coordinate
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub name: String,
    pub kind: SlotKind,
}

/// A concrete value bound to a slot. Serialized untagged, so JSON `15`,
/// `"purpleCube"` and `0.5` are all valid bindings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SlotValue {
    Int(i64),
    Real(f64),
    Name(String),
}

impl fmt::Display for SlotValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlotValue::Int(v) => write!(f, "{v}"),
            SlotValue::Real(v) => write!(f, "{v}"),
            SlotValue::Name(s) => f.write_str(s),
        }
    }
}

/// Slot name → value. Partial while a dialogue is in progress.
pub type Valuation = BTreeMap<String, SlotValue>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstantiateError {
    #[error("no binding for slot `{0}`")]
    Missing(String),
    #[error("slot `{slot}` expects {expected:?}, got `{value}`")]
    IllTyped { slot: String, expected: SlotKind, value: String },
    #[error("interval {0} has lower bound above upper bound")]
    BadInterval(String),
}

/// A PSTL formula: a skeleton with named parameter slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Template {
    pub skeleton: Formula,
    pub slots: Vec<Slot>,
}

impl Template {
    /// Wraps a skeleton, collecting its slots in pre-order.
    pub fn new(skeleton: Formula) -> Self {
        let slots = collect_slots(&skeleton);
        Template { skeleton, slots }
    }

    pub fn length(&self) -> usize {
        self.skeleton.length()
    }

    pub fn canonical(&self) -> String {
        self.skeleton.to_string()
    }

    pub fn slot(&self, name: &str) -> Option<&Slot> {
        self.slots.iter().find(|s| s.name == name)
    }

    /// Interval-bound slot names in pre-order of their operators.
    pub fn interval_slots(&self) -> Vec<&str> {
        self.slots.iter().filter(|s| s.kind == SlotKind::IntervalBound).map(|s| s.name.as_str()).collect()
    }

    pub fn temporal_count(&self) -> usize {
        self.skeleton.temporal_intervals().len()
    }

    /// True when every slot has a binding in `v`.
    pub fn is_resolved_by(&self, v: &Valuation) -> bool {
        self.slots.iter().all(|s| v.contains_key(&s.name))
    }

    pub fn instantiate(&self, v: &Valuation) -> Result<Formula, InstantiateError> {
        instantiate(self, v)
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.skeleton.fmt(f)
    }
}

fn collect_slots(f: &Formula) -> Vec<Slot> {
    let mut out: Vec<Slot> = Vec::new();
    let mut push = |name: &str, kind: SlotKind| {
        if !out.iter().any(|s| s.name == name) {
            out.push(Slot { name: name.to_string(), kind });
        }
    };
    f.visit(&mut |node| match node {
        Formula::Eventually(i, _) | Formula::Always(i, _) | Formula::Until(i, _, _) => {
            for b in [&i.lo, &i.hi] {
                if let Bound::Slot(s) = b {
                    push(s, SlotKind::IntervalBound);
                }
            }
        }
        Formula::Atom(Atom::Prop { args, .. }) => {
            for a in args {
                if let Arg::Slot(s) = a {
                    push(s, arg_slot_kind(s));
                }
            }
        }
        Formula::Atom(Atom::Cmp { threshold: Threshold::Slot(s), .. }) => push(s, SlotKind::Threshold),
        _ => {}
    });
    out
}

fn bind_bound(b: &Bound, v: &Valuation) -> Result<Bound, InstantiateError> {
    match b {
        Bound::Fixed(_) => Ok(b.clone()),
        Bound::Slot(s) => match v.get(s) {
            None => Err(InstantiateError::Missing(s.clone())),
            Some(SlotValue::Int(n)) if *n >= 0 && *n <= u32::MAX as i64 => Ok(Bound::Fixed(*n as u32)),
            Some(other) => Err(InstantiateError::IllTyped {
                slot: s.clone(),
                expected: SlotKind::IntervalBound,
                value: other.to_string(),
            }),
        },
    }
}

fn bind_interval(i: &Interval, v: &Valuation) -> Result<Interval, InstantiateError> {
    let out = Interval { lo: bind_bound(&i.lo, v)?, hi: bind_bound(&i.hi, v)? };
    match out.resolved() {
        Some((lo, hi)) if lo > hi => Err(InstantiateError::BadInterval(out.to_string())),
        _ => Ok(out),
    }
}

fn bind_atom(a: &Atom, v: &Valuation) -> Result<Atom, InstantiateError> {
    Ok(match a {
        Atom::Prop { name, args } => {
            let mut out = Vec::with_capacity(args.len());
            for arg in args {
                out.push(match arg {
                    Arg::Slot(s) => {
                        let kind = arg_slot_kind(s);
                        match (kind, v.get(s)) {
                            (_, None) => return Err(InstantiateError::Missing(s.clone())),
                            (SlotKind::Coordinate, Some(SlotValue::Int(n))) => Arg::Int(*n),
                            (SlotKind::ItemName, Some(SlotValue::Name(n))) => Arg::Name(n.clone()),
                            (kind, Some(other)) => {
                                return Err(InstantiateError::IllTyped {
                                    slot: s.clone(),
                                    expected: kind,
                                    value: other.to_string(),
                                })
                            }
                        }
                    }
                    other => other.clone(),
                });
            }
            Atom::Prop { name: name.clone(), args: out }
        }
        Atom::Cmp { signal, op, threshold } => {
            let threshold = match threshold {
                Threshold::Slot(s) => match v.get(s) {
                    None => return Err(InstantiateError::Missing(s.clone())),
                    Some(SlotValue::Int(n)) => Threshold::Fixed(*n as f64),
                    Some(SlotValue::Real(x)) => Threshold::Fixed(*x),
                    Some(other) => {
                        return Err(InstantiateError::IllTyped {
                            slot: s.clone(),
                            expected: SlotKind::Threshold,
                            value: other.to_string(),
                        })
                    }
                },
                fixed => fixed.clone(),
            };
            Atom::Cmp { signal: signal.clone(), op: *op, threshold }
        }
    })
}

fn bind(f: &Formula, v: &Valuation) -> Result<Formula, InstantiateError> {
    let b = |x: &Formula| bind(x, v).map(Box::new);
    Ok(match f {
        Formula::True => Formula::True,
        Formula::Atom(a) => Formula::Atom(bind_atom(a, v)?),
        Formula::Not(x) => Formula::Not(b(x)?),
        Formula::And(x, y) => Formula::And(b(x)?, b(y)?),
        Formula::Or(x, y) => Formula::Or(b(x)?, b(y)?),
        Formula::Implies(x, y) => Formula::Implies(b(x)?, b(y)?),
        Formula::Eventually(i, x) => Formula::Eventually(bind_interval(i, v)?, b(x)?),
        Formula::Always(i, x) => Formula::Always(bind_interval(i, v)?, b(x)?),
        Formula::Until(i, x, y) => Formula::Until(bind_interval(i, v)?, b(x)?, b(y)?),
    })
}

/// Replaces every slot in the template by its binding in `v`.
pub fn instantiate(t: &Template, v: &Valuation) -> Result<Formula, InstantiateError> {
    bind(&t.skeleton, v)
}

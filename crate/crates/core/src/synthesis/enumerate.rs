use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stl::{Atom, Formula, Interval};

use super::template::Template;

/// Operators the enumerator may place in a template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Op {
    Not,
    And,
    Or,
    Implies,
    Eventually,
    Always,
    Until,
}

impl Op {
    pub const ALL: [Op; 7] = [Op::Not, Op::And, Op::Or, Op::Implies, Op::Eventually, Op::Always, Op::Until];

    pub fn symbol(self) -> &'static str {
        match self {
            Op::Not => "¬",
            Op::And => "∧",
            Op::Or => "∨",
            Op::Implies => "→",
            Op::Eventually => "F",
            Op::Always => "G",
            Op::Until => "U",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Op> {
        Op::ALL.into_iter().find(|o| o.symbol() == s || o.ascii() == s)
    }

    fn ascii(self) -> &'static str {
        match self {
            Op::Not => "!",
            Op::And => "&",
            Op::Or => "|",
            Op::Implies => "->",
            o => o.symbol(),
        }
    }

    pub fn is_temporal(self) -> bool {
        matches!(self, Op::Eventually | Op::Always | Op::Until)
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A predicted atom, possibly negated. A negated literal enters templates
/// as the length-2 leaf `!(atom)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Literal {
    pub atom: Atom,
    #[serde(default)]
    pub negated: bool,
}

impl Literal {
    pub fn new(atom: Atom) -> Self {
        Literal { atom, negated: false }
    }

    pub fn negated(atom: Atom) -> Self {
        Literal { atom, negated: true }
    }

    fn leaf(&self) -> Formula {
        let a = Formula::Atom(self.atom.clone());
        if self.negated {
            Formula::not(a)
        } else {
            a
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisBounds {
    pub l: usize,
    pub u: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthesisError {
    #[error("at least one verb phrase is required")]
    NoVerbPhrases,
    #[error("at least one atom is required")]
    NoAtoms,
    #[error("too many atoms ({0}); at most 8 are supported")]
    TooManyAtoms(usize),
    #[error("invalid length bounds [{l}, {u}]")]
    BadBounds { l: usize, u: usize },
    #[error("probe horizon must be at least 1")]
    BadHorizon,
}

/// `l = 2·phrases − 1`, `u = 2·phrases + conjunctions + adverbs`: each verb
/// phrase may need its own `F`, and each connective or adverb adds at most
/// one operator.
pub fn compute_length_bounds(n_phrases: usize, n_conjs: usize, n_advs: usize) -> Result<SynthesisBounds, SynthesisError> {
    if n_phrases == 0 {
        return Err(SynthesisError::NoVerbPhrases);
    }
    Ok(SynthesisBounds { l: 2 * n_phrases - 1, u: 2 * n_phrases + n_conjs + n_advs })
}

fn root_op(f: &Formula) -> Option<Op> {
    match f {
        Formula::Not(_) => Some(Op::Not),
        Formula::Eventually(..) => Some(Op::Eventually),
        Formula::Always(..) => Some(Op::Always),
        _ => None,
    }
}

fn placeholder() -> Interval {
    Interval::deadline_slot("")
}

/// Names interval slots `t1, t2, …` in pre-order of their operators.
fn number_intervals(f: Formula, next: &mut usize) -> Formula {
    let fresh = |next: &mut usize| {
        *next += 1;
        Interval::deadline_slot(format!("t{next}"))
    };
    match f {
        Formula::Not(x) => Formula::not(number_intervals(*x, next)),
        Formula::And(a, b) => {
            let a = number_intervals(*a, next);
            Formula::and(a, number_intervals(*b, next))
        }
        Formula::Or(a, b) => {
            let a = number_intervals(*a, next);
            Formula::or(a, number_intervals(*b, next))
        }
        Formula::Implies(a, b) => {
            let a = number_intervals(*a, next);
            Formula::implies(a, number_intervals(*b, next))
        }
        Formula::Eventually(_, x) => {
            let i = fresh(next);
            Formula::eventually(i, number_intervals(*x, next))
        }
        Formula::Always(_, x) => {
            let i = fresh(next);
            Formula::always(i, number_intervals(*x, next))
        }
        Formula::Until(_, a, b) => {
            let i = fresh(next);
            let a = number_intervals(*a, next);
            Formula::until(i, a, number_intervals(*b, next))
        }
        other => other,
    }
}

/// Canonical string with each atom replaced by its literal index (`A0`,
/// `A1`, …). Sorting on this keeps the order in which atoms were predicted.
pub fn index_canonical(f: &Formula, literals: &[Literal]) -> String {
    f.clone()
        .map(&mut |node| match node {
            Formula::Atom(a) => {
                let idx = literals.iter().position(|l| l.atom == a).map_or(usize::MAX, |i| i);
                Formula::prop(format!("A{idx}"))
            }
            other => other,
        })
        .to_string()
}

/// Every template of length within `bounds` that uses each literal exactly
/// once and only the operators in `ops`. Directly nested identical unary
/// operators (`!!`, `FF`, `GG`) are skipped and binary operands are ordered.
/// The result is sorted by length, then by [`index_canonical`].
pub fn enumerate_pstl(literals: &[Literal], ops: &[Op], bounds: SynthesisBounds) -> Result<Vec<Template>, SynthesisError> {
    let n = literals.len();
    if n == 0 {
        return Err(SynthesisError::NoAtoms);
    }
    if n > 8 {
        return Err(SynthesisError::TooManyAtoms(n));
    }
    if bounds.l == 0 || bounds.l > bounds.u {
        return Err(SynthesisError::BadBounds { l: bounds.l, u: bounds.u });
    }
    let ops: BTreeSet<Op> = ops.iter().copied().collect();
    let full = (1usize << n) - 1;
    let max_len = bounds.u;
    // table[mask][len]
    let mut table: Vec<Vec<Vec<Formula>>> = vec![vec![Vec::new(); max_len + 1]; full + 1];

    for len in 1..=max_len {
        for mask in 1..=full {
            let mut out = Vec::new();
            for (i, lit) in literals.iter().enumerate() {
                if mask == 1 << i && lit.leaf().length() == len {
                    out.push(lit.leaf());
                }
            }
            if len >= 2 {
                for inner in &table[mask][len - 1] {
                    let root = root_op(inner);
                    for op in [Op::Not, Op::Eventually, Op::Always] {
                        if !ops.contains(&op) || root == Some(op) {
                            continue;
                        }
                        out.push(match op {
                            Op::Not => Formula::not(inner.clone()),
                            Op::Eventually => Formula::eventually(placeholder(), inner.clone()),
                            _ => Formula::always(placeholder(), inner.clone()),
                        });
                    }
                }
            }
            let binary: Vec<Op> =
                [Op::And, Op::Or, Op::Implies, Op::Until].into_iter().filter(|o| ops.contains(o)).collect();
            if len >= 3 && !binary.is_empty() {
                let mut left_mask = (mask - 1) & mask;
                while left_mask > 0 {
                    let right_mask = mask ^ left_mask;
                    for l1 in 1..len - 1 {
                        let l2 = len - 1 - l1;
                        for a in &table[left_mask][l1] {
                            for b in &table[right_mask][l2] {
                                for op in &binary {
                                    let (a, b) = (a.clone(), b.clone());
                                    out.push(match op {
                                        Op::And => Formula::and(a, b),
                                        Op::Or => Formula::or(a, b),
                                        Op::Implies => Formula::implies(a, b),
                                        _ => Formula::until(placeholder(), a, b),
                                    });
                                }
                            }
                        }
                    }
                    left_mask = (left_mask - 1) & mask;
                }
            }
            table[mask][len] = out;
        }
    }

    let mut seen = HashSet::new();
    let mut keyed = Vec::new();
    for len in bounds.l..=max_len {
        for f in &table[full][len] {
            let mut counter = 0;
            let skeleton = number_intervals(f.clone(), &mut counter);
            let canon = skeleton.to_string();
            if !seen.insert(canon) {
                continue;
            }
            keyed.push(((len, index_canonical(&skeleton, literals)), Template::new(skeleton)));
        }
    }
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(keyed.into_iter().map(|(_, t)| t).collect())
}

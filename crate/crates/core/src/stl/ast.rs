//! Abstract syntax for STL formulas and their parametric (PSTL) templates.
//!
//! A single [`Formula`] type covers both: a ground formula is one where no
//! interval bound, atom argument or threshold is a [`slot`](Bound::Slot).

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Endpoint of a temporal interval, either a concrete number of seconds or a
/// named parameter slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bound {
    Fixed(u32),
    Slot(String),
}

impl Bound {
    pub fn value(&self) -> Option<u32> {
        match self {
            Bound::Fixed(v) => Some(*v),
            Bound::Slot(_) => None,
        }
    }
}

/// Closed integer interval `[lo, hi]` indexing a temporal operator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub lo: Bound,
    pub hi: Bound,
}

impl Interval {
    /// Builds a ground interval; `None` when `lo > hi`.
    pub fn new(lo: u32, hi: u32) -> Option<Self> {
        (lo <= hi).then_some(Interval { lo: Bound::Fixed(lo), hi: Bound::Fixed(hi) })
    }

    /// `[0, ?slot]`, the shape the enumerator emits.
    pub fn deadline_slot(slot: impl Into<String>) -> Self {
        Interval { lo: Bound::Fixed(0), hi: Bound::Slot(slot.into()) }
    }

    pub fn resolved(&self) -> Option<(u32, u32)> {
        Some((self.lo.value()?, self.hi.value()?))
    }
}

/// Argument of an environment atom such as `robotAt(7,4)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arg {
    Int(i64),
    Name(String),
    Slot(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparator {
    Le,
    Ge,
    Eq,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Le => "<=",
            Comparator::Ge => ">=",
            Comparator::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Threshold {
    Fixed(f64),
    Slot(String),
}

/// Atomic predicate: either a named environment predicate with arguments, or
/// a numeric comparison `signal ~ c` over a named trace signal.
#[derive(Debug, Clone, PartialEq)]
pub enum Atom {
    Prop { name: String, args: Vec<Arg> },
    Cmp { signal: String, op: Comparator, threshold: Threshold },
}

impl Atom {
    pub fn prop(name: impl Into<String>) -> Self {
        Atom::Prop { name: name.into(), args: Vec::new() }
    }

    pub fn prop_with(name: impl Into<String>, args: Vec<Arg>) -> Self {
        Atom::Prop { name: name.into(), args }
    }

    pub fn cmp(signal: impl Into<String>, op: Comparator, c: f64) -> Self {
        Atom::Cmp { signal: signal.into(), op, threshold: Threshold::Fixed(c) }
    }

    /// Predicate name, or the signal name for numeric atoms.
    pub fn name(&self) -> &str {
        match self {
            Atom::Prop { name, .. } => name,
            Atom::Cmp { signal, .. } => signal,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Atom::Prop { args, .. } => !args.iter().any(|a| matches!(a, Arg::Slot(_))),
            Atom::Cmp { threshold, .. } => matches!(threshold, Threshold::Fixed(_)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Eventually(Interval, Box<Formula>),
    Always(Interval, Box<Formula>),
    Until(Interval, Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(a: Atom) -> Self {
        Formula::Atom(a)
    }

    pub fn prop(name: impl Into<String>) -> Self {
        Formula::Atom(Atom::prop(name))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn eventually(i: Interval, f: Formula) -> Self {
        Formula::Eventually(i, Box::new(f))
    }

    pub fn always(i: Interval, f: Formula) -> Self {
        Formula::Always(i, Box::new(f))
    }

    pub fn until(i: Interval, a: Formula, b: Formula) -> Self {
        Formula::Until(i, Box::new(a), Box::new(b))
    }

    /// Number of atom nodes plus operator nodes; `true` counts zero.
    pub fn length(&self) -> usize {
        match self {
            Formula::True => 0,
            Formula::Atom(_) => 1,
            Formula::Not(f) | Formula::Eventually(_, f) | Formula::Always(_, f) => 1 + f.length(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Until(_, a, b) => 1 + a.length() + b.length(),
        }
    }

    /// Pre-order list of the temporal operators' intervals.
    pub fn temporal_intervals(&self) -> Vec<&Interval> {
        let mut out = Vec::new();
        self.visit(&mut |f| match f {
            Formula::Eventually(i, _) | Formula::Always(i, _) | Formula::Until(i, _, _) => {
                out.push(i)
            }
            _ => {}
        });
        out
    }

    /// Atoms in pre-order (left operand before right operand).
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Atom(a) = f {
                out.push(a);
            }
        });
        out
    }

    pub fn is_ground(&self) -> bool {
        let mut ground = true;
        self.visit(&mut |f| match f {
            Formula::Atom(a) => ground &= a.is_ground(),
            Formula::Eventually(i, _) | Formula::Always(i, _) | Formula::Until(i, _, _) => {
                ground &= i.resolved().is_some()
            }
            _ => {}
        });
        ground
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::True | Formula::Atom(_) => {}
            Formula::Not(x) | Formula::Eventually(_, x) | Formula::Always(_, x) => x.visit(f),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Until(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Rebuilds the tree bottom-up, letting `f` rewrite every node after its
    /// children have been rewritten.
    pub fn map(self, f: &mut impl FnMut(Formula) -> Formula) -> Formula {
        let rebuilt = match self {
            Formula::True | Formula::Atom(_) => self,
            Formula::Not(x) => Formula::Not(Box::new(x.map(f))),
            Formula::Eventually(i, x) => Formula::Eventually(i, Box::new(x.map(f))),
            Formula::Always(i, x) => Formula::Always(i, Box::new(x.map(f))),
            Formula::And(a, b) => Formula::And(Box::new(a.map(f)), Box::new(b.map(f))),
            Formula::Or(a, b) => Formula::Or(Box::new(a.map(f)), Box::new(b.map(f))),
            Formula::Implies(a, b) => Formula::Implies(Box::new(a.map(f)), Box::new(b.map(f))),
            Formula::Until(i, a, b) => Formula::Until(i, Box::new(a.map(f)), Box::new(b.map(f))),
        };
        f(rebuilt)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Fixed(v) => write!(f, "{v}"),
            Bound::Slot(s) => write!(f, "?{s}"),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Int(v) => write!(f, "{v}"),
            Arg::Name(s) => f.write_str(s),
            Arg::Slot(s) => write!(f, "?{s}"),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Prop { name, args } => {
                f.write_str(name)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
            Atom::Cmp { signal, op, threshold } => {
                write!(f, "{signal} {} ", op.symbol())?;
                match threshold {
                    Threshold::Fixed(c) => write!(f, "{c}"),
                    Threshold::Slot(s) => write!(f, "?{s}"),
                }
            }
        }
    }
}

/// Operand of a unary operator; binary forms already carry parentheses.
struct Operand<'a>(&'a Formula);

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            x @ (Formula::And(..) | Formula::Or(..) | Formula::Implies(..) | Formula::Until(..)) => write!(f, "{x}"),
            x => write!(f, "({x})"),
        }
    }
}

/// Canonical, fully parenthesized single-line rendering.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(x) => write!(f, "!{}", Operand(x)),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Eventually(i, x) => write!(f, "F{i}{}", Operand(x)),
            Formula::Always(i, x) => write!(f, "G{i}{}", Operand(x)),
            Formula::Until(i, a, b) => write!(f, "({a} U{i} {b})"),
        }
    }
}

pub fn format_formula(f: &Formula) -> String {
    f.to_string()
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        super::parser::parse_formula(&text).map_err(serde::de::Error::custom)
    }
}

impl Serialize for Atom {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Atom {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        match super::parser::parse_formula(&text).map_err(serde::de::Error::custom)? {
            Formula::Atom(a) => Ok(a),
            other => Err(serde::de::Error::custom(format!("`{other}` is not an atom"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed(lo: u32, hi: u32) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn formats_examples() {
        let g = Formula::always(fixed(0, 1000), Formula::not(Formula::prop("robotAtWall")));
        assert_eq!(g.to_string(), "G[0,1000](!(robotAtWall))");
        assert_eq!(Formula::True.to_string(), "true");
        let conj = Formula::and(Formula::prop("a"), Formula::eventually(fixed(0, 10), Formula::prop("b")));
        assert_eq!(conj.to_string(), "(a & F[0,10](b))");
        let u = Formula::until(fixed(0, 8), Formula::prop("lampOn"), Formula::prop("x"));
        assert_eq!(u.to_string(), "(lampOn U[0,8] x)");
        let cmp = Formula::atom(Atom::cmp("x", Comparator::Le, 1.0));
        assert_eq!(cmp.to_string(), "x <= 1");
    }

    #[test]
    fn length_counts_atoms_and_operators() {
        let a = Formula::prop("lampOn");
        let b = Formula::atom(Atom::prop_with("itemOnRobot", vec![Arg::Slot("i".into())]));
        assert_eq!(Formula::and(a.clone(), b.clone()).length(), 3);
        let phi3 = Formula::eventually(
            Interval::deadline_slot("t1"),
            Formula::and(a.clone(), Formula::eventually(Interval::deadline_slot("t2"), b)),
        );
        assert_eq!(phi3.length(), 5);
        assert_eq!(a.length(), 1);
        assert_eq!(Formula::True.length(), 0);
        assert_eq!(Formula::not(Formula::True).length(), 1);
    }

    #[test]
    fn temporal_intervals_are_preorder() {
        let f = Formula::until(
            fixed(0, 8),
            Formula::eventually(fixed(0, 3), Formula::prop("a")),
            Formula::always(fixed(1, 2), Formula::prop("b")),
        );
        let ivs: Vec<_> = f.temporal_intervals().into_iter().map(|i| i.resolved().unwrap()).collect();
        assert_eq!(ivs, vec![(0, 8), (0, 3), (1, 2)]);
    }

    #[test]
    fn groundness() {
        assert!(Formula::prop("a").is_ground());
        assert!(!Formula::eventually(Interval::deadline_slot("t"), Formula::prop("a")).is_ground());
        let slot_arg = Formula::atom(Atom::prop_with("robotAt", vec![Arg::Slot("x".into()), Arg::Int(0)]));
        assert!(!slot_arg.is_ground());
    }
}

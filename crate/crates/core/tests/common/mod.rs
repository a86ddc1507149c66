//! Shared helpers for the integration tests: small traces, exhaustive and
//! random formula generators, and a brute-force evaluator that expands
//! temporal operators into plain conjunctions and disjunctions.
#![allow(dead_code)]

use rand::Rng;
use stl_dialogue::stl::{Atom, Comparator, Formula, Interval, MonitorError, TraceView};

pub const ATOMS: [&str; 2] = ["a", "b"];

/// Boolean trace over atoms `a` (bit 0) and `b` (bit 1), plus an optional
/// numeric signal `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallTrace {
    pub bits: Vec<u8>,
    pub x: Vec<f64>,
}

impl SmallTrace {
    pub fn boolean(bits: Vec<u8>) -> Self {
        let x = vec![0.0; bits.len()];
        SmallTrace { bits, x }
    }

    /// Every Boolean trace of length `len`, in counting order.
    pub fn all(len: usize) -> impl Iterator<Item = SmallTrace> {
        (0..1u32 << (2 * len)).map(move |code| {
            SmallTrace::boolean((0..len).map(|t| (code >> (2 * t) & 3) as u8).collect())
        })
    }

    pub fn prefix(&self, len: usize) -> SmallTrace {
        SmallTrace { bits: self.bits[..len].to_vec(), x: self.x[..len].to_vec() }
    }
}

impl TraceView for SmallTrace {
    fn len(&self) -> usize {
        self.bits.len()
    }

    fn holds(&self, t: usize, atom: &Atom) -> Result<bool, MonitorError> {
        let b = *self.bits.get(t).ok_or(MonitorError::TimeOutOfRange { t, len: self.bits.len() })?;
        match atom.name() {
            "a" => Ok(b & 1 == 1),
            "b" => Ok(b & 2 == 2),
            other => Err(MonitorError::MissingSignal(other.to_string())),
        }
    }

    fn signal(&self, t: usize, name: &str) -> Result<f64, MonitorError> {
        match name {
            "x" => self.x.get(t).copied().ok_or(MonitorError::TimeOutOfRange { t, len: self.x.len() }),
            _ => Err(MonitorError::MissingSignal(name.to_string())),
        }
    }
}

fn intervals(max_bound: u32) -> Vec<Interval> {
    let mut out = Vec::new();
    for lo in 0..=max_bound {
        for hi in lo..=max_bound {
            out.push(Interval::new(lo, hi).unwrap());
        }
    }
    out
}

/// Every formula over `a`, `b` with length in `1..=max_len`, plus `true`.
pub fn all_formulas(max_len: usize, max_bound: u32) -> Vec<Formula> {
    let ivs = intervals(max_bound);
    let mut by_len: Vec<Vec<Formula>> = vec![Vec::new(); max_len + 1];
    by_len[1] = ATOMS.iter().map(|a| Formula::prop(*a)).collect();
    for n in 2..=max_len {
        let mut here = Vec::new();
        for f in &by_len[n - 1] {
            here.push(Formula::not(f.clone()));
            for iv in &ivs {
                here.push(Formula::eventually(iv.clone(), f.clone()));
                here.push(Formula::always(iv.clone(), f.clone()));
            }
        }
        for k in 1..n - 1 {
            for l in &by_len[k] {
                for r in &by_len[n - 1 - k] {
                    here.push(Formula::and(l.clone(), r.clone()));
                    here.push(Formula::or(l.clone(), r.clone()));
                    here.push(Formula::implies(l.clone(), r.clone()));
                    for iv in &ivs {
                        here.push(Formula::until(iv.clone(), l.clone(), r.clone()));
                    }
                }
            }
        }
        by_len[n] = here;
    }
    let mut out = vec![Formula::True];
    out.extend(by_len.into_iter().flatten());
    out
}

/// A propositional formula over `(atom, time)` variables.
#[derive(Debug, Clone)]
pub enum Prop {
    Const(bool),
    Var(u8, usize),
    Not(Box<Prop>),
    All(Vec<Prop>),
    Any(Vec<Prop>),
}

/// Unrolls `phi` at time `t` over a trace of length `len`, straight from the
/// textbook definitions with windows clipped at the end of the trace.
pub fn expand(phi: &Formula, t: usize, len: usize) -> Prop {
    let window = |iv: &Interval| {
        let (lo, hi) = iv.resolved().expect("ground interval");
        (t + lo as usize)..=(t + hi as usize).min(len - 1)
    };
    match phi {
        Formula::True => Prop::Const(true),
        Formula::Atom(a) => Prop::Var(if a.name() == "a" { 1 } else { 2 }, t),
        Formula::Not(f) => Prop::Not(Box::new(expand(f, t, len))),
        Formula::And(a, b) => Prop::All(vec![expand(a, t, len), expand(b, t, len)]),
        Formula::Or(a, b) => Prop::Any(vec![expand(a, t, len), expand(b, t, len)]),
        Formula::Implies(a, b) => Prop::Any(vec![Prop::Not(Box::new(expand(a, t, len))), expand(b, t, len)]),
        Formula::Eventually(iv, f) => Prop::Any(window(iv).map(|s| expand(f, s, len)).collect()),
        Formula::Always(iv, f) => Prop::All(window(iv).map(|s| expand(f, s, len)).collect()),
        Formula::Until(iv, a, b) => Prop::Any(
            window(iv)
                .map(|s| {
                    let mut conj: Vec<Prop> = (t..s).map(|u| expand(a, u, len)).collect();
                    conj.push(expand(b, s, len));
                    Prop::All(conj)
                })
                .collect(),
        ),
    }
}

pub fn eval(p: &Prop, bits: &[u8]) -> bool {
    match p {
        Prop::Const(b) => *b,
        Prop::Var(mask, t) => bits[*t] & mask != 0,
        Prop::Not(q) => !eval(q, bits),
        Prop::All(qs) => qs.iter().all(|q| eval(q, bits)),
        Prop::Any(qs) => qs.iter().any(|q| eval(q, bits)),
    }
}

/// Random formula over `a`, `b` and `x <= c` / `x >= c`, at most `depth`
/// operators deep, intervals within `[0, 6]`.
pub fn random_formula<R: Rng>(rng: &mut R, depth: u32) -> Formula {
    let iv = |rng: &mut R| {
        let lo = rng.gen_range(0..4);
        Interval::new(lo, lo + rng.gen_range(0..4)).unwrap()
    };
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..5) {
            0 => Formula::prop("a"),
            1 => Formula::prop("b"),
            2 => Formula::atom(Atom::cmp("x", Comparator::Le, rng.gen_range(-2..=2) as f64 * 0.5)),
            3 => Formula::atom(Atom::cmp("x", Comparator::Ge, rng.gen_range(-2..=2) as f64 * 0.5)),
            _ => Formula::True,
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..7) {
        0 => Formula::not(random_formula(rng, d)),
        1 => Formula::and(random_formula(rng, d), random_formula(rng, d)),
        2 => Formula::or(random_formula(rng, d), random_formula(rng, d)),
        3 => Formula::implies(random_formula(rng, d), random_formula(rng, d)),
        4 => Formula::eventually(iv(rng), random_formula(rng, d)),
        5 => Formula::always(iv(rng), random_formula(rng, d)),
        _ => Formula::until(iv(rng), random_formula(rng, d), random_formula(rng, d)),
    }
}

pub fn random_trace<R: Rng>(rng: &mut R, max_len: usize) -> SmallTrace {
    let len = rng.gen_range(1..=max_len);
    SmallTrace {
        bits: (0..len).map(|_| rng.gen_range(0..4)).collect(),
        x: (0..len).map(|_| rng.gen_range(-8..=8) as f64 * 0.25).collect(),
    }
}

/// Counts `(checked, violations)` of robustness sign-soundness over `n`
/// seeded random pairs, each checked at every time index. Exact zeros are
/// skipped.
pub fn sign_soundness<R: Rng>(rng: &mut R, n: usize) -> (usize, usize) {
    use stl_dialogue::stl::{robustness, satisfies};
    let (mut checked, mut bad) = (0, 0);
    for _ in 0..n {
        let phi = random_formula(rng, 4);
        let tr = random_trace(rng, 8);
        for t in 0..tr.len() {
            let r = robustness(&phi, &tr, t).unwrap();
            let s = satisfies(&phi, &tr, t).unwrap();
            if r == 0.0 {
                continue;
            }
            checked += 1;
            if (r > 0.0) != s {
                bad += 1;
            }
        }
    }
    (checked, bad)
}

/// Exhaustive comparison of the monitor against [`expand`]; returns
/// `(cases, disagreements)`.
pub fn oracle_equivalence(max_len: usize, max_bound: u32, max_trace: usize) -> (usize, usize) {
    use stl_dialogue::stl::satisfies;
    let formulas = all_formulas(max_len, max_bound);
    let traces: Vec<Vec<SmallTrace>> = (1..=max_trace).map(|l| SmallTrace::all(l).collect()).collect();
    let (mut cases, mut bad) = (0, 0);
    for phi in &formulas {
        for (i, group) in traces.iter().enumerate() {
            let p = expand(phi, 0, i + 1);
            for tr in group {
                cases += 1;
                if satisfies(phi, tr, 0).unwrap() != eval(&p, &tr.bits) {
                    bad += 1;
                }
            }
        }
    }
    (cases, bad)
}

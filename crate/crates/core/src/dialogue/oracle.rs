use std::collections::BTreeSet;

use crate::nl::{tokenize, Lexicon};
use crate::stl::{Arg, Atom, Formula};
use crate::synthesis::{causal_witness, CausalDependency, DEFAULT_PROBE_HORIZON};

use super::question::{AnswerPayload, Question, QuestionKind};
use super::DialogueError;

/// Words ignored when matching a phrase against lexicon entries.
const STOPWORDS: &[&str] = &[
    "a", "an", "the", "to", "of", "on", "in", "into", "at", "up", "off", "and", "or", "then", "robot", "should", "must",
    "please", "you", "your", "yourself", "it", "don't", "dont", "do", "not", "never", "always", "is", "be", "with",
    "from", "for", "go", "get", "make", "sure", "that", "can", "will", "need", "needs", "have", "has", "first",
];

fn content_words(text: &str) -> BTreeSet<String> {
    tokenize(&text.to_lowercase())
        .into_iter()
        .filter(|w| w.chars().any(char::is_alphanumeric) && !STOPWORDS.contains(&w.as_str()))
        .collect()
}

/// Something that can answer clarification questions: the rule-based oracle
/// or a human behind the service. `Ok(None)` means "no answer yet".
pub trait Answerer {
    fn answer(&mut self, q: &Question) -> Result<Option<AnswerPayload>, DialogueError>;

    /// The formula the answers are drawn from, when known.
    fn ground_truth(&self) -> Option<&Formula> {
        None
    }
}

/// Answers every question from a hidden ground-truth formula.
#[derive(Debug, Clone)]
pub struct OracleUser {
    ground_truth: Formula,
    lexicon: Lexicon,
    pub probe_horizon: u32,
}

impl OracleUser {
    pub fn new(ground_truth: Formula, lexicon: Lexicon) -> Result<Self, DialogueError> {
        if !ground_truth.is_ground() {
            return Err(DialogueError::NotGround(ground_truth.to_string()));
        }
        Ok(OracleUser { ground_truth, lexicon, probe_horizon: DEFAULT_PROBE_HORIZON })
    }

    pub fn ground_truth(&self) -> &Formula {
        &self.ground_truth
    }

    /// Atoms of the ground truth in pre-order with their polarity; an atom
    /// directly under `¬` counts as negated.
    pub fn literals(&self) -> Vec<(&Atom, bool)> {
        fn walk<'a>(f: &'a Formula, out: &mut Vec<(&'a Atom, bool)>) {
            match f {
                Formula::True => {}
                Formula::Atom(a) => out.push((a, false)),
                Formula::Not(x) => match x.as_ref() {
                    Formula::Atom(a) => out.push((a, true)),
                    other => walk(other, out),
                },
                Formula::Eventually(_, x) | Formula::Always(_, x) => walk(x, out),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Until(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.ground_truth, &mut out);
        out
    }

    /// Canonical wording of a ground-truth literal.
    pub fn canonical_phrase(&self, atom: &str, negated: bool) -> Option<&str> {
        self.lexicon.canonical_phrase(atom, negated).or_else(|| self.lexicon.canonical_phrase(atom, false))
    }

    fn atom_named(&self, name: &str) -> Result<&Atom, DialogueError> {
        self.ground_truth
            .atoms()
            .into_iter()
            .find(|a| a.name() == name)
            .ok_or_else(|| DialogueError::AtomAbsent(name.to_string()))
    }

    /// Ground-truth literal whose lexicon phrases share the most content
    /// words with `phrase`; ties go to the earlier literal.
    fn intended_literal(&self, phrase: &str) -> Option<(&Atom, bool)> {
        let words = content_words(phrase);
        let mut best: Option<(usize, (&Atom, bool))> = None;
        for (atom, neg) in self.literals() {
            let score = self
                .lexicon
                .entries()
                .iter()
                .filter(|e| e.atom == atom.name())
                .map(|e| content_words(&e.phrase).intersection(&words).count())
                .max()
                .unwrap_or(0);
            if score > 0 && best.is_none_or(|(s, _)| score > s) {
                best = Some((score, (atom, neg)));
            }
        }
        best.map(|(_, l)| l)
    }

    pub fn answer_question(&self, q: &Question) -> Result<AnswerPayload, DialogueError> {
        match &q.kind {
            QuestionKind::TaskOrder { before, after } => {
                self.atom_named(before)?;
                self.atom_named(after)?;
                let dep = CausalDependency::new(before.clone(), after.clone());
                let witness = causal_witness(&self.ground_truth, &dep, self.probe_horizon)?;
                Ok(AnswerPayload::YesNo(witness.is_none()))
            }
            QuestionKind::AtomParam { atom, arg, .. } => {
                let Atom::Prop { args, .. } = self.atom_named(atom)? else {
                    return Err(DialogueError::AtomAbsent(atom.clone()));
                };
                match args.get(*arg) {
                    Some(Arg::Int(v)) => Ok(AnswerPayload::Value(*v)),
                    Some(Arg::Name(n)) => Ok(AnswerPayload::Item(n.clone())),
                    _ => Ok(AnswerPayload::NotApplicable),
                }
            }
            QuestionKind::OpParam { occurrence, .. } => {
                let intervals = self.ground_truth.temporal_intervals();
                match occurrence.checked_sub(1).and_then(|k| intervals.get(k)).and_then(|i| i.resolved()) {
                    Some((lo, hi)) => Ok(AnswerPayload::Window { lo, hi }),
                    None => Ok(AnswerPayload::NotApplicable),
                }
            }
            QuestionKind::Paraphrase { phrase, index } => {
                let Some((atom, neg)) = self.intended_literal(phrase) else {
                    return Ok(AnswerPayload::NotApplicable);
                };
                let text = match index {
                    Some(_) => self.canonical_phrase(atom.name(), neg).map(str::to_string),
                    None => self
                        .literals()
                        .into_iter()
                        .map(|(a, n)| self.canonical_phrase(a.name(), n).map(str::to_string))
                        .collect::<Option<Vec<_>>>()
                        .map(|v| v.join(" and ")),
                };
                Ok(text.map_or(AnswerPayload::NotApplicable, AnswerPayload::Phrase))
            }
        }
    }
}

/// The oracle's answer to `q`.
pub fn oracle_answer(q: &Question, o: &OracleUser) -> Result<AnswerPayload, DialogueError> {
    o.answer_question(q)
}

impl Answerer for OracleUser {
    /// Questions about atoms the ground truth lacks get "not applicable".
    fn answer(&mut self, q: &Question) -> Result<Option<AnswerPayload>, DialogueError> {
        match self.answer_question(q) {
            Ok(p) => Ok(Some(p)),
            Err(DialogueError::AtomAbsent(_)) => Ok(Some(AnswerPayload::NotApplicable)),
            Err(e) => Err(e),
        }
    }

    fn ground_truth(&self) -> Option<&Formula> {
        Some(&self.ground_truth)
    }
}

/// Replays a fixed list of answers in order, then stalls.
#[derive(Debug, Clone, Default)]
pub struct ScriptedAnswerer {
    pub answers: std::collections::VecDeque<AnswerPayload>,
}

impl Answerer for ScriptedAnswerer {
    fn answer(&mut self, _q: &Question) -> Result<Option<AnswerPayload>, DialogueError> {
        Ok(self.answers.pop_front())
    }
}

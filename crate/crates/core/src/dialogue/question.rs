use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum QuestionKind {
    /// Should `before` become true no later than `after`?
    TaskOrder { before: String, after: String },
    /// Argument `arg` (0-based) of `atom`, bound to `slot`.
    AtomParam { atom: String, slot: String, arg: usize },
    /// Interval of the `occurrence`-th temporal operator (1-based, pre-order).
    OpParam { occurrence: usize, slot: String },
    /// Rephrase a verb phrase; `index: None` means the whole instruction.
    Paraphrase { phrase: String, index: Option<usize> },
}

impl QuestionKind {
    /// Phase order: Paraphrase, TaskOrder, AtomParam, OpParam.
    pub fn phase(&self) -> u8 {
        match self {
            QuestionKind::Paraphrase { .. } => 0,
            QuestionKind::TaskOrder { .. } => 1,
            QuestionKind::AtomParam { .. } => 2,
            QuestionKind::OpParam { .. } => 3,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            QuestionKind::Paraphrase { .. } => "paraphrase",
            QuestionKind::TaskOrder { .. } => "taskOrder",
            QuestionKind::AtomParam { .. } => "atomParam",
            QuestionKind::OpParam { .. } => "opParam",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: usize,
    #[serde(flatten)]
    pub kind: QuestionKind,
    pub prompt: String,
}

impl Question {
    pub fn new(id: usize, kind: QuestionKind, single_deadline: bool) -> Self {
        let prompt = match &kind {
            QuestionKind::TaskOrder { before, after } => {
                format!("Should `{before}` be achieved before `{after}`? (yes/no)")
            }
            QuestionKind::AtomParam { atom, arg, .. } if atom == "itemOnRobot" || *arg == 0 && atom == "itemAt" => {
                format!("Which item do you mean for `{atom}`?")
            }
            QuestionKind::AtomParam { atom, arg, .. } => {
                let axis = if (atom == "itemAt" && *arg == 1) || (atom != "itemAt" && *arg == 0) { "x" } else { "y" };
                format!("What is the {axis} coordinate for `{atom}`?")
            }
            QuestionKind::OpParam { .. } if single_deadline => {
                "In how many seconds should the robot complete the task?".to_string()
            }
            QuestionKind::OpParam { occurrence, .. } => {
                format!("What is the time bound, in seconds, for temporal operator #{occurrence}?")
            }
            QuestionKind::Paraphrase { phrase, index: Some(_) } => {
                format!("I did not understand \"{phrase}\". Could you say it differently?")
            }
            QuestionKind::Paraphrase { phrase, index: None } => {
                format!("I could not find an action in \"{phrase}\". Could you rephrase the task?")
            }
        };
        Question { id, kind, prompt }
    }
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.id, self.prompt)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "camelCase")]
pub enum AnswerPayload {
    YesNo(bool),
    Window { lo: u32, hi: u32 },
    Value(i64),
    Item(String),
    Phrase(String),
    NotApplicable,
}

impl AnswerPayload {
    /// Whether this payload type is acceptable for `kind`.
    pub fn fits(&self, kind: &QuestionKind) -> bool {
        use AnswerPayload as A;
        match kind {
            QuestionKind::TaskOrder { .. } => matches!(self, A::YesNo(_) | A::NotApplicable),
            QuestionKind::AtomParam { slot, .. } => match self {
                A::Item(_) => slot.starts_with("item"),
                A::Value(_) => !slot.starts_with("item"),
                A::NotApplicable => true,
                _ => false,
            },
            QuestionKind::OpParam { .. } => matches!(self, A::Window { lo: 0, .. } | A::NotApplicable),
            QuestionKind::Paraphrase { .. } => matches!(self, A::Phrase(p) if !p.trim().is_empty())
                || matches!(self, A::NotApplicable),
        }
    }

    /// Reads a free-text reply in the form `kind` expects: yes/no, a number
    /// of seconds ("15", "15 seconds", "[0,15]"), an integer, an item name or
    /// a phrase. "n/a" and "skip" give `NotApplicable`.
    pub fn parse_for(kind: &QuestionKind, text: &str) -> Option<AnswerPayload> {
        let t = text.trim();
        let lower = t.to_lowercase();
        if matches!(lower.as_str(), "n/a" | "na" | "skip" | "not applicable") {
            return Some(AnswerPayload::NotApplicable);
        }
        match kind {
            QuestionKind::TaskOrder { .. } => match lower.as_str() {
                "y" | "yes" | "true" => Some(AnswerPayload::YesNo(true)),
                "n" | "no" | "false" => Some(AnswerPayload::YesNo(false)),
                _ => None,
            },
            QuestionKind::OpParam { .. } => {
                let nums: Vec<u32> = lower
                    .split(|c: char| !c.is_ascii_digit())
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<_, _>>()
                    .ok()?;
                match nums.as_slice() {
                    [hi] => Some(AnswerPayload::Window { lo: 0, hi: *hi }),
                    [0, hi] => Some(AnswerPayload::Window { lo: 0, hi: *hi }),
                    _ => None,
                }
            }
            QuestionKind::AtomParam { slot, .. } if slot.starts_with("item") => {
                (!t.is_empty()).then(|| AnswerPayload::Item(t.to_string()))
            }
            QuestionKind::AtomParam { .. } => t.parse().ok().map(AnswerPayload::Value),
            QuestionKind::Paraphrase { .. } => (!t.is_empty()).then(|| AnswerPayload::Phrase(t.to_string())),
        }
    }
}

impl fmt::Display for AnswerPayload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnswerPayload::YesNo(b) => f.write_str(if *b { "yes" } else { "no" }),
            AnswerPayload::Window { lo, hi } => write!(f, "[{lo},{hi}]"),
            AnswerPayload::Value(v) => write!(f, "{v}"),
            AnswerPayload::Item(s) | AnswerPayload::Phrase(s) => f.write_str(s),
            AnswerPayload::NotApplicable => f.write_str("n/a"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Answer {
    pub question_id: usize,
    pub payload: AnswerPayload,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub question: Question,
    pub answer: AnswerPayload,
}

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::NlError;

pub const DEFAULT_TAGGER: &str = include_str!("../../data/tagger.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Tag {
    Verb,
    Noun,
    Adj,
    Adv,
    Conj,
    Prep,
    Num,
    Other,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::Verb => "VERB",
            Tag::Noun => "NOUN",
            Tag::Adj => "ADJ",
            Tag::Adv => "ADV",
            Tag::Conj => "CONJ",
            Tag::Prep => "PREP",
            Tag::Num => "NUM",
            Tag::Other => "OTHER",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedToken {
    pub token: String,
    pub tag: Tag,
}

impl TaggedToken {
    pub fn is_punct(&self) -> bool {
        !self.token.chars().any(|c| c.is_alphanumeric())
    }
}

#[derive(Debug, Clone, Deserialize)]
struct WordLists {
    conjunctions: Vec<String>,
    adverbs: Vec<String>,
    #[serde(default)]
    negating_adverbs: Vec<String>,
    determiners: Vec<String>,
    other: Vec<String>,
    prepositions: Vec<String>,
    adjectives: Vec<String>,
    verbs: Vec<String>,
}

/// Closed-class word lists plus a verb lexicon.
#[derive(Debug, Clone)]
pub struct Tagger {
    conjunctions: HashSet<String>,
    adverbs: HashSet<String>,
    negating_adverbs: HashSet<String>,
    determiners: HashSet<String>,
    other: HashSet<String>,
    prepositions: HashSet<String>,
    adjectives: HashSet<String>,
    verbs: HashSet<String>,
}

impl Default for Tagger {
    fn default() -> Self {
        Tagger::from_toml(DEFAULT_TAGGER).expect("shipped tagger lists are valid")
    }
}

/// Splits on whitespace; punctuation other than apostrophes becomes its own
/// token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        let c = if c == '’' { '\'' } else { c };
        if c.is_alphanumeric() || c == '\'' || c == '_' {
            cur.push(c);
        } else {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

impl Tagger {
    pub fn from_toml(text: &str) -> Result<Self, NlError> {
        let w: WordLists = toml::from_str(text).map_err(|e| NlError::Data(format!("tagger lists: {e}")))?;
        let set = |v: Vec<String>| v.into_iter().map(|s| s.to_lowercase()).collect::<HashSet<_>>();
        Ok(Tagger {
            conjunctions: set(w.conjunctions),
            adverbs: set(w.adverbs),
            negating_adverbs: set(w.negating_adverbs),
            determiners: set(w.determiners),
            other: set(w.other),
            prepositions: set(w.prepositions),
            adjectives: set(w.adjectives),
            verbs: set(w.verbs),
        })
    }

    pub fn is_negating_adverb(&self, word: &str) -> bool {
        self.negating_adverbs.contains(&word.to_lowercase())
    }

    pub fn is_determiner(&self, word: &str) -> bool {
        self.determiners.contains(&word.to_lowercase())
    }

    fn tag_word(&self, word: &str, prev_is_determiner: bool) -> Tag {
        let w = word.to_lowercase();
        if w.chars().all(|c| c.is_ascii_digit()) {
            Tag::Num
        } else if !w.chars().any(char::is_alphanumeric) {
            Tag::Other
        } else if self.conjunctions.contains(&w) {
            Tag::Conj
        } else if self.adverbs.contains(&w) {
            Tag::Adv
        } else if self.determiners.contains(&w) || self.other.contains(&w) {
            Tag::Other
        } else if self.prepositions.contains(&w) {
            Tag::Prep
        } else if self.adjectives.contains(&w) {
            Tag::Adj
        } else if self.verbs.contains(&w) && !prev_is_determiner {
            Tag::Verb
        } else {
            Tag::Noun
        }
    }

    pub fn tag_tokens(&self, utterance: &str) -> Result<Vec<TaggedToken>, NlError> {
        let tokens = tokenize(utterance);
        if tokens.is_empty() {
            return Err(NlError::EmptyInput);
        }
        let mut out: Vec<TaggedToken> = Vec::with_capacity(tokens.len());
        for tok in tokens {
            let prev_det = out.last().is_some_and(|p| self.is_determiner(&p.token));
            let tag = self.tag_word(&tok, prev_det);
            out.push(TaggedToken { token: tok, tag });
        }
        Ok(out)
    }
}

//! Natural-language front end: tagging, verb-phrase splitting, phrase to
//! atom retrieval, connective to operator mapping and parameter extraction.

pub mod lexicon;
pub mod operators;
pub mod params;
pub mod split;
pub mod tagger;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::synthesis::Op;

pub use lexicon::{evaluate_lexicon, normalize_phrase, parse_entries, AtomPrediction, LexEntry, Lexicon, DEFAULT_LEXICON, HELDOUT_LEXICON};
pub use operators::OperatorModel;
pub use params::{Mentions, ParamExtractor, ParamTarget};
pub use split::{split, SplitResult, VerbPhrase};
pub use tagger::{tokenize, Tag, TaggedToken, Tagger};

#[derive(Debug, Error)]
pub enum NlError {
    #[error("empty input")]
    EmptyInput,
    #[error("no verb found in the instruction")]
    NoVerb,
    #[error("lexicon has no entries")]
    EmptyLexicon,
    #[error("held-out set is empty")]
    EmptyHeldOut,
    #[error("{0}")]
    Data(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhraseAnalysis {
    pub phrase: VerbPhrase,
    pub prediction: AtomPrediction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub utterance: String,
    pub phrases: Vec<PhraseAnalysis>,
    pub conjunctions: Vec<String>,
    pub adverbs: Vec<String>,
    pub operators: Vec<Op>,
}

/// Tagger, lexicon, operator model and parameter extractor together.
#[derive(Debug, Clone, Default)]
pub struct Frontend {
    pub tagger: Tagger,
    pub lexicon: Lexicon,
    pub operators: OperatorModel,
    pub params: ParamExtractor,
}

impl Frontend {
    /// Prediction for a phrase; a preceding "never" or a negation before the
    /// verb makes it negated.
    pub fn predict_phrase(&self, phrase: &VerbPhrase) -> AtomPrediction {
        let mut p = self.lexicon.predict_atom(&phrase.core_text());
        p.negated |= phrase.negated || phrase.has_negation();
        p
    }

    pub fn analyze(&self, utterance: &str) -> Result<Analysis, NlError> {
        let tokens = self.tagger.tag_tokens(utterance)?;
        let s = split(&tokens, &self.tagger)?;
        let phrases = s
            .phrases
            .into_iter()
            .map(|phrase| PhraseAnalysis { prediction: self.predict_phrase(&phrase), phrase })
            .collect();
        Ok(Analysis {
            utterance: utterance.to_string(),
            phrases,
            operators: self.operators.predict_operators(&s.conjunctions, &s.adverbs),
            conjunctions: s.conjunctions,
            adverbs: s.adverbs,
        })
    }
}

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::NlError;

pub const DEFAULT_LEXICON: &str = include_str!("../../data/lexicon.tsv");
pub const HELDOUT_LEXICON: &str = include_str!("../../data/lexicon_heldout.tsv");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexEntry {
    pub phrase: String,
    pub atom: String,
    pub negated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomPrediction {
    pub atom: String,
    pub negated: bool,
    pub confidence: f64,
}

pub fn normalize_phrase(s: &str) -> String {
    s.to_lowercase().replace('’', "'").split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parses `phrase<TAB>atom<TAB>negated` lines; `#` starts a comment line.
pub fn parse_entries(text: &str) -> Result<Vec<LexEntry>, NlError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let bad = |msg: &str| NlError::Data(format!("lexicon line {}: {msg}", i + 1));
        if cols.len() != 3 {
            return Err(bad("expected 3 tab-separated columns"));
        }
        let negated = match cols[2].trim() {
            "true" => true,
            "false" => false,
            _ => return Err(bad("negated must be true or false")),
        };
        out.push(LexEntry { phrase: normalize_phrase(cols[0]), atom: cols[1].trim().to_string(), negated });
    }
    Ok(out)
}

fn features(text: &str) -> BTreeMap<String, f64> {
    let mut tf = BTreeMap::new();
    let norm = normalize_phrase(text);
    for w in norm.split(' ').filter(|w| !w.is_empty()) {
        *tf.entry(format!("w:{w}")).or_insert(0.0) += 1.0;
    }
    let padded: Vec<char> = format!(" {norm} ").chars().collect();
    for win in padded.windows(3) {
        *tf.entry(format!("c:{}", win.iter().collect::<String>())).or_insert(0.0) += 1.0;
    }
    tf
}

/// Phrase → atom lexicon with a TF-IDF index over character trigrams and
/// word unigrams.
#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: Vec<LexEntry>,
    idf: BTreeMap<String, f64>,
    unseen_idf: f64,
    vectors: Vec<BTreeMap<String, f64>>,
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon::from_tsv(DEFAULT_LEXICON).expect("shipped lexicon is valid")
    }
}

impl Lexicon {
    pub fn from_tsv(text: &str) -> Result<Self, NlError> {
        Lexicon::new(parse_entries(text)?)
    }

    pub fn new(entries: Vec<LexEntry>) -> Result<Self, NlError> {
        if entries.is_empty() {
            return Err(NlError::EmptyLexicon);
        }
        let mut seen = BTreeMap::new();
        for e in &entries {
            if let Some(prev) = seen.insert(e.phrase.clone(), (&e.atom, e.negated)) {
                if prev != (&e.atom, e.negated) {
                    return Err(NlError::Data(format!("phrase `{}` has conflicting labels", e.phrase)));
                }
            }
        }
        let n = entries.len() as f64;
        let mut df: BTreeMap<String, f64> = BTreeMap::new();
        let tfs: Vec<_> = entries.iter().map(|e| features(&e.phrase)).collect();
        for tf in &tfs {
            for k in tf.keys() {
                *df.entry(k.clone()).or_insert(0.0) += 1.0;
            }
        }
        let idf: BTreeMap<String, f64> =
            df.into_iter().map(|(k, d)| (k, ((1.0 + n) / (1.0 + d)).ln() + 1.0)).collect();
        let unseen_idf = (1.0 + n).ln() + 1.0;
        let mut lex = Lexicon { entries, idf, unseen_idf, vectors: Vec::new() };
        lex.vectors = tfs.into_iter().map(|tf| lex.weigh(tf)).collect();
        Ok(lex)
    }

    pub fn entries(&self) -> &[LexEntry] {
        &self.entries
    }

    pub fn atoms(&self) -> BTreeSet<&str> {
        self.entries.iter().map(|e| e.atom.as_str()).collect()
    }

    /// First entry for each `(atom, negated)` label.
    pub fn canonical_phrase(&self, atom: &str, negated: bool) -> Option<&str> {
        self.entries.iter().find(|e| e.atom == atom && e.negated == negated).map(|e| e.phrase.as_str())
    }

    fn weigh(&self, tf: BTreeMap<String, f64>) -> BTreeMap<String, f64> {
        let mut v: BTreeMap<String, f64> =
            tf.into_iter().map(|(k, c)| {
                let w = self.idf.get(&k).copied().unwrap_or(self.unseen_idf);
                (k, c * w)
            }).collect();
        let norm = v.values().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.values_mut().for_each(|x| *x /= norm);
        }
        v
    }

    fn cosine(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
        let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        small.iter().filter_map(|(k, x)| large.get(k).map(|y| x * y)).sum::<f64>().clamp(0.0, 1.0)
    }

    /// Best-matching entry by cosine similarity; ties go to the
    /// lexicographically smaller atom name, then to the non-negated label.
    pub fn predict_atom(&self, phrase: &str) -> AtomPrediction {
        let q = self.weigh(features(phrase));
        let mut best: Option<(f64, &LexEntry)> = None;
        for (e, v) in self.entries.iter().zip(&self.vectors) {
            let s = Lexicon::cosine(&q, v);
            best = match best {
                None => Some((s, e)),
                Some((bs, be)) => {
                    let better = s > bs + 1e-12
                        || ((s - bs).abs() <= 1e-12 && (e.atom.as_str(), e.negated) < (be.atom.as_str(), be.negated));
                    if better {
                        Some((s, e))
                    } else {
                        Some((bs, be))
                    }
                }
            };
        }
        let (score, e) = best.expect("lexicon is non-empty");
        AtomPrediction { atom: e.atom.clone(), negated: e.negated, confidence: score }
    }
}

/// Fraction of held-out phrases whose predicted atom and polarity match
/// their label.
pub fn evaluate_lexicon(held_out: &[LexEntry], lexicon: &Lexicon) -> Result<f64, NlError> {
    if held_out.is_empty() {
        return Err(NlError::EmptyHeldOut);
    }
    let hits = held_out
        .iter()
        .filter(|e| {
            let p = lexicon.predict_atom(&e.phrase);
            p.atom == e.atom && p.negated == e.negated
        })
        .count();
    Ok(hits as f64 / held_out.len() as f64)
}

use std::collections::{BTreeMap, HashMap};

use crate::synthesis::Op;

use super::NlError;

pub const DEFAULT_OP_WORDS: &str = include_str!("../../data/op_words.tsv");
pub const DEFAULT_WORD_VECTORS: &str = include_str!("../../data/word_vectors.txt");

/// Maps connective words and adverbs to operators by cosine similarity
/// against each operator's mean word vector.
#[derive(Debug, Clone)]
pub struct OperatorModel {
    vectors: HashMap<String, Vec<f64>>,
    means: BTreeMap<Op, Vec<f64>>,
}

impl Default for OperatorModel {
    fn default() -> Self {
        OperatorModel::from_text(DEFAULT_OP_WORDS, DEFAULT_WORD_VECTORS).expect("shipped operator data is valid")
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

impl OperatorModel {
    /// `op_words`: `operator<TAB>word` lines. `vectors`: `word v1 v2 …` lines,
    /// all of the same width. Multiword keys join words with `_`.
    pub fn from_text(op_words: &str, vectors: &str) -> Result<Self, NlError> {
        let mut vecs: HashMap<String, Vec<f64>> = HashMap::new();
        let mut width = None;
        for (i, line) in vectors.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts.next().expect("non-empty line").to_lowercase();
            let v: Vec<f64> = parts
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|e| NlError::Data(format!("word vectors line {}: {e}", i + 1)))?;
            if *width.get_or_insert(v.len()) != v.len() || v.is_empty() {
                return Err(NlError::Data(format!("word vectors line {}: inconsistent width", i + 1)));
            }
            vecs.insert(word, v);
        }
        let mut sums: BTreeMap<Op, (Vec<f64>, usize)> = BTreeMap::new();
        for (i, line) in op_words.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: String| NlError::Data(format!("operator words line {}: {m}", i + 1));
            let (op, word) = line.split_once('\t').ok_or_else(|| bad("expected two columns".into()))?;
            let op = Op::from_symbol(op.trim()).ok_or_else(|| bad(format!("unknown operator `{op}`")))?;
            let key = word.trim().to_lowercase();
            let v = vecs.get(&key).ok_or_else(|| bad(format!("no vector for `{key}`")))?;
            let e = sums.entry(op).or_insert_with(|| (vec![0.0; v.len()], 0));
            e.0.iter_mut().zip(v).for_each(|(s, x)| *s += x);
            e.1 += 1;
        }
        for op in Op::ALL {
            if !sums.contains_key(&op) {
                return Err(NlError::Data(format!("operator {op} has no words")));
            }
        }
        let means = sums.into_iter().map(|(op, (s, n))| (op, s.into_iter().map(|x| x / n as f64).collect())).collect();
        Ok(OperatorModel { vectors: vecs, means })
    }

    /// Operator closest to `word`, or `None` for words without a vector. A
    /// multiword connective without its own vector falls back to its first
    /// word that has one.
    pub fn classify(&self, word: &str) -> Option<Op> {
        let key = word.trim().to_lowercase().replace(' ', "_");
        let Some(v) = self.vectors.get(&key) else {
            return key.split('_').filter(|w| !w.is_empty() && *w != key).find_map(|w| self.classify(w));
        };
        let mut best: Option<(f64, Op)> = None;
        for (op, m) in &self.means {
            let s = cosine(v, m);
            if best.is_none_or(|(bs, _)| s > bs) {
                best = Some((s, *op));
            }
        }
        best.map(|(_, op)| op)
    }

    /// Operators for the connectives then the adverbs, deduplicated in first
    /// occurrence order, with `F` always appended.
    pub fn predict_operators(&self, conjunctions: &[String], adverbs: &[String]) -> Vec<Op> {
        let mut out = Vec::new();
        for w in conjunctions.iter().chain(adverbs) {
            if let Some(op) = self.classify(w) {
                if !out.contains(&op) {
                    out.push(op);
                }
            }
        }
        if !out.contains(&Op::Eventually) {
            out.push(Op::Eventually);
        }
        out
    }
}

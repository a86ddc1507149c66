//! Batch evaluation: every suite row is run once per paraphrase with the
//! oracle answering, and the results are averaged per row.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dialogue::{run_pipeline, DemoEntry, DialogueError, OracleUser, SessionConfig};
use crate::nl::Frontend;
use crate::stl::{parse_formula_with, ParseError};
use crate::world::{GridSpec, WorldError, WorldVocabulary};

pub const DEFAULT_SUITE: &str = include_str!("../data/experiment/suite.toml");
pub const DEFAULT_PARAPHRASES: &str = include_str!("../data/experiment/paraphrases.toml");

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("suite file: {0}")]
    Suite(String),
    #[error("row \"{nl}\": ground truth: {source}")]
    GroundTruth { nl: String, source: ParseError },
    #[error("row \"{nl}\": demo {index}: {source}")]
    Demo { nl: String, index: usize, source: WorldError },
    #[error("row \"{0}\" has no paraphrases")]
    NoParaphrases(String),
    #[error(transparent)]
    Dialogue(#[from] DialogueError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type FixtureDemo = DemoEntry;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SuiteRow {
    #[serde(rename = "type")]
    pub kind: String,
    pub nl: String,
    pub ground_truth: String,
    #[serde(default)]
    pub paper_uis: Option<f64>,
    pub demos: Vec<FixtureDemo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suite {
    #[serde(default)]
    pub rows: Vec<SuiteRow>,
}

impl Default for Suite {
    fn default() -> Self {
        Suite::from_toml(DEFAULT_SUITE).expect("shipped suite is valid")
    }
}

impl Suite {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::Suite(e.to_string()))
    }
}

#[derive(Debug, Clone, Deserialize)]
struct ParaphraseSet {
    nl: String,
    paraphrases: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
struct ParaphraseFile {
    set: Vec<ParaphraseSet>,
}

/// Paraphrases keyed by the instruction they rephrase.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParaphraseCorpus(pub BTreeMap<String, Vec<String>>);

impl ParaphraseCorpus {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let f: ParaphraseFile = toml::from_str(text).map_err(|e| ExperimentError::Suite(format!("paraphrases: {e}")))?;
        Ok(ParaphraseCorpus(f.set.into_iter().map(|s| (s.nl, s.paraphrases)).collect()))
    }

    pub fn shipped() -> Self {
        ParaphraseCorpus::from_toml(DEFAULT_PARAPHRASES).expect("shipped paraphrases are valid")
    }

    pub fn get(&self, nl: &str) -> Option<&[String]> {
        self.0.get(nl).map(Vec::as_slice)
    }
}

/// One run of one paraphrase.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunRecord {
    pub paraphrase: String,
    pub prediction: Option<String>,
    pub success: bool,
    pub enumerated_formulas: usize,
    pub user_interactions: usize,
    pub runtime_seconds: f64,
}

pub const CSV_COLUMNS: [&str; 8] = [
    "type",
    "nl",
    "nDemos",
    "enumeratedFormulas",
    "userInteractions",
    "successRate",
    "runtimeSeconds",
    "mostFrequentPrediction",
];

/// Per-row aggregate, in the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowResult {
    #[serde(rename = "type")]
    pub kind: String,
    pub nl: String,
    #[serde(rename = "nDemos")]
    pub n_demos: usize,
    #[serde(rename = "enumeratedFormulas")]
    pub enumerated_formulas: f64,
    #[serde(rename = "userInteractions")]
    pub user_interactions: f64,
    #[serde(rename = "successRate")]
    pub success_rate: f64,
    #[serde(rename = "runtimeSeconds")]
    pub runtime_seconds: f64,
    #[serde(rename = "mostFrequentPrediction")]
    pub most_frequent_prediction: String,
    #[serde(skip)]
    pub paper_uis: Option<f64>,
    #[serde(skip)]
    pub runs: Vec<RunRecord>,
}

impl RowResult {
    pub fn successes(&self) -> usize {
        self.runs.iter().filter(|r| r.success).count()
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

pub fn run_row(
    row: &SuiteRow,
    paraphrases: &[String],
    fe: &Frontend,
    grid: &GridSpec,
    config: &SessionConfig,
) -> Result<RowResult, ExperimentError> {
    if paraphrases.is_empty() {
        return Err(ExperimentError::NoParaphrases(row.nl.clone()));
    }
    let gt = parse_formula_with(&row.ground_truth, &WorldVocabulary)
        .map_err(|source| ExperimentError::GroundTruth { nl: row.nl.clone(), source })?;
    let mut demos = Vec::new();
    for (index, d) in row.demos.iter().enumerate() {
        let wrap = |source| ExperimentError::Demo { nl: row.nl.clone(), index, source };
        demos.push(d.record(grid).map_err(wrap)?);
    }
    let mut runs = Vec::new();
    for p in paraphrases {
        let mut oracle = OracleUser::new(gt.clone(), fe.lexicon.clone())?;
        oracle.probe_horizon = config.probe_horizon;
        let (f, session) = run_pipeline(p, &demos, &mut oracle, fe, grid, config.clone())?;
        runs.push(RunRecord {
            paraphrase: p.clone(),
            prediction: f.map(|f| f.to_string()),
            success: session.metrics.success == Some(true),
            enumerated_formulas: session.metrics.enumerated_formulas.unwrap_or(0),
            user_interactions: session.metrics.user_interactions,
            runtime_seconds: session.metrics.runtime_seconds,
        });
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &runs {
        *counts.entry(r.prediction.as_deref().unwrap_or("none")).or_insert(0) += 1;
    }
    // Highest count; ties go to the prediction seen first.
    let top = counts.values().copied().max().unwrap_or(0);
    let most_frequent = runs
        .iter()
        .map(|r| r.prediction.as_deref().unwrap_or("none"))
        .find(|p| counts[p] == top)
        .unwrap_or("none")
        .to_string();
    Ok(RowResult {
        kind: row.kind.clone(),
        nl: row.nl.clone(),
        n_demos: row.demos.len(),
        enumerated_formulas: mean(runs.iter().map(|r| r.enumerated_formulas as f64)),
        user_interactions: mean(runs.iter().map(|r| r.user_interactions as f64)),
        success_rate: mean(runs.iter().map(|r| if r.success { 1.0 } else { 0.0 })),
        runtime_seconds: mean(runs.iter().map(|r| r.runtime_seconds)),
        most_frequent_prediction: most_frequent,
        paper_uis: row.paper_uis,
        runs,
    })
}

pub fn run_suite(
    suite: &Suite,
    corpus: &ParaphraseCorpus,
    fe: &Frontend,
    grid: &GridSpec,
    config: &SessionConfig,
) -> Result<Vec<RowResult>, ExperimentError> {
    suite
        .rows
        .iter()
        .map(|row| {
            let ps = corpus.get(&row.nl).ok_or_else(|| ExperimentError::NoParaphrases(row.nl.clone()))?;
            run_row(row, ps, fe, grid, config)
        })
        .collect()
}

/// Exact-match success over all runs of all rows.
pub fn overall_success_rate(results: &[RowResult]) -> f64 {
    let total: usize = results.iter().map(|r| r.runs.len()).sum();
    let ok: usize = results.iter().map(RowResult::successes).sum();
    if total == 0 {
        0.0
    } else {
        ok as f64 / total as f64
    }
}

pub fn write_csv<W: Write>(results: &[RowResult], w: W) -> Result<(), ExperimentError> {
    let mut out = csv::Writer::from_writer(w);
    if results.is_empty() {
        out.write_record(CSV_COLUMNS)?;
    }
    for r in results {
        out.serialize(r)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

//! Answer scoring: text overlap metrics plus page-citation rate and
//! accuracy, aggregated per run configuration.

mod metrics;
mod pages;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm_gateway::Gateway;

pub use metrics::{
    embedding_f1, meteor, rouge_l, rouge_lsum, rouge_n, text_metrics, tokenize, BleuStats, Prf, TextScores,
    METEOR_ALPHA, METEOR_BETA, METEOR_GAMMA,
};
pub use pages::{extract_page_refs, page_counts_one, page_metrics, PageCounts, PageRef};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{file} line {line}: {reason}")]
    Parse { file: String, line: usize, reason: String },
    #[error("{0} is empty")]
    Empty(String),
    #[error("duplicate id {id} in {file}")]
    DuplicateId { file: String, id: String },
    #[error("reference {0} has no gold pages")]
    NoGoldPages(String),
    #[error("id mismatch for run {run}: missing {missing:?}, unknown {unknown:?}")]
    IdMismatch { run: String, missing: Vec<String>, unknown: Vec<String> },
    #[error("embedding service: {0}")]
    Embedding(String),
}

/// One reference line. `references` adds alternative reference answers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRecord {
    pub id: String,
    pub answer: String,
    #[serde(default)]
    pub references: Vec<String>,
    pub pages: Vec<u32>,
}

/// One prediction line; the run fields select the report row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub answer: String,
    #[serde(default = "default_window")]
    pub window: String,
    #[serde(default)]
    pub reiteration: bool,
    #[serde(default)]
    pub finder: bool,
}

fn default_window() -> String {
    "none".into()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RunKey {
    pub window: String,
    pub reiteration: bool,
    pub finder: bool,
}

impl RunKey {
    fn label(&self) -> String {
        format!("window={} reiteration={} finder={}", self.window, self.reiteration, self.finder)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub bleu_1: f64,
    pub bleu_2: f64,
    pub bleu_3: f64,
    pub bleu_4: f64,
    pub meteor: f64,
    pub rouge_1: f64,
    pub rouge_2: f64,
    pub rouge_l: f64,
    pub rouge_lsum: f64,
    /// Absent unless an embedding service was configured.
    pub bertscore: Option<f64>,
    pub page_generation_rate: f64,
    pub page_accuracy: f64,
    pub counts: PageCounts,
    pub flags: Vec<String>,
}

/// Mean that does not depend on input order: values are summed in sorted
/// order so a permuted run reproduces the report bit for bit.
fn stable_mean(mut values: Vec<f64>) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

/// Per-example scores for aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleScore {
    pub text: TextScores,
    pub pages: PageCounts,
    pub bertscore: Option<f64>,
}

pub fn score_example(answer: &str, reference: &ReferenceRecord) -> ExampleScore {
    let mut refs = vec![reference.answer.clone()];
    refs.extend(reference.references.iter().cloned());
    let gold: BTreeSet<u32> = reference.pages.iter().copied().collect();
    ExampleScore { text: text_metrics(answer, &refs), pages: page_counts_one(answer, &gold), bertscore: None }
}

/// Corpus-level BLEU from summed statistics; every other text metric is
/// the mean of per-example values.
pub fn aggregate(examples: &[ExampleScore]) -> MetricReport {
    let mut bleu = BleuStats::default();
    let mut counts = PageCounts::default();
    for e in examples {
        bleu.add(&e.text.bleu);
        counts.add(&e.pages);
    }
    let mean = |f: fn(&TextScores) -> f64| stable_mean(examples.iter().map(|e| f(&e.text)).collect());
    let bert: Vec<f64> = examples.iter().filter_map(|e| e.bertscore).collect();
    let mut flags = Vec::new();
    let empty = examples.iter().filter(|e| e.text.empty_candidate).count();
    if empty > 0 {
        flags.push(format!("empty_candidates={empty}"));
    }
    if counts.n_with_refs == 0 {
        flags.push("no_page_references".into());
    }
    MetricReport {
        bleu_1: bleu.bleu(1),
        bleu_2: bleu.bleu(2),
        bleu_3: bleu.bleu(3),
        bleu_4: bleu.bleu(4),
        meteor: mean(|t| t.meteor),
        rouge_1: mean(|t| t.rouge_1),
        rouge_2: mean(|t| t.rouge_2),
        rouge_l: mean(|t| t.rouge_l),
        rouge_lsum: mean(|t| t.rouge_lsum),
        bertscore: (!bert.is_empty() && bert.len() == examples.len()).then(|| stable_mean(bert)),
        page_generation_rate: counts.generation_rate(),
        page_accuracy: counts.accuracy(),
        counts,
        flags,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub key: RunKey,
    pub report: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub rows: Vec<ReportRow>,
}

const COLUMNS: [&str; 16] = [
    "window",
    "reiteration",
    "finder",
    "bleu_1",
    "bleu_2",
    "bleu_3",
    "bleu_4",
    "meteor",
    "rouge_1",
    "rouge_2",
    "rouge_l",
    "rouge_lsum",
    "bertscore",
    "page_generation_rate",
    "page_accuracy",
    "n_examples",
];

impl RunReport {
    fn cells(row: &ReportRow) -> Vec<String> {
        let r = &row.report;
        let f = |x: f64| format!("{x:.4}");
        vec![
            row.key.window.clone(),
            row.key.reiteration.to_string(),
            row.key.finder.to_string(),
            f(r.bleu_1),
            f(r.bleu_2),
            f(r.bleu_3),
            f(r.bleu_4),
            f(r.meteor),
            f(r.rouge_1),
            f(r.rouge_2),
            f(r.rouge_l),
            f(r.rouge_lsum),
            r.bertscore.map(f).unwrap_or_default(),
            f(r.page_generation_rate),
            f(r.page_accuracy),
            r.counts.n_examples.to_string(),
        ]
    }

    pub fn to_csv(&self) -> String {
        let mut out = COLUMNS.join(",") + "\n";
        for row in &self.rows {
            out += &(Self::cells(row).join(",") + "\n");
        }
        out
    }

    /// Whitespace-aligned table, one row per run configuration.
    pub fn to_table(&self) -> String {
        let rows: Vec<Vec<String>> = self.rows.iter().map(Self::cells).collect();
        let widths: Vec<usize> = (0..COLUMNS.len())
            .map(|c| rows.iter().map(|r| r[c].len()).chain([COLUMNS[c].len()]).max().unwrap_or(0))
            .collect();
        let line = |cells: Vec<&str>| {
            let mut s = String::new();
            for (i, c) in cells.iter().enumerate() {
                let _ = write!(s, "{}{:<w$}", if i == 0 { "" } else { "  " }, c, w = widths[i]);
            }
            s.trim_end().to_string() + "\n"
        };
        let mut out = line(COLUMNS.to_vec());
        for r in &rows {
            out += &line(r.iter().map(String::as_str).collect());
        }
        out
    }
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, EvalError> {
    let name = path.display().to_string();
    let f = std::fs::File::open(path).map_err(|source| EvalError::Io { path: name.clone(), source })?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|source| EvalError::Io { path: name.clone(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| EvalError::Parse { file: name.clone(), line: i + 1, reason: e.to_string() })?,
        );
    }
    Ok(out)
}

/// Score predictions against references. Every run configuration present
/// in the predictions must answer exactly the reference ids.
pub fn evaluate_records(
    predictions: &[PredictionRecord],
    references: &[ReferenceRecord],
    embedder: Option<&dyn Gateway>,
) -> Result<RunReport, EvalError> {
    if predictions.is_empty() {
        return Err(EvalError::Empty("predictions".into()));
    }
    if references.is_empty() {
        return Err(EvalError::Empty("references".into()));
    }
    let mut refs: BTreeMap<&str, &ReferenceRecord> = BTreeMap::new();
    for r in references {
        if r.pages.is_empty() {
            return Err(EvalError::NoGoldPages(r.id.clone()));
        }
        if refs.insert(&r.id, r).is_some() {
            return Err(EvalError::DuplicateId { file: "references".into(), id: r.id.clone() });
        }
    }
    let mut runs: BTreeMap<RunKey, BTreeMap<&str, &PredictionRecord>> = BTreeMap::new();
    for p in predictions {
        let key = RunKey { window: p.window.clone(), reiteration: p.reiteration, finder: p.finder };
        if runs.entry(key).or_default().insert(&p.id, p).is_some() {
            return Err(EvalError::DuplicateId { file: "predictions".into(), id: p.id.clone() });
        }
    }

    let mut rows = Vec::new();
    for (key, preds) in runs {
        let missing: Vec<String> = refs.keys().filter(|id| !preds.contains_key(*id)).map(|s| s.to_string()).collect();
        let unknown: Vec<String> = preds.keys().filter(|id| !refs.contains_key(*id)).map(|s| s.to_string()).collect();
        if !missing.is_empty() || !unknown.is_empty() {
            return Err(EvalError::IdMismatch { run: key.label(), missing, unknown });
        }
        let mut scores = Vec::with_capacity(preds.len());
        for (id, p) in &preds {
            let r = refs[id];
            let mut s = score_example(&p.answer, r);
            if let Some(g) = embedder {
                let embed = |t: &[String]| g.embed(t).map_err(|e| e.to_string());
                s.bertscore = Some(embedding_f1(&p.answer, &r.answer, embed).map_err(EvalError::Embedding)?);
            }
            scores.push(s);
        }
        rows.push(ReportRow { key, report: aggregate(&scores) });
    }
    Ok(RunReport { rows })
}

pub fn evaluate_run(predictions: &Path, references: &Path, embedder: Option<&dyn Gateway>) -> Result<RunReport, EvalError> {
    let preds = read_jsonl(predictions)?;
    let refs = read_jsonl(references)?;
    evaluate_records(&preds, &refs, embedder)
}

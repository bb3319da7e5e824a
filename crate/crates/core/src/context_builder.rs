//! Training and inference contexts: page windows around a ground-truth page,
//! multi-turn QA examples, content-reiteration examples and mixed streams.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Document;
use crate::qa_gen::DialogueRecord;
use crate::text::{derive_seed, token_prefix};

/// Reiteration share implied by 64,000 reiteration examples next to
/// 360,000 QA examples.
pub const DEFAULT_MIX_RATIO: f64 = 64_000.0 / 424_000.0;
pub const REFERENCE_REITERATION_EXAMPLES: usize = 64_000;
pub const DEFAULT_EXCERPT_TOKENS: usize = 64;
/// Maximum sequence length of the reference training runs.
pub const REFERENCE_BUDGET: usize = 8192;

#[derive(Debug, Error, PartialEq)]
pub enum ContextError {
    #[error("page {page} is outside 1..={pages}")]
    PageOutOfRange { page: u32, pages: usize },
    #[error("invalid window: {0}")]
    InvalidSpec(String),
    #[error("turn {turn} does not exist (dialogue has {turns})")]
    NoSuchTurn { turn: usize, turns: usize },
    #[error("dialogue belongs to {dialogue}, not {document}")]
    WrongDocument { dialogue: String, document: String },
    #[error("invalid mix: {0}")]
    InvalidMix(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "w")]
pub enum WindowMode {
    /// Ground-truth page only.
    None,
    /// `w` pages on each side.
    Fixed(usize),
    /// As many neighbours as the budget allows.
    Max,
}

impl WindowMode {
    /// `none`, `max` or `fixed:<w>`.
    pub fn parse(s: &str) -> Result<Self, ContextError> {
        match s {
            "none" => Ok(WindowMode::None),
            "max" => Ok(WindowMode::Max),
            _ => s
                .strip_prefix("fixed:")
                .and_then(|w| w.parse().ok())
                .map(WindowMode::Fixed)
                .ok_or_else(|| ContextError::InvalidSpec(format!("unknown window '{s}' (none, max or fixed:<w>)"))),
        }
    }

    /// Label used in report rows.
    pub fn label(&self) -> String {
        match self {
            WindowMode::None => "none".into(),
            WindowMode::Fixed(w) => format!("fixed:{w}"),
            WindowMode::Max => "max".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub mode: WindowMode,
    /// Token budget for the page texts (headers excluded).
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub pages: Vec<u32>,
    pub tokens: usize,
    /// Set when the ground-truth page alone exceeded the budget and is cut.
    pub truncated: Option<u32>,
}

fn sum(lengths: &[usize], lo: u32, hi: u32) -> usize {
    (lo..=hi).map(|p| lengths[p as usize - 1]).sum()
}

/// Pages to include around ground-truth page `gt`; `page_lengths` is indexed
/// by `page_no - 1`.
///
/// Fixed windows that overflow are trimmed from the outside in, the farther
/// side first and the right side on ties. Max mode grows one page at a time,
/// alternating left and right starting on the left; a side that cannot grow
/// (edge of document or page too long) is closed for good.
pub fn window_pages(page_lengths: &[usize], gt: u32, spec: &WindowSpec) -> Result<Window, ContextError> {
    let total = page_lengths.len();
    if gt == 0 || gt as usize > total {
        return Err(ContextError::PageOutOfRange { page: gt, pages: total });
    }
    if spec.budget == 0 {
        return Err(ContextError::InvalidSpec("budget must be at least 1".into()));
    }
    let gt_len = page_lengths[gt as usize - 1];
    if gt_len > spec.budget {
        return Ok(Window { pages: vec![gt], tokens: spec.budget, truncated: Some(gt) });
    }
    let (lo, hi) = match spec.mode {
        WindowMode::None => (gt, gt),
        WindowMode::Fixed(w) => {
            let w = w.min(total) as u32;
            let (mut lo, mut hi) = (gt.saturating_sub(w).max(1), (gt + w).min(total as u32));
            while sum(page_lengths, lo, hi) > spec.budget {
                if hi - gt >= gt - lo {
                    hi -= 1;
                } else {
                    lo += 1;
                }
            }
            (lo, hi)
        }
        WindowMode::Max => {
            let (mut lo, mut hi, mut used) = (gt, gt, gt_len);
            let (mut left_open, mut right_open) = (true, true);
            let mut left_turn = true;
            while left_open || right_open {
                let go_left = if left_open && right_open { left_turn } else { left_open };
                if go_left {
                    match lo.checked_sub(1).filter(|&p| p >= 1) {
                        Some(p) if used + page_lengths[p as usize - 1] <= spec.budget => {
                            used += page_lengths[p as usize - 1];
                            lo = p;
                        }
                        _ => left_open = false,
                    }
                } else {
                    match Some(hi + 1).filter(|&p| p as usize <= total) {
                        Some(p) if used + page_lengths[p as usize - 1] <= spec.budget => {
                            used += page_lengths[p as usize - 1];
                            hi = p;
                        }
                        _ => right_open = false,
                    }
                }
                left_turn = !go_left;
            }
            (lo, hi)
        }
    };
    Ok(Window { pages: (lo..=hi).collect(), tokens: sum(page_lengths, lo, hi), truncated: None })
}

/// `(Page N)` or `(Pages N, M, ...)`; pages are sorted and de-duplicated.
pub fn citation_marker(pages: &[u32]) -> String {
    let mut p = pages.to_vec();
    p.sort_unstable();
    p.dedup();
    match p.as_slice() {
        [] => String::new(),
        [one] => format!("(Page {one})"),
        many => format!("(Pages {})", many.iter().map(u32::to_string).collect::<Vec<_>>().join(", ")),
    }
}

/// Append the citation marker unless the answer already ends with it.
pub fn cite(answer: &str, pages: &[u32]) -> String {
    let marker = citation_marker(pages);
    let trimmed = answer.trim_end();
    if marker.is_empty() || trimmed.ends_with(&marker) {
        trimmed.to_string()
    } else if trimmed.is_empty() {
        marker
    } else {
        format!("{trimmed} {marker}")
    }
}

pub fn page_header(page_no: u32) -> String {
    format!("=== Page {page_no} ===")
}

/// Header-delimited page blocks separated by blank lines. `truncate_to`
/// cuts the text of the named page to a token prefix.
pub fn render_context(doc: &Document, pages: &[u32], truncate_to: Option<(u32, usize)>) -> String {
    pages
        .iter()
        .filter_map(|&p| {
            let text = doc.page_text(p)?;
            let body = match truncate_to {
                Some((tp, n)) if tp == p => token_prefix(&text, n).to_string(),
                _ => text,
            };
            Some(format!("{}\n{}", page_header(p), body))
        })
        .collect::<Vec<_>>()
        .join("\n\n")
}

/// Whole-document rendering used in generation prompts.
pub fn render_document(doc: &Document) -> String {
    let pages: Vec<u32> = doc.pages.iter().map(|p| p.page_no).collect();
    render_context(doc, &pages, None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryTurn {
    pub question: String,
    pub answer: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleKind {
    Qa,
    Reiteration,
}

/// One line of a training file. QA examples carry the dialogue history and
/// a cited answer; reiteration examples target `Page {p}: {excerpt}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingExample {
    #[serde(rename = "type")]
    pub kind: ExampleKind,
    pub doc_id: String,
    pub context_pages: Vec<u32>,
    pub context: String,
    pub history: Vec<HistoryTurn>,
    pub question: String,
    pub target: String,
}

impl TrainingExample {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("example serialization is infallible")
    }
}

fn turn_context(doc: &Document, dialogue: &DialogueRecord, turn: usize, spec: &WindowSpec) -> Result<(u32, Window), ContextError> {
    if dialogue.doc_id != doc.doc_id {
        return Err(ContextError::WrongDocument { dialogue: dialogue.doc_id.clone(), document: doc.doc_id.clone() });
    }
    let t = turn
        .checked_sub(1)
        .and_then(|i| dialogue.turns.get(i))
        .ok_or(ContextError::NoSuchTurn { turn, turns: dialogue.turns.len() })?;
    let window = window_pages(&doc.page_lengths(), t.page, spec)?;
    Ok((t.page, window))
}

fn window_text(doc: &Document, w: &Window, budget: usize) -> String {
    render_context(doc, &w.pages, w.truncated.map(|p| (p, budget)))
}

/// Training example for turn `turn` (1-based) of a dialogue.
pub fn build_qa_example(doc: &Document, dialogue: &DialogueRecord, turn: usize, spec: &WindowSpec) -> Result<TrainingExample, ContextError> {
    let (page, window) = turn_context(doc, dialogue, turn, spec)?;
    let t = &dialogue.turns[turn - 1];
    Ok(TrainingExample {
        kind: ExampleKind::Qa,
        doc_id: doc.doc_id.clone(),
        context: window_text(doc, &window, spec.budget),
        context_pages: window.pages,
        history: dialogue.turns[..turn - 1]
            .iter()
            .map(|h| HistoryTurn { question: h.question.clone(), answer: h.answer.clone() })
            .collect(),
        question: t.question.clone(),
        target: cite(&t.answer, &[page]),
    })
}

/// Reiteration example: same context, target names the page and quotes the
/// first `excerpt_tokens` tokens of it.
pub fn build_reiteration_example(
    doc: &Document,
    dialogue: &DialogueRecord,
    turn: usize,
    spec: &WindowSpec,
    excerpt_tokens: usize,
) -> Result<TrainingExample, ContextError> {
    let (page, window) = turn_context(doc, dialogue, turn, spec)?;
    let text = doc.page_text(page).unwrap_or_default();
    Ok(TrainingExample {
        kind: ExampleKind::Reiteration,
        doc_id: doc.doc_id.clone(),
        context: window_text(doc, &window, spec.budget),
        context_pages: window.pages,
        history: Vec::new(),
        question: dialogue.turns[turn - 1].question.clone(),
        target: format!("Page {page}: {}", token_prefix(&text, excerpt_tokens)),
    })
}

/// Every turn of every dialogue as QA examples, plus reiteration examples
/// when `excerpt_tokens` is set. Turns that cannot be built are skipped with
/// a logged reason and counted.
pub fn build_examples(
    doc: &Document,
    dialogues: &[DialogueRecord],
    spec: &WindowSpec,
    excerpt_tokens: Option<usize>,
) -> (Vec<TrainingExample>, Vec<TrainingExample>, usize) {
    let (mut qa, mut reit, mut skipped) = (Vec::new(), Vec::new(), 0);
    for d in dialogues {
        for turn in 1..=d.turns.len() {
            match build_qa_example(doc, d, turn, spec) {
                Ok(e) => qa.push(e),
                Err(e) => {
                    log::warn!("{}: skipping turn {turn}: {e}", doc.doc_id);
                    skipped += 1;
                    continue;
                }
            }
            if let Some(n) = excerpt_tokens {
                if let Ok(e) = build_reiteration_example(doc, d, turn, spec, n) {
                    reit.push(e);
                }
            }
        }
    }
    (qa, reit, skipped)
}

/// Interleave two streams so the second makes up a fraction `ratio` of the
/// output at every prefix (±1 per `1/ratio` items) until one stream runs
/// out; the remainder of the other follows. Both streams are shuffled with
/// seeds derived from `seed`, and a seeded phase offsets the interleave.
pub fn mix_datasets<T>(qa: Vec<T>, reiteration: Vec<T>, ratio: f64, seed: u64) -> Result<Vec<T>, ContextError> {
    if qa.is_empty() {
        return Err(ContextError::InvalidMix("QA stream is empty".into()));
    }
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(ContextError::InvalidMix(format!("ratio {ratio} is outside (0, 1]")));
    }
    let mut qa = qa;
    let mut reit = reiteration;
    qa.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, "mix-qa")));
    reit.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, "mix-reiteration")));
    let phase: f64 = ChaCha8Rng::seed_from_u64(derive_seed(seed, "mix-phase")).random_range(0.0..1.0);

    let total = qa.len() + reit.len();
    let mut out = Vec::with_capacity(total);
    let (mut qa, mut reit) = (qa.into_iter(), reit.into_iter());
    for i in 0..total {
        let due = ((i + 1) as f64 * ratio + phase).floor() > (i as f64 * ratio + phase).floor();
        let item = if due { reit.next().or_else(|| qa.next()) } else { qa.next().or_else(|| reit.next()) };
        out.push(item.expect("counts match"));
    }
    Ok(out)
}

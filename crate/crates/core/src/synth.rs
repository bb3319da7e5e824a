//! Seeded synthetic corpora with planted keywords, used by tests, the
//! acceptance suite and demos.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::{parse_document, Document, MergeRules, RawLine, RawPageRecord};
use crate::page_finder::TrainPair;

const FILLER: &[&str] = &[
    "the", "of", "and", "to", "in", "a", "for", "is", "on", "that", "by", "this", "with", "as", "was", "are", "be",
    "from", "at", "or", "an", "report", "sales", "meeting", "company", "product", "patients", "doses", "market",
    "pharmacy", "distribution", "orders", "quarter", "review", "policy", "physician", "prescription", "regional",
    "manager", "account", "shipment", "volume", "analysis", "marketing", "compliance", "memo", "letter", "summary",
    "plan", "training", "program", "team", "data", "results", "strategy", "budget", "contract", "schedule",
    "district", "territory", "forecast", "update", "approved", "submitted", "attached", "following", "discussed",
    "reviewed", "noted", "requested", "increase", "decrease", "total", "monthly", "annual", "weekly", "office",
    "clinic", "hospital", "agency", "federal", "state", "county", "department", "board", "committee", "record",
    "file", "copy", "draft", "final", "internal", "external", "confidential", "call", "visit", "email", "notes",
    "issue", "concern", "response", "question", "answer", "page", "section", "item", "list", "table", "figure",
];

/// A synthetic document with one planted keyword per page.
#[derive(Debug, Clone)]
pub struct PlantedDoc {
    pub document: Document,
    /// `keywords[p - 1]` is the keyword planted on page `p`.
    pub keywords: Vec<String>,
}

/// Domain vocabulary of `n` distinct keyword tokens.
pub fn keyword_pool(n: usize, salt: u64) -> Vec<String> {
    (0..n).map(|i| format!("kw{salt:x}t{i}")).collect()
}

fn filler_words(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    (0..n).map(|_| FILLER.choose(rng).expect("non-empty").to_string()).collect()
}

/// Raw OCR records for a document whose pages hold `words_per_page` filler
/// words with the page keyword inserted at a random position. Lines hold ten
/// words and are stacked tightly, so each page forms one paragraph.
pub fn planted_records(doc_id: &str, pages: usize, words_per_page: usize, keywords: &[String], rng: &mut ChaCha8Rng) -> Vec<RawPageRecord> {
    (1..=pages)
        .map(|p| {
            let mut words = filler_words(rng, words_per_page);
            let pos = rng.random_range(0..=words.len());
            words.insert(pos, keywords[p - 1].clone());
            let lines = words
                .chunks(10)
                .enumerate()
                .map(|(i, chunk)| {
                    let y = 40.0 + i as f64 * 22.0;
                    RawLine { text: chunk.join(" "), rect: [50.0, y, 950.0, y + 20.0] }
                })
                .collect();
            RawPageRecord {
                doc_id: doc_id.to_string(),
                page_no: p as i64,
                width_px: 1000,
                height_px: 1400,
                lines,
                tags: None,
                masks: None,
            }
        })
        .collect()
}

/// `count` planted documents of `pages` pages each. Every page of a document
/// carries a distinct keyword drawn from `pool` (which must hold at least
/// `pages` entries).
pub fn planted_corpus(count: usize, pages: usize, words_per_page: usize, pool: &[String], seed: u64) -> Vec<PlantedDoc> {
    assert!(pool.len() >= pages, "keyword pool smaller than page count");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|d| {
            let keywords: Vec<String> =
                rand::seq::index::sample(&mut rng, pool.len(), pages).into_iter().map(|i| pool[i].clone()).collect();
            let doc_id = format!("synth-{seed}-{d}");
            let records = planted_records(&doc_id, pages, words_per_page, &keywords, &mut rng);
            let (document, _) = parse_document(&records, &doc_id, &MergeRules::default()).expect("synthetic records are valid");
            PlantedDoc { document, keywords }
        })
        .collect()
}

const QUESTION_TEMPLATES: &[&str] = &[
    "what does the document say about {}",
    "where is {} mentioned",
    "which page discusses {}",
    "what was decided regarding {}",
    "who was responsible for {}",
    "when was {} reviewed",
];

/// A question about `keyword` from one of a few templates.
pub fn planted_query(keyword: &str, rng: &mut ChaCha8Rng) -> String {
    QUESTION_TEMPLATES.choose(rng).expect("non-empty").replace("{}", keyword)
}

/// Training pairs: for `per_doc` random pages of each document, a planted
/// query and that page's text.
pub fn planted_pairs(corpus: &[PlantedDoc], per_doc: usize, seed: u64) -> Vec<TrainPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for doc in corpus {
        let n = doc.document.page_count();
        for page in rand::seq::index::sample(&mut rng, n, per_doc.min(n)) {
            let page_no = page as u32 + 1;
            out.push(TrainPair {
                query: planted_query(&doc.keywords[page], &mut rng),
                positive: doc.document.page_text(page_no).expect("page exists"),
            });
        }
    }
    out
}

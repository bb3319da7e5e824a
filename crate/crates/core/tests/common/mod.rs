//! Fixtures shared by several integration test targets.
#![allow(dead_code)]

pub mod oracles;

use pagewise::ingest::{parse_document, Document, MergeRules, RawLine, RawPageRecord};
use pagewise::llm_gateway::{MockEntry, MockGateway, Role};
use pagewise::qa_gen::{GenOptions, GenerationBudget, Persona};
use serde_json::json;

pub fn data_path(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// Document with one single-line page per entry of `pages`.
pub fn text_document(doc_id: &str, pages: &[&str]) -> Document {
    let records: Vec<RawPageRecord> = pages
        .iter()
        .enumerate()
        .map(|(i, t)| RawPageRecord {
            doc_id: doc_id.into(),
            page_no: i as i64 + 1,
            width_px: 1000,
            height_px: 1000,
            lines: vec![RawLine { text: t.to_string(), rect: [100.0, 100.0, 900.0, 130.0] }],
            tags: None,
            masks: None,
        })
        .collect();
    parse_document(&records, doc_id, &MergeRules::default()).unwrap().0
}

pub fn memo() -> Document {
    text_document(
        "memo-1",
        &[
            "Quarterly distribution summary for the northern district",
            "The regional manager approved the order in March 2006",
            "Attached are the shipment volumes by pharmacy",
        ],
    )
}

pub fn persona(id: &str) -> Persona {
    Persona {
        id: id.into(),
        name: "Dana Ortiz".into(),
        age: 41,
        gender: "woman".into(),
        major_background: "public health".into(),
        previous_experience: "county compliance auditor".into(),
        hobbies: "trail running".into(),
    }
}

/// One generation fixture: mock replies, budget, options and the expected
/// outputs.
pub struct Alg1Fixture {
    pub name: &'static str,
    pub entries: Vec<MockEntry>,
    pub budget: GenerationBudget,
    pub opts: GenOptions,
    pub expected_file: &'static str,
    /// (n, m, dropped_malformed, single_turn_pairs, multi_turn_pairs)
    pub expected_counters: (usize, usize, usize, usize, usize),
}

fn question() -> MockEntry {
    MockEntry::any(Role::QuestionGen, json!("Who approved the order?"))
}

fn answerable() -> MockEntry {
    MockEntry::any(Role::AnswerGen, json!({"answerable": true, "answer": "The regional manager.", "page": 2}))
}

pub fn alg1_fixtures() -> Vec<Alg1Fixture> {
    let opts = GenOptions { personas_per_round: 1, emit_single_turn: true, seed: 3 };
    vec![
        Alg1Fixture {
            name: "always answerable, two-turn decomposition",
            entries: vec![
                question(),
                answerable(),
                MockEntry::any(
                    Role::Decomposer,
                    json!({"turns": [
                        {"question": "Who approved the order?", "answer": "The regional manager."},
                        {"question": "When was it approved?", "answer": "In March 2006.", "page": null}
                    ]}),
                ),
            ],
            budget: GenerationBudget { n_qa: 2, max_attempts: 3 },
            opts,
            expected_file: "alg1_two_turn.jsonl",
            expected_counters: (2, 2, 0, 0, 2),
        },
        Alg1Fixture {
            name: "never answerable",
            entries: vec![question(), MockEntry::any(Role::AnswerGen, json!({"answerable": false, "answer": "", "page": null}))],
            budget: GenerationBudget { n_qa: 2, max_attempts: 3 },
            opts,
            expected_file: "alg1_never_answerable.jsonl",
            expected_counters: (0, 3, 0, 0, 0),
        },
        Alg1Fixture {
            name: "single-turn decomposition suppressed",
            entries: vec![
                question(),
                answerable(),
                MockEntry::any(Role::Decomposer, json!({"turns": [{"question": "Who approved the order?", "answer": "The regional manager."}]})),
            ],
            budget: GenerationBudget { n_qa: 2, max_attempts: 3 },
            opts: GenOptions { emit_single_turn: false, ..opts },
            expected_file: "alg1_single_turn_suppressed.jsonl",
            expected_counters: (2, 2, 0, 2, 0),
        },
    ]
}

pub fn mock(entries: Vec<MockEntry>) -> MockGateway {
    MockGateway::new(entries, 16).unwrap()
}

/// Ten-page document whose page 2 alone mentions the approval.
pub fn report_document() -> Document {
    text_document(
        "report-9",
        &[
            "Quarterly distribution summary for the northern district warehouses",
            "The regional manager approved the controlled substance order in March 2006",
            "Shipment volumes by pharmacy and county for the fiscal year",
            "Returns and credits processed through the wholesale channel",
            "Compliance training attendance across all regional offices",
            "Suspicious order monitoring thresholds and review procedures",
            "Contact list for distribution center supervisors and staff",
            "Freight carriers used for interstate deliveries this quarter",
            "Inventory audit results for the southern facility",
            "Appendix of abbreviations used throughout this report",
        ],
    )
}

/// Serving engine over `docs` with the identity hashing encoder and a mock
/// gateway answering every assistant prompt with `reply`.
pub fn serve_engine(
    docs: Vec<Document>,
    reply: &str,
    config: pagewise::serve::ServeConfig,
) -> (std::sync::Arc<pagewise::serve::Engine>, std::sync::Arc<MockGateway>) {
    use std::sync::Arc;
    let gateway = Arc::new(mock(vec![MockEntry::any(Role::QaAssistant, json!(reply))]));
    let encoder = Arc::new(pagewise::page_finder::EncoderParams::identity(512, 1, 0.05).unwrap());
    let engine = Arc::new(pagewise::serve::Engine::new(encoder, gateway.clone(), pagewise::qa_gen::TemplateSet::builtin(), config));
    for d in docs {
        engine.add_document(d).unwrap();
    }
    (engine, gateway)
}

mod common;

use common::*;
use pagewise::llm_gateway::{MockEntry, Role};
use pagewise::qa_gen::{
    decompose_qa, expand_personas, generate_for_document, sample_personas, GenOptions, GenerationBudget, QaGenError,
    QaTurn, TemplateSet,
};
use serde_json::json;

#[test]
fn hand_traced_fixtures_reproduce_byte_for_byte() {
    let doc = memo();
    let personas = vec![persona("p1")];
    for f in alg1_fixtures() {
        let g = mock(f.entries);
        let out = generate_for_document(&doc, &personas, &f.budget, &g, &TemplateSet::builtin(), &f.opts).unwrap();
        let expected = std::fs::read_to_string(data_path(f.expected_file)).unwrap();
        assert_eq!(out.records_jsonl(), expected, "{}", f.name);
        assert_eq!(
            (out.n, out.m, out.dropped_malformed, out.single_turn_pairs, out.multi_turn_pairs),
            f.expected_counters,
            "{}",
            f.name
        );
    }
}

#[test]
fn prompts_carry_persona_document_and_question() {
    let f = alg1_fixtures().remove(0);
    let g = mock(f.entries);
    generate_for_document(&memo(), &[persona("p1")], &f.budget, &g, &TemplateSet::builtin(), &f.opts).unwrap();
    let q = g.recorded_for(Role::QuestionGen);
    assert_eq!(q.len(), 2);
    assert!(q[0].contains("Dana Ortiz") && q[0].contains("=== Page 2 ===\nThe regional manager approved"));
    let a = g.recorded_for(Role::AnswerGen);
    assert!(a[0].contains("Question: Who approved the order?"));
    let d = g.recorded_for(Role::Decomposer);
    assert!(d[0].contains("Source page: 2"));
}

#[test]
fn malformed_replies_are_dropped_and_counted() {
    let g = mock(vec![
        MockEntry::any(Role::QuestionGen, json!("q")),
        MockEntry::any(Role::AnswerGen, json!({"answerable": true, "answer": "a"})),
    ]);
    let out = generate_for_document(
        &memo(),
        &[persona("p1")],
        &GenerationBudget { n_qa: 1, max_attempts: 4 },
        &g,
        &TemplateSet::builtin(),
        &GenOptions::default(),
    )
    .unwrap();
    assert_eq!((out.n, out.m, out.dropped_malformed), (0, 4, 4));

    // A page beyond the document is malformed too.
    let g = mock(vec![
        MockEntry::any(Role::QuestionGen, json!("q")),
        MockEntry::any(Role::AnswerGen, json!({"answerable": true, "answer": "a", "page": 9})),
    ]);
    let out = generate_for_document(
        &memo(),
        &[persona("p1")],
        &GenerationBudget { n_qa: 1, max_attempts: 2 },
        &g,
        &TemplateSet::builtin(),
        &GenOptions::default(),
    )
    .unwrap();
    assert_eq!((out.n, out.dropped_malformed, out.records.len()), (0, 2, 0));
}

#[test]
fn gateway_failure_fails_the_document() {
    let g = mock(vec![MockEntry::any(Role::QuestionGen, json!("q"))]);
    let err = generate_for_document(
        &memo(),
        &[persona("p1")],
        &GenerationBudget { n_qa: 1, max_attempts: 2 },
        &g,
        &TemplateSet::builtin(),
        &GenOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, QaGenError::DocumentFailed { ref doc_id, .. } if doc_id == "memo-1"));
}

#[test]
fn overshoot_is_bounded_by_one_round() {
    let f = alg1_fixtures().remove(0);
    let g = mock(f.entries);
    let personas: Vec<_> = (0..5).map(|i| persona(&format!("p{i}"))).collect();
    let opts = GenOptions { personas_per_round: 3, ..f.opts };
    let budget = GenerationBudget { n_qa: 2, max_attempts: 5 };
    let out = generate_for_document(&memo(), &personas, &budget, &g, &TemplateSet::builtin(), &opts).unwrap();
    assert_eq!((out.n, out.m), (3, 1));
    assert!(out.n <= budget.n_qa + opts.personas_per_round - 1);
    let ids: std::collections::BTreeSet<_> = out.records.iter().map(|r| r.persona_id.clone()).collect();
    assert_eq!(ids.len(), 3, "personas within a round are distinct");
}

#[test]
fn generation_is_deterministic() {
    let personas: Vec<_> = (0..7).map(|i| persona(&format!("p{i}"))).collect();
    let run = || {
        let f = alg1_fixtures().remove(0);
        let g = mock(f.entries);
        let opts = GenOptions { personas_per_round: 2, seed: 99, ..f.opts };
        generate_for_document(&memo(), &personas, &GenerationBudget { n_qa: 6, max_attempts: 6 }, &g, &TemplateSet::builtin(), &opts)
            .unwrap()
            .records_jsonl()
    };
    assert_eq!(run(), run());
}

fn decompose_with(reply: serde_json::Value, page: u32) -> Vec<QaTurn> {
    let g = mock(vec![MockEntry::any(Role::Decomposer, reply)]);
    decompose_qa(&g, &TemplateSet::builtin(), "Q", "A", page).unwrap()
}

#[test]
fn decomposition_contract() {
    let same = decompose_with(json!({"turns": [{"question": "Q", "answer": "A"}]}), 4);
    assert_eq!(same, vec![QaTurn { question: "Q".into(), answer: "A".into(), page: 4 }]);

    let three = decompose_with(
        json!({"turns": [
            {"question": "q1", "answer": "a1"}, {"question": "q2", "answer": "a2", "page": 3}, {"question": "q3", "answer": "a3"}
        ]}),
        7,
    );
    assert_eq!(three.iter().map(|t| t.question.as_str()).collect::<Vec<_>>(), ["q1", "q2", "q3"]);
    assert_eq!(three.iter().map(|t| t.page).collect::<Vec<_>>(), [7, 3, 7]);

    let empty = decompose_with(json!({"turns": []}), 2);
    assert_eq!(empty, vec![QaTurn { question: "Q".into(), answer: "A".into(), page: 2 }]);
}

#[test]
fn persona_sampling() {
    let pool: Vec<_> = (0..20).map(|i| persona(&format!("p{i}"))).collect();
    let tags = vec!["letter".to_string()];
    let a = sample_personas(&pool, &tags, 5, 1).unwrap();
    assert_eq!(a, sample_personas(&pool, &tags, 5, 1).unwrap());
    assert_eq!(a.personas.len(), 5);
    let all = sample_personas(&pool, &tags, 50, 1).unwrap();
    assert_eq!(all.personas.len(), 20);
    let mut ids: Vec<_> = all.personas.iter().map(|p| p.id.clone()).collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), 20);
    assert!(sample_personas(&[], &tags, 1, 0).is_err());
}

#[test]
fn persona_expansion() {
    let g = mock(vec![MockEntry::any(
        Role::PersonaExpand,
        json!({"personas": [
            {"name": "Ali", "age": 30, "gender": "man", "major_background": "law", "previous_experience": "clerk", "hobbies": "chess"},
            {"name": "Bo", "age": 52, "gender": "woman", "major_background": "pharmacy", "previous_experience": "pharmacist", "hobbies": "birding"}
        ]}),
    )]);
    let out = expand_personas(&g, &TemplateSet::builtin(), &[persona("p1")], "letter").unwrap();
    assert_eq!(out.len(), 2);
    assert_eq!(out[1].id, "letter-1");
    assert!(g.recorded_for(Role::PersonaExpand)[0].contains("Dana Ortiz"));

    let bad = mock(vec![MockEntry::any(Role::PersonaExpand, json!({"personas": [{"name": "X"}]}))]);
    assert!(expand_personas(&bad, &TemplateSet::builtin(), &[persona("p1")], "letter").is_err());
}

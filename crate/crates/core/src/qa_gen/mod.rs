//! Persona-conditioned, page-grounded QA generation: question generation,
//! answerability-gated answering and decomposition into multi-turn
//! dialogues, against any [`Gateway`].

mod templates;

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context_builder::render_document;
use crate::ingest::Document;
use crate::llm_gateway::{parse_answer, parse_decomposition, Gateway, GatewayError, GenRequest, Role};
use crate::text::derive_seed;

pub use templates::{render, TemplateSet, TEMPLATE_VERSION};

/// Size of the persona sample drawn from the pool in the reference setup.
pub const REFERENCE_PERSONA_SAMPLE: usize = 500;

#[derive(Debug, Error, PartialEq)]
pub enum QaGenError {
    #[error("invalid generation budget: {0}")]
    InvalidBudget(String),
    #[error("no personas to sample from")]
    NoPersonas,
    #[error("document {0} has no pages")]
    EmptyDocument(String),
    #[error("invalid persona {id}: {reason}")]
    InvalidPersona { id: String, reason: String },
    #[error("document {doc_id} failed: {source}")]
    DocumentFailed { doc_id: String, source: GatewayError },
    #[error("template: {0}")]
    Template(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Persona {
    pub id: String,
    pub name: String,
    pub age: u32,
    pub gender: String,
    pub major_background: String,
    pub previous_experience: String,
    pub hobbies: String,
}

impl Persona {
    pub fn validate(&self) -> Result<(), QaGenError> {
        let fields = [
            ("id", &self.id),
            ("name", &self.name),
            ("gender", &self.gender),
            ("major_background", &self.major_background),
            ("previous_experience", &self.previous_experience),
            ("hobbies", &self.hobbies),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| v.trim().is_empty()) {
            return Err(QaGenError::InvalidPersona { id: self.id.clone(), reason: format!("{name} is empty") });
        }
        if self.age == 0 {
            return Err(QaGenError::InvalidPersona { id: self.id.clone(), reason: "age must be positive".into() });
        }
        Ok(())
    }

    /// One-paragraph description used in prompts.
    pub fn describe(&self) -> String {
        format!(
            "{}, a {}-year-old {} with a background in {}. Previous experience: {}. Hobbies: {}.",
            self.name, self.age, self.gender, self.major_background, self.previous_experience, self.hobbies
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonaSample {
    pub personas: Vec<Persona>,
    pub cluster_tags: Vec<String>,
}

/// Seeded uniform sample without replacement of `min(n, |pool|)` personas.
pub fn sample_personas(pool: &[Persona], cluster_tags: &[String], n: usize, seed: u64) -> Result<PersonaSample, QaGenError> {
    if pool.is_empty() {
        return Err(QaGenError::NoPersonas);
    }
    let mut order: Vec<&Persona> = pool.iter().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, "personas")));
    Ok(PersonaSample {
        personas: order.into_iter().take(n).cloned().collect(),
        cluster_tags: cluster_tags.to_vec(),
    })
}

#[derive(Deserialize)]
struct ExpandedPersona {
    name: String,
    age: u32,
    gender: String,
    major_background: String,
    previous_experience: String,
    hobbies: String,
}

/// Ask the gateway for detailed personas suited to one cluster. Ids are
/// `{cluster}-{i}`; a reply that fails the schema is an error.
pub fn expand_personas(
    gateway: &dyn Gateway,
    templates: &TemplateSet,
    seeds: &[Persona],
    cluster: &str,
) -> Result<Vec<Persona>, QaGenError> {
    let listed: String = seeds.iter().map(|p| format!("- {}\n", p.describe())).collect();
    let prompt = render(&templates.persona_expand, &[("tags", cluster), ("personas", listed.trim_end())])?;
    let reply = gateway
        .generate(&GenRequest::new(Role::PersonaExpand, prompt))
        .map_err(|source| QaGenError::DocumentFailed { doc_id: cluster.to_string(), source })?;
    #[derive(Deserialize)]
    struct Body {
        personas: Vec<ExpandedPersona>,
    }
    let body: Body = serde_json::from_str(reply.text.trim()).map_err(|e| QaGenError::DocumentFailed {
        doc_id: cluster.to_string(),
        source: GatewayError::Parse { role: Role::PersonaExpand, reason: e.to_string(), raw: reply.text.clone() },
    })?;
    let personas: Vec<Persona> = body
        .personas
        .into_iter()
        .enumerate()
        .map(|(i, p)| Persona {
            id: format!("{cluster}-{i}"),
            name: p.name,
            age: p.age,
            gender: p.gender,
            major_background: p.major_background,
            previous_experience: p.previous_experience,
            hobbies: p.hobbies,
        })
        .collect();
    personas.iter().try_for_each(Persona::validate)?;
    Ok(personas)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaTurn {
    pub question: String,
    pub answer: String,
    pub page: u32,
}

/// A grounded dialogue: one decomposed QA pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogueRecord {
    pub doc_id: String,
    pub persona_id: String,
    pub turns: Vec<QaTurn>,
}

impl DialogueRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serialization is infallible")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationBudget {
    /// Desired answerable pairs per document.
    pub n_qa: usize,
    /// Maximum rounds per document.
    pub max_attempts: usize,
}

impl GenerationBudget {
    pub fn validate(&self) -> Result<(), QaGenError> {
        if self.n_qa == 0 || self.max_attempts == 0 {
            return Err(QaGenError::InvalidBudget("N_QA and M must both be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenOptions {
    pub personas_per_round: usize,
    /// Keep dialogues whose decomposition produced a single turn.
    pub emit_single_turn: bool,
    pub seed: u64,
}

impl Default for GenOptions {
    fn default() -> Self {
        Self { personas_per_round: 1, emit_single_turn: true, seed: 0 }
    }
}

/// Emitted dialogues plus the loop counters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationOutcome {
    pub doc_id: String,
    pub records: Vec<DialogueRecord>,
    /// Answerable pairs obtained.
    pub n: usize,
    /// Rounds run.
    pub m: usize,
    /// Pairs dropped because a structured reply was malformed or cited a
    /// page outside the document.
    pub dropped_malformed: usize,
    pub single_turn_pairs: usize,
    pub multi_turn_pairs: usize,
}

impl GenerationOutcome {
    pub fn records_jsonl(&self) -> String {
        self.records.iter().map(|r| r.to_json_line() + "\n").collect()
    }
}

enum PairError {
    Malformed(String),
    Gateway(GatewayError),
}

impl From<GatewayError> for PairError {
    fn from(e: GatewayError) -> Self {
        match e {
            GatewayError::Parse { .. } => PairError::Malformed(e.to_string()),
            other => PairError::Gateway(other),
        }
    }
}

/// Split an answered pair into a turn sequence; turns without a page inherit
/// `page`. An empty decomposition falls back to the pair itself.
pub fn decompose_qa(
    gateway: &dyn Gateway,
    templates: &TemplateSet,
    question: &str,
    answer: &str,
    page: u32,
) -> Result<Vec<QaTurn>, GatewayError> {
    let prompt = render(&templates.decomposer, &[("question", question), ("answer", answer), ("page", &page.to_string())])
        .map_err(|e| GatewayError::Config(e.to_string()))?;
    let reply = gateway.generate(&GenRequest::new(Role::Decomposer, prompt))?;
    let turns = parse_decomposition(&reply.text)?;
    if turns.is_empty() {
        return Ok(vec![QaTurn { question: question.to_string(), answer: answer.to_string(), page }]);
    }
    Ok(turns
        .into_iter()
        .map(|t| QaTurn { question: t.question, answer: t.answer, page: t.page.unwrap_or(page) })
        .collect())
}

fn one_pair(
    doc: &Document,
    persona: &Persona,
    gateway: &dyn Gateway,
    templates: &TemplateSet,
    rendered: &str,
) -> Result<Option<Vec<QaTurn>>, PairError> {
    let tags = doc.cluster.clone().unwrap_or_else(|| "uncategorized".into());
    let describe = persona.describe();
    let q_prompt = render(&templates.question_gen, &[("persona", &describe), ("tags", &tags), ("document", rendered)])
        .map_err(|e| PairError::Gateway(GatewayError::Config(e.to_string())))?;
    let question = gateway.generate(&GenRequest::new(Role::QuestionGen, q_prompt))?.text.trim().to_string();

    let a_prompt = render(&templates.answer_gen, &[("document", rendered), ("question", &question)])
        .map_err(|e| PairError::Gateway(GatewayError::Config(e.to_string())))?;
    let reply = parse_answer(&gateway.generate(&GenRequest::new(Role::AnswerGen, a_prompt))?.text)?;
    if !reply.answerable {
        return Ok(None);
    }
    let page = reply.page.expect("answerable replies carry a page");
    let pages = doc.page_count();
    if page as usize > pages {
        return Err(PairError::Malformed(format!("page {page} outside 1..={pages}")));
    }
    let turns = decompose_qa(gateway, templates, &question, &reply.answer, page)?;
    if let Some(t) = turns.iter().find(|t| t.page == 0 || t.page as usize > pages) {
        return Err(PairError::Malformed(format!("decomposed turn cites page {} outside 1..={pages}", t.page)));
    }
    Ok(Some(turns))
}

/// Run the generation loop for one document.
///
/// Each round samples `personas_per_round` personas; each persona yields a
/// question, an answerability-gated grounded answer and its decomposition.
/// `n` counts answerable pairs, `m` counts rounds; the loop runs while
/// `n < N_QA` and `m < M`. Dialogues of one turn are kept only with
/// `emit_single_turn`. A gateway failure (after the gateway's own retries)
/// fails the whole document; malformed structured replies drop the pair.
pub fn generate_for_document(
    doc: &Document,
    personas: &[Persona],
    budget: &GenerationBudget,
    gateway: &dyn Gateway,
    templates: &TemplateSet,
    opts: &GenOptions,
) -> Result<GenerationOutcome, QaGenError> {
    budget.validate()?;
    if personas.is_empty() {
        return Err(QaGenError::NoPersonas);
    }
    if doc.pages.is_empty() {
        return Err(QaGenError::EmptyDocument(doc.doc_id.clone()));
    }
    let per_round = opts.personas_per_round.clamp(1, personas.len());
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, &doc.doc_id));
    let rendered = render_document(doc);
    let mut out = GenerationOutcome {
        doc_id: doc.doc_id.clone(),
        records: Vec::new(),
        n: 0,
        m: 0,
        dropped_malformed: 0,
        single_turn_pairs: 0,
        multi_turn_pairs: 0,
    };

    while out.n < budget.n_qa && out.m < budget.max_attempts {
        let round: Vec<&Persona> = personas.choose_multiple(&mut rng, per_round).collect();
        for persona in round {
            match one_pair(doc, persona, gateway, templates, &rendered) {
                Ok(None) => {}
                Ok(Some(turns)) => {
                    out.n += 1;
                    let multi = turns.len() > 1;
                    if multi {
                        out.multi_turn_pairs += 1;
                    } else {
                        out.single_turn_pairs += 1;
                    }
                    if multi || opts.emit_single_turn {
                        out.records.push(DialogueRecord { doc_id: doc.doc_id.clone(), persona_id: persona.id.clone(), turns });
                    }
                }
                Err(PairError::Malformed(reason)) => {
                    log::warn!("{}: dropping pair: {reason}", doc.doc_id);
                    out.dropped_malformed += 1;
                }
                Err(PairError::Gateway(source)) => {
                    return Err(QaGenError::DocumentFailed { doc_id: doc.doc_id.clone(), source });
                }
            }
        }
        out.m += 1;
    }
    Ok(out)
}

/// Multi-hop candidates: documents longer than ten pages.
pub fn multi_hop_documents(docs: &[Document]) -> BTreeSet<String> {
    docs.iter()
        .filter(|d| crate::taxonomy::is_multi_hop_eligible(d.page_count()))
        .map(|d| d.doc_id.clone())
        .collect()
}

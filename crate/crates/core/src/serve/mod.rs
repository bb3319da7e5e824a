//! Multi-turn grounded QA sessions: retrieve pages for each question,
//! budget the context, ask the gateway with the dialogue so far, and return
//! the answer with the pages it cites.

mod http;

use std::collections::{BTreeMap, HashMap};
use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context_builder::render_context;
use crate::eval::extract_page_refs;
use crate::ingest::Document;
use crate::llm_gateway::{Gateway, GatewayError, GenRequest, Role};
use crate::page_finder::{score_embedded, select_context, ScoredPage, TextEncoder};
use crate::qa_gen::{render, TemplateSet};

pub use http::{listen, router};

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("{kind} {id} not found")]
    NotFound { kind: &'static str, id: String },
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error("generation failed: {reason}")]
    Gateway { reason: String, retryable: bool },
    #[error("retrieval failed: {0}")]
    Retrieval(String),
    #[error("cannot persist session {session_id}: {reason}")]
    Persist { session_id: String, reason: String },
}

impl ServeError {
    pub fn is_retryable(&self) -> bool {
        match self {
            ServeError::Gateway { retryable, .. } => *retryable,
            _ => false,
        }
    }
}

impl From<GatewayError> for ServeError {
    fn from(e: GatewayError) -> Self {
        ServeError::Gateway { retryable: e.is_retryable(), reason: e.to_string() }
    }
}

/// What the page finder is asked for each turn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetrievalQuery {
    #[default]
    Question,
    QuestionAndLastAnswer,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ServeConfig {
    pub default_budget: usize,
    /// Best-scored pages seeded into every selection before neighbours.
    pub k_top: usize,
    pub retrieval: RetrievalQuery,
    /// Append each turn to `<dir>/<session_id>.jsonl` when set.
    pub persist_dir: Option<PathBuf>,
}

impl Default for ServeConfig {
    fn default() -> Self {
        Self { default_budget: 8192, k_top: 1, retrieval: RetrievalQuery::Question, persist_dir: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub question: String,
    pub answer: String,
    /// Cited pages that exist in the document.
    pub cited_pages: Vec<u32>,
    pub selected_pages: Vec<u32>,
    /// Cosine of every page against the retrieval query, best first.
    pub scores: Vec<ScoredPage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub doc_id: String,
    pub history: Vec<Turn>,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    pub budget: usize,
}

/// Ingested document plus its page embeddings, computed once.
struct IndexedDocument {
    doc: Document,
    page_vectors: Vec<Vec<f64>>,
    page_lengths: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentSummary {
    pub doc_id: String,
    pub pages: usize,
}

/// "User:"/"Assistant:" blocks, one blank line after each exchange.
pub fn serialize_history(history: &[Turn]) -> String {
    history.iter().map(|t| format!("User: {}\nAssistant: {}\n\n", t.question, t.answer)).collect()
}

/// Shared service state. Documents and the encoder are read-mostly; each
/// session has its own lock so asks on one session are serialized while
/// different sessions proceed in parallel.
pub struct Engine {
    docs: RwLock<BTreeMap<String, Arc<IndexedDocument>>>,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    encoder: Arc<dyn TextEncoder>,
    gateway: Arc<dyn Gateway>,
    templates: TemplateSet,
    config: ServeConfig,
}

impl Engine {
    pub fn new(encoder: Arc<dyn TextEncoder>, gateway: Arc<dyn Gateway>, templates: TemplateSet, config: ServeConfig) -> Self {
        Self {
            docs: RwLock::new(BTreeMap::new()),
            sessions: Mutex::new(HashMap::new()),
            encoder,
            gateway,
            templates,
            config,
        }
    }

    pub fn config(&self) -> &ServeConfig {
        &self.config
    }

    /// Index a document, replacing any earlier one with the same id.
    pub fn add_document(&self, doc: Document) -> Result<DocumentSummary, ServeError> {
        doc.validate().map_err(|e| ServeError::Invalid(e.to_string()))?;
        let texts: Vec<String> = doc.pages.iter().map(|p| p.text()).collect();
        let page_vectors = self.encoder.encode_texts(&texts).map_err(|e| ServeError::Retrieval(e.to_string()))?;
        if page_vectors.len() != texts.len() {
            return Err(ServeError::Retrieval("encoder returned the wrong number of vectors".into()));
        }
        let summary = DocumentSummary { doc_id: doc.doc_id.clone(), pages: doc.page_count() };
        let page_lengths = doc.page_lengths();
        let indexed = IndexedDocument { doc, page_vectors, page_lengths };
        self.docs.write().unwrap_or_else(|e| e.into_inner()).insert(summary.doc_id.clone(), Arc::new(indexed));
        Ok(summary)
    }

    fn indexed(&self, doc_id: &str) -> Result<Arc<IndexedDocument>, ServeError> {
        self.docs
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(doc_id)
            .cloned()
            .ok_or_else(|| ServeError::NotFound { kind: "document", id: doc_id.to_string() })
    }

    pub fn document(&self, doc_id: &str) -> Result<Document, ServeError> {
        Ok(self.indexed(doc_id)?.doc.clone())
    }

    pub fn document_count(&self) -> usize {
        self.docs.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn create_session(&self, doc_id: &str, budget: Option<usize>) -> Result<Session, ServeError> {
        self.indexed(doc_id)?;
        let budget = budget.unwrap_or(self.config.default_budget);
        if budget == 0 {
            return Err(ServeError::Invalid("budget must be positive".into()));
        }
        let created_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let session = Session { session_id: uuid::Uuid::new_v4().to_string(), doc_id: doc_id.to_string(), history: Vec::new(), created_at, budget };
        self.sessions
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(session.session_id.clone(), Arc::new(Mutex::new(session.clone())));
        Ok(session)
    }

    fn session_handle(&self, session_id: &str) -> Result<Arc<Mutex<Session>>, ServeError> {
        self.sessions
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .get(session_id)
            .cloned()
            .ok_or_else(|| ServeError::NotFound { kind: "session", id: session_id.to_string() })
    }

    pub fn session(&self, session_id: &str) -> Result<Session, ServeError> {
        Ok(self.session_handle(session_id)?.lock().unwrap_or_else(|e| e.into_inner()).clone())
    }

    /// Answer one question. The turn is appended only when generation
    /// succeeds.
    pub fn ask(&self, session_id: &str, question: &str) -> Result<Turn, ServeError> {
        if question.trim().is_empty() {
            return Err(ServeError::Invalid("question is empty".into()));
        }
        let handle = self.session_handle(session_id)?;
        let mut session = handle.lock().unwrap_or_else(|e| e.into_inner());
        let indexed = self.indexed(&session.doc_id)?;

        let query = match (self.config.retrieval, session.history.last()) {
            (RetrievalQuery::QuestionAndLastAnswer, Some(last)) => format!("{question} {}", last.answer),
            _ => question.to_string(),
        };
        let q = self
            .encoder
            .encode_texts(&[query])
            .map_err(|e| ServeError::Retrieval(e.to_string()))?
            .pop()
            .ok_or_else(|| ServeError::Retrieval("encoder returned no vector".into()))?;
        let scores = score_embedded(&q, &indexed.page_vectors, &indexed.page_lengths);
        let selection = select_context(&scores, session.budget, self.config.k_top);
        let context = render_context(&indexed.doc, &selection.pages, selection.truncated_page.map(|p| (p, session.budget)));
        let history = serialize_history(&session.history);
        let prompt = render(
            self.templates.get(Role::QaAssistant),
            &[("context", context.as_str()), ("history", history.as_str()), ("question", question)],
        )
        .map_err(|e| ServeError::Invalid(e.to_string()))?;

        let reply = self.gateway.generate(&GenRequest::new(Role::QaAssistant, prompt))?;
        let page_count = indexed.doc.page_count() as u32;
        let cited_pages = extract_page_refs(&reply.text).pages.into_iter().filter(|&p| p <= page_count).collect();
        let turn = Turn { question: question.to_string(), answer: reply.text, cited_pages, selected_pages: selection.pages, scores };

        if let Some(dir) = &self.config.persist_dir {
            persist_turn(dir, &session, &turn)?;
        }
        session.history.push(turn.clone());
        Ok(turn)
    }
}

fn persist_turn(dir: &std::path::Path, session: &Session, turn: &Turn) -> Result<(), ServeError> {
    let err = |e: std::io::Error| ServeError::Persist { session_id: session.session_id.clone(), reason: e.to_string() };
    std::fs::create_dir_all(dir).map_err(err)?;
    let mut f = OpenOptions::new().create(true).append(true).open(dir.join(format!("{}.jsonl", session.session_id))).map_err(err)?;
    let line = serde_json::json!({ "session_id": session.session_id, "doc_id": session.doc_id, "turn": turn });
    writeln!(f, "{line}").map_err(err)
}

//! Page-grounded question answering over long, multi-page documents.

pub mod context_builder;
pub mod eval;
pub mod ingest;
pub mod llm_gateway;
pub mod page_finder;
pub mod qa_gen;
pub mod serve;
pub mod synth;
pub mod taxonomy;
pub mod text;

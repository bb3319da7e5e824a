//! Strict parsers for structured role replies. A reply either validates
//! against its role schema or is rejected with the raw text attached.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{normalize, GatewayError, Role};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerReply {
    pub answerable: bool,
    pub answer: String,
    /// Referenced page; always present when `answerable`.
    pub page: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecomposedTurn {
    pub question: String,
    pub answer: String,
    pub page: Option<u32>,
}

fn object(role: Role, raw: &str) -> Result<Map<String, Value>, GatewayError> {
    let err = |reason: String| GatewayError::Parse { role, reason, raw: raw.to_string() };
    match serde_json::from_str::<Value>(raw.trim()) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(err("reply is not a JSON object".into())),
        Err(e) => Err(err(format!("reply is not JSON: {e}"))),
    }
}

fn page_value(v: &Value) -> Result<Option<u32>, String> {
    match v {
        Value::Null => Ok(None),
        Value::Number(n) => match n.as_u64() {
            Some(p) if p >= 1 && p <= u64::from(u32::MAX) => Ok(Some(p as u32)),
            _ => Err(format!("page {n} is not a positive integer")),
        },
        other => Err(format!("page must be an integer or null, got {other}")),
    }
}

fn string_field(m: &Map<String, Value>, key: &str) -> Result<String, String> {
    match m.get(key) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(other) => Err(format!("\"{key}\" must be a string, got {other}")),
        None => Err(format!("missing \"{key}\"")),
    }
}

/// `{answerable: bool, answer: string, page: int|null}`; every key is
/// required and an answerable reply must name a page.
pub fn parse_answer(raw: &str) -> Result<AnswerReply, GatewayError> {
    let m = object(Role::AnswerGen, raw)?;
    let check = || -> Result<AnswerReply, String> {
        let answerable = match m.get("answerable") {
            Some(Value::Bool(b)) => *b,
            Some(other) => return Err(format!("\"answerable\" must be a boolean, got {other}")),
            None => return Err("missing \"answerable\"".into()),
        };
        let answer = string_field(&m, "answer")?;
        let page = page_value(m.get("page").ok_or("missing \"page\"")?)?;
        if answerable && page.is_none() {
            return Err("answerable reply without a page".into());
        }
        Ok(AnswerReply { answerable, answer, page })
    };
    check().map_err(|reason| GatewayError::Parse { role: Role::AnswerGen, reason, raw: raw.to_string() })
}

/// `{turns: [{question, answer, page?}]}`.
pub fn parse_decomposition(raw: &str) -> Result<Vec<DecomposedTurn>, GatewayError> {
    let m = object(Role::Decomposer, raw)?;
    let check = || -> Result<Vec<DecomposedTurn>, String> {
        let turns = match m.get("turns") {
            Some(Value::Array(a)) => a,
            Some(other) => return Err(format!("\"turns\" must be an array, got {other}")),
            None => return Err("missing \"turns\"".into()),
        };
        turns
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let Value::Object(t) = t else { return Err(format!("turn {i} is not an object")) };
                let page = match t.get("page") {
                    None => None,
                    Some(v) => page_value(v).map_err(|e| format!("turn {i}: {e}"))?,
                };
                Ok(DecomposedTurn {
                    question: string_field(t, "question").map_err(|e| format!("turn {i}: {e}"))?,
                    answer: string_field(t, "answer").map_err(|e| format!("turn {i}: {e}"))?,
                    page,
                })
            })
            .collect()
    };
    check().map_err(|reason| GatewayError::Parse { role: Role::Decomposer, reason, raw: raw.to_string() })
}

/// `{vectors: [[f64]]}` with exactly `expected` rows, each renormalized.
pub fn parse_embeddings(raw: &str, expected: usize) -> Result<Vec<Vec<f64>>, String> {
    #[derive(Deserialize)]
    struct Body {
        vectors: Vec<Vec<f64>>,
    }
    let body: Body = serde_json::from_str(raw).map_err(|e| format!("malformed embedding reply: {e}"))?;
    if body.vectors.len() != expected {
        return Err(format!("expected {expected} vectors, got {}", body.vectors.len()));
    }
    body.vectors.into_iter().map(normalize).collect()
}

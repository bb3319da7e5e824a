//! Scripted gateway: replies are looked up by `(role, sha256(prompt))`, with
//! `"*"` as a per-role wildcard. Every request is recorded.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;
use std::sync::{Arc, Mutex};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::transport::Transport;
use super::{normalize, Gateway, GatewayConfig, GatewayError, GenRequest, LiveGateway, Reply, Role};
use crate::text::fnv1a64;

pub const WILDCARD: &str = "*";

/// Lowercase hex SHA-256 of the prompt bytes.
pub fn prompt_hash(prompt: &str) -> String {
    Sha256::digest(prompt.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// One line of a mock script. `reply` may be a string or any JSON value;
/// non-string values are returned as compact JSON text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockEntry {
    pub role: Role,
    pub prompt_hash: String,
    pub reply: serde_json::Value,
}

impl MockEntry {
    pub fn any(role: Role, reply: serde_json::Value) -> Self {
        Self { role, prompt_hash: WILDCARD.into(), reply }
    }

    pub fn exact(role: Role, prompt: &str, reply: serde_json::Value) -> Self {
        Self { role, prompt_hash: prompt_hash(prompt), reply }
    }
}

#[derive(Debug)]
pub struct MockGateway {
    table: BTreeMap<(Role, String), String>,
    embed_dim: usize,
    recorded: Mutex<Vec<GenRequest>>,
}

impl MockGateway {
    pub fn new(entries: Vec<MockEntry>, embed_dim: usize) -> Result<Self, GatewayError> {
        let mut table = BTreeMap::new();
        for e in entries {
            let text = match e.reply {
                serde_json::Value::String(s) => s,
                other => other.to_string(),
            };
            let key = (e.role, e.prompt_hash.to_lowercase());
            if table.insert(key.clone(), text).is_some() {
                return Err(GatewayError::Config(format!("duplicate mock entry for {} {}", key.0, key.1)));
            }
        }
        Ok(Self { table, embed_dim: embed_dim.max(1), recorded: Mutex::new(Vec::new()) })
    }

    pub fn from_reader<R: BufRead>(reader: R, embed_dim: usize) -> Result<Self, GatewayError> {
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| GatewayError::Config(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: MockEntry = serde_json::from_str(&line)
                .map_err(|e| GatewayError::Config(format!("mock script line {}: {e}", i + 1)))?;
            entries.push(entry);
        }
        Self::new(entries, embed_dim)
    }

    pub fn from_path(path: &Path, embed_dim: usize) -> Result<Self, GatewayError> {
        let f = std::fs::File::open(path)
            .map_err(|e| GatewayError::Config(format!("cannot open mock script {}: {e}", path.display())))?;
        Self::from_reader(std::io::BufReader::new(f), embed_dim)
    }

    /// Requests seen so far, in call order.
    pub fn recorded(&self) -> Vec<GenRequest> {
        self.recorded.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn recorded_for(&self, role: Role) -> Vec<String> {
        self.recorded().into_iter().filter(|r| r.role == role).map(|r| r.prompt).collect()
    }

    fn embed_one(&self, text: &str) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(fnv1a64(text.as_bytes()));
        loop {
            let v: Vec<f64> = (0..self.embed_dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            if let Ok(u) = normalize(v) {
                return u;
            }
        }
    }
}

impl Gateway for MockGateway {
    fn generate(&self, req: &GenRequest) -> Result<Reply, GatewayError> {
        self.recorded.lock().unwrap_or_else(|e| e.into_inner()).push(req.clone());
        let hash = prompt_hash(&req.prompt);
        let text = self
            .table
            .get(&(req.role, hash.clone()))
            .or_else(|| self.table.get(&(req.role, WILDCARD.to_string())))
            .ok_or(GatewayError::MockMiss { role: req.role, hash })?;
        Ok(Reply { text: text.clone(), attempts: 0 })
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, GatewayError> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

/// Build the gateway selected by `cfg`, handing `transport` to the live
/// client. In mock mode the transport is never touched.
pub fn build_with_transport(cfg: &GatewayConfig, transport: Arc<dyn Transport>) -> Result<Arc<dyn Gateway>, GatewayError> {
    cfg.validate()?;
    if cfg.mock_mode {
        let path = cfg.mock_script.as_ref().expect("validated");
        Ok(Arc::new(MockGateway::from_path(path, cfg.mock_embed_dim)?))
    } else {
        Ok(Arc::new(LiveGateway::with_transport(cfg.clone(), transport)?))
    }
}

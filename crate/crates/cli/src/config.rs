//! Run configuration: defaults, overridden by a TOML file, overridden by
//! flags.

use std::path::{Path, PathBuf};

use pagewise::context_builder::{DEFAULT_EXCERPT_TOKENS, DEFAULT_MIX_RATIO, REFERENCE_BUDGET};
use pagewise::llm_gateway::{GatewayConfig, RetryPolicy};
use pagewise::page_finder::{EncoderShape, TrainHyper};
use pagewise::qa_gen::REFERENCE_PERSONA_SAMPLE;
use pagewise::serve::RetrievalQuery;
use pagewise::taxonomy::SamplingPreset;
use serde::{Deserialize, Serialize};

use crate::invalid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub seed: u64,
    /// 0 means one worker per available core.
    pub workers: usize,
    pub gateway: GatewaySettings,
    pub ingest: IngestSettings,
    pub sample: SampleSettings,
    pub qa: QaSettings,
    pub context: ContextSettings,
    pub finder: FinderSettings,
    pub serve: ServeSettings,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            seed: 0,
            workers: 0,
            gateway: GatewaySettings::default(),
            ingest: IngestSettings::default(),
            sample: SampleSettings::default(),
            qa: QaSettings::default(),
            context: ContextSettings::default(),
            finder: FinderSettings::default(),
            serve: ServeSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GatewaySettings {
    pub endpoint: Option<String>,
    pub embed_endpoint: Option<String>,
    pub auth_env: Option<String>,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub base_backoff_ms: u64,
    /// Setting a script switches the gateway to mock mode.
    pub mock_script: Option<PathBuf>,
    pub mock_embed_dim: usize,
    pub max_in_flight: usize,
}

impl Default for GatewaySettings {
    fn default() -> Self {
        let d = GatewayConfig::default();
        Self {
            endpoint: d.endpoint,
            embed_endpoint: d.embed_endpoint,
            auth_env: d.auth_env,
            timeout_ms: d.timeout_ms,
            max_retries: d.retry.max_retries,
            base_backoff_ms: d.retry.base_backoff_ms,
            mock_script: None,
            mock_embed_dim: d.mock_embed_dim,
            max_in_flight: d.max_in_flight,
        }
    }
}

impl GatewaySettings {
    pub fn to_config(&self) -> GatewayConfig {
        GatewayConfig {
            endpoint: self.endpoint.clone(),
            embed_endpoint: self.embed_endpoint.clone(),
            auth_env: self.auth_env.clone(),
            timeout_ms: self.timeout_ms,
            retry: RetryPolicy { max_retries: self.max_retries, base_backoff_ms: self.base_backoff_ms },
            mock_mode: self.mock_script.is_some(),
            mock_script: self.mock_script.clone(),
            mock_embed_dim: self.mock_embed_dim,
            max_in_flight: self.max_in_flight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestSettings {
    pub gap_factor: f64,
    pub overlap_min: f64,
}

impl Default for IngestSettings {
    fn default() -> Self {
        let r = pagewise::ingest::MergeRules::default();
        Self { gap_factor: r.gap_factor, overlap_min: r.overlap_min }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleSettings {
    pub clusters: usize,
    pub train_per_cluster: usize,
    pub test_per_cluster: usize,
}

impl Default for SampleSettings {
    fn default() -> Self {
        let p = SamplingPreset::REFERENCE;
        Self { clusters: p.clusters, train_per_cluster: p.train_per_cluster, test_per_cluster: p.test_per_cluster }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QaSettings {
    pub n_qa: usize,
    pub max_attempts: usize,
    pub personas_per_round: usize,
    pub persona_sample: usize,
    pub expand_personas: bool,
    pub emit_single_turn: bool,
    /// Directory of `{role}.{version}.txt` files; built-ins when unset.
    pub templates: Option<PathBuf>,
    pub template_version: String,
}

impl Default for QaSettings {
    fn default() -> Self {
        Self {
            n_qa: 5,
            max_attempts: 10,
            personas_per_round: 1,
            persona_sample: REFERENCE_PERSONA_SAMPLE,
            expand_personas: false,
            emit_single_turn: true,
            templates: None,
            template_version: pagewise::qa_gen::TEMPLATE_VERSION.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContextSettings {
    /// `none`, `max` or `fixed:N`.
    pub window: String,
    pub budget: usize,
    pub reiteration: bool,
    pub excerpt_tokens: usize,
    pub mix_ratio: f64,
}

impl Default for ContextSettings {
    fn default() -> Self {
        Self {
            window: "fixed:1".into(),
            budget: REFERENCE_BUDGET,
            reiteration: true,
            excerpt_tokens: DEFAULT_EXCERPT_TOKENS,
            mix_ratio: DEFAULT_MIX_RATIO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FinderSettings {
    pub feature_dim: usize,
    pub embed_dim: usize,
    pub max_ngram: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub warmup_ratio: f64,
    pub weight_decay: f64,
    pub tau: f64,
}

impl Default for FinderSettings {
    fn default() -> Self {
        let h = TrainHyper::default();
        Self {
            feature_dim: h.shape.feature_dim,
            embed_dim: h.shape.embed_dim,
            max_ngram: h.shape.max_ngram,
            epochs: h.epochs,
            batch_size: h.batch_size,
            learning_rate: h.learning_rate,
            warmup_ratio: h.warmup_ratio,
            weight_decay: h.weight_decay,
            tau: h.tau,
        }
    }
}

impl FinderSettings {
    pub fn hyper(&self, seed: u64) -> TrainHyper {
        TrainHyper {
            batch_size: self.batch_size,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            warmup_ratio: self.warmup_ratio,
            weight_decay: self.weight_decay,
            tau: self.tau,
            seed,
            shape: EncoderShape { feature_dim: self.feature_dim, embed_dim: self.embed_dim, max_ngram: self.max_ngram },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServeSettings {
    pub addr: String,
    pub budget: usize,
    pub k_top: usize,
    pub retrieval: RetrievalQuery,
    pub persist_dir: Option<PathBuf>,
}

impl Default for ServeSettings {
    fn default() -> Self {
        let d = pagewise::serve::ServeConfig::default();
        Self { addr: "127.0.0.1:8080".into(), budget: d.default_budget, k_top: d.k_top, retrieval: d.retrieval, persist_dir: None }
    }
}

impl Settings {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| invalid(format!("config {}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("settings serialize")
    }
}

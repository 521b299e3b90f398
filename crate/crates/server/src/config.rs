//! Service configuration: one TOML-shaped struct, then `HYPERDESC_*`
//! environment overrides.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use hyperdesc_core::eval::{Embedder, ImageGenerator, LanguageModel};
use hyperdesc_core::seeding::{Captioner, ClientPolicy, Detector};

use crate::clients::{
    HttpCaptioner, HttpDetector, HttpEmbedder, HttpEndpoint, HttpImageGenerator, HttpLanguageModel,
};

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Endpoints {
    pub caption: Option<String>,
    pub detect: Option<String>,
    pub embed: Option<String>,
    pub generate: Option<String>,
    /// Language model used by the reasoning harness.
    pub complete: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub port: u16,
    pub store_path: PathBuf,
    /// Static bearer token; no auth when unset.
    pub api_token: Option<String>,
    /// Fixes every random choice (side flips, view shuffles).
    pub seed: u64,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub parallelism: usize,
    pub endpoints: Endpoints,
}

impl Default for Config {
    fn default() -> Self {
        let policy = ClientPolicy::default();
        Self {
            port: 8080,
            store_path: PathBuf::from("hyperdesc-events.jsonl"),
            api_token: None,
            seed: 0,
            timeout_ms: policy.timeout_ms,
            max_retries: policy.max_retries,
            parallelism: policy.parallelism,
            endpoints: Endpoints::default(),
        }
    }
}

pub const ENV_VARS: [&str; 12] = [
    "HYPERDESC_PORT",
    "HYPERDESC_STORE",
    "HYPERDESC_API_TOKEN",
    "HYPERDESC_SEED",
    "HYPERDESC_TIMEOUT_MS",
    "HYPERDESC_MAX_RETRIES",
    "HYPERDESC_PARALLELISM",
    "HYPERDESC_CAPTION_URL",
    "HYPERDESC_DETECT_URL",
    "HYPERDESC_EMBED_URL",
    "HYPERDESC_GENERATE_URL",
    "HYPERDESC_COMPLETE_URL",
];

fn parse<T: std::str::FromStr>(name: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("{name}: cannot parse {value:?}"))
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Applies overrides from `lookup` (normally `std::env::var`).
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<(), String> {
        for name in ENV_VARS {
            let Some(v) = lookup(name) else { continue };
            match name {
                "HYPERDESC_PORT" => self.port = parse(name, &v)?,
                "HYPERDESC_STORE" => self.store_path = PathBuf::from(v),
                "HYPERDESC_API_TOKEN" => self.api_token = Some(v),
                "HYPERDESC_SEED" => self.seed = parse(name, &v)?,
                "HYPERDESC_TIMEOUT_MS" => self.timeout_ms = parse(name, &v)?,
                "HYPERDESC_MAX_RETRIES" => self.max_retries = parse(name, &v)?,
                "HYPERDESC_PARALLELISM" => self.parallelism = parse(name, &v)?,
                "HYPERDESC_CAPTION_URL" => self.endpoints.caption = Some(v),
                "HYPERDESC_DETECT_URL" => self.endpoints.detect = Some(v),
                "HYPERDESC_EMBED_URL" => self.endpoints.embed = Some(v),
                "HYPERDESC_GENERATE_URL" => self.endpoints.generate = Some(v),
                "HYPERDESC_COMPLETE_URL" => self.endpoints.complete = Some(v),
                _ => unreachable!("listed above"),
            }
        }
        Ok(())
    }

    pub fn policy(&self) -> ClientPolicy {
        ClientPolicy {
            timeout_ms: self.timeout_ms,
            max_retries: self.max_retries,
            parallelism: self.parallelism,
        }
    }

    pub fn clients(&self) -> Clients {
        let timeout = self.policy().timeout();
        let ep = |u: &Option<String>| u.as_deref().map(|u| HttpEndpoint::new(u, timeout));
        Clients {
            captioner: ep(&self.endpoints.caption).map(|e| Arc::new(HttpCaptioner(e)) as _),
            detector: ep(&self.endpoints.detect).map(|e| Arc::new(HttpDetector(e)) as _),
            embedder: ep(&self.endpoints.embed).map(|e| Arc::new(HttpEmbedder(e)) as _),
            generator: ep(&self.endpoints.generate).map(|e| Arc::new(HttpImageGenerator(e)) as _),
            language_model: ep(&self.endpoints.complete).map(|e| Arc::new(HttpLanguageModel(e)) as _),
        }
    }
}

/// Configured model clients; any of them may be absent.
#[derive(Clone, Default)]
pub struct Clients {
    pub captioner: Option<Arc<dyn Captioner>>,
    pub detector: Option<Arc<dyn Detector>>,
    pub embedder: Option<Arc<dyn Embedder>>,
    pub generator: Option<Arc<dyn ImageGenerator>>,
    pub language_model: Option<Arc<dyn LanguageModel>>,
}

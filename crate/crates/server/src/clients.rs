//! Blocking JSON-over-HTTP clients for the external models. Request bodies
//! go out in canonical form, so boxes travel at six decimals.

use std::time::{Duration, Instant};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use hyperdesc_core::eval::{EmbedRequest, EmbedResponse, Embedder, ImageGenerator, LanguageModel};
use hyperdesc_core::export::to_canonical_string;
use hyperdesc_core::model::validate;
use hyperdesc_core::seeding::{
    CaptionRequest, CaptionResponse, Captioner, DetectRequest, DetectResponse, Detector,
};
use hyperdesc_core::ClientError;

/// One endpoint base URL plus a per-call timeout.
#[derive(Debug, Clone)]
pub struct HttpEndpoint {
    base: String,
    agent: ureq::Agent,
}

impl HttpEndpoint {
    pub fn new(base_url: &str, timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build();
        Self {
            base: base_url.trim_end_matches('/').to_string(),
            agent: config.into(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn post<B: Serialize, R: DeserializeOwned>(&self, path: &str, body: &B) -> Result<R, ClientError> {
        let payload = to_canonical_string(body).map_err(|e| ClientError::Malformed(e.to_string()))?;
        let result = self
            .agent
            .post(format!("{}{path}", self.base))
            .header("content-type", "application/json")
            .send(payload);
        let mut response = match result {
            Ok(r) => r,
            Err(ureq::Error::Timeout(_)) => return Err(ClientError::Timeout),
            Err(e) => return Err(ClientError::Transport(e.to_string())),
        };
        let status = response.status().as_u16();
        if !(200..300).contains(&status) {
            return Err(ClientError::Status(status));
        }
        let text = match response.body_mut().read_to_string() {
            Ok(t) => t,
            Err(ureq::Error::Timeout(_)) => return Err(ClientError::Timeout),
            Err(e) => return Err(ClientError::Transport(e.to_string())),
        };
        serde_json::from_str(&text).map_err(|e| ClientError::Malformed(e.to_string()))
    }
}

/// `POST /caption`.
#[derive(Debug, Clone)]
pub struct HttpCaptioner(pub HttpEndpoint);

#[derive(Deserialize)]
struct CaptionWire {
    text: String,
    model_version: String,
}

impl Captioner for HttpCaptioner {
    fn caption(&self, request: &CaptionRequest) -> Result<CaptionResponse, ClientError> {
        let start = Instant::now();
        let wire: CaptionWire = self.0.post("/caption", request)?;
        if wire.text.trim().is_empty() {
            return Err(ClientError::Malformed("empty caption".into()));
        }
        if wire.model_version.trim().is_empty() {
            return Err(ClientError::Malformed("missing model_version".into()));
        }
        Ok(CaptionResponse {
            text: wire.text,
            model_version: wire.model_version,
            latency_ms: start.elapsed().as_millis() as u64,
        })
    }
}

/// `POST /detect`.
#[derive(Debug, Clone)]
pub struct HttpDetector(pub HttpEndpoint);

impl Detector for HttpDetector {
    fn detect(&self, request: &DetectRequest) -> Result<DetectResponse, ClientError> {
        let response: DetectResponse = self.0.post("/detect", request)?;
        let problems = validate(&response);
        if !problems.is_empty() {
            let text: Vec<String> = problems.iter().map(ToString::to_string).collect();
            return Err(ClientError::Malformed(text.join("; ")));
        }
        Ok(response)
    }
}

/// `POST /embed`.
#[derive(Debug, Clone)]
pub struct HttpEmbedder(pub HttpEndpoint);

impl Embedder for HttpEmbedder {
    fn embed(&self, request: &EmbedRequest) -> Result<EmbedResponse, ClientError> {
        self.0.post("/embed", request)
    }
}

/// `POST /generate`, body `{prompt}`, response `{image_uri}`.
#[derive(Debug, Clone)]
pub struct HttpImageGenerator(pub HttpEndpoint);

#[derive(Serialize)]
struct PromptWire<'a> {
    prompt: &'a str,
}

#[derive(Deserialize)]
struct GenerateWire {
    image_uri: String,
}

impl ImageGenerator for HttpImageGenerator {
    fn generate(&self, prompt: &str) -> Result<String, ClientError> {
        let wire: GenerateWire = self.0.post("/generate", &PromptWire { prompt })?;
        Ok(wire.image_uri)
    }
}

/// `POST /complete`, body `{prompt}`, response `{text}`.
#[derive(Debug, Clone)]
pub struct HttpLanguageModel(pub HttpEndpoint);

#[derive(Deserialize)]
struct CompleteWire {
    text: String,
}

impl LanguageModel for HttpLanguageModel {
    fn complete(&self, prompt: &str) -> Result<String, ClientError> {
        let wire: CompleteWire = self.0.post("/complete", &PromptWire { prompt })?;
        Ok(wire.text)
    }
}

//! Request/response shapes and traits for the external seed models.
//!
//! The traits are synchronous; transports live outside this crate. Wire
//! boxes are `[ymin, xmin, ymax, xmax]` fractions.

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::ClientError;
use crate::model::{BoundingBox, Validate, Violation};

pub const DEFAULT_CAPTION_PROMPT: &str = "Generate a detailed image description";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptionRequest {
    pub image_uri: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crop: Option<BoundingBox>,
    pub prompt: String,
}

impl CaptionRequest {
    pub fn new(image_uri: impl Into<String>) -> Self {
        Self {
            image_uri: image_uri.into(),
            crop: None,
            prompt: DEFAULT_CAPTION_PROMPT.to_string(),
        }
    }

    pub fn cropped(image_uri: impl Into<String>, crop: BoundingBox) -> Self {
        Self {
            crop: Some(crop),
            ..Self::new(image_uri)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptionResponse {
    pub text: String,
    pub model_version: String,
    #[serde(default)]
    pub latency_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectRequest {
    pub image_uri: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectedObject {
    pub label: String,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DetectResponse {
    pub objects: Vec<DetectedObject>,
}

impl Validate for DetectResponse {
    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (i, o) in self.objects.iter().enumerate() {
            for v in o.bbox.violations() {
                out.push(Violation::new(format!("objects[{i}].box.{}", v.field), v.message));
            }
            if !(0.0..=1.0).contains(&o.confidence) {
                out.push(Violation::new(format!("objects[{i}].confidence"), "outside [0, 1]"));
            }
        }
        out
    }
}

pub trait Captioner: Send + Sync {
    fn caption(&self, request: &CaptionRequest) -> Result<CaptionResponse, ClientError>;
}

pub trait Detector: Send + Sync {
    fn detect(&self, request: &DetectRequest) -> Result<DetectResponse, ClientError>;
}

impl<T: Captioner + ?Sized> Captioner for &T {
    fn caption(&self, request: &CaptionRequest) -> Result<CaptionResponse, ClientError> {
        (**self).caption(request)
    }
}

impl<T: Captioner + ?Sized> Captioner for std::sync::Arc<T> {
    fn caption(&self, request: &CaptionRequest) -> Result<CaptionResponse, ClientError> {
        (**self).caption(request)
    }
}

impl<T: Detector + ?Sized> Detector for &T {
    fn detect(&self, request: &DetectRequest) -> Result<DetectResponse, ClientError> {
        (**self).detect(request)
    }
}

impl<T: Detector + ?Sized> Detector for std::sync::Arc<T> {
    fn detect(&self, request: &DetectRequest) -> Result<DetectResponse, ClientError> {
        (**self).detect(request)
    }
}

/// Call policy shared by every model client.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientPolicy {
    pub timeout_ms: u64,
    /// Extra attempts after the first failure.
    pub max_retries: u32,
    /// Upper bound on concurrent calls issued by one operation.
    pub parallelism: usize,
}

impl Default for ClientPolicy {
    fn default() -> Self {
        Self {
            timeout_ms: 30_000,
            max_retries: 1,
            parallelism: 8,
        }
    }
}

impl ClientPolicy {
    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }

    /// Runs `call` once plus at most `max_retries` more times on failure.
    pub fn call<T>(
        &self,
        mut call: impl FnMut() -> Result<T, ClientError>,
    ) -> Result<T, ClientError> {
        let mut last = call();
        for _ in 0..self.max_retries {
            if last.is_ok() {
                break;
            }
            last = call();
        }
        last
    }

    /// Maps `f` over `inputs` with at most `parallelism` calls in flight,
    /// preserving input order in the output.
    pub fn map_bounded<I, O, F>(&self, inputs: &[I], f: F) -> Vec<O>
    where
        I: Sync,
        O: Send,
        F: Fn(&I) -> O + Sync,
    {
        let width = self.parallelism.max(1);
        let mut out = Vec::with_capacity(inputs.len());
        for chunk in inputs.chunks(width) {
            if chunk.len() == 1 {
                out.push(f(&chunk[0]));
                continue;
            }
            let results: Vec<O> = thread::scope(|s| {
                let handles: Vec<_> = chunk.iter().map(|i| s.spawn(|| f(i))).collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("client worker panicked"))
                    .collect()
            });
            out.extend(results);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn retry_at_most_once_by_default() {
        let calls = AtomicUsize::new(0);
        let r: Result<(), _> = ClientPolicy::default().call(|| {
            calls.fetch_add(1, Ordering::SeqCst);
            Err(ClientError::Timeout)
        });
        assert_eq!(r, Err(ClientError::Timeout));
        assert_eq!(calls.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn success_is_not_retried() {
        let calls = AtomicUsize::new(0);
        let r = ClientPolicy::default().call(|| {
            calls.fetch_add(1, Ordering::SeqCst);
            Ok::<_, ClientError>(7)
        });
        assert_eq!(r, Ok(7));
        assert_eq!(calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn bounded_map_preserves_order_and_width() {
        let in_flight = AtomicUsize::new(0);
        let peak = AtomicUsize::new(0);
        let policy = ClientPolicy {
            parallelism: 3,
            ..Default::default()
        };
        let inputs: Vec<u32> = (0..10).collect();
        let out = policy.map_bounded(&inputs, |x| {
            let now = in_flight.fetch_add(1, Ordering::SeqCst) + 1;
            peak.fetch_max(now, Ordering::SeqCst);
            std::thread::sleep(Duration::from_millis(5));
            in_flight.fetch_sub(1, Ordering::SeqCst);
            x * 2
        });
        assert_eq!(out, (0..10).map(|x| x * 2).collect::<Vec<_>>());
        assert!(peak.load(Ordering::SeqCst) <= 3);
    }

    #[test]
    fn detect_response_wire_shape() {
        let json = r#"{"objects":[{"label":"dog","box":[0.1,0.2,0.5,0.6],"confidence":0.9}]}"#;
        let r: DetectResponse = serde_json::from_str(json).unwrap();
        assert!(r.is_valid());
        assert_eq!(r.objects[0].bbox, BoundingBox::new(0.1, 0.2, 0.5, 0.6));
        let bad = r#"{"objects":[{"label":"dog","box":[0.5,0.2,0.1,0.6],"confidence":1.5}]}"#;
        let r: DetectResponse = serde_json::from_str(bad).unwrap();
        assert_eq!(r.violations().len(), 2);
    }
}

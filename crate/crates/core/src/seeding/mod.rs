//! Seed-model clients and the active-learning retraining trigger.
//!
//! The platform never trains anything: it emits an [`ActiveLearningEvent`]
//! each time another full batch of samples is finalized, and an external
//! job re-fine-tunes the seed models.

pub mod clients;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::ClientError;
use crate::model::{ImageRecord, SeedCaption};

pub use clients::{
    CaptionRequest, CaptionResponse, Captioner, ClientPolicy, DetectRequest, DetectResponse,
    DetectedObject, Detector, DEFAULT_CAPTION_PROMPT,
};

pub const DEFAULT_BATCH_SIZE: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskScope {
    Task1,
    Task2,
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveLearningEvent {
    pub batch_id: u64,
    pub sample_ids: Vec<String>,
    pub task_scope: TaskScope,
    pub emitted_at: DateTime<Utc>,
}

/// Single-owner completion counter. Emitted events stay in an outbox until
/// acknowledged, so consumers see each batch at least once and dedupe on
/// `batch_id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionCounter {
    batch_size: usize,
    task_scope: TaskScope,
    completed: Vec<String>,
    seen: BTreeSet<String>,
    emitted: u64,
    outbox: Vec<ActiveLearningEvent>,
}

impl Default for CompletionCounter {
    fn default() -> Self {
        Self::new(DEFAULT_BATCH_SIZE, TaskScope::Both)
    }
}

impl CompletionCounter {
    /// `batch_size` of 0 is treated as 1.
    pub fn new(batch_size: usize, task_scope: TaskScope) -> Self {
        Self {
            batch_size: batch_size.max(1),
            task_scope,
            completed: Vec::new(),
            seen: BTreeSet::new(),
            emitted: 0,
            outbox: Vec::new(),
        }
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn completed_count(&self) -> usize {
        self.completed.len()
    }

    /// Counts one finalized sample. Returns the batch event exactly when the
    /// count reaches a multiple of the batch size; repeated completions of the
    /// same sample are ignored.
    pub fn record_completion(
        &mut self,
        sample_id: &str,
        at: DateTime<Utc>,
    ) -> Option<ActiveLearningEvent> {
        if !self.seen.insert(sample_id.to_string()) {
            return None;
        }
        self.completed.push(sample_id.to_string());
        if !self.completed.len().is_multiple_of(self.batch_size) {
            return None;
        }
        self.emitted += 1;
        let start = (self.emitted as usize - 1) * self.batch_size;
        let event = ActiveLearningEvent {
            batch_id: self.emitted,
            sample_ids: self.completed[start..start + self.batch_size].to_vec(),
            task_scope: self.task_scope,
            emitted_at: at,
        };
        self.outbox.push(event.clone());
        Some(event)
    }

    /// Events not yet acknowledged, oldest first.
    pub fn pending_events(&self) -> &[ActiveLearningEvent] {
        &self.outbox
    }

    pub fn acknowledge(&mut self, batch_id: u64) {
        self.outbox.retain(|e| e.batch_id != batch_id);
    }
}

/// Asks the captioner for a whole-image seed. Failures degrade to an
/// unavailable seed; annotation then proceeds unseeded.
pub fn seed_caption(
    image: &ImageRecord,
    client: &dyn Captioner,
    policy: &ClientPolicy,
) -> Result<SeedCaption, ClientError> {
    let request = CaptionRequest::new(image.uri.clone());
    let response = policy.call(|| client.caption(&request))?;
    if response.text.trim().is_empty() {
        return Err(ClientError::Malformed("empty caption".into()));
    }
    Ok(SeedCaption {
        text: response.text,
        model_version: response.model_version,
        available: true,
    })
}

/// [`seed_caption`] with the failure folded into an unavailable seed.
pub fn seed_caption_or_unavailable(
    image: &ImageRecord,
    client: &dyn Captioner,
    policy: &ClientPolicy,
) -> SeedCaption {
    seed_caption(image, client, policy).unwrap_or_else(|_| SeedCaption::unavailable())
}

/// Every seed caption ever requested per image, in request order. Kept for
/// seeded-vs-unseeded analysis; the latest one is the one used.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SeedCaptionLog {
    entries: BTreeMap<String, Vec<SeedCaption>>,
}

impl SeedCaptionLog {
    pub fn record(&mut self, image_id: &str, seed: SeedCaption) {
        self.entries.entry(image_id.to_string()).or_default().push(seed);
    }

    pub fn latest(&self, image_id: &str) -> Option<&SeedCaption> {
        self.entries.get(image_id).and_then(|v| v.last())
    }

    pub fn history(&self, image_id: &str) -> &[SeedCaption] {
        self.entries.get(image_id).map_or(&[], Vec::as_slice)
    }
}

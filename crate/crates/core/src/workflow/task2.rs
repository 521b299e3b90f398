//! Task 2: sequential description rounds with round-over-round early stop.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::metrics::ngram_jaccard;
use crate::model::{
    DescriptionRound, ImageRecord, ObjectAnnotation, SeedCaption, Task2Config, Task2State,
    Task2Status, Validate,
};
use crate::seeding::{seed_caption_or_unavailable, Captioner, ClientPolicy};
use crate::workflow::assignment::{keyed_rng, AssignmentLedger};
use crate::workflow::task1::Task1State;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Task2Event {
    SeedReplaced {
        seed: SeedCaption,
    },
    RoundSubmitted {
        annotator: String,
        text: String,
        elapsed_seconds: f64,
    },
}

/// Opens Task 2. `task1` may be `None` when Task 1 is skipped for the
/// project; otherwise it must be finalized.
pub fn start_task2(
    image: &ImageRecord,
    task1: Option<&Task1State>,
    seed: SeedCaption,
    config: Task2Config,
) -> Result<Task2State> {
    check(config.violations())?;
    let digest = match task1 {
        Some(t) if !t.finalized => {
            return Err(Error::StateViolation(format!(
                "task 1 for {:?} is not finalized",
                image.image_id
            )))
        }
        Some(t) => t.active_objects().cloned().collect(),
        None => Vec::new(),
    };
    Ok(Task2State {
        image_id: image.image_id.clone(),
        seed,
        task1_digest: digest,
        metadata: image.metadata.clone(),
        rounds: Vec::new(),
        status: Task2Status::Open,
        config,
        version: 0,
    })
}

/// [`start_task2`] with the seed requested from `captioner`; a failing client
/// yields an unavailable seed instead of an error.
pub fn start_task2_seeded(
    image: &ImageRecord,
    task1: Option<&Task1State>,
    captioner: &dyn Captioner,
    policy: &ClientPolicy,
    config: Task2Config,
) -> Result<Task2State> {
    let seed = seed_caption_or_unavailable(image, captioner, policy);
    start_task2(image, task1, seed, config)
}

impl Task2State {
    /// Appends one round and evaluates the stop rule. On error nothing
    /// changes, including the ledger.
    pub fn submit_round(
        &mut self,
        ledger: &mut AssignmentLedger,
        annotator: &str,
        text: &str,
        elapsed_seconds: f64,
    ) -> Result<Task2Status> {
        if !self.status.is_open() {
            return Err(Error::StateViolation(format!(
                "task 2 for {:?} is closed",
                self.image_id
            )));
        }
        ledger.check_eligible(&self.image_id, annotator)?;
        let round_index = self.rounds.len() as u32 + 1;
        let similarity = match self.rounds.last() {
            Some(prev) => Some(ngram_jaccard(&prev.text, text, self.config.ngram_n)?),
            None => None,
        };
        let round = DescriptionRound {
            round_index,
            annotator_id: annotator.to_string(),
            text: text.to_string(),
            elapsed_seconds,
            similarity_to_previous: similarity,
        };
        check(round.violations())?;

        let status = if similarity.is_some_and(|s| s >= self.config.similarity_threshold) {
            Task2Status::StoppedBySimilarity
        } else if round_index >= self.config.max_rounds {
            Task2Status::StoppedByMaxRounds
        } else {
            Task2Status::Open
        };
        ledger.record_contribution(&self.image_id, annotator)?;
        self.rounds.push(round);
        self.status = status;
        self.version += 1;
        Ok(status)
    }

    /// [`Self::submit_round`] guarded by the caller's view of `version`.
    pub fn submit_round_at(
        &mut self,
        expected_version: u64,
        ledger: &mut AssignmentLedger,
        annotator: &str,
        text: &str,
        elapsed_seconds: f64,
    ) -> Result<Task2Status> {
        if expected_version != self.version {
            return Err(Error::Conflict(format!(
                "stale version {expected_version}, current is {}",
                self.version
            )));
        }
        self.submit_round(ledger, annotator, text, elapsed_seconds)
    }

    /// Swaps the seed caption. Only allowed before the first round so the
    /// seed version stays fixed once annotation starts.
    pub fn replace_seed(&mut self, seed: SeedCaption) -> Result<()> {
        if !self.rounds.is_empty() {
            return Err(Error::StateViolation(
                "seed is fixed once a round is submitted".into(),
            ));
        }
        self.seed = seed;
        self.version += 1;
        Ok(())
    }

    pub fn final_description(&self) -> Result<&str> {
        if self.status.is_open() {
            return Err(Error::StateViolation(format!(
                "task 2 for {:?} is still open",
                self.image_id
            )));
        }
        self.rounds
            .last()
            .map(|r| r.text.as_str())
            .ok_or_else(|| Error::Internal("closed state without rounds".into()))
    }

    /// Events that rebuild this state from its start.
    pub fn events(&self) -> Vec<Task2Event> {
        self.rounds
            .iter()
            .map(|r| Task2Event::RoundSubmitted {
                annotator: r.annotator_id.clone(),
                text: r.text.clone(),
                elapsed_seconds: r.elapsed_seconds,
            })
            .collect()
    }

    /// Folds `events` over a freshly started state.
    pub fn replay(start: Task2State, events: &[Task2Event]) -> Result<Task2State> {
        let mut state = start;
        let mut ledger = AssignmentLedger::default();
        for event in events {
            match event {
                Task2Event::SeedReplaced { seed } => state.replace_seed(seed.clone())?,
                Task2Event::RoundSubmitted {
                    annotator,
                    text,
                    elapsed_seconds,
                } => {
                    state.submit_round(&mut ledger, annotator, text, *elapsed_seconds)?;
                }
            }
        }
        Ok(state)
    }

    /// Rater-facing projection for the next round. See [`Task2View`].
    pub fn next_view(&self, rng_seed: u64) -> Result<Task2View> {
        if !self.status.is_open() {
            return Err(Error::StateViolation(format!(
                "task 2 for {:?} is closed",
                self.image_id
            )));
        }
        let mut texts = Vec::new();
        if self.seed.available {
            texts.push(self.seed.text.clone());
        }
        if let Some(prev) = self.rounds.last() {
            texts.push(prev.text.clone());
            let mut rng = keyed_rng(rng_seed, &self.image_id, self.rounds.len() as u64);
            texts.shuffle(&mut rng);
        }
        Ok(Task2View {
            image_id: self.image_id.clone(),
            round_index: self.rounds.len() as u32 + 1,
            version: self.version,
            texts: texts
                .into_iter()
                .enumerate()
                .map(|(i, text)| NeutralText {
                    label: format!("Text {}", i + 1),
                    text,
                })
                .collect(),
            objects: self.task1_digest.iter().map(DigestObject::from).collect(),
        })
    }
}

/// Prior texts shown to the next annotator. From round 2 on the seed and
/// the previous round are shuffled and carry only neutral labels, so the
/// rater cannot tell which one came from the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task2View {
    pub image_id: String,
    pub round_index: u32,
    pub version: u64,
    pub texts: Vec<NeutralText>,
    pub objects: Vec<DigestObject>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeutralText {
    pub label: String,
    pub text: String,
}

/// Task-1 object stripped of provenance for overlays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigestObject {
    pub object_id: String,
    pub label: String,
    #[serde(rename = "box")]
    pub bbox: crate::model::BoundingBox,
    pub description: String,
}

impl From<&ObjectAnnotation> for DigestObject {
    fn from(o: &ObjectAnnotation) -> Self {
        Self {
            object_id: o.object_id.clone(),
            label: o.label.clone(),
            bbox: o.bbox,
            description: o.description.clone(),
        }
    }
}

//! A labeling project: images, per-sample workflow states, SxS items and
//! release subsets. Every mutation either succeeds completely or leaves
//! the project untouched.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::model::{
    duplicate_image_ids, FiveMetricRating, ImageRecord, SeedCaption, Task2Config, Task2Status,
    Validate, Violation,
};
use crate::model::Task2State;
use crate::seeding::{ActiveLearningEvent, CompletionCounter, SeedCaptionLog, TaskScope};
use crate::sxs::SxSItem;
use crate::workflow::{start_task2, AssignmentLedger, ObjectEdit, Task1State};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectConfig {
    #[serde(default)]
    pub task2: Task2Config,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_scope")]
    pub task_scope: TaskScope,
}

fn default_batch_size() -> usize {
    crate::seeding::DEFAULT_BATCH_SIZE
}

fn default_scope() -> TaskScope {
    TaskScope::Both
}

impl Default for ProjectConfig {
    fn default() -> Self {
        Self {
            task2: Task2Config::default(),
            batch_size: default_batch_size(),
            task_scope: default_scope(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetSource {
    Human,
    Model,
}

/// A named slice of the release, e.g. a test split annotated by humans or
/// the outputs of one model on an eval set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subset {
    pub name: String,
    pub source: SubsetSource,
    /// For model subsets: whose descriptions to export.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub image_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub project_id: String,
    pub name: String,
    pub config: ProjectConfig,
    pub images: BTreeMap<String, ImageRecord>,
    pub task1: BTreeMap<String, Task1State>,
    pub task2: BTreeMap<String, Task2State>,
    pub sxs: BTreeMap<String, SxSItem>,
    /// image id -> model name -> description.
    pub model_descriptions: BTreeMap<String, BTreeMap<String, String>>,
    pub subsets: BTreeMap<String, Subset>,
    pub ledger: AssignmentLedger,
    pub completions: CompletionCounter,
    pub seed_log: SeedCaptionLog,
}

fn expect_version(kind: &str, id: &str, expected: Option<u64>, actual: u64) -> Result<()> {
    match expected {
        Some(v) if v != actual => Err(Error::Conflict(format!(
            "{kind} {id:?}: stale version {v}, current is {actual}"
        ))),
        _ => Ok(()),
    }
}

impl Project {
    pub fn new(project_id: &str, name: &str, config: ProjectConfig) -> Result<Self> {
        if project_id.trim().is_empty() {
            return Err(Error::Validation(vec![Violation::new("project_id", "must be non-empty")]));
        }
        check(config.task2.violations())?;
        Ok(Self {
            project_id: project_id.to_string(),
            name: name.to_string(),
            completions: CompletionCounter::new(config.batch_size, config.task_scope),
            config,
            images: BTreeMap::new(),
            task1: BTreeMap::new(),
            task2: BTreeMap::new(),
            sxs: BTreeMap::new(),
            model_descriptions: BTreeMap::new(),
            subsets: BTreeMap::new(),
            ledger: AssignmentLedger::default(),
            seed_log: SeedCaptionLog::default(),
        })
    }

    pub fn image(&self, image_id: &str) -> Result<&ImageRecord> {
        self.images
            .get(image_id)
            .ok_or_else(|| Error::NotFound(format!("image {image_id:?}")))
    }

    pub fn register_images(&mut self, images: Vec<ImageRecord>) -> Result<usize> {
        let mut violations = duplicate_image_ids(&images);
        for (i, img) in images.iter().enumerate() {
            for v in img.violations() {
                violations.push(Violation::new(format!("images[{i}].{}", v.field), v.message));
            }
            if self.images.contains_key(&img.image_id) {
                violations.push(Violation::new(
                    format!("images[{i}].image_id"),
                    format!("{:?} already registered", img.image_id),
                ));
            }
        }
        check(violations)?;
        let n = images.len();
        for img in images {
            self.images.insert(img.image_id.clone(), img);
        }
        Ok(n)
    }

    /// Installs a seeded Task-1 state computed outside the project.
    pub fn install_task1(&mut self, state: Task1State) -> Result<&Task1State> {
        self.image(&state.image_id)?;
        if self.task1.contains_key(&state.image_id) {
            return Err(Error::Conflict(format!("task 1 for {:?} already seeded", state.image_id)));
        }
        if state.version != 0 || !state.log.is_empty() {
            return Err(Error::InvalidArgument("task 1 seed must be a fresh state".into()));
        }
        let id = state.image_id.clone();
        Ok(self.task1.entry(id).or_insert(state))
    }

    fn task1_mut(&mut self, image_id: &str) -> Result<&mut Task1State> {
        self.task1
            .get_mut(image_id)
            .ok_or_else(|| Error::NotFound(format!("task 1 for {image_id:?}")))
    }

    pub fn task1_edit(
        &mut self,
        image_id: &str,
        expected_version: Option<u64>,
        annotator: &str,
        edit: ObjectEdit,
    ) -> Result<ObjectEdit> {
        let mut ledger = self.ledger.clone();
        let state = self.task1.get_mut(image_id).ok_or_else(|| Error::NotFound(format!("task 1 for {image_id:?}")))?;
        expect_version("task 1", image_id, expected_version, state.version)?;
        let resolved = state.apply_object_edit(edit, annotator, &mut ledger)?.clone();
        self.ledger = ledger;
        Ok(resolved)
    }

    pub fn task1_finalize(
        &mut self,
        image_id: &str,
        expected_version: Option<u64>,
        at: DateTime<Utc>,
    ) -> Result<Option<ActiveLearningEvent>> {
        let state = self.task1_mut(image_id)?;
        expect_version("task 1", image_id, expected_version, state.version)?;
        state.finalize()?;
        Ok(match self.config.task_scope {
            TaskScope::Task1 => self.completions.record_completion(image_id, at),
            _ => None,
        })
    }

    pub fn task2_start(&mut self, image_id: &str, seed: SeedCaption) -> Result<&Task2State> {
        let image = self.image(image_id)?.clone();
        if self.task2.contains_key(image_id) {
            return Err(Error::Conflict(format!("task 2 for {image_id:?} already started")));
        }
        let state = start_task2(&image, self.task1.get(image_id), seed.clone(), self.config.task2)?;
        self.seed_log.record(image_id, seed);
        Ok(self.task2.entry(image_id.to_string()).or_insert(state))
    }

    pub fn task2_replace_seed(&mut self, image_id: &str, seed: SeedCaption) -> Result<()> {
        let state = self
            .task2
            .get_mut(image_id)
            .ok_or_else(|| Error::NotFound(format!("task 2 for {image_id:?}")))?;
        state.replace_seed(seed.clone())?;
        self.seed_log.record(image_id, seed);
        Ok(())
    }

    pub fn task2_submit(
        &mut self,
        image_id: &str,
        expected_version: Option<u64>,
        annotator: &str,
        text: &str,
        elapsed_seconds: f64,
        at: DateTime<Utc>,
    ) -> Result<(Task2Status, Option<ActiveLearningEvent>)> {
        let state = self
            .task2
            .get_mut(image_id)
            .ok_or_else(|| Error::NotFound(format!("task 2 for {image_id:?}")))?;
        expect_version("task 2", image_id, expected_version, state.version)?;
        let status = state.submit_round(&mut self.ledger, annotator, text, elapsed_seconds)?;
        let event = match (status.is_open(), self.config.task_scope) {
            (false, TaskScope::Task2 | TaskScope::Both) => {
                self.completions.record_completion(image_id, at)
            }
            _ => None,
        };
        Ok((status, event))
    }

    pub fn sxs_add(&mut self, item: SxSItem) -> Result<&SxSItem> {
        self.image(&item.image_id)?;
        if self.sxs.contains_key(&item.item_id) {
            return Err(Error::Conflict(format!("sxs item {:?} exists", item.item_id)));
        }
        if item.is_rated() {
            return Err(Error::InvalidArgument("new sxs items must be unrated".into()));
        }
        check(item.violations())?;
        let id = item.item_id.clone();
        Ok(self.sxs.entry(id).or_insert(item))
    }

    pub fn sxs_judge(
        &mut self,
        item_id: &str,
        expected_version: Option<u64>,
        rating_ab: FiveMetricRating,
        justification: &str,
    ) -> Result<&SxSItem> {
        let item = self
            .sxs
            .get_mut(item_id)
            .ok_or_else(|| Error::NotFound(format!("sxs item {item_id:?}")))?;
        expect_version("sxs item", item_id, expected_version, item.version)?;
        item.record_judgment(rating_ab, justification)?;
        Ok(item)
    }

    pub fn add_model_description(&mut self, image_id: &str, model: &str, text: &str) -> Result<()> {
        self.image(image_id)?;
        if model.trim().is_empty() || text.trim().is_empty() {
            return Err(Error::Validation(vec![Violation::new(
                "model_description",
                "model and text must be non-empty",
            )]));
        }
        self.model_descriptions
            .entry(image_id.to_string())
            .or_default()
            .insert(model.to_string(), text.to_string());
        Ok(())
    }

    pub fn define_subset(&mut self, subset: Subset) -> Result<()> {
        let mut violations = Vec::new();
        if subset.name.trim().is_empty()
            || subset.name.contains(['/', '\\'])
            || subset.name.starts_with('.')
        {
            violations.push(Violation::new("name", "must be a plain non-empty file stem"));
        }
        if subset.source == SubsetSource::Model && subset.model.is_none() {
            violations.push(Violation::new("model", "required for model subsets"));
        }
        for id in &subset.image_ids {
            if !self.images.contains_key(id) {
                violations.push(Violation::new("image_ids", format!("unknown image {id:?}")));
            }
        }
        check(violations)?;
        self.subsets.insert(subset.name.clone(), subset);
        Ok(())
    }

    /// Final Task-2 text if the image's description rounds are closed.
    pub fn final_description(&self, image_id: &str) -> Option<&str> {
        self.task2.get(image_id).and_then(|s| s.final_description().ok())
    }

    /// Finalized Task-1 state, if any.
    pub fn finalized_task1(&self, image_id: &str) -> Option<&Task1State> {
        self.task1.get(image_id).filter(|t| t.finalized)
    }

    /// Descriptions for corpus reports: one model's outputs, or the final
    /// human texts when `model` is `None`.
    pub fn corpus(&self, model: Option<&str>) -> Vec<String> {
        match model {
            Some(m) => self
                .model_descriptions
                .values()
                .filter_map(|by_model| by_model.get(m).cloned())
                .collect(),
            None => self
                .task2
                .keys()
                .filter_map(|id| self.final_description(id).map(str::to_string))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BoundingBox;
    use crate::workflow::SeedFlag;

    fn t0() -> DateTime<Utc> {
        DateTime::from_timestamp(1_700_000_000, 0).unwrap()
    }

    fn project() -> Project {
        let mut p = Project::new(
            "p",
            "demo",
            ProjectConfig {
                batch_size: 1,
                ..Default::default()
            },
        )
        .unwrap();
        p.register_images(vec![ImageRecord::new("a", "file:///a.jpg")]).unwrap();
        p
    }

    #[test]
    fn duplicate_registration_rejected() {
        let mut p = project();
        assert!(matches!(
            p.register_images(vec![ImageRecord::new("a", "file:///a.jpg")]),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn full_flow_emits_completion() {
        let mut p = project();
        p.install_task1(Task1State::new("a", vec![], SeedFlag::None)).unwrap();
        p.task1_edit(
            "a",
            Some(0),
            "ann1",
            ObjectEdit::Add {
                object_id: None,
                label: "cup".into(),
                bbox: BoundingBox::new(0.1, 0.1, 0.2, 0.2),
                description: "white".into(),
            },
        )
        .unwrap();
        assert!(p.task2_start("a", SeedCaption::unavailable()).is_err());
        p.task1_finalize("a", Some(1), t0()).unwrap();
        p.task2_start("a", SeedCaption::unavailable()).unwrap();
        assert!(matches!(
            p.task2_submit("a", Some(0), "ann1", "A white cup.", 5.0, t0()),
            Err(Error::AssignmentViolation { .. })
        ));
        p.task2_submit("a", Some(0), "ann2", "A white cup.", 5.0, t0()).unwrap();
        p.task2_submit("a", Some(1), "ann3", "A white cup on a desk.", 5.0, t0()).unwrap();
        let (status, event) =
            p.task2_submit("a", Some(2), "ann4", "A white cup on a desk.", 5.0, t0()).unwrap();
        assert_eq!(status, Task2Status::StoppedBySimilarity);
        assert_eq!(event.unwrap().sample_ids, ["a"]);
        assert_eq!(p.final_description("a"), Some("A white cup on a desk."));
    }

    #[test]
    fn stale_version_is_conflict_and_ledger_untouched() {
        let mut p = project();
        p.task2_start("a", SeedCaption::unavailable()).unwrap();
        p.task2_submit("a", Some(0), "x", "text one", 1.0, t0()).unwrap();
        assert!(matches!(
            p.task2_submit("a", Some(0), "y", "text two", 1.0, t0()),
            Err(Error::Conflict(_))
        ));
        assert!(!p.ledger.sample("a").unwrap().contributed.contains("y"));
    }

    #[test]
    fn subset_validation() {
        let mut p = project();
        let bad = Subset {
            name: "../x".into(),
            source: SubsetSource::Model,
            model: None,
            image_ids: vec!["zz".into()],
        };
        match p.define_subset(bad) {
            Err(Error::Validation(v)) => assert_eq!(v.len(), 3),
            other => panic!("{other:?}"),
        }
    }
}

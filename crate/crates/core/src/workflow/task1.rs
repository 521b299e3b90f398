//! Task 1: salient-object triplets seeded by a detector + captioner, then
//! corrected by an annotator through edit/remove/add/merge operations.
//!
//! State is a fold over [`Task1Event`]s starting from the seed snapshot;
//! [`Task1State::replay`] rebuilds it exactly.

use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::model::{
    object_set_violations, BoundingBox, ImageRecord, ObjectAnnotation, Provenance, Validate,
};
use crate::seeding::{CaptionRequest, Captioner, ClientPolicy, DetectRequest, Detector};
use crate::workflow::assignment::AssignmentLedger;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedFlag {
    #[default]
    None,
    /// Some or all seed model calls failed.
    Unavailable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectEdit {
    Edit {
        target: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
        bbox: Option<BoundingBox>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        description: Option<String>,
    },
    Remove {
        target: String,
    },
    Add {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        object_id: Option<String>,
        label: String,
        #[serde(rename = "box")]
        bbox: BoundingBox,
        #[serde(default)]
        description: String,
    },
    /// Replaces `members` by one new object. Without an explicit box the
    /// product gets the union of the member boxes.
    Merge {
        members: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        object_id: Option<String>,
        label: String,
        #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
        bbox: Option<BoundingBox>,
        #[serde(default)]
        description: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Task1Event {
    /// `edit` is stored resolved: generated ids and default boxes filled in.
    Edited { annotator: String, edit: ObjectEdit },
    Finalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task1State {
    pub image_id: String,
    pub seed_objects: Vec<ObjectAnnotation>,
    pub seed_flag: SeedFlag,
    pub objects: Vec<ObjectAnnotation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotator: Option<String>,
    pub log: Vec<Task1Event>,
    pub finalized: bool,
    pub version: u64,
}

/// Builds the seed object list: one detector box per object, each described
/// by the captioner on the box crop. Model failures never block annotation;
/// they set [`SeedFlag::Unavailable`].
pub fn seed_task1(
    image: &ImageRecord,
    detector: &dyn Detector,
    captioner: &dyn Captioner,
    policy: &ClientPolicy,
) -> Task1State {
    let request = DetectRequest {
        image_uri: image.uri.clone(),
    };
    let detected = match policy.call(|| detector.detect(&request)) {
        Ok(r) if r.is_valid() => r.objects,
        _ => return Task1State::new(&image.image_id, Vec::new(), SeedFlag::Unavailable),
    };
    let captions = policy.map_bounded(&detected, |obj| {
        let req = CaptionRequest::cropped(image.uri.clone(), obj.bbox);
        policy.call(|| captioner.caption(&req))
    });
    let mut flag = SeedFlag::None;
    let objects = detected
        .iter()
        .zip(captions)
        .enumerate()
        .map(|(i, (obj, caption))| {
            let description = match caption {
                Ok(c) => c.text,
                Err(_) => {
                    flag = SeedFlag::Unavailable;
                    String::new()
                }
            };
            ObjectAnnotation {
                object_id: format!("seed-{}", i + 1),
                label: obj.label.clone(),
                bbox: obj.bbox,
                description,
                provenance: Provenance::Seed,
                active: true,
                member_of: None,
            }
        })
        .collect();
    Task1State::new(&image.image_id, objects, flag)
}

impl Task1State {
    pub fn new(image_id: &str, seed_objects: Vec<ObjectAnnotation>, seed_flag: SeedFlag) -> Self {
        Self {
            image_id: image_id.to_string(),
            objects: seed_objects.clone(),
            seed_objects,
            seed_flag,
            annotator: None,
            log: Vec::new(),
            finalized: false,
            version: 0,
        }
    }

    /// Rebuilds a state from its seed snapshot and event log.
    pub fn replay(
        image_id: &str,
        seed_objects: Vec<ObjectAnnotation>,
        seed_flag: SeedFlag,
        events: &[Task1Event],
    ) -> Result<Self> {
        let mut state = Self::new(image_id, seed_objects, seed_flag);
        let mut ledger = AssignmentLedger::default();
        for event in events {
            match event {
                Task1Event::Edited { annotator, edit } => {
                    state.apply_object_edit(edit.clone(), annotator, &mut ledger)?;
                }
                Task1Event::Finalized => state.finalize()?,
            }
        }
        Ok(state)
    }

    pub fn active_objects(&self) -> impl Iterator<Item = &ObjectAnnotation> {
        self.objects.iter().filter(|o| o.active)
    }

    fn find_active(&self, id: &str) -> Result<usize> {
        match self.objects.iter().position(|o| o.object_id == id) {
            Some(i) if self.objects[i].active => Ok(i),
            Some(_) => Err(Error::Conflict(format!("object {id:?} is inactive"))),
            None => Err(Error::Conflict(format!("object {id:?} does not exist"))),
        }
    }

    fn fresh_id(&self, requested: Option<String>) -> Result<String> {
        if let Some(id) = requested {
            if self.objects.iter().any(|o| o.object_id == id) {
                return Err(Error::Conflict(format!("object id {id:?} already exists")));
            }
            return Ok(id);
        }
        let mut n = self.objects.len() + 1;
        loop {
            let id = format!("obj-{n}");
            if !self.objects.iter().any(|o| o.object_id == id) {
                return Ok(id);
            }
            n += 1;
        }
    }

    /// Applies one annotator edit. On error the state is unchanged.
    ///
    /// The first edit binds the Task-1 session to its annotator (recorded in
    /// the ledger); edits from anyone else are assignment violations.
    pub fn apply_object_edit(
        &mut self,
        edit: ObjectEdit,
        annotator: &str,
        ledger: &mut AssignmentLedger,
    ) -> Result<&ObjectEdit> {
        if self.finalized {
            return Err(Error::StateViolation("task 1 is finalized".into()));
        }
        match &self.annotator {
            Some(a) if a != annotator => {
                return Err(Error::AssignmentViolation {
                    sample_id: self.image_id.clone(),
                    annotator: annotator.to_string(),
                })
            }
            Some(_) => {}
            None => ledger.check_eligible(&self.image_id, annotator)?,
        }

        let mut objects = self.objects.clone();
        let resolved = match edit {
            ObjectEdit::Edit {
                target,
                label,
                bbox,
                description,
            } => {
                let i = self.find_active(&target)?;
                let o = &mut objects[i];
                if let Some(l) = &label {
                    o.label = l.clone();
                }
                if let Some(b) = bbox {
                    o.bbox = b;
                }
                if let Some(d) = &description {
                    o.description = d.clone();
                }
                ObjectEdit::Edit {
                    target,
                    label,
                    bbox,
                    description,
                }
            }
            ObjectEdit::Remove { target } => {
                let i = self.find_active(&target)?;
                objects[i].active = false;
                ObjectEdit::Remove { target }
            }
            ObjectEdit::Add {
                object_id,
                label,
                bbox,
                description,
            } => {
                let id = self.fresh_id(object_id)?;
                objects.push(ObjectAnnotation {
                    object_id: id.clone(),
                    label: label.clone(),
                    bbox,
                    description: description.clone(),
                    provenance: Provenance::Human,
                    active: true,
                    member_of: None,
                });
                ObjectEdit::Add {
                    object_id: Some(id),
                    label,
                    bbox,
                    description,
                }
            }
            ObjectEdit::Merge {
                members,
                object_id,
                label,
                bbox,
                description,
            } => {
                let mut distinct = members.clone();
                distinct.sort();
                distinct.dedup();
                if distinct.len() < 2 || distinct.len() != members.len() {
                    return Err(Error::InvalidArgument(
                        "merge needs at least two distinct members".into(),
                    ));
                }
                let idx = members
                    .iter()
                    .map(|m| self.find_active(m))
                    .collect::<Result<Vec<_>>>()?;
                let union = idx
                    .iter()
                    .map(|i| self.objects[*i].bbox)
                    .reduce(BoundingBox::union)
                    .expect("at least two members");
                let bbox = bbox.unwrap_or(union);
                let id = self.fresh_id(object_id)?;
                for i in idx {
                    objects[i].active = false;
                    objects[i].member_of = Some(id.clone());
                }
                objects.push(ObjectAnnotation {
                    object_id: id.clone(),
                    label: label.clone(),
                    bbox,
                    description: description.clone(),
                    provenance: Provenance::Human,
                    active: true,
                    member_of: None,
                });
                ObjectEdit::Merge {
                    members,
                    object_id: Some(id),
                    label,
                    bbox: Some(bbox),
                    description,
                }
            }
        };
        check(object_set_violations(&objects))?;

        if self.annotator.is_none() {
            ledger.record_contribution(&self.image_id, annotator)?;
            self.annotator = Some(annotator.to_string());
        }
        self.objects = objects;
        self.log.push(Task1Event::Edited {
            annotator: annotator.to_string(),
            edit: resolved,
        });
        self.version += 1;
        match self.log.last() {
            Some(Task1Event::Edited { edit, .. }) => Ok(edit),
            _ => unreachable!("edit event just pushed"),
        }
    }

    pub fn finalize(&mut self) -> Result<()> {
        if self.finalized {
            return Err(Error::StateViolation("task 1 already finalized".into()));
        }
        self.finalized = true;
        self.log.push(Task1Event::Finalized);
        self.version += 1;
        Ok(())
    }
}

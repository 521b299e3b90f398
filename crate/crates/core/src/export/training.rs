//! Fine-tuning mixtures built from finalized Task-1 objects and Task-2
//! descriptions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::split_sentences;
use crate::model::ObjectAnnotation;
use crate::project::Project;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskTag {
    Grounding,
    LabelPrediction,
    ObjectDescription,
    LabelList,
    GroundedLabelList,
    DescriptionElaboration,
    FinalDescription,
}

impl TaskTag {
    pub const ALL: [TaskTag; 7] = [
        TaskTag::Grounding,
        TaskTag::LabelPrediction,
        TaskTag::ObjectDescription,
        TaskTag::LabelList,
        TaskTag::GroundedLabelList,
        TaskTag::DescriptionElaboration,
        TaskTag::FinalDescription,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskTag::Grounding => "grounding",
            TaskTag::LabelPrediction => "label_prediction",
            TaskTag::ObjectDescription => "object_description",
            TaskTag::LabelList => "label_list",
            TaskTag::GroundedLabelList => "grounded_label_list",
            TaskTag::DescriptionElaboration => "description_elaboration",
            TaskTag::FinalDescription => "final_description",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown task {s:?}")))
    }

    fn uses_objects(self) -> bool {
        matches!(
            self,
            TaskTag::Grounding
                | TaskTag::LabelPrediction
                | TaskTag::ObjectDescription
                | TaskTag::LabelList
                | TaskTag::GroundedLabelList
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub task_tag: TaskTag,
    pub image_id: String,
    pub image_uri: String,
    pub input: BTreeMap<String, String>,
    pub target: String,
}

fn sort_key(label: &str) -> (String, String) {
    (label.to_lowercase(), label.to_string())
}

/// Labels sorted alphabetically (case-insensitive), comma separated.
pub fn label_list_text(objects: &[&ObjectAnnotation]) -> String {
    let mut labels: Vec<&str> = objects.iter().map(|o| o.label.as_str()).collect();
    labels.sort_by_key(|l| sort_key(l));
    labels.join(", ")
}

/// `label [ymin, xmin, ymax, xmax]` entries sorted by label then box.
pub fn grounded_label_list_text(objects: &[&ObjectAnnotation]) -> String {
    let mut items: Vec<&&ObjectAnnotation> = objects.iter().collect();
    items.sort_by(|a, b| {
        sort_key(&a.label)
            .cmp(&sort_key(&b.label))
            .then_with(|| {
                a.bbox
                    .to_array()
                    .partial_cmp(&b.bbox.to_array())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
    items
        .iter()
        .map(|o| format!("{} {}", o.label, o.bbox.to_text()))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Sentences kept when dropping a fraction `x` of `s` sentences from the
/// end: `ceil((1 - x) * s)`, never below one for a non-empty text.
pub fn kept_sentences(s: usize, x: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!("corruption fraction {x} outside [0, 1)")));
    }
    if s == 0 {
        return Ok(0);
    }
    // The epsilon keeps exact products like 0.6 * 5 from rounding up to 4.
    let keep = ((1.0 - x) * s as f64 - 1e-9).ceil() as usize;
    Ok(keep.clamp(1, s))
}

/// First `kept_sentences` sentences of `text`, space joined.
pub fn corrupt_description(text: &str, x: f64) -> Result<String> {
    let sentences = split_sentences(text);
    let keep = kept_sentences(sentences.len(), x)?;
    Ok(sentences[..keep].join(" "))
}

fn fraction_text(x: f64) -> String {
    format!("{x:.6}")
}

/// Emits records for `tasks` over every image with the needed finalized
/// data, image ids ascending, tasks in `tasks` order.
pub fn export_training_mixture(
    project: &Project,
    tasks: &[TaskTag],
    corruption_fractions: &[f64],
) -> Result<Vec<TrainingRecord>> {
    for &x in corruption_fractions {
        kept_sentences(1, x)?;
    }
    let mut out = Vec::new();
    for (image_id, image) in &project.images {
        let objects: Vec<&ObjectAnnotation> = project
            .finalized_task1(image_id)
            .map(|t| t.active_objects().collect())
            .unwrap_or_default();
        let final_text = project.final_description(image_id);
        let record = |task_tag, input: BTreeMap<String, String>, target: String| TrainingRecord {
            task_tag,
            image_id: image_id.clone(),
            image_uri: image.uri.clone(),
            input,
            target,
        };
        for &task in tasks {
            if task.uses_objects() && project.finalized_task1(image_id).is_none() {
                continue;
            }
            match task {
                TaskTag::Grounding => out.extend(objects.iter().map(|o| {
                    record(
                        task,
                        [("label".into(), o.label.clone()), ("description".into(), o.description.clone())].into(),
                        o.bbox.to_text(),
                    )
                })),
                TaskTag::LabelPrediction => out.extend(objects.iter().map(|o| {
                    record(task, [("box".into(), o.bbox.to_text())].into(), o.label.clone())
                })),
                TaskTag::ObjectDescription => out.extend(objects.iter().map(|o| {
                    record(
                        task,
                        [("box".into(), o.bbox.to_text()), ("label".into(), o.label.clone())].into(),
                        o.description.clone(),
                    )
                })),
                TaskTag::LabelList if !objects.is_empty() => {
                    out.push(record(task, BTreeMap::new(), label_list_text(&objects)))
                }
                TaskTag::GroundedLabelList if !objects.is_empty() => {
                    out.push(record(task, BTreeMap::new(), grounded_label_list_text(&objects)))
                }
                TaskTag::DescriptionElaboration => {
                    if let Some(text) = final_text {
                        for &x in corruption_fractions {
                            out.push(record(
                                task,
                                [
                                    ("description".into(), corrupt_description(text, x)?),
                                    ("fraction".into(), fraction_text(x)),
                                ]
                                .into(),
                                text.to_string(),
                            ));
                        }
                    }
                }
                TaskTag::FinalDescription => {
                    if let Some(text) = final_text {
                        out.push(record(task, BTreeMap::new(), text.to_string()));
                    }
                }
                TaskTag::LabelList | TaskTag::GroundedLabelList => {}
            }
        }
    }
    Ok(out)
}

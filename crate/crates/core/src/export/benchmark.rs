//! Benchmark release layout: one `<subset>.jsonl` per subset plus
//! `manifest.json`. Output is a pure function of project state.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::canonical::{from_jsonl, to_canonical_string, to_jsonl};
use crate::error::{check, Error, Result};
use crate::model::{BoundingBox, FiveMetricRating, Provenance, Violation};
use crate::project::{Project, Subset, SubsetSource};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BenchmarkRecord {
    Image {
        image_id: String,
        uri: String,
        #[serde(default)]
        metadata: BTreeMap<String, String>,
        #[serde(default)]
        category: Vec<String>,
    },
    Object {
        image_id: String,
        object_id: String,
        label: String,
        #[serde(rename = "box")]
        bbox: BoundingBox,
        description: String,
        provenance: Provenance,
    },
    Description {
        image_id: String,
        /// `"human"` or the model name.
        author: String,
        text: String,
        #[serde(default)]
        rounds: u32,
    },
    Sxs {
        item_id: String,
        image_id: String,
        source_1: String,
        source_2: String,
        text_1: String,
        text_2: String,
        rating: FiveMetricRating,
        justification: String,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub images: usize,
    pub objects: usize,
    pub descriptions: usize,
    pub sxs: usize,
}

impl Counts {
    fn add(&mut self, r: &BenchmarkRecord) {
        match r {
            BenchmarkRecord::Image { .. } => self.images += 1,
            BenchmarkRecord::Object { .. } => self.objects += 1,
            BenchmarkRecord::Description { .. } => self.descriptions += 1,
            BenchmarkRecord::Sxs { .. } => self.sxs += 1,
        }
    }

    fn of(records: &[BenchmarkRecord]) -> Self {
        let mut c = Self::default();
        records.iter().for_each(|r| c.add(r));
        c
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetEntry {
    pub name: String,
    pub source: SubsetSource,
    pub file: String,
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Excluded {
    pub subset: String,
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkManifest {
    pub subsets: Vec<SubsetEntry>,
    pub totals: Counts,
    pub excluded: Vec<Excluded>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetRecords {
    pub name: String,
    pub source: SubsetSource,
    pub records: Vec<BenchmarkRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkBundle {
    pub manifest: BenchmarkManifest,
    pub subsets: Vec<SubsetRecords>,
}

fn subset_records(project: &Project, subset: &Subset, excluded: &mut Vec<Excluded>) -> Vec<BenchmarkRecord> {
    let mut ids = subset.image_ids.clone();
    ids.sort();
    ids.dedup();
    let mut out = Vec::new();
    let mut exported = Vec::new();
    let exclude = |excluded: &mut Vec<Excluded>, id: &str, reason: &str| {
        excluded.push(Excluded {
            subset: subset.name.clone(),
            id: id.to_string(),
            reason: reason.to_string(),
        })
    };
    for id in &ids {
        let Some(image) = project.images.get(id) else {
            exclude(excluded, id, "unknown image");
            continue;
        };
        let mut records = vec![BenchmarkRecord::Image {
            image_id: id.clone(),
            uri: image.uri.clone(),
            metadata: image.metadata.clone(),
            category: image.category.clone(),
        }];
        match subset.source {
            SubsetSource::Human => {
                if project.task1.get(id).is_some_and(|t| !t.finalized) {
                    exclude(excluded, id, "task 1 not finalized");
                    continue;
                }
                let Some(state) = project.task2.get(id).filter(|s| !s.status.is_open()) else {
                    exclude(excluded, id, "task 2 not finalized");
                    continue;
                };
                if let Some(t1) = project.finalized_task1(id) {
                    let mut objects: Vec<_> = t1.active_objects().collect();
                    objects.sort_by(|a, b| a.object_id.cmp(&b.object_id));
                    records.extend(objects.into_iter().map(|o| BenchmarkRecord::Object {
                        image_id: id.clone(),
                        object_id: o.object_id.clone(),
                        label: o.label.clone(),
                        bbox: o.bbox,
                        description: o.description.clone(),
                        provenance: o.provenance,
                    }));
                }
                records.push(BenchmarkRecord::Description {
                    image_id: id.clone(),
                    author: "human".into(),
                    text: state.final_description().unwrap_or_default().to_string(),
                    rounds: state.rounds.len() as u32,
                });
            }
            SubsetSource::Model => {
                let model = subset.model.as_deref().unwrap_or_default();
                let Some(text) = project.model_descriptions.get(id).and_then(|m| m.get(model)) else {
                    exclude(excluded, id, "no model description");
                    continue;
                };
                records.push(BenchmarkRecord::Description {
                    image_id: id.clone(),
                    author: model.to_string(),
                    text: text.clone(),
                    rounds: 0,
                });
            }
        }
        exported.push(id.clone());
        out.extend(records);
    }
    for item in project.sxs.values().filter(|i| exported.binary_search(&i.image_id).is_ok()) {
        match (item.rating_source, subset.source) {
            (Some(rating), _) => out.push(BenchmarkRecord::Sxs {
                item_id: item.item_id.clone(),
                image_id: item.image_id.clone(),
                source_1: item.source_1.origin.clone(),
                source_2: item.source_2.origin.clone(),
                text_1: item.source_1.text.clone(),
                text_2: item.source_2.text.clone(),
                rating,
                justification: item.justification.clone(),
            }),
            (None, _) => exclude(excluded, &item.item_id, "sxs item unrated"),
        }
    }
    out
}

/// Builds the release bundle. Unfinalized samples are listed under
/// `excluded`; subsets that end up empty produce no file.
pub fn build_benchmark(project: &Project) -> BenchmarkBundle {
    let mut excluded = Vec::new();
    let mut subsets = Vec::new();
    let mut entries = Vec::new();
    let mut totals = Counts::default();
    for subset in project.subsets.values() {
        let records = subset_records(project, subset, &mut excluded);
        if records.is_empty() {
            continue;
        }
        let counts = Counts::of(&records);
        totals.images += counts.images;
        totals.objects += counts.objects;
        totals.descriptions += counts.descriptions;
        totals.sxs += counts.sxs;
        entries.push(SubsetEntry {
            name: subset.name.clone(),
            source: subset.source,
            file: format!("{}.jsonl", subset.name),
            counts,
        });
        subsets.push(SubsetRecords {
            name: subset.name.clone(),
            source: subset.source,
            records,
        });
    }
    excluded.sort();
    BenchmarkBundle {
        manifest: BenchmarkManifest {
            subsets: entries,
            totals,
            excluded,
        },
        subsets,
    }
}

/// File name to exact contents.
pub fn render_bundle(bundle: &BenchmarkBundle) -> Result<BTreeMap<String, String>> {
    let mut files = BTreeMap::new();
    for (entry, subset) in bundle.manifest.subsets.iter().zip(&bundle.subsets) {
        files.insert(entry.file.clone(), to_jsonl(&subset.records)?);
    }
    files.insert(
        MANIFEST_FILE.to_string(),
        to_canonical_string(&bundle.manifest)? + "\n",
    );
    Ok(files)
}

pub fn write_bundle(bundle: &BenchmarkBundle, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (name, contents) in render_bundle(bundle)? {
        fs::write(dir.join(name), contents)?;
    }
    Ok(())
}

pub fn export_benchmark(project: &Project, dir: &Path) -> Result<BenchmarkManifest> {
    let bundle = build_benchmark(project);
    write_bundle(&bundle, dir)?;
    Ok(bundle.manifest)
}

/// Reads a bundle back, checking manifest counts against file contents.
pub fn import_benchmark(dir: &Path) -> Result<BenchmarkBundle> {
    let manifest: BenchmarkManifest =
        serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE))?)?;
    let mut subsets = Vec::new();
    let mut violations = Vec::new();
    for entry in &manifest.subsets {
        if entry.file.contains(['/', '\\']) {
            return Err(Error::InvalidArgument(format!("bad file name {:?}", entry.file)));
        }
        let records: Vec<BenchmarkRecord> = from_jsonl(&fs::read_to_string(dir.join(&entry.file))?)?;
        if Counts::of(&records) != entry.counts {
            violations.push(Violation::new(
                format!("subsets.{}", entry.name),
                "manifest counts differ from file records",
            ));
        }
        subsets.push(SubsetRecords {
            name: entry.name.clone(),
            source: entry.source,
            records,
        });
    }
    check(violations)?;
    Ok(BenchmarkBundle { manifest, subsets })
}

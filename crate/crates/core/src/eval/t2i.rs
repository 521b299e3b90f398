//! Text-to-image reconstruction scoring: cumulative sentence prompts, human
//! ranks with ties, and embedding cosine against the original image.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{ClientError, Error, Result};
use crate::metrics::split_sentences;
use crate::seeding::ClientPolicy;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    /// `"1"`, `"1-2"`, `"1-3"`, ...
    pub label: String,
    pub text: String,
}

pub fn chunk_label(k: usize) -> String {
    if k == 1 {
        "1".to_string()
    } else {
        format!("1-{k}")
    }
}

/// Prefixes of the first k sentences, joined by single spaces.
pub fn cumulative_chunks(description: &str) -> Result<Vec<Chunk>> {
    let sentences = split_sentences(description);
    if sentences.is_empty() {
        return Err(Error::InvalidArgument("description has no sentences".into()));
    }
    let mut text = String::new();
    Ok(sentences
        .iter()
        .enumerate()
        .map(|(i, s)| {
            if i > 0 {
                text.push(' ');
            }
            text.push_str(s);
            Chunk {
                label: chunk_label(i + 1),
                text: text.clone(),
            }
        })
        .collect())
}

/// Human ranks of each system's reconstruction for one image and chunk.
/// Rank 1 is most similar; equal ranks are ties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRecord {
    pub image_id: String,
    pub chunk: String,
    pub ranks: BTreeMap<String, u32>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub embed_similarity: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanRankTable {
    /// Mean over every (image, chunk) record.
    pub per_record: BTreeMap<String, f64>,
    /// Mean over images of each image's mean across its records.
    pub per_image: BTreeMap<String, f64>,
    pub n_records: usize,
    pub n_images: usize,
}

/// Mean rank per system over records whose chunk label is in `chunks`
/// (all records when `None`). Every selected record must rank the same
/// systems.
pub fn mean_rank(records: &[RankRecord], chunks: Option<&[&str]>) -> Result<MeanRankTable> {
    let selected: Vec<&RankRecord> = records
        .iter()
        .filter(|r| chunks.is_none_or(|c| c.contains(&r.chunk.as_str())))
        .collect();
    let first = selected
        .first()
        .ok_or_else(|| Error::InvalidArgument("no records match the chunk filter".into()))?;
    let systems: BTreeSet<&String> = first.ranks.keys().collect();
    for r in &selected {
        if r.ranks.keys().collect::<BTreeSet<_>>() != systems {
            return Err(Error::InvalidArgument(format!(
                "record {}/{} ranks a different system set",
                r.image_id, r.chunk
            )));
        }
        if r.ranks.values().any(|&v| v == 0) {
            return Err(Error::InvalidArgument(format!(
                "record {}/{} has a rank below 1",
                r.image_id, r.chunk
            )));
        }
    }
    let mut by_image: BTreeMap<&str, Vec<&RankRecord>> = BTreeMap::new();
    for r in &selected {
        by_image.entry(&r.image_id).or_default().push(r);
    }
    let mean = |rs: &[&RankRecord], s: &str| {
        rs.iter().map(|r| f64::from(r.ranks[s])).sum::<f64>() / rs.len() as f64
    };
    let mut per_record = BTreeMap::new();
    let mut per_image = BTreeMap::new();
    for s in systems {
        per_record.insert(s.clone(), mean(&selected, s));
        let img_mean =
            by_image.values().map(|rs| mean(rs, s)).sum::<f64>() / by_image.len() as f64;
        per_image.insert(s.clone(), img_mean);
    }
    Ok(MeanRankTable {
        per_record,
        per_image,
        n_records: selected.len(),
        n_images: by_image.len(),
    })
}

/// Mean of stored embedding similarities per system over the filter.
/// Records lacking a system's similarity are skipped for that system.
pub fn mean_similarity(records: &[RankRecord], chunks: Option<&[&str]>) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in records
        .iter()
        .filter(|r| chunks.is_none_or(|c| c.contains(&r.chunk.as_str())))
    {
        for (s, v) in &r.embed_similarity {
            let e = acc.entry(s.clone()).or_default();
            e.0 += v;
            e.1 += 1;
        }
    }
    acc.into_iter()
        .map(|(s, (sum, n))| (s, sum / n as f64))
        .collect()
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "vector dims {} and {} are not comparable",
            a.len(),
            b.len()
        )));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::InvalidArgument("zero vector".into()));
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedRequest {
    pub image_uri: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedResponse {
    pub vector: Vec<f64>,
    pub dim: usize,
}

pub trait Embedder: Send + Sync {
    fn embed(&self, request: &EmbedRequest) -> Result<EmbedResponse, ClientError>;
}

/// Prompt to image generator; returns the generated image uri.
pub trait ImageGenerator: Send + Sync {
    fn generate(&self, prompt: &str) -> Result<String, ClientError>;
}

fn embed_checked(
    uri: &str,
    embedder: &dyn Embedder,
    policy: &ClientPolicy,
) -> Result<Vec<f64>, ClientError> {
    let req = EmbedRequest {
        image_uri: uri.to_string(),
    };
    let r = policy.call(|| embedder.embed(&req))?;
    if r.vector.len() != r.dim || r.dim == 0 {
        return Err(ClientError::Malformed(format!(
            "dim {} with {} values",
            r.dim,
            r.vector.len()
        )));
    }
    Ok(r.vector)
}

/// Cosine between two images' embeddings. Any client failure, or vectors
/// that cannot be compared, means the similarity is unavailable.
pub fn embed_similarity(
    original_uri: &str,
    generated_uri: &str,
    embedder: &dyn Embedder,
    policy: &ClientPolicy,
) -> Result<f64, ClientError> {
    let a = embed_checked(original_uri, embedder, policy)?;
    let b = embed_checked(generated_uri, embedder, policy)?;
    cosine(&a, &b).map_err(|e| ClientError::Malformed(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct T2iInput {
    pub image_id: String,
    pub image_uri: String,
    /// System name to description.
    pub descriptions: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct T2iSample {
    pub image_id: String,
    pub system: String,
    pub chunk: String,
    pub prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_uri: Option<String>,
    /// `None` when generation or embedding failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub similarity: Option<f64>,
}

/// Generates one image per (image, system, chunk) for the first
/// `max_chunks` cumulative chunks and scores it against the original.
pub fn run_t2i(
    inputs: &[T2iInput],
    generator: &dyn ImageGenerator,
    embedder: &dyn Embedder,
    policy: &ClientPolicy,
    max_chunks: usize,
) -> Result<Vec<T2iSample>> {
    let mut jobs = Vec::new();
    for input in inputs {
        for (system, desc) in &input.descriptions {
            for chunk in cumulative_chunks(desc)?.into_iter().take(max_chunks) {
                jobs.push((input, system.clone(), chunk));
            }
        }
    }
    Ok(policy.map_bounded(&jobs, |(input, system, chunk)| {
        let generated = policy.call(|| generator.generate(&chunk.text)).ok();
        let similarity = generated
            .as_deref()
            .and_then(|g| embed_similarity(&input.image_uri, g, embedder, policy).ok());
        T2iSample {
            image_id: input.image_id.clone(),
            system: system.clone(),
            chunk: chunk.label.clone(),
            prompt: chunk.text.clone(),
            generated_uri: generated,
            similarity,
        }
    }))
}

/// Mean similarity per (system, chunk) over samples that have one.
pub fn similarity_by_chunk(samples: &[T2iSample]) -> BTreeMap<(String, String), f64> {
    let mut acc: BTreeMap<(String, String), (f64, usize)> = BTreeMap::new();
    for s in samples {
        if let Some(v) = s.similarity {
            let e = acc.entry((s.system.clone(), s.chunk.clone())).or_default();
            e.0 += v;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(k, (sum, n))| (k, sum / n as f64)).collect()
}

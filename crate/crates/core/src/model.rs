//! Shared domain types and their invariant checks.
//!
//! Every value here is plain data: cloning is cheap enough, nothing holds
//! interior mutability, and all types are `Send + Sync`. Invariants are not
//! enforced at construction; [`Validate::violations`] reports them so that
//! decoded wire data can be rejected with a full list instead of the first
//! failure.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One broken invariant, addressed by a dotted field path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }

    fn nested(self, prefix: &str) -> Self {
        let field = if self.field.is_empty() {
            prefix.to_string()
        } else {
            format!("{prefix}.{}", self.field)
        };
        Self { field, ..self }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Invariant checking. An empty list means the value is valid.
pub trait Validate {
    fn violations(&self) -> Vec<Violation>;

    fn is_valid(&self) -> bool {
        self.violations().is_empty()
    }
}

/// Returns every violation of `value`, empty iff valid.
pub fn validate<T: Validate + ?Sized>(value: &T) -> Vec<Violation> {
    value.violations()
}

fn prefixed(prefix: &str, inner: Vec<Violation>) -> impl Iterator<Item = Violation> + '_ {
    inner.into_iter().map(move |v| v.nested(prefix))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub image_id: String,
    pub uri: String,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
    #[serde(default)]
    pub category: Vec<String>,
}

impl ImageRecord {
    pub fn new(image_id: impl Into<String>, uri: impl Into<String>) -> Self {
        Self {
            image_id: image_id.into(),
            uri: uri.into(),
            metadata: BTreeMap::new(),
            category: Vec::new(),
        }
    }
}

impl Validate for ImageRecord {
    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.image_id.trim().is_empty() {
            out.push(Violation::new("image_id", "must be non-empty"));
        }
        if self.uri.trim().is_empty() {
            out.push(Violation::new("uri", "must be non-empty"));
        }
        out
    }
}

/// Checks uniqueness of `image_id` across a project's images.
pub fn duplicate_image_ids<'a>(images: impl IntoIterator<Item = &'a ImageRecord>) -> Vec<Violation> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for image in images {
        let count = seen.entry(image.image_id.as_str()).or_insert(0usize);
        *count += 1;
        if *count == 2 {
            out.push(Violation::new(
                "image_id",
                format!("duplicate id {:?} within project", image.image_id),
            ));
        }
    }
    out
}

/// Axis-aligned box in normalized image coordinates.
///
/// Serialized as `[ymin, xmin, ymax, xmax]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub ymin: f64,
    pub xmin: f64,
    pub ymax: f64,
    pub xmax: f64,
}

impl BoundingBox {
    pub const fn new(ymin: f64, xmin: f64, ymax: f64, xmax: f64) -> Self {
        Self {
            ymin,
            xmin,
            ymax,
            xmax,
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.ymin, self.xmin, self.ymax, self.xmax]
    }

    /// Smallest box covering both.
    pub fn union(self, other: Self) -> Self {
        Self {
            ymin: self.ymin.min(other.ymin),
            xmin: self.xmin.min(other.xmin),
            ymax: self.ymax.max(other.ymax),
            xmax: self.xmax.max(other.xmax),
        }
    }

    pub fn area(self) -> f64 {
        (self.ymax - self.ymin).max(0.0) * (self.xmax - self.xmin).max(0.0)
    }

    /// `[ymin, xmin, ymax, xmax]` with six decimals, the text form used in
    /// training targets.
    pub fn to_text(self) -> String {
        format!(
            "[{:.6}, {:.6}, {:.6}, {:.6}]",
            self.ymin, self.xmin, self.ymax, self.xmax
        )
    }
}

impl Serialize for BoundingBox {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_array().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BoundingBox {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [ymin, xmin, ymax, xmax] = <[f64; 4]>::deserialize(deserializer)?;
        Ok(Self::new(ymin, xmin, ymax, xmax))
    }
}

impl Validate for BoundingBox {
    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (name, v) in [
            ("ymin", self.ymin),
            ("xmin", self.xmin),
            ("ymax", self.ymax),
            ("xmax", self.xmax),
        ] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                out.push(Violation::new(name, "outside [0, 1]"));
            }
        }
        // Zero-area boxes fail here too.
        if !(self.ymin < self.ymax) {
            out.push(Violation::new("ymin", "ymin < ymax"));
        }
        if !(self.xmin < self.xmax) {
            out.push(Violation::new("xmin", "xmin < xmax"));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Seed,
    Human,
}

/// One salient object triplet: label, box, description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectAnnotation {
    pub object_id: String,
    pub label: String,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    pub description: String,
    pub provenance: Provenance,
    #[serde(default = "default_true")]
    pub active: bool,
    /// Set on objects that were merged away; names the merge product.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub member_of: Option<String>,
}

fn default_true() -> bool {
    true
}

impl Validate for ObjectAnnotation {
    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.object_id.trim().is_empty() {
            out.push(Violation::new("object_id", "must be non-empty"));
        }
        if self.label.trim().is_empty() {
            out.push(Violation::new("label", "must be non-empty"));
        }
        out.extend(prefixed("box", self.bbox.violations()));
        if self.member_of.is_some() && self.active {
            out.push(Violation::new(
                "member_of",
                "a merged-away object must be inactive",
            ));
        }
        out
    }
}

/// Cross-object checks for a Task-1 object list: unique ids, and every
/// merged-away object points at exactly one existing merge product.
pub fn object_set_violations(objects: &[ObjectAnnotation]) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut ids = BTreeMap::new();
    for (i, o) in objects.iter().enumerate() {
        out.extend(prefixed(&format!("objects[{i}]"), o.violations()));
        if ids.insert(o.object_id.as_str(), i).is_some() {
            out.push(Violation::new(
                format!("objects[{i}].object_id"),
                format!("duplicate id {:?}", o.object_id),
            ));
        }
    }
    for (i, o) in objects.iter().enumerate() {
        if let Some(product) = &o.member_of {
            if product == &o.object_id || !ids.contains_key(product.as_str()) {
                out.push(Violation::new(
                    format!("objects[{i}].member_of"),
                    format!("merge product {product:?} does not exist"),
                ));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptionRound {
    pub round_index: u32,
    pub annotator_id: String,
    pub text: String,
    pub elapsed_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub similarity_to_previous: Option<f64>,
}

impl Validate for DescriptionRound {
    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.round_index < 1 {
            out.push(Violation::new("round_index", "must be >= 1"));
        }
        if self.text.trim().is_empty() {
            out.push(Violation::new("text", "must be non-empty"));
        }
        if !self.elapsed_seconds.is_finite() || self.elapsed_seconds < 0.0 {
            out.push(Violation::new("elapsed_seconds", "must be non-negative"));
        }
        match (self.round_index, self.similarity_to_previous) {
            (1, Some(_)) => out.push(Violation::new(
                "similarity_to_previous",
                "round 1 has no previous round",
            )),
            (r, None) if r >= 2 => out.push(Violation::new(
                "similarity_to_previous",
                "required for rounds >= 2",
            )),
            (_, Some(s)) if !(0.0..=1.0).contains(&s) => {
                out.push(Violation::new("similarity_to_previous", "outside [0, 1]"))
            }
            _ => {}
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task2Status {
    Open,
    StoppedBySimilarity,
    StoppedByMaxRounds,
}

impl Task2Status {
    pub fn is_open(self) -> bool {
        self == Task2Status::Open
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Task2Config {
    pub similarity_threshold: f64,
    pub max_rounds: u32,
    pub ngram_n: usize,
}

impl Default for Task2Config {
    fn default() -> Self {
        Self {
            similarity_threshold: 0.8,
            max_rounds: 3,
            ngram_n: 1,
        }
    }
}

impl Validate for Task2Config {
    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(self.similarity_threshold > 0.0 && self.similarity_threshold <= 1.0) {
            out.push(Violation::new("similarity_threshold", "outside (0, 1]"));
        }
        if self.max_rounds < 1 {
            out.push(Violation::new("max_rounds", "must be >= 1"));
        }
        if self.ngram_n < 1 {
            out.push(Violation::new("ngram_n", "must be >= 1"));
        }
        out
    }
}

/// A machine caption used to seed Task 2, with the model that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedCaption {
    pub text: String,
    pub model_version: String,
    /// False when the captioner failed and annotation proceeds unseeded.
    pub available: bool,
}

impl SeedCaption {
    pub fn unavailable() -> Self {
        Self {
            text: String::new(),
            model_version: String::new(),
            available: false,
        }
    }
}

/// Sequential round ledger for one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task2State {
    pub image_id: String,
    pub seed: SeedCaption,
    pub task1_digest: Vec<ObjectAnnotation>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
    pub rounds: Vec<DescriptionRound>,
    pub status: Task2Status,
    pub config: Task2Config,
    pub version: u64,
}

impl Validate for Task2State {
    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.image_id.trim().is_empty() {
            out.push(Violation::new("image_id", "must be non-empty"));
        }
        out.extend(prefixed("config", self.config.violations()));
        for (i, r) in self.rounds.iter().enumerate() {
            out.extend(prefixed(&format!("rounds[{i}]"), r.violations()));
            if r.round_index as usize != i + 1 {
                out.push(Violation::new(
                    format!("rounds[{i}].round_index"),
                    "round indices must be contiguous from 1",
                ));
            }
        }
        if !self.status.is_open() && self.rounds.is_empty() {
            out.push(Violation::new("status", "closed state requires rounds"));
        }
        if self.status == Task2Status::StoppedBySimilarity {
            let last = self.rounds.last().and_then(|r| r.similarity_to_previous);
            if !last.is_some_and(|s| s >= self.config.similarity_threshold) {
                out.push(Violation::new(
                    "status",
                    "stopped_by_similarity requires last similarity >= threshold",
                ));
            }
        }
        if self.rounds.len() > self.config.max_rounds as usize {
            out.push(Violation::new("rounds", "more rounds than max_rounds"));
        }
        out
    }
}

/// Five-metric side-by-side rating.
///
/// Each value is in `-2..=2`: negative favors side A (or source 1), positive
/// favors side B (or source 2), magnitude 1 is marginal and 2 substantial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct FiveMetricRating {
    pub comprehensiveness: i8,
    pub specificity: i8,
    pub hallucination: i8,
    pub tldr: i8,
    pub human_like: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Comprehensiveness,
    Specificity,
    Hallucination,
    Tldr,
    HumanLike,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Comprehensiveness,
        Metric::Specificity,
        Metric::Hallucination,
        Metric::Tldr,
        Metric::HumanLike,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Comprehensiveness => "comprehensiveness",
            Metric::Specificity => "specificity",
            Metric::Hallucination => "hallucination",
            Metric::Tldr => "tldr",
            Metric::HumanLike => "human_like",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Metric::Comprehensiveness => "Comprehensiveness",
            Metric::Specificity => "Specificity",
            Metric::Hallucination => "Hallucinations",
            Metric::Tldr => "TLDR",
            Metric::HumanLike => "Human-Like",
        }
    }
}

impl FiveMetricRating {
    pub const fn new(
        comprehensiveness: i8,
        specificity: i8,
        hallucination: i8,
        tldr: i8,
        human_like: i8,
    ) -> Self {
        Self {
            comprehensiveness,
            specificity,
            hallucination,
            tldr,
            human_like,
        }
    }

    pub fn get(&self, metric: Metric) -> i8 {
        match metric {
            Metric::Comprehensiveness => self.comprehensiveness,
            Metric::Specificity => self.specificity,
            Metric::Hallucination => self.hallucination,
            Metric::Tldr => self.tldr,
            Metric::HumanLike => self.human_like,
        }
    }

    pub fn values(&self) -> [i8; 5] {
        Metric::ALL.map(|m| self.get(m))
    }

    /// Swaps the A/B (or source) frame.
    pub fn negated(self) -> Self {
        Self::new(
            -self.comprehensiveness,
            -self.specificity,
            -self.hallucination,
            -self.tldr,
            -self.human_like,
        )
    }
}

impl Validate for FiveMetricRating {
    fn violations(&self) -> Vec<Violation> {
        Metric::ALL
            .iter()
            .filter(|m| !(-2..=2).contains(&self.get(**m)))
            .map(|m| Violation::new(m.name(), "value outside {-2..2}"))
            .collect()
    }
}

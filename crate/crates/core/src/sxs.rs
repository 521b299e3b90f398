//! Side-by-side comparisons on the five-metric rubric.
//!
//! Ratings arrive in the A/B frame the rater saw and are stored in the
//! source frame: negative favors `source_1`, positive favors `source_2`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::model::{FiveMetricRating, Metric, Validate, Violation};
use crate::workflow::keyed_rng;

pub const BUCKETS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SxSSource {
    pub origin: String,
    pub text: String,
}

impl SxSSource {
    pub fn new(origin: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            origin: origin.into(),
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SxSItem {
    pub item_id: String,
    pub image_id: String,
    pub source_1: SxSSource,
    pub source_2: SxSSource,
    /// `source_2` is shown as side A.
    pub flipped: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating_ab: Option<FiveMetricRating>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating_source: Option<FiveMetricRating>,
    #[serde(default)]
    pub justification: String,
    #[serde(default)]
    pub version: u64,
}

impl Validate for SxSItem {
    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.source_1.text.trim().is_empty() {
            out.push(Violation::new("source_1.text", "must be non-empty"));
        }
        if self.source_2.text.trim().is_empty() {
            out.push(Violation::new("source_2.text", "must be non-empty"));
        }
        if self.source_1.text == self.source_2.text {
            out.push(Violation::new("source_2.text", "sources must differ"));
        }
        for (name, r) in [("rating_ab", &self.rating_ab), ("rating_source", &self.rating_source)] {
            if let Some(r) = r {
                for v in r.violations() {
                    out.push(Violation::new(format!("{name}.{}", v.field), v.message));
                }
            }
        }
        if self.rating_ab.is_some() != self.rating_source.is_some() {
            out.push(Violation::new("rating_source", "both frames must be present together"));
        }
        if let (Some(ab), Some(src)) = (self.rating_ab, self.rating_source) {
            if deflip(ab, self.flipped) != src {
                out.push(Violation::new("rating_source", "inconsistent with rating_ab and flipped"));
            }
        }
        if self.rating_ab.is_some() && self.justification.trim().is_empty() {
            out.push(Violation::new("justification", "required once rated"));
        }
        out
    }
}

fn deflip(rating: FiveMetricRating, flipped: bool) -> FiveMetricRating {
    if flipped {
        rating.negated()
    } else {
        rating
    }
}

/// Builds an unrated item; the side assignment is a seeded coin flip keyed
/// on `item_id`.
pub fn create_sxs(
    item_id: &str,
    image_id: &str,
    source_1: SxSSource,
    source_2: SxSSource,
    rng_seed: u64,
) -> Result<SxSItem> {
    if source_1.text.trim().is_empty() || source_2.text.trim().is_empty() {
        return Err(Error::InvalidPair("texts must be non-empty".into()));
    }
    if source_1.text == source_2.text {
        return Err(Error::InvalidPair("identical texts".into()));
    }
    let flipped = keyed_rng(rng_seed, item_id, 0).random_bool(0.5);
    Ok(SxSItem {
        item_id: item_id.to_string(),
        image_id: image_id.to_string(),
        source_1,
        source_2,
        flipped,
        rating_ab: None,
        rating_source: None,
        justification: String::new(),
        version: 0,
    })
}

/// What the rater sees. There is no origin field at all.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentedItem {
    pub item_id: String,
    pub image_id: String,
    pub text_a: String,
    pub text_b: String,
    pub version: u64,
}

impl SxSItem {
    pub fn presented(&self) -> PresentedItem {
        let (a, b) = if self.flipped {
            (&self.source_2, &self.source_1)
        } else {
            (&self.source_1, &self.source_2)
        };
        PresentedItem {
            item_id: self.item_id.clone(),
            image_id: self.image_id.clone(),
            text_a: a.text.clone(),
            text_b: b.text.clone(),
            version: self.version,
        }
    }

    pub fn is_rated(&self) -> bool {
        self.rating_source.is_some()
    }

    /// Stores an A/B-frame rating and its de-flipped source-frame copy.
    pub fn record_judgment(&mut self, rating_ab: FiveMetricRating, justification: &str) -> Result<()> {
        if self.is_rated() {
            return Err(Error::Conflict(format!("item {:?} already rated", self.item_id)));
        }
        if justification.trim().is_empty() {
            return Err(Error::Validation(vec![Violation::new(
                "justification",
                "must be non-empty",
            )]));
        }
        check(rating_ab.violations())?;
        self.rating_ab = Some(rating_ab);
        self.rating_source = Some(deflip(rating_ab, self.flipped));
        self.justification = justification.to_string();
        self.version += 1;
        Ok(())
    }
}

/// Percentages per metric in the order
/// `[substantial source_1, marginal source_1, neutral, marginal source_2, substantial source_2]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SxSAggregate {
    pub n_items: usize,
    pub comprehensiveness: [u32; BUCKETS],
    pub specificity: [u32; BUCKETS],
    pub hallucination: [u32; BUCKETS],
    pub tldr: [u32; BUCKETS],
    pub human_like: [u32; BUCKETS],
}

impl SxSAggregate {
    pub fn from_percentages(n_items: usize, rows: [[u32; BUCKETS]; 5]) -> Self {
        let [comprehensiveness, specificity, hallucination, tldr, human_like] = rows;
        Self {
            n_items,
            comprehensiveness,
            specificity,
            hallucination,
            tldr,
            human_like,
        }
    }

    pub fn get(&self, metric: Metric) -> &[u32; BUCKETS] {
        match metric {
            Metric::Comprehensiveness => &self.comprehensiveness,
            Metric::Specificity => &self.specificity,
            Metric::Hallucination => &self.hallucination,
            Metric::Tldr => &self.tldr,
            Metric::HumanLike => &self.human_like,
        }
    }

    fn get_mut(&mut self, metric: Metric) -> &mut [u32; BUCKETS] {
        match metric {
            Metric::Comprehensiveness => &mut self.comprehensiveness,
            Metric::Specificity => &mut self.specificity,
            Metric::Hallucination => &mut self.hallucination,
            Metric::Tldr => &mut self.tldr,
            Metric::HumanLike => &mut self.human_like,
        }
    }
}

/// Nearest integer to `100 * count / n`, halves away from zero.
pub fn rounded_percent(count: usize, n: usize) -> u32 {
    ((200 * count + n) / (2 * n)) as u32
}

/// Source-frame bucket counts per metric.
pub fn bucket_counts(ratings: &[FiveMetricRating]) -> [[usize; BUCKETS]; 5] {
    let mut counts = [[0usize; BUCKETS]; 5];
    for r in ratings {
        for (m, v) in r.values().into_iter().enumerate() {
            counts[m][(v + 2) as usize] += 1;
        }
    }
    counts
}

pub fn aggregate_ratings(ratings: &[FiveMetricRating]) -> Result<SxSAggregate> {
    if ratings.is_empty() {
        return Err(Error::InvalidArgument("no ratings to aggregate".into()));
    }
    for r in ratings {
        check(r.violations())?;
    }
    let n = ratings.len();
    let counts = bucket_counts(ratings);
    let mut agg = SxSAggregate::from_percentages(n, [[0; BUCKETS]; 5]);
    for (m, metric) in Metric::ALL.into_iter().enumerate() {
        let row = agg.get_mut(metric);
        for b in 0..BUCKETS {
            row[b] = rounded_percent(counts[m][b], n);
        }
    }
    Ok(agg)
}

/// Aggregates rated items of one comparison. Every item must be rated and
/// share the same ordered origin pair.
pub fn aggregate_sxs(items: &[SxSItem]) -> Result<SxSAggregate> {
    let first = items
        .first()
        .ok_or_else(|| Error::InvalidArgument("no items to aggregate".into()))?;
    let pair = (&first.source_1.origin, &first.source_2.origin);
    let mut ratings = Vec::with_capacity(items.len());
    for item in items {
        if (&item.source_1.origin, &item.source_2.origin) != pair {
            return Err(Error::InvalidArgument(format!(
                "item {:?} compares a different source pair",
                item.item_id
            )));
        }
        let r = item
            .rating_source
            .ok_or_else(|| Error::InvalidArgument(format!("item {:?} is unrated", item.item_id)))?;
        ratings.push(r);
    }
    aggregate_ratings(&ratings)
}

/// Percentage favoring `source_2` minus percentage favoring `source_1`.
pub fn sxs_delta(aggregate: &SxSAggregate, metric: Metric) -> i64 {
    bucket_delta(aggregate.get(metric))
}

pub fn bucket_delta(row: &[u32; BUCKETS]) -> i64 {
    (i64::from(row[3]) + i64::from(row[4])) - (i64::from(row[0]) + i64::from(row[1]))
}

/// Unrounded delta straight from source-frame ratings.
pub fn raw_delta(ratings: &[FiveMetricRating], metric: Metric) -> f64 {
    if ratings.is_empty() {
        return 0.0;
    }
    let net: i64 = ratings
        .iter()
        .map(|r| i64::from(r.get(metric).signum()))
        .sum();
    100.0 * net as f64 / ratings.len() as f64
}

pub fn mean_delta(aggregates: &[&SxSAggregate]) -> f64 {
    let deltas: Vec<i64> = aggregates
        .iter()
        .flat_map(|a| Metric::ALL.map(|m| sxs_delta(a, m)))
        .collect();
    if deltas.is_empty() {
        return 0.0;
    }
    deltas.iter().sum::<i64>() as f64 / deltas.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UmbrellaScores {
    pub recall: f64,
    pub precision: f64,
    pub writing_style: f64,
    pub overall: f64,
}

pub fn umbrella_scores(rating: &FiveMetricRating) -> UmbrellaScores {
    let f = |v: i8| f64::from(v);
    let recall = (f(rating.comprehensiveness) + f(rating.specificity)) / 2.0;
    let precision = f(rating.hallucination);
    let writing_style = (f(rating.tldr) + f(rating.human_like)) / 2.0;
    UmbrellaScores {
        recall,
        precision,
        writing_style,
        overall: (recall + precision + writing_style) / 3.0,
    }
}

/// Per-item umbrella scores averaged over items.
pub fn mean_umbrella(ratings: &[FiveMetricRating]) -> Result<UmbrellaScores> {
    if ratings.is_empty() {
        return Err(Error::InvalidArgument("no ratings".into()));
    }
    let n = ratings.len() as f64;
    let mut acc = UmbrellaScores {
        recall: 0.0,
        precision: 0.0,
        writing_style: 0.0,
        overall: 0.0,
    };
    for r in ratings {
        let u = umbrella_scores(r);
        acc.recall += u.recall;
        acc.precision += u.precision;
        acc.writing_style += u.writing_style;
        acc.overall += u.overall;
    }
    Ok(UmbrellaScores {
        recall: acc.recall / n,
        precision: acc.precision / n,
        writing_style: acc.writing_style / n,
        overall: acc.overall / n,
    })
}

/// Source-frame ratings reproducing the given bucket counts per metric.
/// Handy for fixtures: metric rows are filled independently.
pub fn ratings_from_counts(counts: [[usize; BUCKETS]; 5]) -> Result<Vec<FiveMetricRating>> {
    let n = counts[0].iter().sum::<usize>();
    if counts.iter().any(|row| row.iter().sum::<usize>() != n) {
        return Err(Error::InvalidArgument("every metric row needs the same total".into()));
    }
    let column = |row: &[usize; BUCKETS]| -> Vec<i8> {
        row.iter()
            .enumerate()
            .flat_map(|(b, &c)| std::iter::repeat_n(b as i8 - 2, c))
            .collect()
    };
    let cols: Vec<Vec<i8>> = counts.iter().map(column).collect();
    Ok((0..n)
        .map(|i| FiveMetricRating::new(cols[0][i], cols[1][i], cols[2][i], cols[3][i], cols[4][i]))
        .collect())
}

//! Per-sample annotator bookkeeping: nobody works the same sample twice,
//! across rounds and across both tasks.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleAssignments {
    /// Picked by [`assign_annotator`] but not yet contributed.
    pub reserved: BTreeSet<String>,
    /// Submitted work on this sample (a Task-1 edit session or a round).
    pub contributed: BTreeSet<String>,
    /// Number of draws so far; part of the per-sample rng stream.
    pub draws: u64,
}

impl SampleAssignments {
    pub fn is_used(&self, annotator: &str) -> bool {
        self.reserved.contains(annotator) || self.contributed.contains(annotator)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentLedger {
    samples: BTreeMap<String, SampleAssignments>,
}

impl AssignmentLedger {
    pub fn sample(&self, sample_id: &str) -> Option<&SampleAssignments> {
        self.samples.get(sample_id)
    }

    /// Everyone reserved or contributed on the sample.
    pub fn used(&self, sample_id: &str) -> BTreeSet<String> {
        self.samples
            .get(sample_id)
            .map(|s| s.reserved.union(&s.contributed).cloned().collect())
            .unwrap_or_default()
    }

    /// Ok if `annotator` has not contributed to the sample yet. A reservation
    /// for that annotator counts as eligible.
    pub fn check_eligible(&self, sample_id: &str, annotator: &str) -> Result<()> {
        let done = self
            .samples
            .get(sample_id)
            .is_some_and(|s| s.contributed.contains(annotator));
        if done {
            return Err(Error::AssignmentViolation {
                sample_id: sample_id.to_string(),
                annotator: annotator.to_string(),
            });
        }
        Ok(())
    }

    pub fn record_contribution(&mut self, sample_id: &str, annotator: &str) -> Result<()> {
        self.check_eligible(sample_id, annotator)?;
        let entry = self.samples.entry(sample_id.to_string()).or_default();
        entry.reserved.remove(annotator);
        entry.contributed.insert(annotator.to_string());
        Ok(())
    }

    fn reserve(&mut self, sample_id: &str, annotator: &str) {
        let entry = self.samples.entry(sample_id.to_string()).or_default();
        entry.reserved.insert(annotator.to_string());
        entry.draws += 1;
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Deterministic rng stream for `(seed, key, counter)`: same inputs, same
/// stream on every platform.
pub fn keyed_rng(seed: u64, key: &str, counter: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(key.as_bytes()));
    rng.set_stream(counter);
    rng
}

/// Picks uniformly among pool members not yet used on the sample and
/// reserves the pick.
pub fn assign_annotator<S: AsRef<str>>(
    sample_id: &str,
    pool: &[S],
    ledger: &mut AssignmentLedger,
    rng_seed: u64,
) -> Result<String> {
    let used = ledger.used(sample_id);
    let eligible: BTreeSet<&str> = pool
        .iter()
        .map(AsRef::as_ref)
        .filter(|a| !used.contains(*a))
        .collect();
    if eligible.is_empty() {
        return Err(Error::PoolExhausted(sample_id.to_string()));
    }
    let draws = ledger.sample(sample_id).map_or(0, |s| s.draws);
    let mut rng = keyed_rng(rng_seed, sample_id, draws);
    let pick = eligible
        .iter()
        .nth(rng.random_range(0..eligible.len()))
        .expect("index within eligible set")
        .to_string();
    ledger.reserve(sample_id, &pick);
    Ok(pick)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_choice() {
        let mut ledger = AssignmentLedger::default();
        ledger.record_contribution("s", "a").unwrap();
        ledger.record_contribution("s", "b").unwrap();
        assert_eq!(assign_annotator("s", &["a", "b", "c"], &mut ledger, 1).unwrap(), "c");
    }

    #[test]
    fn exhaustion() {
        let mut ledger = AssignmentLedger::default();
        ledger.record_contribution("s", "a").unwrap();
        assert!(matches!(
            assign_annotator("s", &["a"], &mut ledger, 1),
            Err(Error::PoolExhausted(_))
        ));
    }

    #[test]
    fn seeded_pick_is_deterministic() {
        let pool = ["a", "b", "c"];
        let first = assign_annotator("s", &pool, &mut AssignmentLedger::default(), 42).unwrap();
        let second = assign_annotator("s", &pool, &mut AssignmentLedger::default(), 42).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn reserved_annotator_not_picked_twice() {
        let pool = ["a", "b", "c"];
        let mut ledger = AssignmentLedger::default();
        let mut picks: Vec<String> = (0..3)
            .map(|_| assign_annotator("s", &pool, &mut ledger, 7).unwrap())
            .collect();
        picks.sort();
        assert_eq!(picks, ["a", "b", "c"]);
        assert!(assign_annotator("s", &pool, &mut ledger, 7).is_err());
    }

    #[test]
    fn contribution_consumes_reservation_and_blocks_repeat() {
        let mut ledger = AssignmentLedger::default();
        let a = assign_annotator("s", &["a"], &mut ledger, 0).unwrap();
        ledger.check_eligible("s", &a).unwrap();
        ledger.record_contribution("s", &a).unwrap();
        assert!(ledger.sample("s").unwrap().reserved.is_empty());
        assert!(matches!(
            ledger.record_contribution("s", &a),
            Err(Error::AssignmentViolation { .. })
        ));
        // Other samples are unaffected.
        ledger.record_contribution("t", &a).unwrap();
    }
}

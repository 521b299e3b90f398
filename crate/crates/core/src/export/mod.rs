//! Deterministic interchange: canonical JSONL, the benchmark release and
//! training mixtures.

pub mod benchmark;
pub mod canonical;
pub mod training;

pub use benchmark::{
    build_benchmark, export_benchmark, import_benchmark, render_bundle, write_bundle,
    BenchmarkBundle, BenchmarkManifest, BenchmarkRecord, Counts, Excluded, SubsetEntry,
    SubsetRecords, MANIFEST_FILE,
};
pub use canonical::{from_jsonl, to_canonical_string, to_jsonl};
pub use training::{
    corrupt_description, export_training_mixture, grounded_label_list_text, kept_sentences,
    label_list_text, TaskTag, TrainingRecord,
};

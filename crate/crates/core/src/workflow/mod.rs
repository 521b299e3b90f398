//! Annotation state machines and annotator assignment.

pub mod assignment;
pub mod task1;
pub mod task2;

pub use assignment::{assign_annotator, keyed_rng, AssignmentLedger, SampleAssignments};
pub use task1::{seed_task1, ObjectEdit, SeedFlag, Task1Event, Task1State};
pub use task2::{start_task2, start_task2_seeded, DigestObject, NeutralText, Task2Event, Task2View};

mod common;

use hyperdesc_core::store::{Command, Store};
use hyperdesc_core::sxs::{create_sxs, SxSSource};
use hyperdesc_core::workflow::ObjectEdit;
use hyperdesc_core::{Error, FiveMetricRating, ImageRecord, ProjectConfig, SeedCaption, Task2Status};

fn store_with_image() -> Store {
    let mut s = Store::in_memory();
    s.execute(None, Command::CreateProject { project_id: "p".into(), name: "p".into(), config: ProjectConfig::default() })
        .unwrap();
    s.execute(None, Command::RegisterImages { project_id: "p".into(), images: vec![ImageRecord::new("a", "file:///a.jpg")] })
        .unwrap();
    s
}

fn seed() -> SeedCaption {
    SeedCaption { text: "a dog on grass".into(), model_version: "captioner-v7".into(), available: true }
}

fn submit(v: Option<u64>, who: &str, text: &str) -> Command {
    Command::Task2Submit {
        project_id: "p".into(),
        image_id: "a".into(),
        expected_version: v,
        annotator: who.into(),
        text: text.into(),
        elapsed_seconds: 10.0,
        at: common::t0(),
    }
}

#[test]
fn neutral_view_hides_provenance() {
    let mut s = store_with_image();
    s.execute(None, Command::Task2Start { project_id: "p".into(), image_id: "a".into(), seed: seed() }).unwrap();
    s.execute(None, submit(Some(0), "x", "a brown dog lies on green grass")).unwrap();
    let view = s.project("p").unwrap().task2["a"].next_view(5).unwrap();
    let json = serde_json::to_string(&view).unwrap();
    assert!(!json.contains("captioner-v7"));
    assert!(!json.contains("annotator"));
    assert!(!json.contains("\"x\""));
    let labels: Vec<&str> = view.texts.iter().map(|t| t.label.as_str()).collect();
    assert_eq!(labels, ["Text 1", "Text 2"]);
}

#[test]
fn stale_version_and_repeat_annotator_rejected() {
    let mut s = store_with_image();
    s.execute(None, Command::Task2Start { project_id: "p".into(), image_id: "a".into(), seed: seed() }).unwrap();
    s.execute(None, submit(Some(0), "x", "one two three")).unwrap();
    assert!(matches!(s.execute(None, submit(Some(0), "y", "four five six")), Err(Error::Conflict(_))));
    assert!(matches!(s.execute(None, submit(Some(1), "x", "four five six")), Err(Error::AssignmentViolation { .. })));
    // Failures left nothing behind.
    assert_eq!(s.seq(), 4);
    let st = s.execute(None, submit(Some(1), "y", "one two three four")).unwrap();
    assert_eq!(st["status"], "open");
    let st = s.execute(None, submit(Some(2), "z", "one two three four five")).unwrap();
    assert_eq!(serde_json::from_value::<Task2Status>(st["status"].clone()).unwrap(), Task2Status::StoppedBySimilarity);
    assert!(matches!(s.execute(None, submit(Some(3), "w", "late")), Err(Error::StateViolation(_))));
}

#[test]
fn task1_then_task2_with_different_annotators() {
    let mut s = store_with_image();
    let t1 = hyperdesc_core::workflow::Task1State::new("a", vec![], Default::default());
    s.execute(None, Command::InstallTask1 { project_id: "p".into(), state: t1 }).unwrap();
    let add = ObjectEdit::Add {
        object_id: None,
        label: "dog".into(),
        bbox: hyperdesc_core::BoundingBox::new(0.1, 0.1, 0.9, 0.9),
        description: "a brown dog".into(),
    };
    s.execute(None, Command::Task1Edit { project_id: "p".into(), image_id: "a".into(), expected_version: Some(0), annotator: "x".into(), edit: add })
        .unwrap();
    // Task 2 cannot start before Task 1 is finalized.
    let start = Command::Task2Start { project_id: "p".into(), image_id: "a".into(), seed: seed() };
    assert!(matches!(s.execute(None, start.clone()), Err(Error::StateViolation(_))));
    s.execute(None, Command::Task1Finalize { project_id: "p".into(), image_id: "a".into(), expected_version: None, at: common::t0() })
        .unwrap();
    s.execute(None, start).unwrap();
    assert!(matches!(s.execute(None, submit(None, "x", "a dog")), Err(Error::AssignmentViolation { .. })));
    s.execute(None, submit(None, "y", "a dog")).unwrap();
    let view = s.project("p").unwrap().task2["a"].next_view(1).unwrap();
    assert_eq!(view.objects.len(), 1);
    assert_eq!(view.objects[0].label, "dog");
}

#[test]
fn presented_sxs_has_no_origin() {
    let mut s = store_with_image();
    let item = create_sxs("i1", "a", SxSSource::new("DCI", "short"), SxSSource::new("IIW", "long text"), 4).unwrap();
    let shown = s.execute(None, Command::SxsAdd { project_id: "p".into(), item }).unwrap();
    let text = shown.to_string();
    assert!(!text.contains("DCI") && !text.contains("IIW") && !text.contains("flipped"));
    let judge = |j: &str| Command::SxsJudge {
        project_id: "p".into(),
        item_id: "i1".into(),
        expected_version: None,
        rating: FiveMetricRating::new(1, 1, 0, 0, -1),
        justification: j.into(),
    };
    assert!(matches!(s.execute(None, judge("  ")), Err(Error::Validation(_))));
    s.execute(None, judge("b is more complete")).unwrap();
    assert!(matches!(s.execute(None, judge("again")), Err(Error::Conflict(_))));
}

#[test]
fn idempotency_key_reuse_with_other_body_conflicts() {
    let mut s = store_with_image();
    s.execute(None, Command::Task2Start { project_id: "p".into(), image_id: "a".into(), seed: seed() }).unwrap();
    let a = s.execute(Some("k"), submit(None, "x", "text one")).unwrap();
    assert_eq!(s.execute(Some("k"), submit(None, "x", "text one")).unwrap(), a);
    assert!(matches!(s.execute(Some("k"), submit(None, "x", "text two")), Err(Error::Conflict(_))));
    assert_eq!(s.project("p").unwrap().task2["a"].rounds.len(), 1);
}

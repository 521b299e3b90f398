//! Fixtures shared by the integration targets: reference tables, hand-counted
//! texts and seeded workflow samples.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hyperdesc_core::export::to_canonical_string;
use hyperdesc_core::metrics::CorpusRow;
use hyperdesc_core::model::{
    BoundingBox, FiveMetricRating, ImageRecord, ObjectAnnotation, Provenance, SeedCaption,
    Task2Config, Task2State,
};
use hyperdesc_core::project::{Project, ProjectConfig, Subset, SubsetSource};
use hyperdesc_core::store::{Command, Store};
use hyperdesc_core::sxs::{create_sxs, SxSSource};
use hyperdesc_core::workflow::{
    assign_annotator, start_task2, AssignmentLedger, ObjectEdit, SeedFlag, Task1Event, Task1State,
};
use hyperdesc_core::Result;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn t0() -> DateTime<Utc> {
    DateTime::from_timestamp(1_718_000_000, 0).unwrap()
}

// ---------------------------------------------------------------------------
// Reference side-by-side tables, buckets [source_1 ++, +, neutral, +, source_2 ++].

pub struct SxsComparison {
    pub name: &'static str,
    pub buckets: [[u32; 5]; 5],
    pub deltas: [i64; 5],
}

pub fn reference_sxs_comparisons() -> Vec<SxsComparison> {
    vec![
        SxsComparison {
            name: "human/dci",
            buckets: [[3, 7, 19, 30, 41], [5, 3, 4, 20, 68], [2, 3, 48, 32, 15], [3, 0, 3, 20, 74], [1, 1, 14, 25, 59]],
            deltas: [61, 80, 42, 91, 82],
        },
        SxsComparison {
            name: "human/docci",
            buckets: [[4, 6, 38, 33, 19], [3, 2, 8, 22, 65], [0, 12, 41, 34, 13], [1, 4, 11, 30, 54], [1, 0, 30, 46, 23]],
            deltas: [42, 82, 35, 79, 68],
        },
        SxsComparison {
            name: "model/dci",
            buckets: [[7, 10, 24, 32, 27], [6, 10, 14, 24, 46], [12, 21, 43, 11, 13], [9, 11, 9, 30, 41], [11, 5, 13, 32, 39]],
            deltas: [42, 54, -9, 51, 55],
        },
        SxsComparison {
            name: "model/docci",
            buckets: [[5, 22, 42, 26, 5], [6, 14, 23, 33, 24], [9, 25, 39, 21, 6], [6, 7, 17, 42, 28], [6, 12, 41, 27, 14]],
            deltas: [4, 37, -7, 57, 23],
        },
        SxsComparison {
            name: "model/gpt4v",
            buckets: [[21, 29, 36, 10, 4], [46, 32, 12, 8, 2], [22, 29, 23, 20, 6], [7, 15, 27, 31, 20], [8, 22, 60, 7, 3]],
            deltas: [-36, -68, -25, 29, -20],
        },
        SxsComparison {
            name: "human/gpt4v",
            buckets: [[3, 10, 39, 29, 19], [6, 10, 15, 35, 34], [0, 6, 29, 34, 31], [5, 6, 8, 47, 34], [6, 13, 41, 27, 13]],
            deltas: [35, 53, 59, 70, 21],
        },
    ]
}

/// `(a, b, n, numerator, denominator)`, counted by hand.
pub fn jaccard_fixtures() -> Vec<(&'static str, &'static str, usize, usize, usize)> {
    vec![
        ("a dog runs", "a dog sleeps", 1, 2, 4),
        ("a dog runs", "a dog sleeps", 2, 1, 3),
        ("The cat", "the CAT", 1, 2, 2),
        ("", "", 1, 1, 1),
        ("", "dog", 1, 0, 1),
        ("dog", "cat", 1, 0, 2),
        ("one two three four", "one two three four five", 1, 4, 5),
        ("one two three four", "one two three four five", 2, 3, 4),
        ("one two three four", "one two three four five", 3, 2, 3),
        ("dog dog dog", "dog", 1, 1, 1),
        ("dog dog dog", "dog", 2, 0, 1),
        ("a b", "c", 2, 0, 1),
        ("hello", "world", 2, 1, 1),
        ("red ball, blue ball.", "blue ball red ball", 1, 3, 3),
        ("red ball, blue ball.", "blue ball red ball", 2, 2, 4),
        ("the man rides the horse", "the horse rides the man", 1, 4, 4),
        ("the man rides the horse", "the horse rides the man", 2, 3, 5),
        ("the man rides the horse", "the horse rides the man", 3, 0, 6),
        ("A B C D", "a c", 1, 2, 4),
        ("sunny beach with palm trees", "a sunny beach with tall palm trees", 1, 5, 7),
    ]
}

/// `(text, characters, words, sentences, syllables, polysyllables)`.
pub fn readability_fixtures() -> Vec<(&'static str, usize, usize, usize, usize, usize)> {
    vec![
        ("The cat sat on the mat.", 17, 6, 1, 6, 0),
        ("A red bicycle leans against a white fence.", 34, 8, 1, 11, 1),
        ("Two dogs play in the park. One dog runs quickly.", 37, 10, 2, 11, 0),
        ("The photograph shows a beautiful mountain landscape at sunrise.", 54, 9, 1, 16, 2),
        ("Go.", 2, 1, 1, 1, 0),
        ("An elderly woman carefully arranges colorful flowers in a ceramic vase.", 60, 11, 1, 24, 5),
        (
            "Bright yellow taxis line the busy street. Pedestrians cross at the intersection. Tall buildings rise behind them.",
            94, 17, 3, 27, 2,
        ),
        ("A small table holds an apple, a candle, and a little bottle.", 46, 12, 1, 17, 0),
        ("Is it raining? Yes, it is!", 18, 6, 2, 7, 0),
        ("The television is positioned above the fireplace.", 42, 7, 1, 16, 3),
        ("Dr. Smith examines the patient.", 25, 5, 1, 9, 1),
        ("Sunlight filters through the leaves, creating intricate patterns on the forest floor.", 72, 12, 1, 20, 1),
        ("A man rides a horse.", 15, 5, 1, 6, 0),
        ("The kitchen counter is covered with vegetables: tomatoes, onions, peppers, and garlic.", 70, 12, 1, 24, 3),
        ("Three children laugh together. They are wearing matching blue uniforms.", 60, 10, 2, 17, 2),
        ("An old wooden boat rests on the sandy shore near the calm water.", 51, 13, 1, 16, 0),
        ("The museum displays ancient pottery and decorative jewelry.", 51, 8, 1, 18, 3),
        ("Snow covers everything. The trees are white. The sky is gray.", 48, 11, 3, 15, 1),
        ("A delicious chocolate cake sits on a glass plate.", 40, 9, 1, 13, 2),
        ("Several umbrellas protect the visitors from the intense afternoon sun.", 60, 10, 1, 20, 4),
        ("The little girl holds a purple balloon.", 32, 7, 1, 10, 0),
        ("Rain falls. Wind blows. Leaves scatter.", 31, 6, 3, 8, 0),
        ("A professional photographer adjusts the camera on a tripod.", 50, 9, 1, 19, 3),
        ("The orange cat sleeps peacefully beside the radiator.", 45, 8, 1, 15, 2),
        ("A large crowd gathers around the musician, who plays a guitar energetically.", 63, 12, 1, 22, 2),
    ]
}

pub fn reference_corpus_rows() -> Vec<(&'static str, CorpusRow)> {
    let row = |n, tps, tok, sen, nn, adj, adv, vb| CorpusRow {
        sample_count: n,
        tokens_per_sentence: tps,
        tokens: tok,
        sentences: sen,
        nn,
        adj,
        adv,
        vb,
    };
    vec![
        ("SVP", row(19_561, 11.9, 68.5, 5.7, 17.1, 6.7, 1.1, 5.0)),
        ("LocNar", row(873_107, 15.7, 41.0, 2.6, 10.7, 1.6, 0.4, 3.5)),
        ("DCI", row(7_805, 15.8, 148.0, 9.3, 35.3, 16.3, 3.6, 10.5)),
        ("DOCCI", row(14_647, 19.2, 135.7, 7.1, 34.0, 16.6, 2.7, 9.6)),
        ("IIW", row(9_018, 22.1, 217.2, 9.8, 52.5, 28.0, 5.0, 19.1)),
    ]
}

pub fn reference_reasoning_rows() -> Vec<(&'static str, [f64; 4])> {
    vec![
        ("None", [56.50, 59.94, 50.71, 49.88]),
        ("InstructBLIP", [83.99, 62.73, 89.35, 65.25]),
        ("LLaVA", [84.80, 63.71, 87.89, 63.38]),
        ("IIW", [90.37, 66.19, 88.66, 69.38]),
    ]
}

type T2iRows = Vec<(&'static str, Vec<Option<f64>>)>;

pub fn reference_t2i_rows() -> (Vec<&'static str>, Vec<&'static str>, T2iRows, T2iRows) {
    let some = |v: &[f64]| v.iter().copied().map(Some).collect::<Vec<_>>();
    (
        vec!["1", "1-2", "1-3", "1-4", "1-5"],
        vec!["1", "1-2", "1-3", "1-4"],
        vec![
            ("DCI", some(&[2.05, 2.06, 1.95, 2.00, 1.88])),
            ("DOCCI", some(&[1.74, 1.79, 1.83, 1.84, 1.86])),
            ("IIW", some(&[1.63, 1.69, 1.62, 1.66, 1.66])),
        ],
        vec![
            ("DCI", some(&[0.844, 0.852, 0.855, 0.850])),
            ("DOCCI", some(&[0.853, 0.862, 0.865, 0.855])),
            ("IIW", some(&[0.861, 0.867, 0.870, 0.868])),
        ],
    )
}

/// `(caption, positive, negative, expected)`; `None` means the caption has
/// no verbatim form of the differing element.
pub fn svo_fixtures() -> Vec<(&'static str, &'static str, &'static str, Option<&'static str>)> {
    vec![
        ("a dog chases a ball", "dog,chases,ball", "dog,carries,ball", Some("a dog carries a ball")),
        ("A man lying on a beach.", "man,lie,beach", "man,sit,beach", None),
        ("A woman rides a horse.", "woman,ride,horse", "woman,ride,camel", Some("A woman rides a camel.")),
        ("A girl eats an apple.", "girl,eat,apple", "boy,eat,apple", Some("A boy eats an apple.")),
        ("Man walking a dog in the park.", "man,walk,dog", "woman,walk,dog", Some("Woman walking a dog in the park.")),
        ("The cat sits on the mat.", "cat,sit,mat", "cat,sit,rug", Some("The cat sits on the rug.")),
        (
            "Children play soccer in the street.",
            "children,play,soccer",
            "children,play,basketball",
            Some("Children play basketball in the street."),
        ),
        ("A chef cuts vegetables.", "chef,cut,vegetables", "chef,cook,vegetables", None),
        ("A boy throws a frisbee.", "boy,throws,frisbee", "boy,catches,frisbee", Some("A boy catches a frisbee.")),
        ("A baby sleeps in a crib.", "baby,sleep,crib", "baby,sleep,stroller", Some("A baby sleeps in a stroller.")),
        ("Two people ride bikes.", "people,ride,bikes", "people,push,bikes", Some("Two people push bikes.")),
        ("A bird sitting on a branch.", "bird,sit,branch", "bird,sit,wire", Some("A bird sitting on a wire.")),
        (
            "The teenager skateboards down the ramp.",
            "teenager,skateboard,ramp",
            "teenager,skateboard,stairs",
            Some("The teenager skateboards down the stairs."),
        ),
        ("A horse pulls a cart.", "horse,pull,cart", "horse,pull,sled", Some("A horse pulls a sled.")),
        ("A horse pulls a cart.", "horse,pull,cart", "horse,push,cart", None),
        ("A woman holding an umbrella.", "woman,hold,umbrella", "man,hold,umbrella", Some("A man holding an umbrella.")),
        ("A woman holding an umbrella.", "man,hold,umbrella", "girl,hold,umbrella", None),
        (
            "Firefighters spray water on a fire.",
            "firefighters,spray,water",
            "firefighters,spray,foam",
            Some("Firefighters spray foam on a fire."),
        ),
        (
            "A dog catches a frisbee. The dog jumps high.",
            "dog,catch,frisbee",
            "cat,catch,frisbee",
            Some("A cat catches a frisbee. The dog jumps high."),
        ),
        ("Dog runs on Grass.", "dog,run,grass", "dog,run,sand", Some("Dog runs on Sand.")),
        ("A tennis player hits the ball.", "player,hit,ball", "player,hit,net", Some("A tennis player hits the net.")),
        (
            "A man in a t-shirt reads a book.",
            "man,read,book",
            "man,read,newspaper",
            Some("A man in a t-shirt reads a newspaper."),
        ),
        (
            "A man in a t-shirt reads a book.",
            "man,wear,t-shirt",
            "man,wear,jacket",
            Some("A man in a jacket reads a book."),
        ),
        (
            "A golden retriever swims in a lake.",
            "golden retriever,swim,lake",
            "poodle,swim,lake",
            Some("A poodle swims in a lake."),
        ),
        (
            "A golden retriever swims in a lake.",
            "retriever,swim,lake",
            "retriever,swim,pool",
            Some("A golden retriever swims in a pool."),
        ),
        (
            "People are dancing at a party.",
            "people,dance,party",
            "people,dance,funeral",
            Some("People are dancing at a funeral."),
        ),
        ("People are dancing at a party.", "people,dance,party", "people,sing,party", None),
        ("A kid's kite flies high.", "kid,fly,kite", "kid,fly,balloon", Some("A kid's balloon flies high.")),
        ("The girl pets the dog.", "girl,pet,dog", "girl,kick,dog", None),
        ("A cow grazes in a field", "cow,graze,field", "sheep,graze,field", Some("A sheep grazes in a field")),
    ]
}

// ---------------------------------------------------------------------------
// Seeded workflow samples.

pub const POOL: [&str; 12] = [
    "ann-a", "ann-b", "ann-c", "ann-d", "ann-e", "ann-f", "ann-g", "ann-h", "ann-i", "ann-j", "ann-k", "ann-l",
];

const VOCAB: [&str; 40] = [
    "red", "blue", "green", "small", "large", "wooden", "metal", "shiny", "old", "new", "table", "chair", "lamp",
    "window", "door", "floor", "wall", "ceiling", "cup", "plate", "book", "shelf", "plant", "pot", "rug", "sofa",
    "cushion", "curtain", "mirror", "clock", "left", "right", "above", "below", "near", "behind", "bright", "dim",
    "striped", "round",
];

const LABELS: [&str; 8] = ["lamp", "chair", "table", "plant", "clock", "mirror", "sofa", "book"];

pub struct WorkflowSample {
    pub image: ImageRecord,
    pub task1: Task1State,
    pub task2: Task2State,
}

fn random_box(rng: &mut ChaCha8Rng) -> BoundingBox {
    let ymin = rng.random_range(0.0..0.5);
    let xmin = rng.random_range(0.0..0.5);
    BoundingBox::new(ymin, xmin, ymin + rng.random_range(0.1..0.5), xmin + rng.random_range(0.1..0.5))
}

fn shuffled_words(rng: &mut ChaCha8Rng, n: usize) -> Vec<&'static str> {
    let mut v = VOCAB.to_vec();
    v.shuffle(rng);
    v.truncate(n);
    v
}

/// One image taken through both tasks. `k % 5 == 4` leaves Task 2 open after
/// one round; otherwise `k % 3` picks a convergent, divergent or late
/// convergent round sequence.
pub fn workflow_sample(k: u64, cfg: Task2Config) -> Result<WorkflowSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(9000 + k);
    let image = ImageRecord::new(format!("img-{k:03}"), format!("file:///images/{k:03}.jpg"));
    let n_seed = 2 + (k % 2) as usize;
    let seeds: Vec<ObjectAnnotation> = (0..n_seed)
        .map(|i| ObjectAnnotation {
            object_id: format!("seed-{i}"),
            label: LABELS[rng.random_range(0..LABELS.len())].to_string(),
            bbox: random_box(&mut rng),
            description: format!("a {} object", VOCAB[rng.random_range(0..10)]),
            provenance: Provenance::Seed,
            active: true,
            member_of: None,
        })
        .collect();
    let flag = if k.is_multiple_of(11) { SeedFlag::Unavailable } else { SeedFlag::None };
    let mut t1 = Task1State::new(&image.image_id, seeds, flag);
    let mut ledger = AssignmentLedger::default();
    let who = assign_annotator(&image.image_id, &POOL, &mut ledger, k)?;
    t1.apply_object_edit(
        ObjectEdit::Edit {
            target: "seed-0".into(),
            label: Some(LABELS[rng.random_range(0..LABELS.len())].into()),
            bbox: None,
            description: Some(format!("a {} {}", VOCAB[rng.random_range(0..10)], VOCAB[rng.random_range(10..30)])),
        },
        &who,
        &mut ledger,
    )?;
    t1.apply_object_edit(
        ObjectEdit::Add {
            object_id: None,
            label: LABELS[rng.random_range(0..LABELS.len())].into(),
            bbox: random_box(&mut rng),
            description: "added by the annotator".into(),
        },
        &who,
        &mut ledger,
    )?;
    let last = if n_seed == 3 {
        ObjectEdit::Merge {
            members: vec!["seed-1".into(), "seed-2".into()],
            object_id: None,
            label: "group".into(),
            bbox: None,
            description: "two objects side by side".into(),
        }
    } else {
        ObjectEdit::Remove { target: "seed-1".into() }
    };
    t1.apply_object_edit(last, &who, &mut ledger)?;
    t1.finalize()?;

    let seed = if k.is_multiple_of(7) {
        SeedCaption::unavailable()
    } else {
        SeedCaption {
            text: shuffled_words(&mut rng, 8).join(" "),
            model_version: "captioner-mock-1".into(),
            available: true,
        }
    };
    let mut t2 = start_task2(&image, Some(&t1), seed, cfg)?;
    let base = shuffled_words(&mut rng, 12);
    let mut texts: Vec<Vec<&str>> = vec![base.clone()];
    if k % 5 != 4 {
        match k % 3 {
            0 => {
                let extra = VOCAB.iter().find(|w| !base.contains(w)).unwrap();
                let mut t = base.clone();
                t.push(extra);
                texts.push(t);
            }
            1 => {
                texts.push(shuffled_words(&mut rng, 12));
                texts.push(shuffled_words(&mut rng, 12));
            }
            _ => {
                let second = shuffled_words(&mut rng, 12);
                let mut third = second.clone();
                third[11] = VOCAB.iter().find(|w| !second.contains(w)).unwrap();
                texts.push(second);
                texts.push(third);
            }
        }
    }
    for words in texts {
        if !t2.status.is_open() {
            break;
        }
        let who = assign_annotator(&image.image_id, &POOL, &mut ledger, k)?;
        let elapsed = rng.random_range(30.0..600.0);
        t2.submit_round(&mut ledger, &who, &words.join(" "), elapsed)?;
    }
    Ok(WorkflowSample { image, task1: t1, task2: t2 })
}

/// Drives `n` samples through a file-backed store and returns the canonical
/// project text.
pub fn drive_store(path: &Path, n: u64) -> Result<String> {
    let pid = "fixture".to_string();
    let mut store = Store::open(path)?;
    let samples = (0..n)
        .map(|k| workflow_sample(k, Task2Config::default()))
        .collect::<Result<Vec<_>>>()?;
    store.execute(
        Some("create"),
        Command::CreateProject { project_id: pid.clone(), name: "fixture".into(), config: ProjectConfig::default() },
    )?;
    store.execute(
        None,
        Command::RegisterImages { project_id: pid.clone(), images: samples.iter().map(|s| s.image.clone()).collect() },
    )?;
    for s in &samples {
        let id = s.image.image_id.clone();
        let t1 = &s.task1;
        store.execute(
            None,
            Command::InstallTask1 {
                project_id: pid.clone(),
                state: Task1State::new(&id, t1.seed_objects.clone(), t1.seed_flag),
            },
        )?;
        for ev in &t1.log {
            let cmd = match ev {
                Task1Event::Edited { annotator, edit } => Command::Task1Edit {
                    project_id: pid.clone(),
                    image_id: id.clone(),
                    expected_version: None,
                    annotator: annotator.clone(),
                    edit: edit.clone(),
                },
                Task1Event::Finalized => {
                    Command::Task1Finalize { project_id: pid.clone(), image_id: id.clone(), expected_version: None, at: t0() }
                }
            };
            store.execute(None, cmd)?;
        }
        store.execute(
            None,
            Command::Task2Start { project_id: pid.clone(), image_id: id.clone(), seed: s.task2.seed.clone() },
        )?;
        for (i, r) in s.task2.rounds.iter().enumerate() {
            let cmd = Command::Task2Submit {
                project_id: pid.clone(),
                image_id: id.clone(),
                expected_version: None,
                annotator: r.annotator_id.clone(),
                text: r.text.clone(),
                elapsed_seconds: r.elapsed_seconds,
                at: t0(),
            };
            let key = format!("{id}-round-{i}");
            store.execute(Some(&key), cmd.clone())?;
            // A client retry must be absorbed.
            store.execute(Some(&key), cmd)?;
        }
    }
    to_canonical_string(store.project(&pid)?)
}

// ---------------------------------------------------------------------------

fn object(id: &str, label: &str, b: BoundingBox) -> ObjectAnnotation {
    ObjectAnnotation {
        object_id: id.into(),
        label: label.into(),
        bbox: b,
        description: format!("the {label}"),
        provenance: Provenance::Seed,
        active: true,
        member_of: None,
    }
}

/// Two finalized images (three objects, one description each), one image
/// still open in Task 2, and one rated side-by-side item.
pub fn export_fixture_project() -> Result<Project> {
    let mut p = Project::new("export", "export fixture", ProjectConfig::default())?;
    p.register_images(vec![
        ImageRecord::new("img-five", "file:///five.jpg"),
        ImageRecord::new("img-open", "file:///open.jpg"),
        ImageRecord::new("img-two", "file:///two.jpg"),
    ])?;
    p.install_task1(Task1State::new(
        "img-five",
        vec![
            object("seed-0", "zebra", BoundingBox::new(0.1, 0.1, 0.2, 0.2)),
            object("seed-1", "apple", BoundingBox::new(0.3, 0.3, 0.4, 0.5)),
        ],
        SeedFlag::None,
    ))?;
    p.install_task1(Task1State::new(
        "img-two",
        vec![object("seed-0", "lamp", BoundingBox::new(0.0, 0.0, 0.5, 0.5))],
        SeedFlag::None,
    ))?;
    p.task1_edit(
        "img-two",
        Some(0),
        "ann-a",
        ObjectEdit::Edit { target: "seed-0".into(), label: None, bbox: None, description: Some("a brass lamp".into()) },
    )?;
    p.task1_finalize("img-five", None, t0())?;
    p.task1_finalize("img-two", None, t0())?;
    let seed = SeedCaption { text: "a picture".into(), model_version: "captioner-mock-1".into(), available: true };
    p.task2_start("img-five", seed.clone())?;
    p.task2_start("img-two", seed.clone())?;
    p.task2_start("img-open", seed)?;
    let five = "A zebra stands in a field. An apple lies in the grass. The sky is clear. \
                A fence runs along the back. Two trees frame the scene.";
    p.task2_submit("img-five", None, "ann-b", "A zebra stands in a field.", 120.0, t0())?;
    p.task2_submit("img-five", None, "ann-c", five, 300.0, t0())?;
    p.task2_submit("img-five", None, "ann-d", five, 60.0, t0())?;
    p.task2_submit("img-two", None, "ann-b", "A brass lamp on a desk.", 90.0, t0())?;
    p.task2_submit("img-two", None, "ann-c", "A brass lamp on a wooden desk.", 80.0, t0())?;
    p.task2_submit("img-open", None, "ann-b", "An unfinished description.", 50.0, t0())?;
    let item = create_sxs(
        "sxs-1",
        "img-five",
        SxSSource::new("model-x", "A zebra."),
        SxSSource::new("human", five),
        3,
    )?;
    p.sxs_add(item)?;
    p.sxs_judge("sxs-1", None, FiveMetricRating::new(2, 1, 0, 1, 2), "the second text covers the whole scene")?;
    p.define_subset(Subset {
        name: "human".into(),
        source: SubsetSource::Human,
        model: None,
        image_ids: vec!["img-five".into(), "img-open".into(), "img-two".into()],
    })?;
    Ok(p)
}

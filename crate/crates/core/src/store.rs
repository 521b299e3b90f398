//! Append-only event store. The state is a fold over the log; each line is
//! one JSON [`LogEntry`]. Only commands that succeeded are logged, and
//! every logged command carries all its inputs (seed outputs, timestamps),
//! so replay never calls a model.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::model::{FiveMetricRating, ImageRecord, SeedCaption};
use crate::project::{Project, ProjectConfig, Subset};
use crate::sxs::SxSItem;
use crate::workflow::{ObjectEdit, Task1State};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    CreateProject {
        project_id: String,
        name: String,
        #[serde(default)]
        config: ProjectConfig,
    },
    RegisterImages {
        project_id: String,
        images: Vec<ImageRecord>,
    },
    InstallTask1 {
        project_id: String,
        state: Task1State,
    },
    Task1Edit {
        project_id: String,
        image_id: String,
        #[serde(default)]
        expected_version: Option<u64>,
        annotator: String,
        edit: ObjectEdit,
    },
    Task1Finalize {
        project_id: String,
        image_id: String,
        #[serde(default)]
        expected_version: Option<u64>,
        at: DateTime<Utc>,
    },
    Task2Start {
        project_id: String,
        image_id: String,
        seed: SeedCaption,
    },
    Task2ReplaceSeed {
        project_id: String,
        image_id: String,
        seed: SeedCaption,
    },
    Task2Submit {
        project_id: String,
        image_id: String,
        #[serde(default)]
        expected_version: Option<u64>,
        annotator: String,
        text: String,
        elapsed_seconds: f64,
        at: DateTime<Utc>,
    },
    SxsAdd {
        project_id: String,
        item: SxSItem,
    },
    SxsJudge {
        project_id: String,
        item_id: String,
        #[serde(default)]
        expected_version: Option<u64>,
        rating: FiveMetricRating,
        justification: String,
    },
    AddModelDescription {
        project_id: String,
        image_id: String,
        model: String,
        text: String,
    },
    DefineSubset {
        project_id: String,
        subset: Subset,
    },
    AcknowledgeBatch {
        project_id: String,
        batch_id: u64,
    },
}

impl Command {
    pub fn project_id(&self) -> &str {
        match self {
            Command::CreateProject { project_id, .. }
            | Command::RegisterImages { project_id, .. }
            | Command::InstallTask1 { project_id, .. }
            | Command::Task1Edit { project_id, .. }
            | Command::Task1Finalize { project_id, .. }
            | Command::Task2Start { project_id, .. }
            | Command::Task2ReplaceSeed { project_id, .. }
            | Command::Task2Submit { project_id, .. }
            | Command::SxsAdd { project_id, .. }
            | Command::SxsJudge { project_id, .. }
            | Command::AddModelDescription { project_id, .. }
            | Command::DefineSubset { project_id, .. }
            | Command::AcknowledgeBatch { project_id, .. } => project_id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub seq: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idempotency_key: Option<String>,
    /// What a retry must match to reuse the response; the command itself
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<Value>,
    #[serde(flatten)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Remembered {
    fingerprint: Value,
    response: Value,
}

#[derive(Debug, Default)]
pub struct Store {
    path: Option<PathBuf>,
    projects: BTreeMap<String, Project>,
    idempotency: BTreeMap<String, Remembered>,
    seq: u64,
}

fn apply(projects: &mut BTreeMap<String, Project>, command: &Command) -> Result<Value> {
    if let Command::CreateProject {
        project_id,
        name,
        config,
    } = command
    {
        if projects.contains_key(project_id) {
            return Err(Error::Conflict(format!("project {project_id:?} exists")));
        }
        let p = Project::new(project_id, name, config.clone())?;
        projects.insert(project_id.clone(), p);
        return Ok(json!({"project_id": project_id}));
    }
    let pid = command.project_id();
    let p = projects
        .get_mut(pid)
        .ok_or_else(|| Error::NotFound(format!("project {pid:?}")))?;
    Ok(match command {
        Command::CreateProject { .. } => unreachable!("handled above"),
        Command::RegisterImages { images, .. } => {
            json!({"registered": p.register_images(images.clone())?})
        }
        Command::InstallTask1 { state, .. } => serde_json::to_value(p.install_task1(state.clone())?)?,
        Command::Task1Edit {
            image_id,
            expected_version,
            annotator,
            edit,
            ..
        } => {
            let resolved = p.task1_edit(image_id, *expected_version, annotator, edit.clone())?;
            json!({"edit": resolved, "version": p.task1[image_id].version})
        }
        Command::Task1Finalize {
            image_id,
            expected_version,
            at,
            ..
        } => {
            let event = p.task1_finalize(image_id, *expected_version, *at)?;
            json!({"version": p.task1[image_id].version, "active_learning_event": event})
        }
        Command::Task2Start { image_id, seed, .. } => {
            serde_json::to_value(p.task2_start(image_id, seed.clone())?)?
        }
        Command::Task2ReplaceSeed { image_id, seed, .. } => {
            p.task2_replace_seed(image_id, seed.clone())?;
            json!({"version": p.task2[image_id].version})
        }
        Command::Task2Submit {
            image_id,
            expected_version,
            annotator,
            text,
            elapsed_seconds,
            at,
            ..
        } => {
            let (status, event) =
                p.task2_submit(image_id, *expected_version, annotator, text, *elapsed_seconds, *at)?;
            let s = &p.task2[image_id];
            json!({
                "status": status,
                "version": s.version,
                "round": s.rounds.last(),
                "active_learning_event": event,
            })
        }
        Command::SxsAdd { item, .. } => serde_json::to_value(p.sxs_add(item.clone())?.presented())?,
        Command::SxsJudge {
            item_id,
            expected_version,
            rating,
            justification,
            ..
        } => {
            let item = p.sxs_judge(item_id, *expected_version, *rating, justification)?;
            json!({"item_id": item.item_id, "version": item.version})
        }
        Command::AddModelDescription {
            image_id,
            model,
            text,
            ..
        } => {
            p.add_model_description(image_id, model, text)?;
            json!({"image_id": image_id, "model": model})
        }
        Command::DefineSubset { subset, .. } => {
            p.define_subset(subset.clone())?;
            json!({"subset": subset.name})
        }
        Command::AcknowledgeBatch { batch_id, .. } => {
            p.completions.acknowledge(*batch_id);
            json!({"pending": p.completions.pending_events().len()})
        }
    })
}

impl Store {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (or creates) a log file and replays it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let mut store = Self {
            path: None,
            ..Self::default()
        };
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: LogEntry = serde_json::from_str(&line)
                    .map_err(|e| Error::Internal(format!("log line {}: {e}", i + 1)))?;
                store
                    .execute_as(entry.idempotency_key.as_deref(), entry.fingerprint, entry.command)
                    .map_err(|e| Error::Internal(format!("replay of log line {} failed: {e}", i + 1)))?;
            }
        }
        store.path = Some(path);
        Ok(store)
    }

    pub fn project(&self, project_id: &str) -> Result<&Project> {
        self.projects
            .get(project_id)
            .ok_or_else(|| Error::NotFound(format!("project {project_id:?}")))
    }

    pub fn projects(&self) -> impl Iterator<Item = &Project> {
        self.projects.values()
    }

    /// Number of logged commands.
    pub fn seq(&self) -> u64 {
        self.seq
    }

    /// Applies `command`. A repeated idempotency key with the same command
    /// returns the first response without re-applying; with a different
    /// command it is a conflict.
    pub fn execute(&mut self, idempotency_key: Option<&str>, command: Command) -> Result<Value> {
        self.execute_as(idempotency_key, None, command)
    }

    /// The stored response for a retried request, `None` for a fresh key,
    /// or a conflict when the key was used for some other request.
    pub fn recall(&self, idempotency_key: &str, fingerprint: &Value) -> Result<Option<Value>> {
        match self.idempotency.get(idempotency_key) {
            None => Ok(None),
            Some(seen) if &seen.fingerprint == fingerprint => Ok(Some(seen.response.clone())),
            Some(_) => Err(Error::Conflict(format!(
                "idempotency key {idempotency_key:?} was used for a different request"
            ))),
        }
    }

    /// [`Self::execute`] with the retry identity given by `fingerprint`
    /// instead of the command. Callers use it when the command holds
    /// values fixed at first receipt (timestamps, model outputs).
    pub fn execute_as(
        &mut self,
        idempotency_key: Option<&str>,
        fingerprint: Option<Value>,
        command: Command,
    ) -> Result<Value> {
        let identity = match &fingerprint {
            Some(f) => f.clone(),
            None => serde_json::to_value(&command)?,
        };
        if let Some(key) = idempotency_key {
            if let Some(response) = self.recall(key, &identity)? {
                return Ok(response);
            }
        }
        let response = apply(&mut self.projects, &command)?;
        let entry = LogEntry {
            seq: self.seq + 1,
            idempotency_key: idempotency_key.map(str::to_string),
            fingerprint,
            command,
        };
        if let Some(path) = &self.path {
            let line = serde_json::to_string(&entry)? + "\n";
            let mut f = OpenOptions::new().create(true).append(true).open(path)?;
            f.write_all(line.as_bytes())?;
            f.sync_data()?;
        }
        self.seq = entry.seq;
        if let Some(key) = entry.idempotency_key {
            self.idempotency.insert(
                key,
                Remembered {
                    fingerprint: identity,
                    response: response.clone(),
                },
            );
        }
        Ok(response)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t0() -> DateTime<Utc> {
        DateTime::from_timestamp(1_700_000_000, 0).unwrap()
    }

    fn seed_commands() -> Vec<Command> {
        vec![
            Command::CreateProject {
                project_id: "p".into(),
                name: "demo".into(),
                config: ProjectConfig::default(),
            },
            Command::RegisterImages {
                project_id: "p".into(),
                images: vec![ImageRecord::new("a", "file:///a.jpg")],
            },
            Command::Task2Start {
                project_id: "p".into(),
                image_id: "a".into(),
                seed: SeedCaption::unavailable(),
            },
        ]
    }

    fn submit(v: u64, who: &str, text: &str) -> Command {
        Command::Task2Submit {
            project_id: "p".into(),
            image_id: "a".into(),
            expected_version: Some(v),
            annotator: who.into(),
            text: text.into(),
            elapsed_seconds: 12.345678901,
            at: t0(),
        }
    }

    #[test]
    fn log_replay_reproduces_state() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let mut s = Store::open(&path).unwrap();
        for c in seed_commands() {
            s.execute(None, c).unwrap();
        }
        s.execute(Some("k1"), submit(0, "x", "a small dog")).unwrap();
        assert!(s.execute(None, submit(0, "y", "stale")).is_err());
        let live = s.project("p").unwrap().clone();
        let reopened = Store::open(&path).unwrap();
        assert_eq!(reopened.project("p").unwrap(), &live);
        assert_eq!(reopened.seq(), 4);
    }

    #[test]
    fn idempotent_retry() {
        let mut s = Store::in_memory();
        for c in seed_commands() {
            s.execute(None, c).unwrap();
        }
        let first = s.execute(Some("k"), submit(0, "x", "a small dog")).unwrap();
        let again = s.execute(Some("k"), submit(0, "x", "a small dog")).unwrap();
        assert_eq!(first, again);
        assert_eq!(s.project("p").unwrap().task2["a"].rounds.len(), 1);
        assert!(matches!(
            s.execute(Some("k"), submit(1, "y", "other")),
            Err(Error::Conflict(_))
        ));
    }

    #[test]
    fn fingerprint_survives_replay() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let mut s = Store::open(&path).unwrap();
        for c in seed_commands() {
            s.execute(None, c).unwrap();
        }
        let fp = json!({"route": "rounds", "text": "a small dog"});
        let first = s.execute_as(Some("k"), Some(fp.clone()), submit(0, "x", "a small dog")).unwrap();
        let reopened = Store::open(&path).unwrap();
        assert_eq!(reopened.recall("k", &fp).unwrap(), Some(first));
        assert!(reopened.recall("k", &json!({})).is_err());
        assert_eq!(reopened.recall("other", &fp).unwrap(), None);
    }
}

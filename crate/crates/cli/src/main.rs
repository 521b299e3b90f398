//! `hyperdesc`: operator command line over the event store and the
//! evaluation harnesses.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use hyperdesc_core::eval::{
    run_reasoning, run_t2i, similarity_by_chunk, LanguageModel, OverlapModel, ReasoningInstance, T2iInput,
};
use hyperdesc_core::export::{build_benchmark, export_training_mixture, from_jsonl, to_jsonl, write_bundle, TaskTag};
use hyperdesc_core::metrics::{corpus_readability, corpus_stats, LexiconTagger};
use hyperdesc_core::report::{render_corpus_table, render_readability_table, render_sxs_report};
use hyperdesc_core::sxs::{aggregate_sxs, mean_delta};
use hyperdesc_core::{Command, Error, ImageRecord, ProjectConfig, Store, SxSAggregate, SxSItem};
use hyperdesc_server::clients::{HttpEmbedder, HttpEndpoint, HttpImageGenerator, HttpLanguageModel};
use hyperdesc_server::Config;

#[derive(Parser)]
#[command(name = "hyperdesc", version, about = "Curate and evaluate long-form image descriptions")]
struct Cli {
    /// TOML config; HYPERDESC_* variables override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Fixes every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Event store path; overrides the config.
    #[arg(long, global = true)]
    store: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum IngestKind {
    /// `ImageRecord` lines.
    Images,
    /// `{image_id, model, text}` lines.
    Descriptions,
}

#[derive(Args)]
struct CorpusArgs {
    /// Plain text (one description per line) or JSONL with a `description` field.
    file: Option<PathBuf>,
    /// Read final descriptions from this project instead of a file.
    #[arg(long, conflicts_with = "file")]
    project: Option<String>,
    /// With --project: one model's descriptions.
    #[arg(long, requires = "project")]
    model: Option<String>,
    /// Dataset column value.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Register images or model descriptions from JSONL.
    Ingest {
        #[arg(long)]
        project: String,
        /// Project display name when it has to be created.
        #[arg(long)]
        name: Option<String>,
        #[arg(long, value_enum, default_value = "images")]
        kind: IngestKind,
        file: PathBuf,
    },
    /// Corpus statistics table.
    Stats(CorpusArgs),
    /// Readability table.
    Readability(CorpusArgs),
    /// SxS bucket tables and deltas.
    SxsReport {
        /// JSON comparison(s) `{source_1, source_2, aggregate}` or JSONL of judged items.
        file: Option<PathBuf>,
        #[arg(long, conflicts_with = "file")]
        project: Option<String>,
    },
    /// Write the benchmark layout to a directory.
    ExportBenchmark {
        #[arg(long)]
        project: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Training mixture records as JSONL.
    ExportTraining {
        #[arg(long)]
        project: String,
        /// Task tags; all when omitted.
        #[arg(long, value_delimiter = ',')]
        tasks: Vec<String>,
        /// Corruption fractions for description elaboration.
        #[arg(long, value_delimiter = ',')]
        fractions: Vec<f64>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Multiple-choice reasoning accuracy.
    EvalReasoning {
        /// JSONL of instances.
        file: PathBuf,
        /// Built-in deterministic model.
        #[arg(long, conflicts_with = "endpoint")]
        mock: bool,
        /// Language model base URL; the config endpoint when omitted.
        #[arg(long)]
        endpoint: Option<String>,
        /// Prompt without descriptions.
        #[arg(long)]
        no_description: bool,
    },
    /// Reconstruction similarity by cumulative sentence chunk.
    EvalT2i {
        /// JSONL of `{image_id, image_uri, descriptions}`.
        file: PathBuf,
        #[arg(long)]
        generate_url: Option<String>,
        #[arg(long)]
        embed_url: Option<String>,
        #[arg(long, default_value_t = 5)]
        max_chunks: usize,
        /// Per-sample JSONL output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        port: Option<u16>,
    },
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Usage(String),
    Unavailable(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl CliError {
    fn to_json(&self) -> Value {
        match self {
            CliError::Core(e) => {
                let mut v = json!({"error": e.kind(), "message": e.to_string()});
                if !e.violations().is_empty() {
                    v["violations"] = json!(e.violations());
                }
                v
            }
            CliError::Usage(m) => json!({"error": "usage", "message": m}),
            CliError::Unavailable(m) => json!({"error": "unavailable", "message": m}),
        }
    }
}

type CliResult = Result<String, CliError>;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn load_config(cli: &Cli) -> Result<Config, CliError> {
    let mut config = match &cli.config {
        Some(p) => Config::from_toml(&read(p)?).map_err(CliError::Usage)?,
        None => Config::default(),
    };
    config.apply_env(|k| std::env::var(k).ok()).map_err(CliError::Usage)?;
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(p) = &cli.store {
        config.store_path = p.clone();
    }
    Ok(config)
}

#[derive(Deserialize)]
struct DescriptionLine {
    #[serde(alias = "text")]
    description: String,
}

fn corpus_file(path: &Path) -> Result<Vec<String>, CliError> {
    let text = read(path)?;
    if path.extension().is_some_and(|e| e == "jsonl") {
        let lines: Vec<DescriptionLine> = from_jsonl(&text)?;
        return Ok(lines.into_iter().map(|l| l.description).collect());
    }
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_string).collect())
}

fn corpus(args: &CorpusArgs, config: &Config) -> Result<(String, Vec<String>), CliError> {
    match (&args.file, &args.project) {
        (Some(f), _) => {
            let stem = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((args.name.clone().unwrap_or(stem), corpus_file(f)?))
        }
        (None, Some(pid)) => {
            let store = Store::open(&config.store_path)?;
            let p = store.project(pid)?;
            let name = args.name.clone().or_else(|| args.model.clone()).unwrap_or_else(|| p.name.clone());
            Ok((name, p.corpus(args.model.as_deref())))
        }
        (None, None) => Err(CliError::Usage("give a corpus file or --project".into())),
    }
}

#[derive(Deserialize)]
struct Comparison {
    source_1: String,
    source_2: String,
    aggregate: SxSAggregate,
}

fn comparisons_from_file(path: &Path) -> Result<Vec<Comparison>, CliError> {
    let text = read(path)?;
    if path.extension().is_some_and(|e| e == "jsonl") {
        return group_items(from_jsonl::<SxSItem>(&text)?);
    }
    let value: Value = serde_json::from_str(&text).map_err(Error::from)?;
    let list = if value.is_array() { value } else { Value::Array(vec![value]) };
    Ok(serde_json::from_value(list).map_err(Error::from)?)
}

fn group_items(items: Vec<SxSItem>) -> Result<Vec<Comparison>, CliError> {
    let mut groups: std::collections::BTreeMap<(String, String), Vec<SxSItem>> = Default::default();
    for item in items.into_iter().filter(SxSItem::is_rated) {
        groups.entry((item.source_1.origin.clone(), item.source_2.origin.clone())).or_default().push(item);
    }
    groups
        .into_iter()
        .map(|((source_1, source_2), items)| Ok(Comparison { source_1, source_2, aggregate: aggregate_sxs(&items)? }))
        .collect()
}

fn sxs_report(comparisons: &[Comparison]) -> String {
    let mut out = String::new();
    for (i, c) in comparisons.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&render_sxs_report(&c.source_1, &c.source_2, &c.aggregate));
    }
    if comparisons.len() > 1 {
        let aggs: Vec<&SxSAggregate> = comparisons.iter().map(|c| &c.aggregate).collect();
        out.push_str(&format!("\nMean delta over {} comparisons x 5 metrics: {:.1}\n", aggs.len(), mean_delta(&aggs)));
    }
    out
}

fn ingest(store: &mut Store, project: &str, name: Option<&str>, kind: IngestKind, file: &Path) -> CliResult {
    let text = read(file)?;
    if store.project(project).is_err() {
        store.execute(
            None,
            Command::CreateProject {
                project_id: project.to_string(),
                name: name.unwrap_or(project).to_string(),
                config: ProjectConfig::default(),
            },
        )?;
    }
    let n = match kind {
        IngestKind::Images => {
            let images: Vec<ImageRecord> = from_jsonl(&text)?;
            let n = images.len();
            store.execute(None, Command::RegisterImages { project_id: project.to_string(), images })?;
            n
        }
        IngestKind::Descriptions => {
            #[derive(Deserialize)]
            struct Line {
                image_id: String,
                model: String,
                text: String,
            }
            let lines: Vec<Line> = from_jsonl(&text)?;
            for l in &lines {
                store.execute(
                    None,
                    Command::AddModelDescription {
                        project_id: project.to_string(),
                        image_id: l.image_id.clone(),
                        model: l.model.clone(),
                        text: l.text.clone(),
                    },
                )?;
            }
            lines.len()
        }
    };
    Ok(format!("{}\n", json!({"project_id": project, "ingested": n})))
}

fn endpoint(url: Option<&str>, fallback: &Option<String>, what: &str, config: &Config) -> Result<HttpEndpoint, CliError> {
    let url = url
        .map(str::to_string)
        .or_else(|| fallback.clone())
        .ok_or_else(|| CliError::Unavailable(format!("no {what} endpoint configured")))?;
    Ok(HttpEndpoint::new(&url, Duration::from_millis(config.timeout_ms)))
}

fn run(cli: Cli) -> CliResult {
    let config = load_config(&cli)?;
    match cli.command {
        Cmd::Ingest { project, name, kind, file } => {
            let mut store = Store::open(&config.store_path)?;
            ingest(&mut store, &project, name.as_deref(), kind, &file)
        }
        Cmd::Stats(args) => {
            let (name, docs) = corpus(&args, &config)?;
            let row = corpus_stats(&docs, &LexiconTagger)?;
            Ok(render_corpus_table(&[(&name, row)]))
        }
        Cmd::Readability(args) => {
            let (name, docs) = corpus(&args, &config)?;
            Ok(render_readability_table(&[(&name, corpus_readability(&docs)?)]))
        }
        Cmd::SxsReport { file, project } => {
            let comparisons = match (file, project) {
                (Some(f), _) => comparisons_from_file(&f)?,
                (None, Some(pid)) => {
                    let store = Store::open(&config.store_path)?;
                    group_items(store.project(&pid)?.sxs.values().cloned().collect())?
                }
                (None, None) => return Err(CliError::Usage("give a comparisons file or --project".into())),
            };
            if comparisons.is_empty() {
                return Err(CliError::Usage("no rated comparisons".into()));
            }
            Ok(sxs_report(&comparisons))
        }
        Cmd::ExportBenchmark { project, out } => {
            let store = Store::open(&config.store_path)?;
            let bundle = build_benchmark(store.project(&project)?);
            write_bundle(&bundle, &out)?;
            Ok(format!("{}\n", serde_json::to_string_pretty(&bundle.manifest).map_err(Error::from)?))
        }
        Cmd::ExportTraining { project, tasks, fractions, out } => {
            let store = Store::open(&config.store_path)?;
            let tags = if tasks.is_empty() {
                TaskTag::ALL.to_vec()
            } else {
                tasks.iter().map(|t| TaskTag::parse(t)).collect::<Result<Vec<_>, _>>()?
            };
            let body = to_jsonl(&export_training_mixture(store.project(&project)?, &tags, &fractions)?)?;
            match out {
                Some(path) => {
                    fs::write(&path, &body)?;
                    Ok(format!("{}\n", json!({"records": body.lines().count(), "path": path})))
                }
                None => Ok(body),
            }
        }
        Cmd::EvalReasoning { file, mock, endpoint: url, no_description } => {
            let instances: Vec<ReasoningInstance> = from_jsonl(&read(&file)?)?;
            let model: Box<dyn LanguageModel> = if mock {
                Box::new(OverlapModel)
            } else {
                Box::new(HttpLanguageModel(endpoint(url.as_deref(), &config.endpoints.complete, "language model", &config)?))
            };
            let run = run_reasoning(&instances, model.as_ref(), &config.policy(), !no_description)?;
            let s = &run.score;
            Ok(format!(
                "accuracy: {:.2}% ({}/{})\ninvalid responses: {}\nanswer positions: {:?}\n",
                s.accuracy * 100.0,
                s.correct,
                s.total,
                s.invalid,
                run.position_counts
            ))
        }
        Cmd::EvalT2i { file, generate_url, embed_url, max_chunks, out } => {
            let inputs: Vec<T2iInput> = from_jsonl(&read(&file)?)?;
            let generator = HttpImageGenerator(endpoint(generate_url.as_deref(), &config.endpoints.generate, "image generator", &config)?);
            let embedder = HttpEmbedder(endpoint(embed_url.as_deref(), &config.endpoints.embed, "embedder", &config)?);
            let samples = run_t2i(&inputs, &generator, &embedder, &config.policy(), max_chunks)?;
            if let Some(path) = out {
                fs::write(path, to_jsonl(&samples)?)?;
            }
            let mut text = String::from("system\tchunk\tmean_similarity\n");
            for ((system, chunk), mean) in similarity_by_chunk(&samples) {
                text.push_str(&format!("{system}\t{chunk}\t{mean:.3}\n"));
            }
            let missing = samples.iter().filter(|s| s.similarity.is_none()).count();
            text.push_str(&format!("samples: {}, unavailable: {missing}\n", samples.len()));
            Ok(text)
        }
        Cmd::Serve { port } => {
            let mut config = config;
            if let Some(p) = port {
                config.port = p;
            }
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(hyperdesc_server::serve(config))?;
            Ok(String::new())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            // A closed pipe is not worth an error report.
            let _ = stdout.write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}

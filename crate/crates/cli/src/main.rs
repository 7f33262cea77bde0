use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use gsw_core::error::PipelineError;
use gsw_core::eval::{self, LabeledPair, TableRow};
use gsw_core::formats::{export_dot, export_graphml, replay};
use gsw_core::model::{SituationLabel, WorkspaceInstance};
use gsw_core::oracle::BackendConfig;
use gsw_core::pipeline::{read_corpus, Pipeline, PipelineConfig, RunRecord};
use gsw_core::reconcile::Task;
use gsw_core::schema;

#[derive(Parser)]
#[command(name = "gsw", version, about = "Build and inspect actor-centric workspace graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run documents from a JSONL corpus through the pipeline
    Run(RunArgs),
    /// Render a consensus or run record as DOT or GraphML
    Export(ExportArgs),
    /// Score labeled reconciler pairs
    Eval(EvalArgs),
    /// Check a canonical instance file against the schema invariants
    Validate(ValidateArgs),
    /// Re-fold a run record's decisions and compare with its stored consensus
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Mock,
    Remote,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Graphml,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    situation: String,
    #[arg(long, value_enum, default_value = "mock")]
    backend: Backend,
    #[arg(long)]
    out: PathBuf,
    /// Pipeline settings as JSON; flags given on the command line win
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    overlap: Option<usize>,
    #[arg(long)]
    no_prune: bool,
    #[arg(long)]
    hops: Option<usize>,
    /// Documents processed in parallel
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Recorded in the run record and passed to remote decoding
    #[arg(long)]
    seed: Option<u64>,
    /// Extra operator fixtures (JSONL) for the mock backend
    #[arg(long)]
    fixtures: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Canonical consensus JSON or a run record
    input: PathBuf,
    #[arg(long, value_enum, default_value = "dot")]
    format: Format,
    /// Write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// JSONL of {"task", "gold", "pred", "meta"}
    pairs: PathBuf,
    /// Report macro F1 instead of weighted F1
    #[arg(long = "macro")]
    use_macro: bool,
    /// Also write the metric reports as JSON
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    input: PathBuf,
}

#[derive(Args)]
struct ReplayArgs {
    record: PathBuf,
}

/// Exit 2 for bad input or configuration, 1 for work that failed.
enum Failure {
    Usage(String),
    Failed(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Failed(_) => 1,
        }
    }
}

type Outcome = Result<(), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Failed(format!("{}: {e}", path.display())))
}

fn file_stem(doc_id: &str) -> String {
    doc_id.chars().map(|c| if c.is_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect()
}

fn backend_config(kind: Backend, situation: &SituationLabel, fixtures: &Option<PathBuf>) -> Result<BackendConfig, Failure> {
    match kind {
        Backend::Mock => Ok(BackendConfig { fixtures: fixtures.clone(), ..BackendConfig::mock(situation.clone()) }),
        Backend::Remote => BackendConfig::remote_from_env(situation.clone()).map_err(usage),
    }
}

fn pipeline_config(args: &RunArgs, situation: &SituationLabel) -> Result<PipelineConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => serde_json::from_str::<PipelineConfig>(&read(path)?)
            .map_err(|e| usage(format!("{}: {e}", path.display())))?,
        None => PipelineConfig {
            operator: backend_config(args.backend, situation, &args.fixtures)?,
            reconciler: backend_config(args.backend, situation, &args.fixtures)?,
            ..PipelineConfig::default()
        },
    };
    if args.config.is_some() {
        for b in [&mut cfg.operator, &mut cfg.reconciler] {
            b.situation = situation.clone();
            if b.api_key.is_none() {
                b.api_key = std::env::var("GSW_API_KEY").ok().filter(|k| !k.is_empty());
            }
        }
    }
    if let Some(w) = args.window {
        cfg.window = w;
    }
    if let Some(o) = args.overlap {
        cfg.overlap = o;
    }
    if args.no_prune {
        cfg.prune = false;
    }
    if let Some(h) = args.hops {
        cfg.hops = h;
    }
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn run(args: RunArgs) -> Outcome {
    if args.jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    let situation = SituationLabel::parse_loose(&args.situation).map_err(usage)?;
    let cfg = pipeline_config(&args, &situation)?;
    let corpus = read_corpus(&args.corpus).map_err(usage)?;
    let pipeline = Pipeline::new(cfg).map_err(usage)?;
    if corpus.is_empty() {
        log::warn!("{}: corpus is empty; nothing to do", args.corpus.display());
        return Ok(());
    }
    fs::create_dir_all(&args.out).map_err(|e| usage(format!("{}: {e}", args.out.display())))?;

    let mut docs = Vec::with_capacity(corpus.len());
    for entry in &corpus {
        let (doc, warnings) = pipeline.document(entry).map_err(usage)?;
        for w in warnings {
            log::warn!("{}: {w}", doc.doc_id);
        }
        if doc.situation != situation {
            log::warn!("{}: corpus situation {} differs from --situation {situation}", doc.doc_id, doc.situation);
        }
        docs.push(doc);
    }

    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build().map_err(|e| Failure::Failed(e.to_string()))?;
    let results: Vec<Result<RunRecord, PipelineError>> =
        pool.install(|| docs.par_iter().map(|d| pipeline.run_document(d)).collect());

    let mut aborted = 0;
    for result in results {
        match result {
            Ok(record) => {
                for w in &record.warnings {
                    log::warn!("{}: {w}", record.doc_id);
                }
                let stem = file_stem(&record.doc_id);
                write(&args.out.join(format!("{stem}.run.json")), &record.to_json())?;
                write(
                    &args.out.join(format!("{stem}.consensus.json")),
                    &schema::to_canonical_json_pretty(&record.final_consensus),
                )?;
                let log: Vec<String> = record
                    .decision_log()
                    .iter()
                    .map(|l| serde_json::to_string(l).expect("decision serializes"))
                    .collect();
                let mut body = log.join("\n");
                if !body.is_empty() {
                    body.push('\n');
                }
                write(&args.out.join(format!("{stem}.decisions.jsonl")), &body)?;
                println!(
                    "{}: {} segment(s), {} skipped, {} nodes / {} edges / {} questions",
                    record.doc_id,
                    record.snapshots.len(),
                    record.skipped(),
                    record.final_consensus.nodes.len(),
                    record.final_consensus.edges.len(),
                    record.final_consensus.questions.len()
                );
            }
            Err(e) => {
                aborted += 1;
                eprintln!("error: {e}");
            }
        }
    }
    if aborted > 0 {
        return Err(Failure::Failed(format!("{aborted} document(s) aborted")));
    }
    Ok(())
}

fn load_instance(path: &Path) -> Result<WorkspaceInstance, Failure> {
    let src = read(path)?;
    let value: serde_json::Value = serde_json::from_str(&src).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if value.get("snapshots").is_some() {
        let record = RunRecord::from_json(&src).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        return Ok(record.final_consensus);
    }
    let assembled = schema::parse_canonical(&src, &SituationLabel::crime_and_justice())
        .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    for w in assembled.warnings {
        log::warn!("{}: {w}", path.display());
    }
    Ok(assembled.instance)
}

fn export(args: ExportArgs) -> Outcome {
    let w = load_instance(&args.input)?;
    let mut text = match args.format {
        Format::Dot => export_dot(&w),
        Format::Graphml => export_graphml(&w),
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &args.out {
        Some(path) => write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn eval_pairs(args: EvalArgs) -> Outcome {
    let pairs = eval::read_labeled_pairs(&args.pairs).map_err(usage)?;
    if pairs.is_empty() {
        return Err(usage(format!("{}: no labeled pairs", args.pairs.display())));
    }
    // group by meta.situation when present
    let mut groups: std::collections::BTreeMap<String, Vec<LabeledPair>> = Default::default();
    for p in pairs {
        let situation = p
            .meta
            .as_ref()
            .and_then(|m| m.get("situation"))
            .and_then(|s| s.as_str())
            .unwrap_or("all")
            .to_string();
        groups.entry(situation).or_default().push(p);
    }
    let mut reports = Vec::new();
    for (situation, ps) in &groups {
        let by_task = eval::score_by_task(ps).map_err(usage)?;
        let pick = |tasks: &[Task]| -> Result<Option<eval::MetricReport<f64>>, Failure> {
            let subset: Vec<LabeledPair> = ps.iter().filter(|p| tasks.contains(&p.task)).cloned().collect();
            if subset.is_empty() {
                return Ok(None);
            }
            // node and edge decisions share the REC label space
            let as_node: Vec<LabeledPair> = subset
                .into_iter()
                .map(|p| LabeledPair { task: if p.task.is_rec() { Task::RecNode } else { p.task }, ..p })
                .collect();
            eval::score::<f64>(&as_node).map(Some).map_err(usage)
        };
        let rec = pick(&[Task::RecNode, Task::RecEdge])?;
        let qr = pick(&[Task::Qr])?;
        reports.push((situation.clone(), rec, qr, by_task));
    }
    let rows: Vec<TableRow<'_>> = reports
        .iter()
        .map(|(s, rec, qr, _)| TableRow { situation: s.clone(), rec: rec.as_ref(), qr: qr.as_ref() })
        .collect();
    print!("{}", eval::format_table(&rows, args.use_macro));
    if let Some(path) = &args.json {
        let json: serde_json::Map<String, serde_json::Value> = reports
            .iter()
            .map(|(s, rec, qr, by_task)| {
                let v = serde_json::json!({ "rec": rec, "qr": qr, "by_task": by_task });
                (s.clone(), v)
            })
            .collect();
        write(path, &serde_json::to_string_pretty(&json).expect("reports serialize"))?;
    }
    Ok(())
}

fn validate(args: ValidateArgs) -> Outcome {
    let src = read(&args.input)?;
    let assembled = schema::parse_canonical(&src, &SituationLabel::crime_and_justice())
        .map_err(|e| usage(format!("{}: {e}", args.input.display())))?;
    for w in &assembled.warnings {
        println!("warning: {w}");
    }
    let violations = assembled.instance.validate();
    for v in &violations {
        println!("violation: {v}");
    }
    if violations.is_empty() && assembled.warnings.is_empty() {
        println!(
            "ok: {} nodes, {} edges, {} questions",
            assembled.instance.nodes.len(),
            assembled.instance.edges.len(),
            assembled.instance.questions.len()
        );
        Ok(())
    } else {
        Err(Failure::Failed(format!(
            "{} violation(s), {} warning(s)",
            violations.len(),
            assembled.warnings.len()
        )))
    }
}

fn replay_record(args: ReplayArgs) -> Outcome {
    let src = read(&args.record)?;
    let record = RunRecord::from_json(&src).map_err(|e| usage(format!("{}: {e}", args.record.display())))?;
    let consensus = replay(&record).map_err(|e| Failure::Failed(e.to_string()))?;
    println!(
        "ok: {} segment(s) replayed to the stored consensus ({} nodes, {} edges, {} questions)",
        record.snapshots.len(),
        consensus.nodes.len(),
        consensus.edges.len(),
        consensus.questions.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a),
        Command::Export(a) => export(a),
        Command::Eval(a) => eval_pairs(a),
        Command::Validate(a) => validate(a),
        Command::Replay(a) => replay_record(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Usage(m) | Failure::Failed(m)) = &f;
            eprintln!("error: {m}");
            ExitCode::from(f.code())
        }
    }
}

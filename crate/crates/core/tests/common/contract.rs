//! The golden crime-story run and the remote-backend contract, as checks
//! returning a description of the first failure.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde_json::json;

use gsw_core::error::OracleError;
use gsw_core::fixtures::{crime_story_consensus, CRIME_STORY_JSONL};
use gsw_core::model::{SituationLabel, WorkspaceInstance};
use gsw_core::oracle::{BackendConfig, FixtureStore, HttpTransport, MockBackend, Operator};
use gsw_core::pipeline::{parse_corpus, Pipeline, PipelineConfig, RunRecord};
use gsw_core::reconcile::MockReconciler;
use gsw_core::schema::to_canonical_json;
use gsw_core::stub::{
    replay_handler, require_bearer, sequence, RecordingBackend, RecordingReconciler, StubResponse, StubServer,
};

type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// Node triples, edge signatures and question texts.
pub fn element_sets(w: &WorkspaceInstance) -> (BTreeSet<String>, BTreeSet<String>, BTreeSet<String>) {
    let idx = w.node_index();
    let node = |n: &gsw_core::model::SemanticNode| format!("{}|{}|{}", n.actor.mention(), n.role, n.state);
    (
        w.nodes.iter().map(node).collect(),
        w.edges
            .iter()
            .map(|e| {
                format!("{} -[{}|{:?}]-> {}", node(idx[&e.source]), e.label, e.attributes, node(idx[&e.target]))
            })
            .collect(),
        w.questions.iter().map(|q| q.text.clone()).collect(),
    )
}

pub fn golden_config() -> PipelineConfig {
    PipelineConfig { window: 1, ..PipelineConfig::mock(SituationLabel::crime_and_justice()) }
}

fn run_corpus(pipeline: &Pipeline) -> Result<RunRecord, String> {
    let corpus = parse_corpus(CRIME_STORY_JSONL, "crime_story.jsonl").map_err(|e| e.to_string())?;
    ensure!(corpus.len() == 1, "expected one document, got {}", corpus.len());
    let (doc, _) = pipeline.document(&corpus[0]).map_err(|e| e.to_string())?;
    pipeline.run_document(&doc).map_err(|e| e.to_string())
}

fn matches_fixture(got: &WorkspaceInstance) -> Check {
    let want = crime_story_consensus();
    ensure!(element_sets(got) == element_sets(&want), "element sets differ:\n{:?}\nvs\n{:?}", element_sets(got), element_sets(&want));
    ensure!(to_canonical_json(got) == to_canonical_json(&want), "canonical JSON differs");
    Ok(())
}

/// Mock run over the bundled story; returns the wall time.
pub fn golden_run() -> Result<Duration, String> {
    let started = Instant::now();
    let record = run_corpus(&Pipeline::new(golden_config()).map_err(|e| e.to_string())?)?;
    let elapsed = started.elapsed();
    ensure!(record.skipped() == 0, "{} segment(s) skipped", record.skipped());
    matches_fixture(&record.final_consensus)?;
    let after_s1 = &record.snapshots[0].consensus;
    let removed = after_s1.questions.iter().find(|q| q.text.starts_with("what led to the apprehension"));
    ensure!(removed.is_some(), "segment 1 should raise the apprehension question");
    ensure!(
        !record.final_consensus.questions.iter().any(|q| q.text.starts_with("what led to the apprehension")),
        "the apprehension question survived segment 2"
    );
    Ok(elapsed)
}

pub fn remote_config(url: &str) -> BackendConfig {
    let mut cfg = BackendConfig::remote(url, SituationLabel::crime_and_justice());
    cfg.retry.base_delay_ms = 1;
    cfg.timeout_ms = 2_000;
    cfg
}

fn transport(cfg: BackendConfig) -> Result<HttpTransport, String> {
    HttpTransport::new(cfg).map_err(|e| e.to_string())
}

fn label_reply() -> serde_json::Value {
    json!({ "label": 2 })
}

/// Two 503s, then success: three requests.
pub fn retries_transient_errors() -> Check {
    let s = sequence(vec![StubResponse::status(503), StubResponse::status(503), StubResponse::ok(&label_reply())]);
    let server = StubServer::start(s).map_err(|e| e.to_string())?;
    let reply = transport(remote_config(&server.url()))?.post_json("reconcile", &json!({})).map_err(|e| e.to_string())?;
    ensure!(reply == label_reply(), "unexpected reply {reply}");
    ensure!(server.request_count() == 3, "{} requests, expected 3", server.request_count());
    Ok(())
}

/// A server that never recovers costs 1 + max_retries requests.
pub fn gives_up_after_max_retries() -> Check {
    let server = StubServer::start(sequence(vec![StubResponse::status(503)])).map_err(|e| e.to_string())?;
    let cfg = remote_config(&server.url());
    let want = cfg.retry.max_retries + 1;
    match transport(cfg)?.post_json("generate", &json!({})) {
        Err(OracleError::Transport { attempts, .. }) if attempts == want => {}
        other => return Err(format!("expected transport error after {want} attempts, got {other:?}")),
    }
    ensure!(server.request_count() == want as usize, "{} requests, expected {want}", server.request_count());
    Ok(())
}

/// 401 is final: one request, no retry. The right key gets through.
pub fn auth_failures_are_not_retried() -> Check {
    let server = StubServer::start(require_bearer("s3cret", sequence(vec![StubResponse::ok(&label_reply())])))
        .map_err(|e| e.to_string())?;
    for key in [None, Some("wrong")] {
        let before = server.request_count();
        let mut cfg = remote_config(&server.url());
        cfg.api_key = key.map(String::from);
        match transport(cfg)?.post_json("reconcile", &json!({})) {
            Err(OracleError::Rejected { status: 401, .. }) => {}
            other => return Err(format!("key {key:?}: expected 401, got {other:?}")),
        }
        ensure!(server.request_count() == before + 1, "key {key:?}: rejected request was retried");
    }
    let mut cfg = remote_config(&server.url());
    cfg.api_key = Some("s3cret".into());
    let reply = transport(cfg)?.post_json("reconcile", &json!({})).map_err(|e| e.to_string())?;
    ensure!(reply == label_reply(), "authorized call failed: {reply}");
    Ok(())
}

/// A reply slower than the timeout is a transport failure, retried like one.
pub fn slow_replies_time_out() -> Check {
    let slow = StubResponse::ok(&label_reply()).delayed(Duration::from_millis(600));
    let server = StubServer::start(sequence(vec![slow])).map_err(|e| e.to_string())?;
    let mut cfg = remote_config(&server.url());
    cfg.timeout_ms = 100;
    cfg.retry.max_retries = 1;
    match transport(cfg)?.post_json("reconcile", &json!({})) {
        Err(OracleError::Transport { attempts: 2, .. }) => {}
        other => return Err(format!("expected a timed-out transport error after 2 attempts, got {other:?}")),
    }
    ensure!(server.request_count() == 2, "{} requests, expected 2", server.request_count());
    Ok(())
}

/// Records the mock run's traffic, serves it back from a stub and runs the
/// same story against the stub with remote backends.
pub fn replayed_stub_reaches_fixture() -> Check {
    let sit = SituationLabel::crime_and_justice();
    let wire = remote_config("http://recording.invalid");
    let backend = Arc::new(RecordingBackend::new(wire.clone(), Arc::new(MockBackend::new(FixtureStore::bundled()))));
    let reconciler = Arc::new(RecordingReconciler::new(Arc::new(MockReconciler)));
    let op = Operator::with_backend(BackendConfig::mock(sit), backend.clone());
    let recorded = run_corpus(&Pipeline::with_parts(golden_config(), op, reconciler.clone()).map_err(|e| e.to_string())?)?;
    matches_fixture(&recorded.final_consensus)?;

    let mut exchanges = backend.exchanges();
    exchanges.extend(reconciler.exchanges());
    ensure!(!exchanges.is_empty(), "nothing was recorded");
    let server = StubServer::start(replay_handler(exchanges)).map_err(|e| e.to_string())?;
    let cfg = PipelineConfig {
        operator: remote_config(&server.url()),
        reconciler: remote_config(&server.url()),
        ..golden_config()
    };
    let remote = run_corpus(&Pipeline::new(cfg).map_err(|e| e.to_string())?)?;
    ensure!(remote.skipped() == 0, "remote run skipped {} segment(s): {:?}", remote.skipped(), remote.warnings);
    let fallbacks: Vec<&String> = remote.snapshots.iter().flat_map(|s| &s.warnings).filter(|w| w.contains("used label")).collect();
    ensure!(fallbacks.is_empty(), "classifier fell back: {fallbacks:?}");
    matches_fixture(&remote.final_consensus)?;
    ensure!(
        serde_json::to_string(&remote.final_consensus).unwrap() == serde_json::to_string(&recorded.final_consensus).unwrap(),
        "remote and mock consensus differ"
    );
    Ok(())
}

//! Generators and property checks shared by the proptest suite and the
//! acceptance harness. Checks return `TestCaseError` so they run under both
//! `proptest!` and a hand-driven `TestRunner`.

#![allow(dead_code)]

pub mod contract;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use gsw_core::eval::{score, LabeledPair};
use gsw_core::formats::replay;
use gsw_core::memory::WorkingMemory;
use gsw_core::model::{Actor, InstanceBuilder, SituationLabel, WorkspaceInstance};
use gsw_core::oracle::{
    parse_oracle_output, BackendConfig, FixtureStore, MockBackend, Operator, ParseStatus, RepairPass,
};
use gsw_core::pipeline::{reconcile_step, resolve_aliases, Document, Pipeline, PipelineConfig, RunRecord};
use gsw_core::reconcile::{merge_outcome, propose_pairs, ElementKey, MockReconciler, ReconcileDecision, Task};
use gsw_core::schema::{from_fragment, parse_canonical, to_canonical_json, to_canonical_json_pretty, InstanceFragment};
use gsw_core::text::normalize_question;
use serde_json::{json, Value};

pub const NAMES: [&str; 20] = [
    "alice", "bruno", "carmen", "dmitri", "elena", "farid", "greta", "hugo", "ines", "jonas", "kiri", "lena",
    "marco", "nadia", "oskar", "priya", "quinn", "rosa", "sami", "tomas",
];
pub const ROLES: [&str; 6] = ["suspect", "officer", "witness", "victim", "firefighter", "reporter"];
pub const STATES: [&str; 6] = ["arrested", "injured", "fleeing", "present", "questioned", "released"];
pub const LABELS: [&str; 4] = ["arrested by", "spoke with", "helped", "reported"];
pub const ATTRS: [Option<&str>; 3] = [None, Some("at night"), Some("downtown")];
/// `{}` is replaced by an actor name; the last template names nobody.
pub const QUESTIONS: [&str; 4] = ["where was {} taken?", "why did {} flee?", "who helped {}?", "what happened next?"];

pub fn situation() -> SituationLabel {
    SituationLabel::crime_and_justice()
}

/// Index-level description of an instance; `build` turns it into one.
#[derive(Clone, Debug)]
pub struct Shape {
    /// (name, role, state)
    pub nodes: Vec<(usize, usize, usize)>,
    /// (source node, target node, label, attributes), node indices modulo.
    pub edges: Vec<(usize, usize, usize, usize)>,
    /// (template, name)
    pub questions: Vec<(usize, usize)>,
}

pub fn shape(names: std::ops::Range<usize>, max_nodes: usize) -> impl Strategy<Value = Shape> {
    let node = (names.clone(), 0..ROLES.len(), 0..STATES.len());
    let edge = (0..max_nodes, 0..max_nodes, 0..LABELS.len(), 0..ATTRS.len());
    let question = (0..QUESTIONS.len(), names);
    (
        prop::collection::vec(node, 1..=max_nodes),
        prop::collection::vec(edge, 0..=max_nodes),
        prop::collection::vec(question, 0..4),
    )
        .prop_map(|(nodes, edges, questions)| Shape { nodes, edges, questions })
}

/// Every name in `names` gets at least one node.
pub fn recurring_shape(names: Vec<usize>, extra_nodes: usize) -> impl Strategy<Value = Shape> {
    let n = names.len();
    let pick = prop::sample::select(names.clone());
    let base = prop::collection::vec((0..ROLES.len(), 0..STATES.len()), n);
    let extra = prop::collection::vec((pick.clone(), 0..ROLES.len(), 0..STATES.len()), 0..=extra_nodes);
    let total = n + extra_nodes;
    let edge = (0..total, 0..total, 0..LABELS.len(), 0..ATTRS.len());
    let question = (0..QUESTIONS.len(), pick);
    (base, extra, prop::collection::vec(edge, 0..=total), prop::collection::vec(question, 0..3)).prop_map(
        move |(base, extra, edges, questions)| {
            let mut nodes: Vec<_> = names.iter().zip(base).map(|(&a, (r, s))| (a, r, s)).collect();
            nodes.extend(extra);
            Shape { nodes, edges, questions }
        },
    )
}

pub fn question_text(template: usize, name: usize) -> String {
    let raw = QUESTIONS[template].replace("{}", NAMES[name]);
    normalize_question(&raw).expect("templates are non-empty")
}

pub fn build(shape: &Shape, segment: u32) -> WorkspaceInstance {
    let sit = situation();
    let mut b = InstanceBuilder::new(sit.clone(), segment);
    let mut ids = Vec::new();
    for &(a, r, s) in &shape.nodes {
        let actor = Actor::new(NAMES[a], &sit).expect("names are non-empty");
        ids.push(b.add_node(&actor, ROLES[r], STATES[s], segment));
    }
    for &(s, t, l, at) in &shape.edges {
        let (s, t) = (&ids[s % ids.len()], &ids[t % ids.len()]);
        b.add_edge(s, LABELS[l], t, ATTRS[at].map(String::from), segment);
    }
    for &(q, a) in &shape.questions {
        b.add_question(&question_text(q, a), segment);
    }
    b.build().0
}

pub fn step_config(prune: bool) -> PipelineConfig {
    PipelineConfig { prune, ..PipelineConfig::mock(situation()) }
}

/// Memory after merging `instances` in order under the mock rules.
pub fn memory_from(instances: &[WorkspaceInstance]) -> WorkingMemory {
    let cfg = step_config(true);
    let mut memory = WorkingMemory::new(situation());
    for w in instances {
        reconcile_step(&mut memory, w, &MockReconciler, &cfg, "").expect("mock merge succeeds");
    }
    memory
}

/// Up to three segments of random content over the first ten names; at
/// most 18 consensus nodes.
pub fn memory_strategy() -> impl Strategy<Value = WorkingMemory> {
    prop::collection::vec(shape(0..10, 6), 1..=3).prop_map(|shapes| {
        let instances: Vec<_> = shapes.iter().enumerate().map(|(i, s)| build(s, i as u32 + 1)).collect();
        memory_from(&instances)
    })
}

/// Edits applied to a copy of an existing consensus. Masks and choices are
/// indexed modulo their length.
#[derive(Clone, Debug)]
pub struct Perturbation {
    pub keep_node: Vec<bool>,
    /// 0 keeps the value; k picks `ROLES[k - 1]` / `STATES[k - 1]`.
    pub role: Vec<usize>,
    pub state: Vec<usize>,
    pub keep_edge: Vec<bool>,
    pub label: Vec<usize>,
    pub attrs: Vec<usize>,
    pub keep_question: Vec<bool>,
}

pub fn perturbation() -> impl Strategy<Value = Perturbation> {
    let mask = || prop::collection::vec(any::<bool>(), 1..8);
    let choice = |n: usize| prop::collection::vec(0..=n, 1..8);
    (mask(), choice(ROLES.len()), choice(STATES.len()), mask(), choice(LABELS.len()), choice(ATTRS.len()), mask())
        .prop_map(|(keep_node, role, state, keep_edge, label, attrs, keep_question)| Perturbation {
            keep_node,
            role,
            state,
            keep_edge,
            label,
            attrs,
            keep_question,
        })
}

fn pick<T: Copy>(v: &[T], i: usize) -> T {
    v[i % v.len()]
}

/// A new instance over the actors of `consensus`: a subset of its nodes
/// (possibly with new roles or states), edges among them and some of its
/// questions.
pub fn perturb(consensus: &WorkspaceInstance, p: &Perturbation, segment: u32) -> WorkspaceInstance {
    let sit = consensus.situation.clone();
    let mut b = InstanceBuilder::new(sit.clone(), segment);
    let mut mapped = BTreeMap::new();
    for (i, n) in consensus.nodes.iter().enumerate() {
        if !pick(&p.keep_node, i) {
            continue;
        }
        let role = match pick(&p.role, i) {
            0 => n.role.as_str(),
            k => ROLES[k - 1],
        };
        let state = match pick(&p.state, i) {
            0 => n.state.as_str(),
            k => STATES[k - 1],
        };
        let actor = Actor::new(n.actor.mention(), &sit).expect("mention is non-empty");
        mapped.insert(n.id.clone(), b.add_node(&actor, role, state, segment));
    }
    for (i, e) in consensus.edges.iter().enumerate() {
        let (Some(s), Some(t)) = (mapped.get(&e.source), mapped.get(&e.target)) else { continue };
        if !pick(&p.keep_edge, i) {
            continue;
        }
        let label = match pick(&p.label, i) {
            0 => e.label.as_str(),
            k => LABELS[k - 1],
        };
        let attrs = match pick(&p.attrs, i) {
            0 => e.attributes.clone(),
            k => ATTRS[k - 1].map(String::from),
        };
        b.add_edge(s, label, t, attrs, segment);
    }
    for (i, q) in consensus.questions.iter().enumerate() {
        if pick(&p.keep_question, i) {
            b.add_question(&q.text, segment);
        }
    }
    b.build().0
}

/// Appends the nodes, edges and questions of `extra` (built over other
/// actors) to `w`.
pub fn with_extra(w: &WorkspaceInstance, extra: &WorkspaceInstance) -> WorkspaceInstance {
    let mut b = InstanceBuilder::new(w.situation.clone(), w.segment);
    let mut ids = BTreeMap::new();
    for n in w.nodes.iter().chain(&extra.nodes) {
        ids.insert(n.id.clone(), b.add_node(&n.actor, &n.role, &n.state, w.segment));
    }
    for e in w.edges.iter().chain(&extra.edges) {
        b.add_edge(&ids[&e.source], &e.label, &ids[&e.target], e.attributes.clone(), w.segment);
    }
    for q in w.questions.iter().chain(&extra.questions) {
        b.add_question(&q.text, w.segment);
    }
    b.build().0
}

pub fn triples(w: &WorkspaceInstance) -> BTreeSet<(String, String, String)> {
    w.nodes.iter().map(|n| (n.actor.id.to_string(), n.role.clone(), n.state.clone())).collect()
}

fn edge_signatures(w: &WorkspaceInstance) -> BTreeSet<(String, String, String, Option<String>)> {
    let idx = w.node_index();
    w.edges
        .iter()
        .map(|e| {
            let end = |id| {
                let n = idx[id];
                format!("{}|{}|{}", n.actor.id, n.role, n.state)
            };
            (end(&e.source), e.label.clone(), end(&e.target), e.attributes.clone())
        })
        .collect()
}

fn question_texts(w: &WorkspaceInstance) -> BTreeSet<String> {
    w.questions.iter().map(|q| q.text.clone()).collect()
}

fn labeled(pairs: &gsw_core::reconcile::CandidatePairSet, labels: &[u8]) -> Vec<ReconcileDecision> {
    pairs
        .triples()
        .into_iter()
        .enumerate()
        .map(|(i, (task, old_ref, new_ref))| ReconcileDecision {
            task,
            old_ref,
            new_ref,
            label: labels[i % labels.len()] % (task.max_label() + 1),
        })
        .collect()
}

/// Keep-old on every pair leaves the consensus as it was, provided every
/// new element had a partner.
pub fn check_label_zero(memory: &WorkingMemory, p: &Perturbation) -> Result<(), TestCaseError> {
    let w = perturb(&memory.consensus, p, memory.consensus.segment + 1);
    let w = resolve_aliases(memory, &w).instance;
    let pairs = propose_pairs(memory, &w, true, 1);
    prop_assert!(pairs.unmatched_new.is_empty(), "unmatched: {:?}", pairs.unmatched_new);
    let out = merge_outcome(memory, &w, &labeled(&pairs, &[0]), &pairs).map_err(fail)?;
    prop_assert_eq!(&out.consensus.nodes, &memory.consensus.nodes);
    prop_assert_eq!(&out.consensus.edges, &memory.consensus.edges);
    prop_assert_eq!(&out.consensus.questions, &memory.consensus.questions);
    Ok(())
}

/// Keep-both on actor-disjoint input is a disjoint union.
pub fn check_label_two_union(memory: &WorkingMemory, other: &Shape) -> Result<(), TestCaseError> {
    let w = build(other, memory.consensus.segment + 1);
    let w = resolve_aliases(memory, &w).instance;
    prop_assert!(memory.consensus.actor_ids().is_disjoint(&w.actor_ids()));
    for prune in [true, false] {
        let pairs = propose_pairs(memory, &w, prune, 1);
        prop_assert!(pairs.node_pairs.is_empty() && pairs.edge_pairs.is_empty());
        // QR only takes 0/1; 2 folds to 0 there
        let out = merge_outcome(memory, &w, &labeled(&pairs, &[2]), &pairs).map_err(fail)?;
        let c = &out.consensus;
        prop_assert_eq!(c.nodes.len(), memory.consensus.nodes.len() + w.nodes.len());
        prop_assert_eq!(c.edges.len(), memory.consensus.edges.len() + w.edges.len());
        let want: BTreeSet<_> = triples(&memory.consensus).union(&triples(&w)).cloned().collect();
        prop_assert_eq!(triples(c), want);
        let want: BTreeSet<_> = edge_signatures(&memory.consensus).union(&edge_signatures(&w)).cloned().collect();
        prop_assert_eq!(edge_signatures(c), want);
        let want: BTreeSet<_> = question_texts(&memory.consensus).union(&question_texts(&w)).cloned().collect();
        prop_assert_eq!(question_texts(c), want);
    }
    Ok(())
}

/// Random labels against an independent statement of the precedence rule:
/// a new element with a keep-old vote is dropped; otherwise it is inserted
/// and removes every old element it voted replace on; a replace on a
/// question resolves it.
pub fn check_precedence(
    memory: &WorkingMemory,
    p: &Perturbation,
    extra: &Shape,
    labels: &[u8],
) -> Result<(), TestCaseError> {
    let seg = memory.consensus.segment + 1;
    let w = with_extra(&perturb(&memory.consensus, p, seg), &build(extra, seg));
    let w = resolve_aliases(memory, &w).instance;
    let pairs = propose_pairs(memory, &w, true, 1);
    let decisions = labeled(&pairs, labels);
    let out = merge_outcome(memory, &w, &decisions, &pairs).map_err(fail)?;

    let mut votes: BTreeMap<&ElementKey, Vec<(&ElementKey, u8)>> = BTreeMap::new();
    let mut resolved = BTreeSet::new();
    for d in &decisions {
        match d.task {
            Task::Qr if d.label == 1 => {
                resolved.insert(match &d.old_ref {
                    ElementKey::Question(q) => q.clone(),
                    other => return Err(TestCaseError::fail(format!("qr on {other}"))),
                });
            }
            Task::Qr => {}
            _ => votes.entry(&d.new_ref).or_default().push((&d.old_ref, d.label)),
        }
    }
    let mut removed = BTreeSet::new();
    let mut inserted = BTreeSet::new();
    for n in &w.nodes {
        let key = ElementKey::Node(n.id.clone());
        let v = votes.get(&key).cloned().unwrap_or_default();
        if v.iter().all(|(_, l)| *l != 0) {
            inserted.insert((n.actor.id.to_string(), n.role.clone(), n.state.clone()));
            removed.extend(v.iter().filter(|(_, l)| *l == 1).map(|(o, _)| (*o).clone()));
        }
    }
    let mut want: BTreeSet<_> = memory
        .consensus
        .nodes
        .iter()
        .filter(|n| !removed.contains(&ElementKey::Node(n.id.clone())))
        .map(|n| (n.actor.id.to_string(), n.role.clone(), n.state.clone()))
        .collect();
    want.extend(inserted);
    prop_assert_eq!(triples(&out.consensus), want);

    let mut want_q: BTreeSet<String> = question_texts(&memory.consensus).difference(&resolved).cloned().collect();
    want_q.extend(question_texts(&w).into_iter().filter(|q| !resolved.contains(q) && !memory.resolved.contains(q)));
    prop_assert_eq!(question_texts(&out.consensus), want_q);
    let got_resolved: BTreeSet<String> = out.resolved.iter().cloned().collect();
    prop_assert_eq!(got_resolved, resolved);
    prop_assert!(out.consensus.validate().is_empty());
    Ok(())
}

/// Reconciling a memory with its own consensus under the mock rules.
pub fn check_self_merge(memory: &WorkingMemory) -> Result<(), TestCaseError> {
    let mut next = memory.clone();
    let w = memory.consensus.clone();
    reconcile_step(&mut next, &w, &MockReconciler, &step_config(true), "").map_err(fail)?;
    prop_assert_eq!(&next.consensus, &memory.consensus);
    Ok(())
}

/// A synthetic story: one context per segment, each recorded in a fixture
/// store so the mock operator returns the generated instance.
#[derive(Clone, Debug)]
pub struct Story {
    pub contexts: Vec<String>,
    pub store: FixtureStore,
}

pub fn story(id: usize, shapes: &[Shape]) -> Story {
    let mut store = FixtureStore::new();
    let mut contexts = Vec::new();
    for (i, s) in shapes.iter().enumerate() {
        let context = format!("Story {id}, part {}.", i + 1);
        store.insert(&context, &build(s, i as u32 + 1));
        contexts.push(context);
    }
    Story { contexts, store }
}

/// Three segments over a fixed cast, every member present in each.
pub fn recurring_story() -> impl Strategy<Value = Vec<Shape>> {
    prop::sample::subsequence((0..NAMES.len()).collect::<Vec<_>>(), 2..=5)
        .prop_flat_map(|cast| prop::collection::vec(recurring_shape(cast, 3), 3))
}

pub fn run_story(story: &Story, prune: bool) -> RunRecord {
    let sit = situation();
    let op = Operator::with_backend(BackendConfig::mock(sit.clone()), Arc::new(MockBackend::new(story.store.clone())));
    let pipeline = Pipeline::with_parts(step_config(prune), op, Arc::new(MockReconciler)).expect("valid config");
    let doc = Document {
        doc_id: "synthetic".into(),
        situation: sit,
        text: story.contexts.join(" "),
        segments: story.contexts.clone(),
    };
    pipeline.run_document(&doc).expect("mock run succeeds")
}

pub fn check_pruning(shapes: &[Shape]) -> Result<(), TestCaseError> {
    let s = story(0, shapes);
    let on = run_story(&s, true);
    let off = run_story(&s, false);
    prop_assert_eq!(on.skipped(), 0);
    prop_assert_eq!(to_canonical_json(&on.final_consensus), to_canonical_json(&off.final_consensus));
    prop_assert_eq!(&on.final_consensus, &off.final_consensus);
    Ok(())
}

pub fn check_replay(shapes: &[Shape]) -> Result<(), TestCaseError> {
    let record = run_story(&story(1, shapes), true);
    let stored = serde_json::to_string(&record.final_consensus).unwrap();
    let replayed = replay(&record).map_err(fail)?;
    prop_assert_eq!(serde_json::to_string(&replayed).unwrap(), stored.clone());
    let reread = RunRecord::from_json(&record.to_json()).map_err(fail)?;
    prop_assert_eq!(serde_json::to_string(&replay(&reread).map_err(fail)?).unwrap(), stored);
    Ok(())
}

pub fn check_round_trip(shape: &Shape) -> Result<(), TestCaseError> {
    let w = build(shape, 1);
    let first = to_canonical_json(&w);
    prop_assert_eq!(parse_oracle_output(&first).status, ParseStatus::Clean);
    let back = parse_canonical(&first, &w.situation).map_err(fail)?;
    prop_assert!(back.warnings.is_empty(), "{:?}", back.warnings);
    let second = to_canonical_json(&back.instance);
    prop_assert_eq!(&second, &first);
    let third = to_canonical_json(&parse_canonical(&second, &w.situation).map_err(fail)?.instance);
    prop_assert_eq!(third, second);
    Ok(())
}

/// Independent metric definitions: per-class precision and recall from
/// explicit counting, F1 as their harmonic mean.
pub struct OracleScores {
    pub accuracy: f64,
    pub weighted_f1: f64,
}

pub fn oracle_scores(classes: u8, gold: &[u8], pred: &[u8]) -> OracleScores {
    let n = gold.len() as f64;
    let correct = gold.iter().zip(pred).filter(|(g, p)| g == p).count() as f64;
    let mut weighted = 0.0;
    for c in 0..classes {
        let tp = gold.iter().zip(pred).filter(|(g, p)| **g == c && **p == c).count() as f64;
        let fp = gold.iter().zip(pred).filter(|(g, p)| **g != c && **p == c).count() as f64;
        let fn_ = gold.iter().zip(pred).filter(|(g, p)| **g == c && **p != c).count() as f64;
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        weighted += (tp + fn_) * f1;
    }
    OracleScores { accuracy: correct / n, weighted_f1: weighted / n }
}

pub fn label_vectors() -> impl Strategy<Value = (Task, Vec<(u8, u8)>)> {
    prop::sample::select(vec![Task::RecNode, Task::RecEdge, Task::Qr]).prop_flat_map(|task| {
        let k = task.max_label() + 1;
        (Just(task), prop::collection::vec((0..k, 0..k), 1..200))
    })
}

pub fn check_metrics(task: Task, labels: &[(u8, u8)]) -> Result<(), TestCaseError> {
    let pairs: Vec<LabeledPair> = labels.iter().map(|&(g, p)| LabeledPair::new(task, g, p)).collect();
    let report = score::<f64>(&pairs).map_err(fail)?;
    let gold: Vec<u8> = labels.iter().map(|l| l.0).collect();
    let pred: Vec<u8> = labels.iter().map(|l| l.1).collect();
    let want = oracle_scores(task.max_label() + 1, &gold, &pred);
    prop_assert!((report.accuracy - want.accuracy).abs() < 1e-9, "{} vs {}", report.accuracy, want.accuracy);
    prop_assert!(
        (report.weighted_f1 - want.weighted_f1).abs() < 1e-9,
        "{} vs {}",
        report.weighted_f1,
        want.weighted_f1
    );
    match report.sensitivity {
        Some(s) => prop_assert!(task.is_rec() && s >= report.accuracy),
        None => prop_assert!(!task.is_rec()),
    }
    Ok(())
}

pub fn fail(e: impl std::fmt::Display) -> TestCaseError {
    TestCaseError::fail(e.to_string())
}

/// Applies the corruption `pass` is meant to undo to pretty canonical JSON.
/// `mask` chooses which sites are corrupted; at least one always is.
pub fn corrupt(pass: RepairPass, pretty: &str, mask: &[bool]) -> String {
    let on = |i: usize| i == 0 || mask[i % mask.len()];
    match pass {
        RepairPass::StripFences => {
            format!("Sure, here is the workspace:\n```json\n{pretty}\n```\nLet me know if anything is missing.")
        }
        RepairPass::TrailingCommas => {
            let lines: Vec<&str> = pretty.lines().collect();
            let mut out: Vec<String> = lines.iter().map(|l| l.to_string()).collect();
            let mut site = 0;
            for i in 1..lines.len() {
                let closes = lines[i].trim_start().starts_with(['}', ']']);
                let opens = lines[i - 1].trim_end().ends_with(['{', '[']);
                if closes && !opens {
                    if on(site) {
                        out[i - 1].push(',');
                    }
                    site += 1;
                }
            }
            out.join("\n")
        }
        RepairPass::QuoteBareKeys => {
            let keys = [
                "situation", "segment", "nodes", "edges", "questions", "actor", "role", "state", "label", "source",
                "target", "attributes",
            ];
            let mut out = pretty.to_string();
            for (i, k) in keys.iter().enumerate() {
                if on(i) {
                    out = out.replace(&format!("\"{k}\":"), &format!("{k}:"));
                }
            }
            out
        }
        RepairPass::KeyVariants => {
            let mut v: Value = serde_json::from_str(pretty).expect("canonical JSON parses");
            let top = v.as_object_mut().expect("object");
            let renames = [("nodes", "Nodes"), ("edges", "relations"), ("questions", "question")];
            for (i, (from, to)) in renames.iter().enumerate() {
                if on(i) {
                    if let Some(x) = top.remove(*from) {
                        top.insert(to.to_string(), x);
                    }
                }
            }
            if mask[0] {
                top.insert("confidence".into(), json!(0.9));
            }
            for (i, node) in top
                .values_mut()
                .filter_map(Value::as_array_mut)
                .flatten()
                .filter_map(Value::as_object_mut)
                .enumerate()
            {
                if on(i + 1) {
                    if let Some(s) = node.remove("state") {
                        node.insert("states".into(), json!([s]));
                    }
                }
            }
            serde_json::to_string_pretty(&v).expect("value serializes")
        }
    }
}

/// The corrupted text is not strict JSON of the schema, and parsing repairs
/// it with `pass` back to the original fragment.
pub fn check_repair(pass: RepairPass, shape: &Shape, mask: &[bool]) -> Result<(), TestCaseError> {
    let w = build(shape, 1);
    let pretty = to_canonical_json_pretty(&w);
    let original: InstanceFragment = serde_json::from_str(&pretty).map_err(fail)?;
    let bad = corrupt(pass, &pretty, mask);
    prop_assert!(serde_json::from_str::<InstanceFragment>(&bad).is_err(), "corruption left valid input: {}", bad);
    let parsed = parse_oracle_output(&bad);
    prop_assert_eq!(parsed.status, ParseStatus::Repaired);
    prop_assert!(parsed.repairs.contains(&pass), "{:?} not in {:?}", pass, parsed.repairs);
    prop_assert_eq!(&parsed.fragment, &original);
    Ok(())
}

/// Random byte edits of a valid document.
pub fn mangled() -> impl Strategy<Value = String> {
    (shape(0..20, 6), prop::collection::vec((any::<prop::sample::Index>(), any::<u8>(), 0..3u8), 1..12)).prop_map(
        |(s, edits)| {
            let mut bytes = to_canonical_json(&build(&s, 1)).into_bytes();
            for (at, b, op) in edits {
                if bytes.is_empty() {
                    break;
                }
                let i = at.index(bytes.len());
                match op {
                    0 => {
                        bytes.remove(i);
                    }
                    1 => bytes.insert(i, b),
                    _ => bytes[i] = b,
                }
            }
            String::from_utf8_lossy(&bytes).into_owned()
        },
    )
}

/// Parsing never panics; whatever comes back assembles into an instance.
pub fn check_no_panic(text: &str) -> Result<(), TestCaseError> {
    let parsed = parse_oracle_output(text);
    let _ = from_fragment(&parsed.fragment, &situation(), 1);
    let _ = parse_canonical(text, &situation());
    Ok(())
}

//! Parsing of structured oracle output with a fixed, ordered list of repair
//! passes. Never panics and never calls back into a model.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::schema::InstanceFragment;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseStatus {
    Clean,
    Repaired,
    Failed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairPass {
    /// Drop markdown fences and surrounding prose, keeping the outermost
    /// balanced `{...}`.
    StripFences,
    /// Remove commas directly before `}` or `]`.
    TrailingCommas,
    /// Quote bare object keys (`{actor: "x"}`).
    QuoteBareKeys,
    /// Fold key spellings (`states`, `Nodes`, `predicate`, ...) onto the
    /// canonical schema and drop unknown keys.
    KeyVariants,
}

pub const REPAIR_PASSES: [RepairPass; 4] = [
    RepairPass::StripFences,
    RepairPass::TrailingCommas,
    RepairPass::QuoteBareKeys,
    RepairPass::KeyVariants,
];

impl RepairPass {
    pub fn apply(self, text: &str) -> String {
        match self {
            RepairPass::StripFences => strip_fences(text),
            RepairPass::TrailingCommas => remove_trailing_commas(text),
            RepairPass::QuoteBareKeys => quote_bare_keys(text),
            RepairPass::KeyVariants => fold_key_variants(text),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedOutput {
    pub fragment: InstanceFragment,
    pub status: ParseStatus,
    pub repairs: Vec<RepairPass>,
}

fn strict(text: &str) -> Option<InstanceFragment> {
    serde_json::from_str(text).ok()
}

/// Strict parse first; otherwise apply the repair passes cumulatively in
/// order, re-trying the strict parse after each one that changed the text.
pub fn parse_oracle_output(raw: &str) -> ParsedOutput {
    if let Some(fragment) = strict(raw) {
        return ParsedOutput { fragment, status: ParseStatus::Clean, repairs: Vec::new() };
    }
    let mut text = raw.to_string();
    let mut repairs = Vec::new();
    for pass in REPAIR_PASSES {
        let next = pass.apply(&text);
        if next == text {
            continue;
        }
        repairs.push(pass);
        text = next;
        if let Some(fragment) = strict(&text) {
            return ParsedOutput { fragment, status: ParseStatus::Repaired, repairs };
        }
    }
    ParsedOutput { fragment: InstanceFragment::default(), status: ParseStatus::Failed, repairs }
}

fn strip_fences(text: &str) -> String {
    let mut body = text;
    if let Some(start) = text.find("```") {
        let after = &text[start + 3..];
        // skip the info string (`json`, `JSON`, ...)
        let after = after.find('\n').map_or(after, |nl| &after[nl + 1..]);
        body = match after.find("```") {
            Some(end) => &after[..end],
            None => after,
        };
    }
    match outermost_object(body).or_else(|| outermost_object(text)) {
        Some(obj) => obj.to_string(),
        None => body.trim().to_string(),
    }
}

/// Slice from the first `{` to its matching `}` (string-aware), or to the
/// last `}` when braces do not balance.
fn outermost_object(text: &str) -> Option<&str> {
    let start = text.find('{')?;
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, c) in text[start..].char_indices() {
        if in_string {
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_string = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..start + i + 1]);
                }
            }
            _ => {}
        }
    }
    let end = text.rfind('}')?;
    (end > start).then(|| &text[start..=end])
}

fn remove_trailing_commas(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut in_string = false;
    let mut escaped = false;
    for (i, &c) in chars.iter().enumerate() {
        if in_string {
            out.push(c);
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_string = false,
                _ => {}
            }
            continue;
        }
        if c == '"' {
            in_string = true;
        } else if c == ',' {
            let next = chars[i + 1..].iter().find(|c| !c.is_whitespace());
            if matches!(next, Some('}') | Some(']')) {
                continue;
            }
        }
        out.push(c);
    }
    out
}

fn quote_bare_keys(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len() + 16);
    let mut in_string = false;
    let mut escaped = false;
    // last significant character outside strings
    let mut last_sig: Option<char> = None;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if in_string {
            out.push(c);
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => {
                    in_string = false;
                    last_sig = Some('"');
                }
                _ => {}
            }
            i += 1;
            continue;
        }
        if c == '"' {
            in_string = true;
            out.push(c);
            i += 1;
            continue;
        }
        let starts_ident = c.is_alphabetic() || c == '_';
        if starts_ident && matches!(last_sig, Some('{') | Some(',')) {
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let mut k = j;
            while k < chars.len() && chars[k].is_whitespace() {
                k += 1;
            }
            if k < chars.len() && chars[k] == ':' {
                out.push('"');
                out.extend(&chars[i..j]);
                out.push('"');
                last_sig = Some('"');
                i = j;
                continue;
            }
        }
        if !c.is_whitespace() {
            last_sig = Some(c);
        }
        out.push(c);
        i += 1;
    }
    out
}

fn fold_key_variants(text: &str) -> String {
    let Ok(Value::Object(top)) = serde_json::from_str::<Value>(text) else {
        return text.to_string();
    };
    let mut out = Map::new();
    for (key, value) in top {
        match canonical_top_key(&key) {
            Some("nodes") => {
                out.insert("nodes".into(), Value::Array(fold_nodes(value)));
            }
            Some("edges") => {
                out.insert("edges".into(), Value::Array(fold_edges(value)));
            }
            Some("questions") => {
                let qs = match value {
                    Value::Array(items) => items
                        .into_iter()
                        .filter_map(|q| match q {
                            Value::String(s) => Some(Value::String(s)),
                            Value::Object(mut m) => m
                                .remove("question")
                                .or_else(|| m.remove("text"))
                                .filter(Value::is_string),
                            _ => None,
                        })
                        .collect(),
                    Value::String(s) => vec![Value::String(s)],
                    _ => Vec::new(),
                };
                out.insert("questions".into(), Value::Array(qs));
            }
            Some(k @ ("situation" | "segment")) => {
                let keep = match k {
                    "situation" => value.is_string(),
                    _ => value.as_u64().is_some_and(|v| v <= u32::MAX as u64),
                };
                if keep {
                    out.insert(k.into(), value);
                }
            }
            _ => {}
        }
    }
    Value::Object(out).to_string()
}

fn canonical_top_key(key: &str) -> Option<&'static str> {
    match key.to_lowercase().as_str() {
        "nodes" | "node" | "actors" => Some("nodes"),
        "edges" | "edge" | "predicates" | "relations" => Some("edges"),
        "questions" | "question" => Some("questions"),
        "situation" => Some("situation"),
        "segment" => Some("segment"),
        _ => None,
    }
}

fn as_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn fold_nodes(value: Value) -> Vec<Value> {
    let Value::Array(items) = value else { return Vec::new() };
    let mut out = Vec::new();
    for item in items {
        let Value::Object(m) = item else { continue };
        let mut actor = None;
        let mut role = None;
        let mut states: Vec<String> = Vec::new();
        for (k, v) in m {
            match k.to_lowercase().as_str() {
                "actor" | "name" | "entity" => actor = as_text(&v),
                "role" | "roles" => {
                    role = match &v {
                        Value::Array(a) => a.first().and_then(as_text),
                        other => as_text(other),
                    }
                }
                "state" | "states" => match &v {
                    Value::Array(a) => states.extend(a.iter().filter_map(as_text)),
                    other => states.extend(as_text(other)),
                },
                _ => {}
            }
        }
        let Some(actor) = actor else { continue };
        let record = |state: Option<&String>| {
            let mut rec = Map::new();
            rec.insert("actor".into(), Value::String(actor.clone()));
            if let Some(r) = &role {
                rec.insert("role".into(), Value::String(r.clone()));
            }
            if let Some(s) = state {
                rec.insert("state".into(), Value::String(s.clone()));
            }
            Value::Object(rec)
        };
        if states.is_empty() {
            out.push(record(None));
        } else {
            out.extend(states.iter().map(|s| record(Some(s))));
        }
    }
    out
}

fn fold_edges(value: Value) -> Vec<Value> {
    let Value::Array(items) = value else { return Vec::new() };
    let mut out = Vec::new();
    for item in items {
        let Value::Object(m) = item else { continue };
        let mut rec = Map::new();
        for (k, v) in m {
            let key = match k.to_lowercase().as_str() {
                "label" | "predicate" | "relation" => "label",
                "source" | "from" | "subject" => "source",
                "target" | "to" | "object" => "target",
                "attributes" | "attribute" | "qualifier" => "attributes",
                _ => continue,
            };
            let v = match (key, v) {
                ("attributes", Value::Null) => Value::Null,
                (_, v) => match as_text(&v) {
                    Some(s) => Value::String(s),
                    None => continue,
                },
            };
            rec.insert(key.into(), v);
        }
        if ["label", "source", "target"].iter().all(|k| rec.contains_key(*k)) {
            out.push(Value::Object(rec));
        }
    }
    out
}

//! Edge-list and opinion-file ingestion and export.
//!
//! Graph files hold one edge per line, `u v [w]` (weight defaults to 1).
//! Labels are arbitrary whitespace-free strings, mapped to dense ids in
//! order of first appearance. `#` starts a comment, except that a
//! `#! nodes a b ..` line declares labels up front (used by exports so that
//! isolated nodes and the id order survive a round trip).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use polopt::{OpinionVector, WeightedGraph};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("no edges or nodes found")]
    Empty,
    #[error("no opinion given for node '{0}'")]
    MissingNode(String),
    #[error("opinion file names unknown node '{0}'")]
    UnknownNode(String),
    #[error("line {line}: opinion {value} out of range")]
    OutOfRange { line: usize, value: f64 },
    #[error("{0}")]
    Graph(#[from] polopt::Error),
}

const NODE_PRAGMA: &str = "#! nodes";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabelMap {
    labels: Vec<String>,
    ids: HashMap<String, usize>,
}

impl LabelMap {
    /// Ids `0..n` labelled by their decimal string.
    pub fn numeric(n: usize) -> Self {
        let mut map = Self::default();
        for i in 0..n {
            map.intern(&i.to_string());
        }
        map
    }

    pub fn intern(&mut self, label: &str) -> usize {
        if let Some(&id) = self.ids.get(label) {
            return id;
        }
        let id = self.labels.len();
        self.labels.push(label.to_string());
        self.ids.insert(label.to_string(), id);
        id
    }

    pub fn id(&self, label: &str) -> Option<usize> {
        self.ids.get(label).copied()
    }

    pub fn label(&self, id: usize) -> &str {
        &self.labels[id]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestedGraph {
    pub graph: WeightedGraph,
    pub labels: LabelMap,
    pub self_loops_dropped: usize,
    pub duplicates_merged: usize,
}

fn read(path: &Path) -> Result<String, IngestError> {
    fs::read_to_string(path).map_err(|source| IngestError::Io { path: path.to_path_buf(), source })
}

fn content(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

pub fn ingest_graph(path: &Path) -> Result<IngestedGraph, IngestError> {
    parse_graph(&read(path)?)
}

pub fn parse_graph(text: &str) -> Result<IngestedGraph, IngestError> {
    let mut labels = LabelMap::default();
    let mut weights: HashMap<(usize, usize), f64> = HashMap::new();
    let mut order = Vec::new();
    let mut self_loops = 0;
    let mut duplicates = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if let Some(rest) = raw.trim_start().strip_prefix(NODE_PRAGMA) {
            for label in rest.split_whitespace() {
                labels.intern(label);
            }
            continue;
        }
        let body = content(raw);
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(IngestError::Malformed { line, message: format!("expected 'u v [w]', got '{body}'") });
        }
        let w = match fields.get(2) {
            Some(tok) => tok
                .parse::<f64>()
                .map_err(|e| IngestError::Malformed { line, message: format!("bad weight '{tok}': {e}") })?,
            None => 1.0,
        };
        if !(w > 0.0 && w.is_finite()) {
            return Err(IngestError::Malformed { line, message: format!("weight must be positive, got {w}") });
        }
        let (a, b) = (labels.intern(fields[0]), labels.intern(fields[1]));
        if a == b {
            self_loops += 1;
            continue;
        }
        let key = (a.min(b), a.max(b));
        match weights.get_mut(&key) {
            Some(acc) => {
                *acc += w;
                duplicates += 1;
            }
            None => {
                weights.insert(key, w);
                order.push(key);
            }
        }
    }
    if labels.is_empty() {
        return Err(IngestError::Empty);
    }
    let graph = WeightedGraph::new(labels.len(), order.iter().map(|k| (k.0, k.1, weights[k])))?;
    Ok(IngestedGraph { graph, labels, self_loops_dropped: self_loops, duplicates_merged: duplicates })
}

pub fn ingest_opinions(path: &Path, labels: &LabelMap) -> Result<OpinionVector, IngestError> {
    parse_opinions(&read(path)?, labels)
}

/// Accepts `label value` lines resolved through `labels`, or bare `value`
/// lines taken in node-id order. Values must lie in [0, 1].
pub fn parse_opinions(text: &str, labels: &LabelMap) -> Result<OpinionVector, IngestError> {
    Ok(OpinionVector::new(parse_opinion_values(text, labels, true)?)?)
}

/// As [`parse_opinions`], optionally without the range check (for data on
/// other scales, which the caller rescales).
pub fn parse_opinion_values(text: &str, labels: &LabelMap, bounded: bool) -> Result<Vec<f64>, IngestError> {
    let mut values: Vec<Option<f64>> = vec![None; labels.len()];
    let mut next_bare = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = content(raw);
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        let (id, tok) = match fields.as_slice() {
            [value] => {
                next_bare += 1;
                if next_bare > labels.len() {
                    return Err(IngestError::Malformed { line, message: "more values than nodes".into() });
                }
                (next_bare - 1, *value)
            }
            [label, value] => (labels.id(label).ok_or_else(|| IngestError::UnknownNode(label.to_string()))?, *value),
            _ => {
                return Err(IngestError::Malformed { line, message: format!("expected '[label] value', got '{body}'") })
            }
        };
        let value = tok
            .parse::<f64>()
            .map_err(|e| IngestError::Malformed { line, message: format!("bad value '{tok}': {e}") })?;
        let in_range = if bounded { (0.0..=1.0).contains(&value) } else { value.is_finite() };
        if !in_range {
            return Err(IngestError::OutOfRange { line, value });
        }
        values[id] = Some(value);
    }
    values
        .into_iter()
        .enumerate()
        .map(|(id, v)| v.ok_or_else(|| IngestError::MissingNode(labels.label(id).to_string())))
        .collect()
}

/// Shortest float text that parses back to the same value.
fn exact(x: f64) -> String {
    format!("{x:?}")
}

pub fn format_graph(graph: &WeightedGraph, labels: &LabelMap) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{NODE_PRAGMA} {}", labels.labels().join(" "));
    for e in graph.edges() {
        let _ = writeln!(out, "{} {} {}", labels.label(e.u), labels.label(e.v), exact(e.w));
    }
    out
}

pub fn format_opinions(s: &OpinionVector, labels: &LabelMap) -> String {
    let mut out = String::new();
    for (i, v) in s.as_slice().iter().enumerate() {
        let _ = writeln!(out, "{} {}", labels.label(i), exact(*v));
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)
}

/// Minimal CSV writer; fields containing separators are quoted.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    fn field(f: &str) -> String {
        if f.contains([',', '"', '\n']) {
            format!("\"{}\"", f.replace('"', "\"\""))
        } else {
            f.to_string()
        }
    }
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.iter().map(|f| field(f)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

pub fn num(x: f64) -> String {
    exact(x)
}

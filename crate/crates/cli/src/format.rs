//! Plain-text tree files.
//!
//! ```text
//! # comments start with '#'
//! nodes 3
//! edge 1 2 0.5
//! edge 1 3 -0.6
//! ```
//!
//! Node labels are arbitrary tokens. If every label is an integer in `1..=N`
//! the ids are kept as written; otherwise labels are numbered in order of
//! first appearance.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use graftci::GaussianTree;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    ModelAt {
        line: usize,
        #[source]
        source: graftci::Error,
    },
    #[error("{0}")]
    Model(#[source] graftci::Error),
}

impl ParseError {
    /// Syntax problems are malformed input; the others describe an invalid model.
    pub fn is_syntax(&self) -> bool {
        matches!(self, ParseError::Syntax { .. })
    }
}

/// A parsed tree with the label each node id had in the file.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeFile {
    pub tree: GaussianTree,
    /// `labels[id - 1]` is the label of node `id`.
    pub labels: Vec<String>,
}

impl TreeFile {
    pub fn label(&self, id: usize) -> &str {
        &self.labels[id - 1]
    }

    pub fn id_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label).map(|p| p + 1)
    }

    /// True when labels are `1..=n` in order, so ids and labels coincide.
    pub fn has_identity_labels(&self) -> bool {
        self.labels.iter().enumerate().all(|(k, l)| *l == (k + 1).to_string())
    }
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, msg: msg.into() }
}

pub fn parse_tree(text: &str) -> Result<GaussianTree, ParseError> {
    parse_tree_file(text).map(|f| f.tree)
}

pub fn parse_tree_file(text: &str) -> Result<TreeFile, ParseError> {
    let mut n: Option<usize> = None;
    let mut raw: Vec<(usize, String, String, f64)> = Vec::new();

    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let content = full.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        match (tokens[0], n) {
            ("nodes", None) => {
                if tokens.len() != 2 {
                    return Err(syntax(line, "expected `nodes N`"));
                }
                let count = tokens[1]
                    .parse::<usize>()
                    .map_err(|_| syntax(line, format!("invalid node count `{}`", tokens[1])))?;
                n = Some(count);
            }
            ("nodes", Some(_)) => return Err(syntax(line, "duplicate `nodes` line")),
            (_, None) => return Err(syntax(line, "first line must be `nodes N`")),
            ("edge", Some(_)) => {
                if tokens.len() != 4 {
                    return Err(syntax(line, "expected `edge I J W`"));
                }
                let w = tokens[3]
                    .parse::<f64>()
                    .map_err(|_| syntax(line, format!("invalid weight `{}`", tokens[3])))?;
                graftci::tree::check_weight(w).map_err(|source| ParseError::ModelAt { line, source })?;
                raw.push((line, tokens[1].to_string(), tokens[2].to_string(), w));
            }
            (other, Some(_)) => return Err(syntax(line, format!("unknown directive `{other}`"))),
        }
    }

    let n = n.ok_or_else(|| syntax(text.lines().count().max(1), "missing `nodes N` line"))?;
    let labels = assign_labels(n, &raw)?;
    let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(k, l)| (l.as_str(), k + 1)).collect();

    let mut edges = Vec::with_capacity(raw.len());
    let mut seen = HashSet::new();
    for (line, a, b, w) in &raw {
        let (i, j) = (index[a.as_str()], index[b.as_str()]);
        if i == j {
            return Err(ParseError::ModelAt {
                line: *line,
                source: graftci::Error::SelfLoop(i),
            });
        }
        if !seen.insert((i.min(j), i.max(j))) {
            return Err(ParseError::ModelAt {
                line: *line,
                source: graftci::Error::DuplicateEdge(i.min(j), i.max(j)),
            });
        }
        edges.push((i, j, *w));
    }
    let tree = GaussianTree::new(n, &edges).map_err(ParseError::Model)?;
    Ok(TreeFile { tree, labels })
}

fn assign_labels(n: usize, raw: &[(usize, String, String, f64)]) -> Result<Vec<String>, ParseError> {
    let numeric = raw.iter().all(|(_, a, b, _)| {
        [a, b]
            .iter()
            .all(|s| s.parse::<usize>().map(|v| (1..=n).contains(&v)).unwrap_or(false))
    });
    if numeric {
        return Ok((1..=n).map(|k| k.to_string()).collect());
    }
    let mut labels: Vec<String> = Vec::with_capacity(n);
    for (line, a, b, _) in raw {
        for s in [a, b] {
            if !labels.contains(s) {
                if labels.len() == n {
                    return Err(syntax(*line, format!("more than {n} distinct node labels")));
                }
                labels.push(s.clone());
            }
        }
    }
    // labels never mentioned by an edge; the tree check reports the disconnection
    let mut k = 1;
    while labels.len() < n {
        let candidate = format!("_{k}");
        if !labels.contains(&candidate) {
            labels.push(candidate);
        }
        k += 1;
    }
    Ok(labels)
}

/// Decimal with 17 significant digits, enough to round-trip any `f64`.
pub fn format_weight(w: f64) -> String {
    if w == 0.0 {
        return "0".into();
    }
    let exp = w.abs().log10().floor() as i32;
    let decimals = (16 - exp).max(0) as usize;
    let s = format!("{w:.decimals$}");
    // log10 can land one decade off near powers of ten
    if s.parse::<f64>().ok() == Some(w) {
        s
    } else {
        format!("{w:.prec$}", prec = decimals + 1)
    }
}

pub fn serialize_tree(tree: &GaussianTree) -> String {
    let labels: Vec<String> = (1..=tree.n()).map(|k| k.to_string()).collect();
    serialize_with_labels(tree, &labels)
}

/// Edges sorted by `(min(i, j), max(i, j))` of the node ids, written with the given labels.
pub fn serialize_with_labels(tree: &GaussianTree, labels: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "nodes {}", tree.n());
    for e in tree.edges() {
        let _ = writeln!(out, "edge {} {} {}", labels[e.a - 1], labels[e.b - 1], format_weight(e.weight));
    }
    out
}

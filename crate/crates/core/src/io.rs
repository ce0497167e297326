//! Text and JSON forms of a tree.
//!
//! Edge-list text: one `u v` pair per line, whitespace separated, `#` starts a
//! comment. JSON: `{"n": 4, "edges": [[0, 1], [1, 2], [1, 3]]}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::BoundaryTree;

#[derive(Debug, Serialize, Deserialize)]
struct TreeJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

pub fn parse_edge_list(text: &str) -> Result<BoundaryTree> {
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse(format!(
                "line {}: expected two vertex ids, found {:?}",
                lineno + 1,
                line
            )));
        }
        let id = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("line {}: bad vertex id {s:?}", lineno + 1)))
        };
        edges.push((id(fields[0])?, id(fields[1])?));
    }
    BoundaryTree::from_edges(&edges)
}

pub fn parse_json(text: &str) -> Result<BoundaryTree> {
    let doc: TreeJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let edges: Vec<_> = doc.edges.iter().map(|e| (e[0], e[1])).collect();
    BoundaryTree::with_vertex_count(doc.n, &edges)
}

/// Parses either format, choosing JSON when the first non-blank character is `{`.
pub fn parse_tree(text: &str) -> Result<BoundaryTree> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_edge_list(text)
    }
}

pub fn to_edge_list(tree: &BoundaryTree) -> String {
    let mut out = format!(
        "# n={} boundary={} D={}\n",
        tree.vertex_count(),
        tree.boundary_count(),
        tree.max_degree()
    );
    for &(u, v) in tree.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

pub fn to_json(tree: &BoundaryTree) -> serde_json::Value {
    serde_json::to_value(TreeJson {
        n: tree.vertex_count(),
        edges: tree.edges().iter().map(|&(u, v)| [u, v]).collect(),
    })
    .expect("tree serializes")
}

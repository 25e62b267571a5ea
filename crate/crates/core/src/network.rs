use std::fmt::Write as _;

use crate::alignment::SiteColumn;
use crate::error::{Error, Result};
use crate::numfmt::fmt_sig;
use crate::site_ctmc::{path_matrix, RateMatrix};

/// Saturated per-site species network: the complete digraph on the species
/// set including self-loops, each edge carrying its letter path and rate.
#[derive(Debug, Clone)]
pub struct NetworkGraph {
    nodes: Vec<String>,
    edges: Vec<NetworkEdge>,
}

#[derive(Debug, Clone)]
pub struct NetworkEdge {
    pub from: usize,
    pub to: usize,
    pub path_label: String,
    pub rate: f64,
}

impl NetworkGraph {
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[NetworkEdge] {
        &self.edges
    }
}

/// Builds the site network: edge (i,j) is labelled v_i v_j and weighted by
/// the rate matrix entry; self-loops carry the diagonal magnitude.
pub fn site_network(col: &SiteColumn, q: &RateMatrix, taxa: &[String]) -> Result<NetworkGraph> {
    let n = col.values.len();
    if q.n() != n || taxa.len() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: if q.n() != n { q.n() } else { taxa.len() },
        });
    }
    let paths = path_matrix(col)?;
    let mut edges = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let rate = if i == j {
                q.entry(i, i).abs()
            } else {
                q.entry(i, j)
            };
            edges.push(NetworkEdge {
                from: i,
                to: j,
                path_label: paths.label(i, j),
                rate,
            });
        }
    }
    Ok(NetworkGraph {
        nodes: taxa.to_vec(),
        edges,
    })
}

fn is_dot_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {
            chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        }
        _ => false,
    }
}

fn dot_id(s: &str) -> String {
    if is_dot_identifier(s) {
        s.to_string()
    } else {
        format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

fn dot_string(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT digraph text: node statements in taxa order, then edges ordered by
/// source and target index.
pub fn write_dot(g: &NetworkGraph) -> String {
    let mut out = String::from("digraph site_network {\n");
    for node in g.nodes() {
        let _ = writeln!(out, "  {};", dot_id(node));
    }
    for e in g.edges() {
        let _ = writeln!(
            out,
            "  {} -> {} [label={}, weight={}];",
            dot_id(&g.nodes[e.from]),
            dot_id(&g.nodes[e.to]),
            dot_string(&e.path_label),
            fmt_sig(e.rate, 6)
        );
    }
    out.push_str("}\n");
    out
}

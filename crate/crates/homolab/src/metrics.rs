//! Homophily metrics: global ratio, per-node local ratios, and the empirical
//! class compatibility matrix.
//!
//! The global ratio is the fraction of edges joining same-class endpoints;
//! each undirected edge is counted once. The local ratio of a node is the
//! fraction of its incident edges joining it to a same-class neighbor, and is
//! undefined (an error) for isolated nodes. The two are tied by an exact
//! identity: the global ratio equals the degree-weighted mean of the defined
//! local ratios.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Empirical class-to-class incidence fractions.
///
/// Entry `(u, v)` is the fraction of directed edge endpoints leaving class
/// `u` that land in class `v`, with each undirected edge counted once in
/// each direction. Rows for classes with no incident edges are all-zero and
/// reported as unpopulated rather than failing.
#[derive(Debug, Clone, Serialize)]
pub struct CompatibilityMatrix {
    pub values: Vec<Vec<f64>>,
    /// `populated[k]` is true when class `k` has at least one incident edge.
    pub populated: Vec<bool>,
}

/// All homophily metrics of a graph in one bundle.
#[derive(Debug, Clone, Serialize)]
pub struct HomophilySummary {
    pub global_ratio: f64,
    /// `None` for isolated nodes, where the ratio is undefined.
    pub per_node_ratio: Vec<Option<f64>>,
    pub compatibility: CompatibilityMatrix,
}

/// Fraction of edges whose endpoints share a label.
pub fn global_homophily(graph: &Graph) -> Result<f64> {
    if graph.edge_count() == 0 {
        return Err(Error::NoEdges);
    }
    let same = graph
        .edges()
        .iter()
        .filter(|&&(a, b)| graph.label(a) == graph.label(b))
        .count();
    Ok(same as f64 / graph.edge_count() as f64)
}

/// Fraction of `node`'s incident edges joining it to a same-class neighbor.
pub fn local_homophily(graph: &Graph, node: usize) -> Result<f64> {
    let neighbors = graph.neighbors(node);
    if neighbors.is_empty() {
        return Err(Error::IsolatedNode(node));
    }
    let same = neighbors
        .iter()
        .filter(|&&v| graph.label(v) == graph.label(node))
        .count();
    Ok(same as f64 / neighbors.len() as f64)
}

/// Local homophily for every node; `None` where undefined.
pub fn local_homophily_all(graph: &Graph) -> Vec<Option<f64>> {
    (0..graph.node_count())
        .map(|i| local_homophily(graph, i).ok())
        .collect()
}

/// Empirical class compatibility matrix.
pub fn compatibility_matrix(graph: &Graph) -> Result<CompatibilityMatrix> {
    if graph.edge_count() == 0 {
        return Err(Error::NoEdges);
    }
    let c = graph.class_count();
    let mut counts = vec![vec![0usize; c]; c];
    for &(a, b) in graph.edges() {
        let (ya, yb) = (graph.label(a), graph.label(b));
        counts[ya][yb] += 1;
        counts[yb][ya] += 1;
    }
    let mut values = vec![vec![0.0; c]; c];
    let mut populated = vec![false; c];
    for k in 0..c {
        let total: usize = counts[k].iter().sum();
        if total > 0 {
            populated[k] = true;
            for (out, &cnt) in values[k].iter_mut().zip(counts[k].iter()) {
                *out = cnt as f64 / total as f64;
            }
        }
    }
    Ok(CompatibilityMatrix { values, populated })
}

/// Bundle of all metrics for a graph.
pub fn summarize(graph: &Graph) -> Result<HomophilySummary> {
    Ok(HomophilySummary {
        global_ratio: global_homophily(graph)?,
        per_node_ratio: local_homophily_all(graph),
        compatibility: compatibility_matrix(graph)?,
    })
}

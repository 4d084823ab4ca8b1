//! Simple undirected labeled graphs with node features.
//!
//! A [`Graph`] is immutable after construction: every metric and model in
//! this crate reads it without coordination. The JSON interchange form is
//! canonical (edges stored smaller-index first and sorted), so two
//! structurally identical graphs serialize to identical bytes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected simple graph with per-node class labels and feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    class_count: usize,
    labels: Vec<usize>,
    features: Vec<Vec<f64>>,
    /// Canonical edge list: each pair `(lo, hi)` with `lo < hi`, sorted
    /// lexicographically, no duplicates.
    edges: Vec<(usize, usize)>,
    /// Adjacency lists derived from `edges` at construction time.
    neighbors: Vec<Vec<usize>>,
}

/// Wire format for the canonical JSON interchange document.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    n: usize,
    c: usize,
    labels: Vec<usize>,
    features: Vec<Vec<f64>>,
    edges: Vec<[usize; 2]>,
}

impl Graph {
    /// Build a graph, normalizing and validating the edge list.
    ///
    /// Input edges may be given in either endpoint order; they are stored
    /// canonically. Self-loops, duplicate pairs, out-of-range endpoints and
    /// label/feature inconsistencies are rejected.
    pub fn new(
        class_count: usize,
        labels: Vec<usize>,
        features: Vec<Vec<f64>>,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let n = labels.len();
        if features.len() != n {
            return Err(Error::Validation(format!(
                "features: expected {n} rows, got {}",
                features.len()
            )));
        }
        if class_count == 0 {
            return Err(Error::Validation("c: must be at least 1".into()));
        }
        if let Some(dim) = features.first().map(Vec::len) {
            if let Some(bad) = features.iter().position(|f| f.len() != dim) {
                return Err(Error::Validation(format!(
                    "features: row {bad} has dimension {}, expected {dim}",
                    features[bad].len()
                )));
            }
        }
        if let Some(bad) = labels.iter().position(|&l| l >= class_count) {
            return Err(Error::Validation(format!(
                "labels: node {bad} has label {} >= c = {class_count}",
                labels[bad]
            )));
        }

        let mut canonical: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Validation(format!(
                    "edges: endpoint out of range in ({a}, {b}), n = {n}"
                )));
            }
            if a == b {
                return Err(Error::Validation(format!("edges: self-loop at node {a}")));
            }
            canonical.push((a.min(b), a.max(b)));
        }
        canonical.sort_unstable();
        if let Some(w) = canonical.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::Validation(format!(
                "edges: duplicate pair ({}, {})",
                canonical[w].0, canonical[w].1
            )));
        }

        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in &canonical {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }

        Ok(Graph {
            class_count,
            labels,
            features,
            edges: canonical,
            neighbors,
        })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> usize {
        self.labels[node]
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn feature(&self, node: usize) -> &[f64] {
        &self.features[node]
    }

    /// Canonical edge list: `(lo, hi)` pairs in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    /// Number of incident edges.
    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }

    /// Breadth-first reachability from node 0.
    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        seen[0] = true;
        let mut visited = 1usize;
        while let Some(u) = queue.pop_front() {
            for &v in &self.neighbors[u] {
                if !seen[v] {
                    seen[v] = true;
                    visited += 1;
                    queue.push_back(v);
                }
            }
        }
        visited == n
    }

    /// Serialize to the canonical JSON document. Identical graphs produce
    /// byte-identical output.
    pub fn to_canonical_json(&self) -> String {
        let doc = GraphDoc {
            n: self.node_count(),
            c: self.class_count,
            labels: self.labels.clone(),
            features: self.features.clone(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        };
        serde_json::to_string(&doc).expect("graph serialization cannot fail")
    }

    /// Parse and validate the canonical JSON document. Edge pairs are
    /// accepted in either order and normalized.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphDoc = serde_json::from_str(text)?;
        if doc.labels.len() != doc.n {
            return Err(Error::Validation(format!(
                "labels: expected {} entries, got {}",
                doc.n,
                doc.labels.len()
            )));
        }
        Graph::new(
            doc.c,
            doc.labels,
            doc.features,
            doc.edges.into_iter().map(|[a, b]| (a, b)).collect(),
        )
    }
}

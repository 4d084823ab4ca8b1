//! Local-homophily-controlled preferential-attachment graph generator.
//!
//! Nodes arrive one at a time. Each arrival samples a class label, selects
//! `m` distinct existing targets, wires the edges, and samples its feature
//! vector. Target selection follows one of two routes:
//!
//! * with probability `1 - rho`, preferential attachment: targets are drawn
//!   sequentially without replacement with weight
//!   `compat[label(u)][label(v)] * max(degree(v), 1)`;
//! * with probability `rho`, a uniformity route: a fresh ratio `h'` is drawn
//!   from U(0, 1), up to `round(m * h')` same-class targets are taken
//!   (preferring nodes whose local homophily has drifted heterophilous), and
//!   the remaining slots go to different-class targets (preferring
//!   homophilous drifters).
//!
//! `drift[v]` counts homophilous minus heterophilous attachments received
//! after `v`'s own insertion; a node enters a correction pool once its drift
//! magnitude exceeds the threshold `delta`. Seed-phase edges do not count.
//!
//! Reproducibility: one ChaCha8 stream per build, fully determined by the
//! seed. Per-node draw order is label, branch coin, `h'` (uniform route
//! only), one uniform draw per accepted target, then the feature vector.
//! When `m >= 3` the seed phase closes with one extra draw for the
//! seed-completing edge.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// All knobs of a generator run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    /// Total node count.
    pub n: usize,
    /// Edges added per arriving node.
    pub m: usize,
    /// Class distribution; length is the class count.
    pub class_probs: Vec<f64>,
    /// Target global homophily (diagonal of the compatibility matrix).
    pub h: f64,
    /// Probability that an arrival draws its local homophily from U(0, 1)
    /// instead of following the compatibility matrix.
    pub rho: f64,
    /// Feature signal strength.
    pub epsilon: f64,
    /// Drift threshold for the correction pools.
    pub delta: u32,
    /// RNG seed; the build is a pure function of the config.
    pub seed: u64,
    /// Use the same mean `epsilon * label` in every feature dimension
    /// instead of `epsilon * onehot(label)`.
    #[serde(default)]
    pub literal_feature_means: bool,
}

impl GeneratorConfig {
    pub fn class_count(&self) -> usize {
        self.class_probs.len()
    }

    /// Nodes consumed by the seed phase. A single node cannot carry a simple
    /// edge, so `m = 1` seeds with two nodes.
    pub fn seed_node_count(&self) -> usize {
        self.m.max(2)
    }

    /// Edges created by the seed phase: `m` for `m >= 3`; two nodes can hold
    /// only one edge, so smaller `m` seeds with a single edge.
    pub fn seed_edge_count(&self) -> usize {
        if self.m >= 3 {
            self.m
        } else {
            1
        }
    }

    /// Exact edge count of a finished build.
    pub fn expected_edge_count(&self) -> usize {
        self.seed_edge_count() + (self.n - self.seed_node_count()) * self.m
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::Validation("m: must be at least 1".into()));
        }
        if self.n < self.seed_node_count() {
            return Err(Error::Validation(format!(
                "n: must be at least {} (seed graph size for m = {})",
                self.seed_node_count(),
                self.m
            )));
        }
        if self.class_probs.len() < 2 {
            return Err(Error::Validation(
                "class_probs: need at least 2 classes".into(),
            ));
        }
        if self.class_probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::Validation(
                "class_probs: entries must lie in [0, 1]".into(),
            ));
        }
        let total: f64 = self.class_probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "class_probs: must sum to 1, got {total}"
            )));
        }
        for (name, value) in [("h", self.h), ("rho", self.rho), ("epsilon", self.epsilon)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Validation(format!(
                    "{name}: must lie in [0, 1], got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// Class compatibility matrix with diagonal `h`.
///
/// The off-diagonal mass `1 - h` is split across the other `c - 1` classes,
/// so every row sums to 1 and the attachment odds between same- and
/// different-class targets are `h : (1 - h)`. That is what keeps the
/// realized edge homophily of a `rho = 0` build at the requested level.
pub fn build_compatibility(h: f64, c: usize) -> Result<Vec<Vec<f64>>> {
    if c < 2 {
        return Err(Error::Validation(
            "class count: need at least 2 classes".into(),
        ));
    }
    if !(0.0..=1.0).contains(&h) {
        return Err(Error::Validation(format!(
            "h: must lie in [0, 1], got {h}"
        )));
    }
    let off = (1.0 - h) / (c as f64 - 1.0);
    let mut matrix = vec![vec![off; c]; c];
    for (k, row) in matrix.iter_mut().enumerate() {
        row[k] = h;
    }
    Ok(matrix)
}

/// Feature vector of dimension `c` for a node of class `label`: independent
/// unit-variance Gaussians whose mean encodes the label with strength
/// `epsilon`.
pub fn sample_features(
    label: usize,
    epsilon: f64,
    c: usize,
    literal_means: bool,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    (0..c)
        .map(|j| {
            let mean = if literal_means {
                epsilon * label as f64
            } else if j == label {
                epsilon
            } else {
                0.0
            };
            let z: f64 = rng.sample(StandardNormal);
            mean + z
        })
        .collect()
}

fn sample_label(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let t: f64 = rng.random();
    let mut acc = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        acc += p;
        if t < acc {
            return k;
        }
    }
    probs.len() - 1
}

/// Result of one target-selection round.
#[derive(Debug)]
pub struct NeighborSelection {
    /// Distinct existing node indices, in draw order.
    pub nodes: Vec<usize>,
    /// Bucket-exhaustion or zero-mass fallbacks taken during selection.
    pub fallback_events: usize,
}

enum Weighting<'a> {
    Uniform,
    Degree,
    Compat { compat: &'a [Vec<f64>], label: usize },
}

/// Mutable graph-under-construction: labels, adjacency, degrees and drift
/// counters. Features live with the driver, not here.
#[derive(Debug, Clone, Default)]
pub struct GrowthState {
    labels: Vec<usize>,
    degrees: Vec<usize>,
    drift: Vec<i64>,
    neighbors: Vec<Vec<usize>>,
    /// Edges in insertion order, `(from, to)` with `from` the later node.
    edges: Vec<(usize, usize)>,
    edge_set: HashSet<(usize, usize)>,
}

impl GrowthState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn drift(&self) -> &[i64] {
        &self.drift
    }

    pub fn degree(&self, node: usize) -> usize {
        self.degrees[node]
    }

    /// Edges in insertion order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.edge_set.contains(&(a.min(b), a.max(b)))
    }

    pub fn add_node(&mut self, label: usize) -> usize {
        self.labels.push(label);
        self.degrees.push(0);
        self.drift.push(0);
        self.neighbors.push(Vec::new());
        self.labels.len() - 1
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        debug_assert!(from != to, "self-loop");
        let inserted = self.edge_set.insert((from.min(to), from.max(to)));
        debug_assert!(inserted, "duplicate edge ({from}, {to})");
        self.edges.push((from, to));
        self.neighbors[from].push(to);
        self.neighbors[to].push(from);
        self.degrees[from] += 1;
        self.degrees[to] += 1;
    }

    pub fn bump_drift(&mut self, target: usize, homophilous: bool) {
        self.drift[target] += if homophilous { 1 } else { -1 };
    }

    pub fn reset_drift(&mut self, node: usize) {
        self.drift[node] = 0;
    }

    pub fn reset_all_drift(&mut self) {
        self.drift.iter_mut().for_each(|d| *d = 0);
    }

    fn weight_of(&self, v: usize, weighting: &Weighting) -> f64 {
        // Zero-degree nodes (possible only mid-seed) still need attachment
        // mass, so degree weighting floors at 1.
        let deg = self.degrees[v].max(1) as f64;
        match weighting {
            Weighting::Uniform => 1.0,
            Weighting::Degree => deg,
            Weighting::Compat { compat, label } => compat[*label][self.labels[v]] * deg,
        }
    }

    /// Sequential weighted draws without replacement. Stops early when the
    /// eligible mass runs out; zero-weight candidates are never selected.
    fn draw(
        &self,
        candidates: &[usize],
        weighting: &Weighting,
        want: usize,
        taken: &mut [bool],
        out: &mut Vec<usize>,
        rng: &mut ChaCha8Rng,
    ) {
        for _ in 0..want {
            let mut total = 0.0;
            for &v in candidates {
                if !taken[v] {
                    total += self.weight_of(v, weighting);
                }
            }
            if total <= 0.0 {
                return;
            }
            let threshold = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for &v in candidates {
                if taken[v] {
                    continue;
                }
                let w = self.weight_of(v, weighting);
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                chosen = Some(v);
                if acc >= threshold {
                    break;
                }
            }
            let v = chosen.expect("positive total mass implies an eligible candidate");
            taken[v] = true;
            out.push(v);
        }
    }

    /// Select `count` distinct existing targets for an arriving node of class
    /// `arriving_label`. The arriving node itself must not yet be part of the
    /// state.
    pub fn get_neighbors(
        &self,
        arriving_label: usize,
        count: usize,
        rho: f64,
        compat: &[Vec<f64>],
        delta: u32,
        rng: &mut ChaCha8Rng,
    ) -> NeighborSelection {
        let existing = self.node_count();
        assert!(
            existing >= count,
            "need at least {count} existing nodes, have {existing}"
        );
        let delta = i64::from(delta);
        let mut taken = vec![false; existing];
        let mut nodes = Vec::with_capacity(count);
        let mut fallbacks = 0usize;

        let coin: f64 = rng.random();
        if coin <= rho {
            let h_prime: f64 = rng.random();
            // round half to even, so slot counts are platform-stable
            let same_slots =
                ((count as f64 * h_prime).round_ties_even() as usize).min(count);

            // Same-class slots: heterophilous drifters first (uniform), then
            // the rest of the class, degree-weighted.
            let pool: Vec<usize> = (0..existing)
                .filter(|&v| self.labels[v] == arriving_label && self.drift[v] < -delta)
                .collect();
            self.draw(&pool, &Weighting::Uniform, same_slots, &mut taken, &mut nodes, rng);
            if nodes.len() < same_slots {
                let rest: Vec<usize> = (0..existing)
                    .filter(|&v| self.labels[v] == arriving_label && self.drift[v] >= -delta)
                    .collect();
                self.draw(
                    &rest,
                    &Weighting::Degree,
                    same_slots - nodes.len(),
                    &mut taken,
                    &mut nodes,
                    rng,
                );
            }
            if nodes.len() < same_slots {
                fallbacks += 1;
                log::warn!(
                    "same-class bucket exhausted: wanted {same_slots} targets, found {}",
                    nodes.len()
                );
            }

            // Different-class slots fill everything left.
            let diff_slots = count - nodes.len();
            let pool: Vec<usize> = (0..existing)
                .filter(|&v| self.labels[v] != arriving_label && self.drift[v] > delta)
                .collect();
            self.draw(&pool, &Weighting::Uniform, diff_slots, &mut taken, &mut nodes, rng);
            if nodes.len() < count {
                let rest: Vec<usize> = (0..existing)
                    .filter(|&v| self.labels[v] != arriving_label && self.drift[v] <= delta)
                    .collect();
                self.draw(
                    &rest,
                    &Weighting::Degree,
                    count - nodes.len(),
                    &mut taken,
                    &mut nodes,
                    rng,
                );
            }
            if nodes.len() < count {
                // Both class buckets exhausted; take whatever remains.
                fallbacks += 1;
                log::warn!(
                    "different-class bucket exhausted at {} of {count} targets",
                    nodes.len()
                );
                let rest: Vec<usize> = (0..existing).filter(|&v| !taken[v]).collect();
                self.draw(
                    &rest,
                    &Weighting::Degree,
                    count - nodes.len(),
                    &mut taken,
                    &mut nodes,
                    rng,
                );
            }
        } else {
            let all: Vec<usize> = (0..existing).collect();
            let weighting = Weighting::Compat {
                compat,
                label: arriving_label,
            };
            self.draw(&all, &weighting, count, &mut taken, &mut nodes, rng);
            if nodes.len() < count {
                // Every remaining candidate has zero compatibility mass.
                fallbacks += 1;
                log::warn!(
                    "zero compatibility mass; degree-weighted fallback for {} targets",
                    count - nodes.len()
                );
                self.draw(
                    &all,
                    &Weighting::Degree,
                    count - nodes.len(),
                    &mut taken,
                    &mut nodes,
                    rng,
                );
            }
        }
        debug_assert_eq!(nodes.len(), count);
        NeighborSelection {
            nodes,
            fallback_events: fallbacks,
        }
    }
}

/// Seed graph plus the features drawn alongside it.
#[derive(Debug)]
pub struct SeedBuild {
    pub state: GrowthState,
    pub features: Vec<Vec<f64>>,
    pub fallback_events: usize,
}

/// Build the connected seed graph.
///
/// The first node is added label-only; each of the following seed nodes
/// attaches exactly one edge through the regular target selection. For
/// `m >= 3` one extra compatibility-sampled edge then closes the seed at
/// `m` nodes and `m` edges; for `m <= 2` the seed is two nodes and one edge.
/// Drift counters are zeroed afterwards, so seed edges never count as drift.
pub fn initialize_seed_graph(
    config: &GeneratorConfig,
    rng: &mut ChaCha8Rng,
) -> Result<SeedBuild> {
    config.validate()?;
    let c = config.class_count();
    let compat = build_compatibility(config.h, c)?;
    let s = config.seed_node_count();

    let mut state = GrowthState::new();
    let mut features = Vec::with_capacity(s);
    let mut fallbacks = 0usize;

    let label0 = sample_label(&config.class_probs, rng);
    state.add_node(label0);
    features.push(sample_features(
        label0,
        config.epsilon,
        c,
        config.literal_feature_means,
        rng,
    ));

    for _ in 1..s {
        let label = sample_label(&config.class_probs, rng);
        let selection = state.get_neighbors(label, 1, config.rho, &compat, config.delta, rng);
        fallbacks += selection.fallback_events;
        let node = state.add_node(label);
        state.add_edge(node, selection.nodes[0]);
        features.push(sample_features(
            label,
            config.epsilon,
            c,
            config.literal_feature_means,
            rng,
        ));
    }

    if config.m >= 3 {
        close_seed(&mut state, &compat, &mut fallbacks, rng);
    }
    state.reset_all_drift();

    Ok(SeedBuild {
        state,
        features,
        fallback_events: fallbacks,
    })
}

/// Add the edge that brings the seed from `m - 1` to `m` edges: a
/// compatibility-sampled partner for the first node, or, when the first node
/// is already adjacent to every other seed node, the best remaining pair.
fn close_seed(
    state: &mut GrowthState,
    compat: &[Vec<f64>],
    fallbacks: &mut usize,
    rng: &mut ChaCha8Rng,
) {
    let s = state.node_count();
    let candidates: Vec<usize> = (1..s).filter(|&v| !state.is_adjacent(0, v)).collect();
    if candidates.is_empty() {
        let mut pairs = Vec::new();
        for i in 1..s {
            for j in (i + 1)..s {
                if !state.is_adjacent(i, j) {
                    pairs.push((i, j));
                }
            }
        }
        debug_assert!(!pairs.is_empty(), "seed with m - 1 edges cannot be complete");
        let weights: Vec<f64> = pairs
            .iter()
            .map(|&(i, j)| compat[state.labels()[i]][state.labels()[j]])
            .collect();
        let idx = weighted_index(&weights, rng).unwrap_or_else(|| {
            *fallbacks += 1;
            (rng.random::<f64>() * pairs.len() as f64) as usize % pairs.len()
        });
        let (i, j) = pairs[idx];
        state.add_edge(i, j);
    } else {
        let weights: Vec<f64> = candidates
            .iter()
            .map(|&v| compat[state.labels()[0]][state.labels()[v]] * state.degree(v).max(1) as f64)
            .collect();
        let v = match weighted_index(&weights, rng) {
            Some(idx) => candidates[idx],
            None => {
                *fallbacks += 1;
                log::warn!("zero compatibility mass while closing the seed graph");
                let degw: Vec<f64> = candidates
                    .iter()
                    .map(|&v| state.degree(v).max(1) as f64)
                    .collect();
                candidates[weighted_index(&degw, rng).expect("degree weights are positive")]
            }
        };
        state.add_edge(0, v);
    }
}

/// One weighted draw; `None` when the total mass is not positive.
fn weighted_index(weights: &[f64], rng: &mut ChaCha8Rng) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let threshold = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut chosen = None;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        chosen = Some(i);
        if acc >= threshold {
            break;
        }
    }
    chosen
}

/// A finished build: the immutable graph plus the bookkeeping needed to
/// audit it.
#[derive(Debug)]
pub struct GenerationOutput {
    pub graph: Graph,
    /// Final drift counter per node.
    pub drift: Vec<i64>,
    /// Every edge in insertion order, `(from, to)` with `from` the node that
    /// initiated the attachment.
    pub edge_log: Vec<(usize, usize)>,
    /// Number of leading `edge_log` entries that belong to the seed phase.
    pub seed_edge_count: usize,
    /// Count of sampling fallbacks taken (exhausted class buckets or zero
    /// compatibility mass). Never fatal.
    pub fallback_events: usize,
}

/// Run the full generator. The output is a pure function of the config.
pub fn generate(config: &GeneratorConfig) -> Result<GenerationOutput> {
    config.validate()?;
    let c = config.class_count();
    let compat = build_compatibility(config.h, c)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let seed = initialize_seed_graph(config, &mut rng)?;
    let mut state = seed.state;
    let mut features = seed.features;
    let mut fallback_events = seed.fallback_events;
    let seed_edge_count = state.edges().len();
    debug_assert_eq!(seed_edge_count, config.seed_edge_count());

    for _ in state.node_count()..config.n {
        let label = sample_label(&config.class_probs, &mut rng);
        let selection =
            state.get_neighbors(label, config.m, config.rho, &compat, config.delta, &mut rng);
        fallback_events += selection.fallback_events;
        let u = state.add_node(label);
        for &v in &selection.nodes {
            state.add_edge(u, v);
            let homophilous = state.labels()[v] == label;
            state.bump_drift(v, homophilous);
        }
        state.reset_drift(u);
        features.push(sample_features(
            label,
            config.epsilon,
            c,
            config.literal_feature_means,
            &mut rng,
        ));
    }

    let edge_log = state.edges().to_vec();
    let drift = state.drift().to_vec();
    let graph = Graph::new(c, state.labels().to_vec(), features, edge_log.clone())?;
    debug_assert_eq!(graph.edge_count(), config.expected_edge_count());

    Ok(GenerationOutput {
        graph,
        drift,
        edge_log,
        seed_edge_count,
        fallback_events,
    })
}

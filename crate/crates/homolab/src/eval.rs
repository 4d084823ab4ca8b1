//! Splits, least-squares model fitting, local-homophily binning, and
//! multi-seed sweeps.
//!
//! Models here are the empirical counterparts of the closed-form ones: the
//! same design rows, but fitted by ridge-damped least squares over all
//! training rows of a generated graph instead of the two-row reduced system.
//! The baseline ignores the graph entirely and regresses on raw features,
//! which is what makes per-bin F1 differences attributable to structure.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gen::{self, GeneratorConfig};
use crate::graph::Graph;
use crate::linalg;
use crate::metrics;

/// Ridge damping added to the normal equations; rescues duplicate-row
/// designs without visibly biasing the solution.
const RIDGE_LAMBDA: f64 = 1e-8;

/// Bins holding fewer test nodes than this are flagged and excluded from
/// trend statistics.
pub const MIN_BIN_OCCUPANCY: usize = 3;

/// Default local-homophily bin edges.
pub const DEFAULT_BIN_EDGES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Default train/validation/test ratios.
pub const DEFAULT_SPLIT_RATIOS: [f64; 3] = [0.5, 0.25, 0.25];

/// Model families fitted on generated graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalModel {
    /// Ego plus summed neighbor features.
    Homophilous,
    /// Ego features concatenated with summed neighbor features.
    Concat,
    /// Features only; graph-agnostic.
    Baseline,
}

impl EvalModel {
    pub fn tag(&self) -> &'static str {
        match self {
            EvalModel::Homophilous => "homophilous",
            EvalModel::Concat => "concat",
            EvalModel::Baseline => "baseline",
        }
    }
}

/// Disjoint train/validation/test node sets.
#[derive(Debug, Clone, Serialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    pub ratios: [f64; 3],
    pub seed: u64,
}

/// Uniform random partition of the nodes, reproducible from the seed.
/// Set sizes land within one node of `ratio * n`.
pub fn split_nodes(graph: &Graph, ratios: [f64; 3], seed: u64) -> Result<Split> {
    let n = graph.node_count();
    if n < 4 {
        return Err(Error::Validation(format!(
            "split: need at least 4 nodes, got {n}"
        )));
    }
    if ratios.iter().any(|&r| !(0.0..=1.0).contains(&r)) {
        return Err(Error::Validation("ratios: must lie in [0, 1]".into()));
    }
    let total: f64 = ratios.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!(
            "ratios: must sum to 1, got {total}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let n_train = (ratios[0] * n as f64).round() as usize;
    let n_val = ((ratios[1] * n as f64).round() as usize).min(n - n_train);
    let train = order[..n_train].to_vec();
    let val = order[n_train..n_train + n_val].to_vec();
    let test = order[n_train + n_val..].to_vec();
    Ok(Split {
        train,
        val,
        test,
        ratios,
        seed,
    })
}

/// Design row of one node under a model family.
pub fn design_row(graph: &Graph, kind: EvalModel, node: usize) -> Vec<f64> {
    let x = graph.feature(node);
    let f = x.len();
    let neighbor_sum = || {
        let mut agg = vec![0.0; f];
        for &v in graph.neighbors(node) {
            for (a, &xv) in agg.iter_mut().zip(graph.feature(v)) {
                *a += xv;
            }
        }
        agg
    };
    match kind {
        EvalModel::Baseline => x.to_vec(),
        EvalModel::Homophilous => {
            let mut row = neighbor_sum();
            for (r, &xv) in row.iter_mut().zip(x) {
                *r += xv;
            }
            row
        }
        EvalModel::Concat => {
            let mut row = x.to_vec();
            row.extend(neighbor_sum());
            row
        }
    }
}

fn fit_design(rows: &[Vec<f64>], labels: &[usize], class_count: usize) -> Result<Vec<Vec<f64>>> {
    let k = rows[0].len();
    // Normal equations with ridge damping: (R^T R + lambda I) W = R^T Y.
    let mut gram = vec![vec![0.0; k]; k];
    let mut rhs = vec![vec![0.0; class_count]; k];
    for (row, &label) in rows.iter().zip(labels) {
        for i in 0..k {
            for j in 0..k {
                gram[i][j] += row[i] * row[j];
            }
            rhs[i][label] += row[i];
        }
    }
    for (i, row) in gram.iter_mut().enumerate() {
        row[i] += RIDGE_LAMBDA;
    }
    linalg::solve(&gram, &rhs)
        .map_err(|_| Error::Degenerate("design matrix is rank deficient beyond ridge rescue".into()))
}

/// Least-squares weights for a graph-aware model family over the training
/// nodes. Returns a `k x c` matrix mapping design rows to class scores.
pub fn fit_linear_gnn(graph: &Graph, train: &[usize], kind: EvalModel) -> Result<Vec<Vec<f64>>> {
    if train.is_empty() {
        return Err(Error::Validation("train set: must be non-empty".into()));
    }
    let rows: Vec<Vec<f64>> = train.iter().map(|&i| design_row(graph, kind, i)).collect();
    let labels: Vec<usize> = train.iter().map(|&i| graph.label(i)).collect();
    fit_design(&rows, &labels, graph.class_count())
}

/// Features-only least-squares classifier; ignores the edge set entirely.
pub fn fit_baseline(graph: &Graph, train: &[usize]) -> Result<Vec<Vec<f64>>> {
    fit_linear_gnn(graph, train, EvalModel::Baseline)
}

/// Predicted class of one node; argmax with ties to the lowest index.
pub fn predict(graph: &Graph, weights: &[Vec<f64>], kind: EvalModel, node: usize) -> usize {
    let scores = linalg::row_times_mat(&design_row(graph, kind, node), weights);
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = k;
        }
    }
    best
}

/// Macro F1 over `(actual, predicted)` pairs: the unweighted mean of
/// per-class F1 across the classes present in either side. A class with no
/// true positives scores 0.
pub fn macro_f1(pairs: &[(usize, usize)]) -> f64 {
    let mut classes: Vec<usize> = pairs.iter().flat_map(|&(a, p)| [a, p]).collect();
    classes.sort_unstable();
    classes.dedup();
    if classes.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for &class in &classes {
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut fneg = 0usize;
        for &(actual, predicted) in pairs {
            match (actual == class, predicted == class) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fneg += 1,
                _ => {}
            }
        }
        let denom = 2 * tp + fp + fneg;
        if denom > 0 {
            total += 2.0 * tp as f64 / denom as f64;
        }
    }
    total / classes.len() as f64
}

/// One local-homophily bin of a report.
#[derive(Debug, Clone, Serialize)]
pub struct BinStat {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// `None` for empty bins.
    pub f1: Option<f64>,
    /// Under-occupied (or empty) bins are excluded from trend statistics.
    pub flagged: bool,
}

/// Per-bin macro-F1 table for one model on one graph.
#[derive(Debug, Clone, Serialize)]
pub struct BinnedReport {
    pub model: String,
    pub bins: Vec<BinStat>,
    /// Test nodes skipped because their local homophily is undefined.
    pub skipped_isolated: usize,
}

fn validate_bin_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 || edges[0] != 0.0 || *edges.last().unwrap() != 1.0 {
        return Err(Error::Validation(
            "bins: edges must start at 0 and end at 1".into(),
        ));
    }
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation(
            "bins: edges must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Bin index of a ratio: half-open `[lo, hi)` everywhere except the last
/// bin, which closes at 1.
fn bin_index(edges: &[f64], value: f64) -> usize {
    let last = edges.len() - 2;
    for i in 0..last {
        if value < edges[i + 1] {
            return i;
        }
    }
    last
}

/// Group the test nodes by local homophily and score each bin with macro F1.
pub fn evaluate_binned(
    graph: &Graph,
    split: &Split,
    weights: &[Vec<f64>],
    kind: EvalModel,
    bin_edges: &[f64],
) -> Result<BinnedReport> {
    validate_bin_edges(bin_edges)?;
    let nbins = bin_edges.len() - 1;
    let mut per_bin: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nbins];
    let mut skipped = 0usize;
    for &node in &split.test {
        match metrics::local_homophily(graph, node) {
            Ok(ratio) => {
                let predicted = predict(graph, weights, kind, node);
                per_bin[bin_index(bin_edges, ratio)].push((graph.label(node), predicted));
            }
            Err(_) => skipped += 1,
        }
    }
    let bins: Vec<BinStat> = per_bin
        .iter()
        .enumerate()
        .map(|(i, pairs)| BinStat {
            lo: bin_edges[i],
            hi: bin_edges[i + 1],
            count: pairs.len(),
            f1: (!pairs.is_empty()).then(|| macro_f1(pairs)),
            flagged: pairs.len() < MIN_BIN_OCCUPANCY,
        })
        .collect();
    if bins.iter().all(|b| b.flagged) {
        return Err(Error::Validation(
            "bins: every bin is under-occupied".into(),
        ));
    }
    Ok(BinnedReport {
        model: kind.tag().to_string(),
        bins,
        skipped_isolated: skipped,
    })
}

/// Per-bin F1 difference `model - baseline`. Bins that are flagged or
/// missing on either side come back flagged with no value.
pub fn delta_f1(model: &BinnedReport, baseline: &BinnedReport) -> Result<BinnedReport> {
    if model.bins.len() != baseline.bins.len()
        || model
            .bins
            .iter()
            .zip(&baseline.bins)
            .any(|(a, b)| a.lo != b.lo || a.hi != b.hi)
    {
        return Err(Error::Validation(
            "delta: reports use different bin edges".into(),
        ));
    }
    let bins = model
        .bins
        .iter()
        .zip(&baseline.bins)
        .map(|(m, b)| {
            let usable = !m.flagged && !b.flagged;
            let f1 = match (usable, m.f1, b.f1) {
                (true, Some(x), Some(y)) => Some(x - y),
                _ => None,
            };
            BinStat {
                lo: m.lo,
                hi: m.hi,
                count: m.count,
                f1,
                flagged: f1.is_none(),
            }
        })
        .collect();
    Ok(BinnedReport {
        model: format!("{} - {}", model.model, baseline.model),
        bins,
        skipped_isolated: model.skipped_isolated,
    })
}

/// Sweep description: a set of generator configs evaluated under several
/// model families, each over a number of consecutive seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub configs: Vec<GeneratorConfig>,
    pub kinds: Vec<EvalModel>,
    /// Seeds per config; run `i` uses `config.seed + i`.
    pub seeds: usize,
    #[serde(default)]
    pub bin_edges: Option<Vec<f64>>,
    #[serde(default)]
    pub ratios: Option<[f64; 3]>,
}

/// One aggregated sweep row: a (config, model, bin) cell across seeds.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub h: f64,
    pub rho: f64,
    pub kind: EvalModel,
    pub bin_lo: f64,
    pub bin_hi: f64,
    /// Mean F1 over the seeds where the bin was usable; `None` when it never
    /// was.
    pub f1_mean: Option<f64>,
    /// Population standard deviation across the usable seeds.
    pub f1_std: Option<f64>,
    /// Mean test-node count in the bin.
    pub n_nodes: f64,
    /// Number of seeds whose bin was usable.
    pub usable_seeds: usize,
    pub total_seeds: usize,
}

/// Generate, split, fit and evaluate every (config, seed, kind) cell, then
/// aggregate per bin across seeds. Runs are independent and execute in
/// parallel; aggregation order is fixed, so the output is deterministic.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.seeds == 0 {
        return Err(Error::Validation("seeds: must be at least 1".into()));
    }
    if spec.kinds.is_empty() {
        return Err(Error::Validation("kinds: must be non-empty".into()));
    }
    for config in &spec.configs {
        config.validate()?;
    }
    let edges = spec
        .bin_edges
        .clone()
        .unwrap_or_else(|| DEFAULT_BIN_EDGES.to_vec());
    validate_bin_edges(&edges)?;
    let ratios = spec.ratios.unwrap_or(DEFAULT_SPLIT_RATIOS);

    let runs: Vec<(usize, usize)> = (0..spec.configs.len())
        .flat_map(|c| (0..spec.seeds).map(move |s| (c, s)))
        .collect();

    let per_run: Vec<Result<Vec<BinnedReport>>> = runs
        .par_iter()
        .map(|&(config_idx, seed_idx)| {
            let mut config = spec.configs[config_idx].clone();
            config.seed += seed_idx as u64;
            let built = gen::generate(&config)?;
            let split = split_nodes(&built.graph, ratios, config.seed)?;
            spec.kinds
                .iter()
                .map(|&kind| {
                    let weights = fit_linear_gnn(&built.graph, &split.train, kind)?;
                    evaluate_binned(&built.graph, &split, &weights, kind, &edges)
                })
                .collect()
        })
        .collect();

    let nbins = edges.len() - 1;
    let mut rows = Vec::new();
    for (config_idx, config) in spec.configs.iter().enumerate() {
        for (kind_idx, &kind) in spec.kinds.iter().enumerate() {
            for bin in 0..nbins {
                let mut f1s = Vec::with_capacity(spec.seeds);
                let mut counts = 0usize;
                for seed_idx in 0..spec.seeds {
                    let run = &per_run[config_idx * spec.seeds + seed_idx];
                    let report = &run.as_ref().map_err(clone_error)?[kind_idx];
                    let stat = &report.bins[bin];
                    counts += stat.count;
                    if !stat.flagged {
                        if let Some(f1) = stat.f1 {
                            f1s.push(f1);
                        }
                    }
                }
                let (mean, std) = if f1s.is_empty() {
                    (None, None)
                } else {
                    let mean = f1s.iter().sum::<f64>() / f1s.len() as f64;
                    let var =
                        f1s.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / f1s.len() as f64;
                    (Some(mean), Some(var.sqrt()))
                };
                rows.push(SweepRow {
                    h: config.h,
                    rho: config.rho,
                    kind,
                    bin_lo: edges[bin],
                    bin_hi: edges[bin + 1],
                    f1_mean: mean,
                    f1_std: std,
                    n_nodes: counts as f64 / spec.seeds as f64,
                    usable_seeds: f1s.len(),
                    total_seeds: spec.seeds,
                });
            }
        }
    }
    Ok(rows)
}

fn clone_error(e: &Error) -> Error {
    match e {
        Error::Validation(s) => Error::Validation(s.clone()),
        Error::Degenerate(s) => Error::Degenerate(s.clone()),
        Error::NoEdges => Error::NoEdges,
        Error::IsolatedNode(n) => Error::IsolatedNode(*n),
        Error::Io(e) => Error::Parse(e.to_string()),
        Error::Parse(s) => Error::Parse(s.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::{self, ModelKind, TheorySetup};
    use approx::assert_abs_diff_eq;

    /// Two equal-size class blocks wired as circulants: `same_offsets` ring
    /// offsets inside each block plus `cross_shifts` perfect matchings
    /// between the blocks. Every node ends up with identical degree and
    /// identical local homophily, which is exactly the population the
    /// closed-form solver assumes.
    fn regular_two_class_graph(
        block: usize,
        same_offsets: &[usize],
        cross_shifts: &[usize],
        p: f64,
    ) -> Graph {
        let n = 2 * block;
        let labels: Vec<usize> = (0..n).map(|i| usize::from(i >= block)).collect();
        let features: Vec<Vec<f64>> = labels
            .iter()
            .map(|&l| theory::theory_features(l, p).to_vec())
            .collect();
        let mut edges = Vec::new();
        for b in 0..2 {
            let base = b * block;
            for &off in same_offsets {
                for i in 0..block {
                    let a = base + i;
                    let c = base + (i + off) % block;
                    if a < c {
                        edges.push((a, c));
                    } else {
                        edges.push((c, a));
                    }
                }
            }
        }
        for &shift in cross_shifts {
            for i in 0..block {
                edges.push((i, block + (i + shift) % block));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Graph::new(2, labels, features, edges).unwrap()
    }

    #[test]
    fn split_sizes_and_determinism() {
        let g = regular_two_class_graph(50, &[1], &[0], 0.3);
        let s = split_nodes(&g, [0.5, 0.25, 0.25], 9).unwrap();
        assert_eq!(s.train.len(), 50);
        assert_eq!(s.val.len(), 25);
        assert_eq!(s.test.len(), 25);
        let mut all: Vec<usize> = s
            .train
            .iter()
            .chain(&s.val)
            .chain(&s.test)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        let again = split_nodes(&g, [0.5, 0.25, 0.25], 9).unwrap();
        assert_eq!(s.train, again.train);
        assert_eq!(s.test, again.test);

        let all_train = split_nodes(&g, [1.0, 0.0, 0.0], 1).unwrap();
        assert_eq!(all_train.train.len(), 100);
        assert!(all_train.test.is_empty());
    }

    #[test]
    fn split_rejects_tiny_graphs() {
        let g = Graph::new(1, vec![0; 3], vec![vec![0.0]; 3], vec![(0, 1), (1, 2)]).unwrap();
        assert!(split_nodes(&g, [0.5, 0.25, 0.25], 0).is_err());
    }

    #[test]
    fn macro_f1_hand_cases() {
        // All correct in a single-class group.
        assert_eq!(macro_f1(&[(0, 0), (0, 0), (0, 0)]), 1.0);
        // Balanced group, every prediction class 0: per-class F1s 2/3 and 0.
        let pairs = [(0, 0), (0, 0), (1, 0), (1, 0)];
        assert_abs_diff_eq!(macro_f1(&pairs), 1.0 / 3.0, epsilon = 1e-12);
        // Everything wrong.
        assert_eq!(macro_f1(&[(0, 1), (1, 0)]), 0.0);
    }

    #[test]
    fn fitted_weights_match_the_closed_form_on_a_uniform_graph() {
        // d = 5, four same-class and one cross edge per node: h = 0.8.
        let p = 0.3;
        let g = regular_two_class_graph(12, &[1, 2], &[0], p);
        assert!((0..24).all(|i| g.degree(i) == 5));
        assert!((0..24)
            .all(|i| (metrics::local_homophily(&g, i).unwrap() - 0.8).abs() < 1e-12));
        let setup = TheorySetup::new(0.8, 5, p).unwrap();
        let train: Vec<usize> = (0..24).collect();

        let fitted = fit_linear_gnn(&g, &train, EvalModel::Homophilous).unwrap();
        let closed = theory::solve(ModelKind::Homophilous1Layer, &setup).unwrap();
        for (frow, crow) in fitted.iter().zip(&closed.weights) {
            for (f, c) in frow.iter().zip(crow) {
                assert_abs_diff_eq!(f, c, epsilon = 1e-6);
            }
        }

        let fitted = fit_linear_gnn(&g, &train, EvalModel::Concat).unwrap();
        let closed = theory::solve(ModelKind::HeterophilousConcat, &setup).unwrap();
        assert_eq!(fitted.len(), 4);
        for (frow, crow) in fitted.iter().zip(&closed.weights) {
            for (f, c) in frow.iter().zip(crow) {
                assert_abs_diff_eq!(f, c, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn one_hot_features_are_perfectly_separable() {
        let mut g = regular_two_class_graph(10, &[1], &[0], 0.5);
        // Replace the features with exact one-hot labels.
        let labels = g.labels().to_vec();
        let features: Vec<Vec<f64>> = labels
            .iter()
            .map(|&l| if l == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] })
            .collect();
        g = Graph::new(2, labels, features, g.edges().to_vec()).unwrap();
        let train: Vec<usize> = (0..20).collect();
        let w = fit_linear_gnn(&g, &train, EvalModel::Homophilous).unwrap();
        let pairs: Vec<(usize, usize)> = train
            .iter()
            .map(|&i| (g.label(i), predict(&g, &w, EvalModel::Homophilous, i)))
            .collect();
        assert_eq!(macro_f1(&pairs), 1.0);
    }

    #[test]
    fn constant_labels_predict_that_class_everywhere() {
        let n = 12;
        let labels = vec![0usize; n];
        let features: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 * 0.1, 1.0]).collect();
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        let g = Graph::new(2, labels, features, edges).unwrap();
        let train: Vec<usize> = (0..n).collect();
        let w = fit_linear_gnn(&g, &train, EvalModel::Homophilous).unwrap();
        assert!((0..n).all(|i| predict(&g, &w, EvalModel::Homophilous, i) == 0));
    }

    #[test]
    fn baseline_ignores_the_edge_set() {
        let g1 = regular_two_class_graph(10, &[1], &[0], 0.3);
        let g2 = Graph::new(
            2,
            g1.labels().to_vec(),
            g1.features().to_vec(),
            vec![(0, 5), (3, 17), (2, 9)],
        )
        .unwrap();
        let train: Vec<usize> = (0..20).collect();
        let w1 = fit_baseline(&g1, &train).unwrap();
        let w2 = fit_baseline(&g2, &train).unwrap();
        assert_eq!(w1, w2);
    }

    #[test]
    fn noise_features_score_at_chance() {
        let config = GeneratorConfig {
            n: 600,
            m: 4,
            class_probs: vec![0.5, 0.5],
            h: 0.5,
            rho: 0.5,
            epsilon: 0.0,
            delta: 5,
            seed: 17,
            literal_feature_means: false,
        };
        let built = gen::generate(&config).unwrap();
        let split = split_nodes(&built.graph, DEFAULT_SPLIT_RATIOS, 17).unwrap();
        let w = fit_baseline(&built.graph, &split.train).unwrap();
        let pairs: Vec<(usize, usize)> = split
            .test
            .iter()
            .map(|&i| (built.graph.label(i), predict(&built.graph, &w, EvalModel::Baseline, i)))
            .collect();
        let f1 = macro_f1(&pairs);
        assert!((f1 - 0.5).abs() < 0.1, "chance-level F1 expected, got {f1}");
    }

    #[test]
    fn binned_evaluation_on_a_perfect_model() {
        let g = regular_two_class_graph(20, &[1], &[0, 1], 0.5);
        // h = 0.5 everywhere: all nodes land in the third bin.
        let split = split_nodes(&g, [0.5, 0.0, 0.5], 3).unwrap();
        let train = split.train.clone();
        let w = fit_linear_gnn(&g, &train, EvalModel::Homophilous).unwrap();
        let report =
            evaluate_binned(&g, &split, &w, EvalModel::Homophilous, &DEFAULT_BIN_EDGES).unwrap();
        assert_eq!(report.bins.len(), 4);
        assert_eq!(report.bins[2].count, split.test.len());
        assert_eq!(report.bins[2].f1, Some(1.0));
        assert!(!report.bins[2].flagged);
        // The untouched bins are empty, flagged, and carry no score.
        assert!(report.bins[0].flagged);
        assert_eq!(report.bins[0].f1, None);
    }

    #[test]
    fn bin_assignment_covers_every_test_node_once() {
        let config = GeneratorConfig {
            n: 400,
            m: 5,
            class_probs: vec![0.5, 0.5],
            h: 0.7,
            rho: 0.8,
            epsilon: 0.5,
            delta: 5,
            seed: 5,
            literal_feature_means: false,
        };
        let built = gen::generate(&config).unwrap();
        let split = split_nodes(&built.graph, DEFAULT_SPLIT_RATIOS, 5).unwrap();
        let w = fit_baseline(&built.graph, &split.train).unwrap();
        let report =
            evaluate_binned(&built.graph, &split, &w, EvalModel::Baseline, &DEFAULT_BIN_EDGES)
                .unwrap();
        let total: usize = report.bins.iter().map(|b| b.count).sum();
        assert_eq!(total + report.skipped_isolated, split.test.len());
        assert_eq!(report.skipped_isolated, 0);
    }

    #[test]
    fn bin_index_boundaries() {
        let edges = DEFAULT_BIN_EDGES;
        assert_eq!(bin_index(&edges, 0.0), 0);
        assert_eq!(bin_index(&edges, 0.25), 1);
        assert_eq!(bin_index(&edges, 0.4999), 1);
        assert_eq!(bin_index(&edges, 0.75), 3);
        assert_eq!(bin_index(&edges, 1.0), 3);
    }

    #[test]
    fn delta_f1_subtracts_bin_by_bin() {
        let make = |f1s: [Option<f64>; 2], flags: [bool; 2]| BinnedReport {
            model: "m".into(),
            bins: (0..2)
                .map(|i| BinStat {
                    lo: 0.5 * i as f64,
                    hi: 0.5 * (i + 1) as f64,
                    count: 10,
                    f1: f1s[i],
                    flagged: flags[i],
                })
                .collect(),
            skipped_isolated: 0,
        };
        let model = make([Some(0.9), Some(0.8)], [false, false]);
        let base = make([Some(0.75), None], [false, true]);
        let delta = delta_f1(&model, &base).unwrap();
        assert_abs_diff_eq!(delta.bins[0].f1.unwrap(), 0.15, epsilon = 1e-12);
        assert!(delta.bins[1].flagged);
        assert_eq!(delta.bins[1].f1, None);

        let zero = delta_f1(&model, &model).unwrap();
        assert_eq!(zero.bins[0].f1, Some(0.0));

        let other_edges = BinnedReport {
            model: "m".into(),
            bins: vec![BinStat {
                lo: 0.0,
                hi: 1.0,
                count: 1,
                f1: Some(1.0),
                flagged: false,
            }],
            skipped_isolated: 0,
        };
        assert!(delta_f1(&model, &other_edges).is_err());
    }

    #[test]
    fn sweep_aggregates_deterministically() {
        let spec = SweepSpec {
            configs: vec![GeneratorConfig {
                n: 300,
                m: 3,
                class_probs: vec![0.5, 0.5],
                h: 0.9,
                rho: 0.5,
                epsilon: 0.5,
                delta: 5,
                seed: 100,
                literal_feature_means: false,
            }],
            kinds: vec![EvalModel::Homophilous, EvalModel::Baseline],
            seeds: 2,
            bin_edges: None,
            ratios: None,
        };
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 2 * 4);
        let again = run_sweep(&spec).unwrap();
        for (a, b) in rows.iter().zip(&again) {
            assert_eq!(a.f1_mean, b.f1_mean);
            assert_eq!(a.f1_std, b.f1_std);
            assert_eq!(a.n_nodes, b.n_nodes);
        }
    }
}

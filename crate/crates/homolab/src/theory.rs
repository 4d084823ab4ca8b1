//! Closed-form linear graph models and their perturbation analysis.
//!
//! Three binary-classification models are covered, each trained on a
//! population where every node has degree `d`, local homophily `h`, and a
//! class-coded feature vector:
//!
//! * a one-layer mixing model whose design row sums ego and neighbor
//!   features,
//! * a two-layer variant applying that aggregation twice,
//! * a concatenation model that keeps ego and neighbor blocks separate and
//!   is solved through the right pseudo-inverse.
//!
//! Because same-class training rows are duplicates, each system reduces to
//! two unique rows, and the optimal weights have closed forms. Applying the
//! weights to a test node whose local homophily is shifted by `alpha` moves
//! the logits by `coefficient * [alpha, -alpha]`; the coefficient is
//! `b1 = d / (1 + d(2h - 1))` for one layer,
//! `b1' = d^2 (2h - 1) / (1 + d^2 (2h - 1)^2)` for the concatenation model,
//! and `2 (1 + d(2h - 1 + alpha)) * b2` with `b2 = d / (1 + d(2h - 1))^2`
//! for two layers. [`verify_theorem`] checks the closed forms against the
//! full matrix pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Denominators smaller than this flag a setup as degenerate. Well clear of
/// accumulated float error at every supported degree, yet far below any
/// intentionally chosen parameter.
const DEGENERACY_TOL: f64 = 1e-9;

/// Guard on the conditioning of the reduced Gram matrix in the
/// pseudo-inverse route.
const MAX_GRAM_CONDITION: f64 = 1e12;

/// The three closed-form model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    /// One aggregation layer mixing ego and neighbor features.
    Homophilous1Layer,
    /// Two stacked aggregation layers.
    Homophilous2Layer,
    /// Ego features concatenated with aggregated neighbor features.
    HeterophilousConcat,
}

/// Population parameters of the training graph.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TheorySetup {
    /// Global homophily in [0, 1].
    pub h: f64,
    /// Node degree, a positive integer.
    pub d: u32,
    /// Feature agreement in (0, 0.5]; at 0 the two classes share a feature
    /// vector and every system is singular.
    pub p: f64,
}

impl TheorySetup {
    pub fn new(h: f64, d: u32, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&h) {
            return Err(Error::Validation(format!("h: must lie in [0, 1], got {h}")));
        }
        if d < 1 {
            return Err(Error::Validation("d: must be at least 1".into()));
        }
        if !(p > 0.0 && p <= 0.5) {
            return Err(Error::Validation(format!(
                "p: must lie in (0, 0.5], got {p}"
            )));
        }
        Ok(TheorySetup { h, d, p })
    }

    /// `1 + d(2h - 1)`, the quantity whose vanishing makes the one- and
    /// two-layer systems singular.
    pub fn mixing_denominator(&self) -> f64 {
        1.0 + self.d as f64 * (2.0 * self.h - 1.0)
    }

    fn ensure_mixing_nondegenerate(&self) -> Result<()> {
        if self.mixing_denominator().abs() < DEGENERACY_TOL {
            Err(Error::Degenerate(format!(
                "1 + d(2h - 1) = 0 at h = {}, d = {}",
                self.h, self.d
            )))
        } else {
            Ok(())
        }
    }
}

/// Feature vector for a training-population node: `[(1 + p) / 2, (1 - p) / 2]`
/// for class 0 and the swap for class 1. At `p = 0` the classes collide.
pub fn theory_features(class: usize, p: f64) -> [f64; 2] {
    let hi = 0.5 * (1.0 + p);
    let lo = 0.5 * (1.0 - p);
    if class == 0 {
        [hi, lo]
    } else {
        [lo, hi]
    }
}

/// Design row of a node with local homophily `h_row`, for any real degree.
/// Class 1 mirrors class 0 by swapping coordinates within each block.
fn aggregate_row_with_degree(
    kind: ModelKind,
    class: usize,
    d: f64,
    p: f64,
    h_row: f64,
) -> Vec<f64> {
    let mut row = match kind {
        ModelKind::Homophilous1Layer => {
            vec![
                0.5 * (1.0 + d + p + d * p * (2.0 * h_row - 1.0)),
                0.5 * (1.0 - p + d * (1.0 + p - 2.0 * h_row * p)),
            ]
        }
        ModelKind::Homophilous2Layer => {
            let one_minus_2h = 1.0 - 2.0 * h_row;
            vec![
                0.5 * (1.0
                    + p
                    + d * d * (1.0 + one_minus_2h * one_minus_2h * p)
                    + d * (2.0 + (4.0 * h_row - 2.0) * p)),
                0.5 * (1.0 - p + d * (2.0 + (2.0 - 4.0 * h_row) * p)
                    - d * d * (-1.0 + one_minus_2h * one_minus_2h * p)),
            ]
        }
        ModelKind::HeterophilousConcat => {
            vec![
                0.5 * (1.0 + p),
                0.5 * (1.0 - p),
                0.5 * (d + d * p * (2.0 * h_row - 1.0)),
                0.5 * (d * (1.0 + p - 2.0 * h_row * p)),
            ]
        }
    };
    if class == 1 {
        for pair in row.chunks_mut(2) {
            pair.swap(0, 1);
        }
    }
    row
}

/// Aggregated design row for a node of the given class at local homophily
/// `h_row`, under the population described by `setup`.
pub fn aggregate_row(kind: ModelKind, class: usize, setup: &TheorySetup, h_row: f64) -> Vec<f64> {
    aggregate_row_with_degree(kind, class, setup.d as f64, setup.p, h_row)
}

/// A solved model: weights mapping design rows to one-hot class scores.
#[derive(Debug, Clone, Serialize)]
pub struct ClosedFormModel {
    pub kind: ModelKind,
    /// `k x 2` weight matrix (`k` = 2 for the square models, 4 for the
    /// concatenation model).
    pub weights: Vec<Vec<f64>>,
    pub setup: TheorySetup,
}

/// Solve for the optimal weights on the two unique class rows.
///
/// The square models invert the reduced 2x2 system directly. The
/// concatenation model has a wide 2x4 reduced system and takes the
/// minimum-norm solution through the right pseudo-inverse
/// `R^T (R R^T)^{-1}`, guarded by a condition-number check on the Gram
/// matrix.
pub fn solve(kind: ModelKind, setup: &TheorySetup) -> Result<ClosedFormModel> {
    let rows = vec![
        aggregate_row(kind, 0, setup, setup.h),
        aggregate_row(kind, 1, setup, setup.h),
    ];
    let weights = match kind {
        ModelKind::Homophilous1Layer | ModelKind::Homophilous2Layer => {
            setup.ensure_mixing_nondegenerate()?;
            let identity = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
            linalg::solve(&rows, &identity)?
        }
        ModelKind::HeterophilousConcat => {
            let rt = linalg::transpose(&rows);
            let gram = linalg::matmul(&rows, &rt);
            let cond = linalg::cond_sym2(&gram);
            if !cond.is_finite() || cond > MAX_GRAM_CONDITION {
                return Err(Error::Degenerate(format!(
                    "reduced system Gram matrix condition {cond:.3e} exceeds {MAX_GRAM_CONDITION:.0e}"
                )));
            }
            let identity = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
            let gram_inv = linalg::solve(&gram, &identity)?;
            linalg::matmul(&rt, &gram_inv)
        }
    };
    Ok(ClosedFormModel {
        kind,
        weights,
        setup: *setup,
    })
}

impl ClosedFormModel {
    /// Logits for a class-0 test node whose local homophily is `h + alpha`,
    /// computed through the full matrix pipeline.
    pub fn predict_shifted(&self, alpha: f64) -> Result<[f64; 2]> {
        let h_t = self.setup.h + alpha;
        if !(-1e-12..=1.0 + 1e-12).contains(&h_t) {
            return Err(Error::Validation(format!(
                "alpha: h + alpha = {h_t} lies outside [0, 1]"
            )));
        }
        let row = aggregate_row(self.kind, 0, &self.setup, h_t.clamp(0.0, 1.0));
        let z = linalg::row_times_mat(&row, &self.weights);
        Ok([z[0], z[1]])
    }
}

/// Argmax class of a logit vector; ties break to the lowest index.
pub fn predicted_class(logits: [f64; 2]) -> usize {
    usize::from(logits[1] > logits[0])
}

/// Closed-form scalar multiplying `[alpha, -alpha]` in the logit deviation:
/// `b1`, `b1'`, or `b2` depending on the model family.
pub fn coefficient(kind: ModelKind, setup: &TheorySetup) -> Result<f64> {
    let d = setup.d as f64;
    match kind {
        ModelKind::Homophilous1Layer => {
            setup.ensure_mixing_nondegenerate()?;
            Ok(d / setup.mixing_denominator())
        }
        ModelKind::Homophilous2Layer => {
            setup.ensure_mixing_nondegenerate()?;
            let denom = setup.mixing_denominator();
            Ok(d / (denom * denom))
        }
        ModelKind::HeterophilousConcat => {
            let x = 2.0 * setup.h - 1.0;
            Ok(d * d * x / (1.0 + d * d * x * x))
        }
    }
}

/// Predicted vs. observed logit deviation for one `(kind, setup, alpha)`.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremCheck {
    pub kind: ModelKind,
    pub setup: TheorySetup,
    pub alpha: f64,
    /// Scalar multiplying `[alpha, -alpha]`: `b1`, `b1'`, or the
    /// alpha-dependent two-layer factor `2 (1 + d(2h - 1 + alpha)) b2`.
    pub coefficient: f64,
    pub predicted_delta: [f64; 2],
    pub observed_delta: [f64; 2],
    /// Max-abs difference between the two deltas.
    pub residual: f64,
}

/// Compare the closed-form logit deviation against the matrix pipeline.
pub fn verify_theorem(kind: ModelKind, setup: &TheorySetup, alpha: f64) -> Result<TheoremCheck> {
    let model = solve(kind, setup)?;
    let base = model.predict_shifted(0.0)?;
    let shifted = model.predict_shifted(alpha)?;
    let observed = [shifted[0] - base[0], shifted[1] - base[1]];

    let scale = match kind {
        ModelKind::Homophilous1Layer | ModelKind::HeterophilousConcat => {
            coefficient(kind, setup)?
        }
        ModelKind::Homophilous2Layer => {
            let d = setup.d as f64;
            let b2 = coefficient(kind, setup)?;
            2.0 * (1.0 + d * (2.0 * setup.h - 1.0 + alpha)) * b2
        }
    };
    let predicted = [scale * alpha, -scale * alpha];
    let residual = (predicted[0] - observed[0])
        .abs()
        .max((predicted[1] - observed[1]).abs());

    Ok(TheoremCheck {
        kind,
        setup: *setup,
        alpha,
        coefficient: scale,
        predicted_delta: predicted,
        observed_delta: observed,
        residual,
    })
}

/// One point of the coefficient-comparison grid.
#[derive(Debug, Clone, Serialize)]
pub struct GridRow {
    pub d: f64,
    pub h: f64,
    /// `None` exactly at degenerate points, where `|b1|` blows up.
    pub b1: Option<f64>,
    pub bprime1: f64,
    /// `|b1'| - |b1|`; `None` at degenerate points (semantically negative
    /// infinity: the concatenation coefficient always wins there).
    pub diff: Option<f64>,
    pub degenerate: bool,
}

/// Tabulate `b1` and `b1'` over degrees `d_values` and `h` from 0 to 1 in
/// steps of `h_step` (which must divide 1). Degrees may be non-integral
/// here; degeneracy is then detected within a small tolerance instead of
/// exactly.
pub fn coefficient_grid(d_values: &[f64], h_step: f64) -> Result<Vec<GridRow>> {
    if !(h_step > 0.0 && h_step <= 0.5) {
        return Err(Error::Validation(format!(
            "h_step: must lie in (0, 0.5], got {h_step}"
        )));
    }
    let steps = (1.0 / h_step).round() as i64;
    if steps < 2 || (steps as f64 * h_step - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!(
            "h_step: {h_step} does not evenly divide 1"
        )));
    }
    if d_values.iter().any(|&d| d <= 0.0 || !d.is_finite()) {
        return Err(Error::Validation("d_values: must be positive".into()));
    }

    let mut rows = Vec::with_capacity(d_values.len() * (steps as usize + 1));
    for &d in d_values {
        for k in 0..=steps {
            let h = k as f64 / steps as f64;
            let denom = 1.0 + d * (2.0 * h - 1.0);
            // With an integral degree the degenerate grid points are exact
            // rationals; detect them without float slack.
            let degenerate = if d.fract() == 0.0 {
                (d as i64) * (steps - 2 * k) == steps
            } else {
                denom.abs() < DEGENERACY_TOL
            };
            let x = 2.0 * h - 1.0;
            let bprime1 = d * d * x / (1.0 + d * d * x * x);
            let (b1, diff) = if degenerate {
                (None, None)
            } else {
                let b1 = d / denom;
                (Some(b1), Some(bprime1.abs() - b1.abs()))
            };
            rows.push(GridRow {
                d,
                h,
                b1,
                bprime1,
                diff,
                degenerate,
            });
        }
    }
    Ok(rows)
}

/// Global-homophily regime of a setup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `h < 0.5`; `strong_negative` marks `d(2h - 1) < -1`, where the
    /// one-layer coefficient flips sign.
    Heterophilous { strong_negative: bool },
    /// `h = 0.5`, where the coefficient equals the degree itself.
    Mixed,
    /// `h > 0.5`.
    Homophilous,
}

/// Which way predictions degrade as the test node's local homophily moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DegradationDirection {
    /// Coefficient below zero: raising local homophily hurts.
    AsLocalHomophilyIncreases,
    /// Coefficient above zero: lowering local homophily hurts.
    AsLocalHomophilyDecreases,
    /// Singular setup; no finite coefficient.
    Degenerate,
}

/// Case classification of the one-layer model for a setup.
#[derive(Debug, Clone, Serialize)]
pub struct SettingsReport {
    pub regime: Regime,
    pub b1: Option<f64>,
    pub direction: DegradationDirection,
}

/// Classify a setup: its homophily regime and the direction in which argmax
/// flips accumulate as the local-homophily shift grows.
pub fn settings_report(setup: &TheorySetup) -> SettingsReport {
    let d = setup.d as f64;
    let signal = d * (2.0 * setup.h - 1.0);
    let regime = if setup.h < 0.5 {
        Regime::Heterophilous {
            strong_negative: signal < -1.0,
        }
    } else if setup.h == 0.5 {
        Regime::Mixed
    } else {
        Regime::Homophilous
    };
    let denom = setup.mixing_denominator();
    let (b1, direction) = if denom.abs() < DEGENERACY_TOL {
        (None, DegradationDirection::Degenerate)
    } else {
        let b1 = d / denom;
        let dir = if b1 < 0.0 {
            DegradationDirection::AsLocalHomophilyIncreases
        } else {
            DegradationDirection::AsLocalHomophilyDecreases
        };
        (Some(b1), dir)
    };
    SettingsReport {
        regime,
        b1,
        direction,
    }
}

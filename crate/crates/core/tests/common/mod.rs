//! Reference implementations used to check the library. They are written
//! for clarity, not speed, and share no code with the library's own
//! gradient, split search or Shapley routines.
#![allow(dead_code)]

use edgehealth::data::Health;
use edgehealth::gbdt::BoostedModel;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

pub type Q = Ratio<i128>;

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Log-loss of margin `m` written straight from its definition.
pub fn reference_loss(m: f64, label: Health) -> f64 {
    match label {
        Health::Healthy => softplus(-m),
        Health::Abnormal => softplus(m),
    }
}

/// Central finite differences of [`reference_loss`].
///
/// The second difference is taken on the smooth part `ln(1 + e^-|x|)` only:
/// away from zero the piecewise-linear part `max(x, 0)` contributes nothing
/// to the curvature, and dropping it avoids cancellation against large
/// linear terms.
pub fn fd_grad_hess(m: f64, label: Health) -> (f64, f64) {
    let d1 = 1e-5;
    let g = (reference_loss(m + d1, label) - reference_loss(m - d1, label)) / (2.0 * d1);
    let d2 = 1e-4;
    let smooth = |x: f64| (-x.abs()).exp().ln_1p();
    let h = if m.abs() > 2.0 * d2 {
        (smooth(m + d2) - 2.0 * smooth(m) + smooth(m - d2)) / (d2 * d2)
    } else {
        (reference_loss(m + d2, label) - 2.0 * reference_loss(m, label)
            + reference_loss(m - d2, label))
            / (d2 * d2)
    };
    (g, h)
}

/// Exhaustive split search in exact rational arithmetic.
///
/// Every midpoint between consecutive distinct values of every feature is
/// tried. Rows are partitioned directly by `x < threshold`, the regularized
/// objective `-1/2 * sum G^2 / (H + lambda) + gamma * leaves` is evaluated
/// for parent and children, and the split lowering it the most wins. Ties
/// keep the first candidate in (feature, threshold) order.
pub struct ExactSplit {
    pub feature: usize,
    pub threshold: f64,
    pub reduction: Q,
}

pub fn exhaustive_split(
    x: &[Vec<f64>],
    g: &[Q],
    h: &[Q],
    lambda: Q,
    gamma: Q,
    min_child_hessian: Q,
) -> Option<ExactSplit> {
    let objective = |rows: &[usize]| -> (Q, Q, Q) {
        let gs = rows.iter().fold(Q::zero(), |a, &r| a + g[r]);
        let hs = rows.iter().fold(Q::zero(), |a, &r| a + h[r]);
        (gs, hs, -Q::new(1, 2) * gs * gs / (hs + lambda))
    };
    let all: Vec<usize> = (0..x.len()).collect();
    let (_, _, parent) = objective(&all);
    let parent = parent + gamma;

    let mut best: Option<ExactSplit> = None;
    for f in 0..x[0].len() {
        let mut values: Vec<f64> = x.iter().map(|r| r[f]).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        for pair in values.windows(2) {
            let threshold = midpoint(pair[0], pair[1]);
            let (left, right): (Vec<usize>, Vec<usize>) =
                all.iter().partition(|&&r| x[r][f] < threshold);
            let (_, hl, ol) = objective(&left);
            let (_, hr, or) = objective(&right);
            if hl < min_child_hessian || hr < min_child_hessian {
                continue;
            }
            let reduction = parent - (ol + or + gamma + gamma);
            if !reduction.is_positive() {
                continue;
            }
            if best.as_ref().is_none_or(|b| reduction > b.reduction) {
                best = Some(ExactSplit {
                    feature: f,
                    threshold,
                    reduction,
                });
            }
        }
    }
    best
}

/// Midpoint of two distinct values, falling back to the upper one when the
/// average rounds outside `(lo, hi]`.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = (lo + hi) / 2.0;
    if m > lo && m <= hi {
        m
    } else {
        hi
    }
}

/// Interventional coalition value: features in `mask` come from `x`, the
/// rest from each background row, averaged over the background.
pub fn coalition_value(
    model: &BoostedModel<f64>,
    x: &[f64],
    mask: u32,
    background: &[Vec<f64>],
) -> f64 {
    let n = x.len();
    if mask == (1u32 << n) - 1 {
        return model.predict_margin(x).unwrap();
    }
    let total: f64 = background
        .iter()
        .map(|b| {
            let z: Vec<f64> = (0..n)
                .map(|f| if mask >> f & 1 == 1 { x[f] } else { b[f] })
                .collect();
            model.predict_margin(&z).unwrap()
        })
        .sum();
    total / background.len() as f64
}

/// Shapley values as the average marginal contribution over all `n!`
/// orderings of the features.
pub fn permutation_shapley(
    model: &BoostedModel<f64>,
    x: &[f64],
    background: &[Vec<f64>],
) -> Vec<f64> {
    let n = x.len();
    let values: Vec<f64> = (0..1u32 << n)
        .map(|m| coalition_value(model, x, m, background))
        .collect();
    let mut phi = vec![0.0; n];
    let mut count = 0u64;
    let mut order: Vec<usize> = (0..n).collect();
    permutations(&mut order, 0, &mut |perm| {
        let mut mask = 0u32;
        for &f in perm {
            phi[f] += values[(mask | 1 << f) as usize] - values[mask as usize];
            mask |= 1 << f;
        }
        count += 1;
    });
    phi.iter().map(|p| p / count as f64).collect()
}

fn permutations(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Split counts per feature, found by walking the model's JSON document
/// rather than its tree API.
pub fn split_counts_from_json(model_json: &str, n_features: usize) -> Vec<usize> {
    fn walk(node: &serde_json::Value, counts: &mut [usize]) {
        if let Some(f) = node.get("feature_index").and_then(|v| v.as_u64()) {
            counts[f as usize] += 1;
            walk(&node["left"], counts);
            walk(&node["right"], counts);
        }
    }
    let doc: serde_json::Value = serde_json::from_str(model_json).unwrap();
    let mut counts = vec![0; n_features];
    for tree in doc["trees"].as_array().unwrap() {
        walk(tree, &mut counts);
    }
    counts
}

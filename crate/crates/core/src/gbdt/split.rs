use super::loss::{split_gain, GradPair};
use super::BoostHyperparams;
use crate::scalar::{cmp_scalar, Scalar};

/// Winning split of a node. Rows with `x[feature] < threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate<T> {
    pub feature: usize,
    pub threshold: T,
    pub gain: T,
}

/// Exact greedy split search over `rows`.
///
/// `x[i]` and `grads[i]` belong to sample `i`. Candidate thresholds are the
/// midpoints between consecutive distinct values of each feature. A
/// candidate qualifies when its gain is positive and each child keeps a
/// hessian sum of at least `min_child_hessian`. Among equal gains the lowest
/// feature index wins, then the lowest threshold.
pub fn best_split<T: Scalar>(
    x: &[&[T]],
    rows: &[usize],
    grads: &[GradPair<T>],
    params: &BoostHyperparams<T>,
) -> Option<SplitCandidate<T>> {
    let n_features = x.get(*rows.first()?)?.len();
    let total: GradPair<T> = rows.iter().map(|&r| grads[r]).sum();
    let lambda = params.lambda;
    let mut best: Option<SplitCandidate<T>> = None;
    let mut order: Vec<usize> = rows.to_vec();

    #[allow(clippy::needless_range_loop)]
    for feature in 0..n_features {
        order.copy_from_slice(rows);
        order.sort_by(|&a, &b| cmp_scalar(&x[a][feature], &x[b][feature]));

        let mut left = GradPair::new(T::zero(), T::zero());
        for pair in order.windows(2) {
            left = left + grads[pair[0]];
            let lo = x[pair[0]][feature];
            let hi = x[pair[1]][feature];
            if !(lo < hi) {
                continue;
            }
            let right = total - left;
            if left.h < params.min_child_hessian || right.h < params.min_child_hessian {
                continue;
            }
            if !(left.h + lambda > T::zero() && right.h + lambda > T::zero()) {
                continue;
            }
            let gain = split_gain(left.g, left.h, right.g, right.h, lambda, params.gamma);
            if !(gain > T::zero()) {
                continue;
            }
            if best.is_none_or(|b| gain > b.gain) {
                best = Some(SplitCandidate {
                    feature,
                    threshold: midpoint(lo, hi),
                    gain,
                });
            }
        }
    }
    best
}

/// Midpoint of two distinct values that still separates them under the
/// strict less-than routing rule.
pub(crate) fn midpoint<T: Scalar>(lo: T, hi: T) -> T {
    let mid = (lo + hi) * T::half();
    if mid > lo && mid <= hi {
        mid
    } else {
        hi
    }
}

use num_traits::{FromPrimitive, Num};
use rayon::prelude::*;

use super::{BackgroundSet, ExplainError};
use crate::data::Dataset;
use crate::gbdt::BoostedModel;
use crate::scalar::Scalar;

/// Exact enumeration visits `2^n` coalitions; beyond this it is refused.
pub const MAX_FEATURES: usize = 20;

/// Largest accepted `|phi0 + sum(phi) - margin|` for an `f64` explanation.
pub const EFFICIENCY_TOLERANCE: f64 = 1e-9;

/// Feature subset as a bit mask (bit `i` set means feature `i` is present).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coalition(u32);

impl Coalition {
    pub fn empty() -> Self {
        Coalition(0)
    }

    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_FEATURES);
        Coalition(((1u64 << n) - 1) as u32)
    }

    pub fn from_bits(bits: u32) -> Self {
        Coalition(bits)
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        Coalition(indices.into_iter().fold(0, |m, i| m | (1 << i)))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> Self {
        Coalition(self.0 | 1 << i)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

/// Shapley values of one sample, on the margin (log-odds) scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Explanation<T> {
    pub sample_index: usize,
    /// Mean background margin, `v(empty set)`.
    pub phi0: T,
    pub phi: Vec<T>,
    /// Model margin of the explained sample.
    pub margin: T,
}

impl<T: Scalar> Explanation<T> {
    /// `phi0 + sum(phi) - margin`.
    pub fn efficiency_error(&self) -> T {
        let total = self.phi.iter().fold(self.phi0, |acc, &p| acc + p);
        total - self.margin
    }

    pub fn is_efficient(&self) -> bool {
        self.efficiency_error().abs().to_f64_lossy() < EFFICIENCY_TOLERANCE
    }
}

/// Coalition weight `|S|! (n - |S| - 1)! / n!`, computed as
/// `1 / (n * C(n - 1, |S|))`.
///
/// Generic so the weights can be evaluated exactly with rational numbers.
pub fn shapley_weight<W: Num + FromPrimitive>(n: usize, coalition_size: usize) -> W {
    assert!(
        coalition_size < n,
        "coalition must exclude the attributed feature"
    );
    let k = coalition_size.min(n - 1 - coalition_size) as u64;
    let m = (n - 1) as u64;
    let binom = (0..k).fold(1u64, |acc, j| acc * (m - j) / (j + 1));
    let denom = W::from_u64(n as u64 * binom).expect("weight denominator fits");
    W::one() / denom
}

/// `v(S)`: mean margin over the background when features outside `S` are
/// replaced by each background row. The full coalition needs no replacement
/// and returns `predict_margin(x)` itself.
pub fn value_function<T: Scalar>(
    model: &BoostedModel<T>,
    x: &[T],
    coalition: Coalition,
    background: &BackgroundSet<T>,
) -> Result<T, ExplainError> {
    let n = model.n_features();
    check_inputs(model, x, background)?;
    if coalition == Coalition::full(n) {
        return Ok(model.margin_unchecked(x));
    }
    let total = background.rows().iter().fold(T::zero(), |acc, b| {
        acc + model.margin_with(|f| if coalition.contains(f) { x[f] } else { b[f] })
    });
    Ok(total / T::from_count(background.len()))
}

fn check_inputs<T: Scalar>(
    model: &BoostedModel<T>,
    x: &[T],
    background: &BackgroundSet<T>,
) -> Result<(), ExplainError> {
    let n = model.n_features();
    if n > MAX_FEATURES {
        return Err(ExplainError::TooManyFeatures(n));
    }
    for found in [x.len(), background.n_features()] {
        if found != n {
            return Err(ExplainError::SchemaMismatch { expected: n, found });
        }
    }
    Ok(())
}

/// Memo of `v(S)` for every coalition.
///
/// Each tree only reads the features it splits on, so its expected output is
/// tabulated over subsets of those features and then spread over all
/// coalitions. When a coalition covers every feature a tree reads, the tree's
/// value is exactly `tree(x)`.
fn coalition_values<T: Scalar>(
    model: &BoostedModel<T>,
    x: &[T],
    background: &BackgroundSet<T>,
) -> Vec<T> {
    let n = model.n_features();
    let n_masks = 1usize << n;
    let inv_b = T::one() / T::from_count(background.len());
    let mut sums = vec![T::zero(); n_masks];

    for tree in model.trees() {
        let used: Vec<usize> = tree.features_used().into_iter().collect();
        let mut local_bit = vec![0u32; n];
        for (j, &f) in used.iter().enumerate() {
            local_bit[f] = 1 << j;
        }
        let full_local = (1usize << used.len()) - 1;
        let local: Vec<T> = (0..=full_local)
            .map(|lm| {
                if lm == full_local {
                    return tree.predict(x);
                }
                let lm = lm as u32;
                let total = background.rows().iter().fold(T::zero(), |acc, b| {
                    acc + tree.predict_with(|f| if lm & local_bit[f] != 0 { x[f] } else { b[f] })
                });
                total * inv_b
            })
            .collect();
        for (mask, sum) in sums.iter_mut().enumerate() {
            let lm = used
                .iter()
                .enumerate()
                .filter(|&(_, &f)| mask >> f & 1 == 1)
                .fold(0usize, |acc, (j, _)| acc | 1 << j);
            *sum = *sum + local[lm];
        }
    }
    sums.into_iter()
        .map(|s| model.base_score() + model.eta() * s)
        .collect()
}

/// Exact Shapley values of `x`:
/// `phi_i = sum over S not containing i of w(|S|) * (v(S + i) - v(S))`.
pub fn shapley_exact<T: Scalar>(
    model: &BoostedModel<T>,
    x: &[T],
    background: &BackgroundSet<T>,
    sample_index: usize,
) -> Result<Explanation<T>, ExplainError> {
    check_inputs(model, x, background)?;
    let n = model.n_features();
    let values = coalition_values(model, x, background);
    let weights: Vec<T> = (0..n).map(|s| shapley_weight(n, s)).collect();

    let phi = (0..n)
        .map(|i| {
            let bit = 1usize << i;
            (0..values.len())
                .filter(|mask| mask & bit == 0)
                .fold(T::zero(), |acc, mask| {
                    let w = weights[mask.count_ones() as usize];
                    acc + w * (values[mask | bit] - values[mask])
                })
        })
        .collect();

    Ok(Explanation {
        sample_index,
        phi0: values[0],
        phi,
        margin: model.margin_unchecked(x),
    })
}

/// Explains the listed samples of `data` (all of them when `indices` is
/// `None`), in parallel, returning explanations in request order.
pub fn explain_dataset<T: Scalar>(
    model: &BoostedModel<T>,
    data: &Dataset<T>,
    indices: Option<&[usize]>,
    background: &BackgroundSet<T>,
) -> Result<Vec<Explanation<T>>, ExplainError> {
    let all: Vec<usize>;
    let indices = match indices {
        Some(ix) => ix,
        None => {
            all = (0..data.len()).collect();
            &all
        }
    };
    if let Some(&bad) = indices.iter().find(|&&i| i >= data.len()) {
        return Err(ExplainError::AlignmentMismatch(format!(
            "sample {bad} out of range for {} samples",
            data.len()
        )));
    }
    indices
        .par_iter()
        .map(|&i| shapley_exact(model, &data.samples()[i].features, background, i))
        .collect()
}

use super::{ExplainError, Explanation};
use crate::gbdt::BoostedModel;
use crate::scalar::{cmp_scalar, Scalar};

/// One entry of a feature ranking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureScore<V> {
    pub feature: usize,
    pub value: V,
}

/// Mean `|phi_i|` per feature, highest first; ties keep schema order.
pub fn mean_abs_shap<T: Scalar>(
    explanations: &[Explanation<T>],
) -> Result<Vec<FeatureScore<T>>, ExplainError> {
    let first = explanations.first().ok_or(ExplainError::EmptyInput)?;
    let n = first.phi.len();
    if let Some(bad) = explanations.iter().find(|e| e.phi.len() != n) {
        return Err(ExplainError::AlignmentMismatch(format!(
            "explanation of sample {} has {} values, expected {n}",
            bad.sample_index,
            bad.phi.len()
        )));
    }
    let count = T::from_count(explanations.len());
    let mut scores: Vec<FeatureScore<T>> = (0..n)
        .map(|feature| {
            let total = explanations
                .iter()
                .fold(T::zero(), |acc, e| acc + e.phi[feature].abs());
            FeatureScore {
                feature,
                value: total / count,
            }
        })
        .collect();
    scores.sort_by(|a, b| cmp_scalar(&b.value, &a.value).then(a.feature.cmp(&b.feature)));
    Ok(scores)
}

/// How often each feature is used as a split across all trees, highest
/// first; ties keep schema order.
pub fn weight_importance<T: Scalar>(model: &BoostedModel<T>) -> Vec<FeatureScore<usize>> {
    let mut counts = vec![0usize; model.n_features()];
    for tree in model.trees() {
        for f in tree.split_features() {
            counts[f] += 1;
        }
    }
    let mut scores: Vec<FeatureScore<usize>> = counts
        .into_iter()
        .enumerate()
        .map(|(feature, value)| FeatureScore { feature, value })
        .collect();
    scores.sort_by(|a, b| b.value.cmp(&a.value).then(a.feature.cmp(&b.feature)));
    scores
}

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::loss::sigmoid;
use super::tree::TreeNode;
use super::{BoostHyperparams, GbdtError};
use crate::data::{Dataset, FeatureSchema, Health};
use crate::scalar::Scalar;

/// Additive tree ensemble on the log-odds scale:
/// `margin(x) = base_score + eta * sum_k tree_k(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "ModelDocument<T>",
    bound(serialize = "T: Scalar", deserialize = "T: Scalar")
)]
pub struct BoostedModel<T = f64> {
    schema: FeatureSchema,
    base_score: T,
    eta: T,
    hyperparams: BoostHyperparams<T>,
    trees: Vec<TreeNode<T>>,
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Scalar"), deny_unknown_fields)]
struct ModelDocument<T> {
    schema: FeatureSchema,
    base_score: T,
    eta: T,
    hyperparams: BoostHyperparams<T>,
    trees: Vec<TreeNode<T>>,
}

impl<T: Scalar> TryFrom<ModelDocument<T>> for BoostedModel<T> {
    type Error = GbdtError;

    fn try_from(doc: ModelDocument<T>) -> Result<Self, GbdtError> {
        BoostedModel::new(
            doc.schema,
            doc.base_score,
            doc.eta,
            doc.trees,
            doc.hyperparams,
        )
    }
}

impl<T: Scalar> BoostedModel<T> {
    /// Assembles a model, checking every structural invariant.
    pub fn new(
        schema: FeatureSchema,
        base_score: T,
        eta: T,
        trees: Vec<TreeNode<T>>,
        hyperparams: BoostHyperparams<T>,
    ) -> Result<Self, GbdtError> {
        let invalid = |msg: String| Err(GbdtError::InvalidModel(msg));
        if !base_score.is_finite() {
            return invalid(format!("base_score {base_score} is not finite"));
        }
        if !(eta > T::zero() && eta <= T::one()) {
            return invalid(format!("eta {eta} outside (0, 1]"));
        }
        hyperparams
            .validate()
            .map_err(|e| GbdtError::InvalidModel(e.to_string()))?;
        for (k, tree) in trees.iter().enumerate() {
            let mut problem = None;
            tree.visit(&mut |node| match node {
                TreeNode::Split {
                    feature_index,
                    threshold,
                    ..
                } => {
                    if *feature_index >= schema.len() {
                        problem = Some(format!("feature index {feature_index} out of range"));
                    } else if !threshold.is_finite() {
                        problem = Some("non-finite threshold".to_string());
                    }
                }
                TreeNode::Leaf { weight } if !weight.is_finite() => {
                    problem = Some("non-finite leaf weight".to_string());
                }
                TreeNode::Leaf { .. } => {}
            });
            if let Some(p) = problem {
                return invalid(format!("tree {k}: {p}"));
            }
        }
        Ok(Self {
            schema,
            base_score,
            eta,
            hyperparams,
            trees,
        })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn base_score(&self) -> T {
        self.base_score
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    pub fn trees(&self) -> &[TreeNode<T>] {
        &self.trees
    }

    pub fn hyperparams(&self) -> &BoostHyperparams<T> {
        &self.hyperparams
    }

    pub fn check_width(&self, x: &[T]) -> Result<(), GbdtError> {
        if x.len() != self.schema.len() {
            return Err(GbdtError::SchemaMismatch {
                expected: self.schema.len(),
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn predict_margin(&self, x: &[T]) -> Result<T, GbdtError> {
        self.check_width(x)?;
        Ok(self.margin_unchecked(x))
    }

    /// Margin without the width check; `x` must match the schema.
    #[inline]
    pub fn margin_unchecked(&self, x: &[T]) -> T {
        self.margin_with(|f| x[f])
    }

    /// Margin when feature `f` reads as `value(f)`.
    #[inline]
    pub fn margin_with(&self, value: impl Fn(usize) -> T + Copy) -> T {
        let sum = self
            .trees
            .iter()
            .fold(T::zero(), |acc, t| acc + t.predict_with(value));
        self.base_score + self.eta * sum
    }

    pub fn predict_proba(&self, x: &[T]) -> Result<T, GbdtError> {
        Ok(sigmoid(self.predict_margin(x)?))
    }

    /// Healthy iff the predicted probability is at least one half.
    pub fn predict_label(&self, x: &[T]) -> Result<Health, GbdtError> {
        Ok(Health::from(self.predict_proba(x)? >= T::half()))
    }

    /// Margins for every sample of `data`, computed in parallel.
    pub fn predict_margins(&self, data: &Dataset<T>) -> Result<Vec<T>, GbdtError> {
        if data.n_features() != self.n_features() {
            return Err(GbdtError::SchemaMismatch {
                expected: self.n_features(),
                found: data.n_features(),
            });
        }
        Ok(data
            .samples()
            .par_iter()
            .map(|s| self.margin_unchecked(&s.features))
            .collect())
    }

    pub fn predict_labels(&self, data: &Dataset<T>) -> Result<Vec<Health>, GbdtError> {
        Ok(self
            .predict_margins(data)?
            .into_iter()
            .map(|m| Health::from(sigmoid(m) >= T::half()))
            .collect())
    }

    /// `sum_k (gamma * T_k + lambda / 2 * ||w_k||^2)` under the model's own
    /// hyperparameters.
    pub fn regularization(&self) -> T {
        self.trees
            .iter()
            .map(|t| t.complexity(self.hyperparams.lambda, self.hyperparams.gamma))
            .sum()
    }

    /// Number of split nodes across all trees.
    pub fn split_count(&self) -> usize {
        self.trees.iter().map(TreeNode::split_count).sum()
    }

    pub fn to_json(&self) -> Result<String, GbdtError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, GbdtError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GbdtError> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GbdtError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

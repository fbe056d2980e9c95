//! Regularized second-order gradient boosting for binary node health.
//!
//! Each round fits a regression tree to the first and second derivatives of
//! the logistic loss at the current margins. Leaves take the closed-form
//! weight `-G / (H + lambda)` and a split is kept only when it lowers the
//! regularized objective, i.e. when its [`split_gain`] is positive.

mod loss;
mod model;
mod split;
mod train;
mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub use loss::{
    grad_hess, leaf_weight, log_loss, logit, mean_log_loss, sigmoid, split_gain, GradPair,
    PROBABILITY_CLAMP,
};
pub use model::BoostedModel;
pub use split::{best_split, SplitCandidate};
pub use train::{initial_log_loss, train, TrainOutcome, PRIOR_CLAMP};
pub use tree::{build_tree, TreeNode};

#[derive(Debug, Error)]
pub enum GbdtError {
    #[error("leaf has zero hessian and zero lambda; weight is undefined")]
    DegenerateLeaf,
    #[error("sample has {found} features, model expects {expected}")]
    SchemaMismatch { expected: usize, found: usize },
    #[error("training set is empty")]
    EmptyDataset,
    #[error("training set contains unlabeled samples")]
    Unlabeled,
    #[error("bad hyperparameter: {0}")]
    BadParameter(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Boosting hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct BoostHyperparams<T = f64> {
    pub num_rounds: usize,
    pub max_depth: usize,
    /// Shrinkage applied to every tree, in `(0, 1]`.
    pub learning_rate: T,
    /// L2 penalty on leaf weights.
    pub lambda: T,
    /// Penalty per additional leaf.
    pub gamma: T,
    pub min_child_hessian: T,
    /// Recorded for provenance; training itself draws no random numbers.
    pub seed: u64,
}

impl<T: Scalar> Default for BoostHyperparams<T> {
    fn default() -> Self {
        Self {
            num_rounds: 50,
            max_depth: 4,
            learning_rate: T::lit(0.1),
            lambda: T::one(),
            gamma: T::zero(),
            min_child_hessian: T::lit(1e-3),
            seed: 0,
        }
    }
}

impl<T: Scalar> BoostHyperparams<T> {
    pub fn validate(&self) -> Result<(), GbdtError> {
        let bad = |msg: String| Err(GbdtError::BadParameter(msg));
        let eta = self.learning_rate;
        if !(eta > T::zero() && eta <= T::one()) {
            return bad(format!("learning_rate must lie in (0, 1], got {eta}"));
        }
        for (name, v) in [
            ("lambda", self.lambda),
            ("gamma", self.gamma),
            ("min_child_hessian", self.min_child_hessian),
        ] {
            if !(v.is_finite() && v >= T::zero()) {
                return bad(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        Ok(())
    }
}

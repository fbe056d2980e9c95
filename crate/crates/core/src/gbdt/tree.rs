use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::loss::{leaf_weight, GradPair};
use super::split::best_split;
use super::{BoostHyperparams, GbdtError};
use crate::scalar::Scalar;

/// Binary regression tree. Serialized as nested objects; a split carries
/// `feature_index`, `threshold`, `left`, `right`, a leaf carries `weight`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode<T> {
    Split {
        feature_index: usize,
        threshold: T,
        left: Box<TreeNode<T>>,
        right: Box<TreeNode<T>>,
    },
    Leaf {
        weight: T,
    },
}

impl<T: Scalar> TreeNode<T> {
    pub fn leaf(weight: T) -> Self {
        TreeNode::Leaf { weight }
    }

    pub fn split(feature_index: usize, threshold: T, left: Self, right: Self) -> Self {
        TreeNode::Split {
            feature_index,
            threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Leaf weight reached by `x`.
    #[inline]
    pub fn predict(&self, x: &[T]) -> T {
        self.predict_with(|f| x[f])
    }

    /// Leaf weight reached when feature `f` reads as `value(f)`.
    #[inline]
    pub fn predict_with(&self, value: impl Fn(usize) -> T) -> T {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { weight } => return *weight,
                TreeNode::Split {
                    feature_index,
                    threshold,
                    left,
                    right,
                } => {
                    node = if value(*feature_index) < *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    pub fn split_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.split_count() + right.split_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Leaf weights, left to right.
    pub fn leaf_weights(&self) -> Vec<T> {
        let mut out = Vec::new();
        self.visit(&mut |node| {
            if let TreeNode::Leaf { weight } = node {
                out.push(*weight);
            }
        });
        out
    }

    /// Feature index of every split node, in pre-order.
    pub fn split_features(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.visit(&mut |node| {
            if let TreeNode::Split { feature_index, .. } = node {
                out.push(*feature_index);
            }
        });
        out
    }

    pub fn features_used(&self) -> BTreeSet<usize> {
        self.split_features().into_iter().collect()
    }

    /// `gamma * T + lambda / 2 * sum(w^2)` for this tree.
    pub fn complexity(&self, lambda: T, gamma: T) -> T {
        let weights = self.leaf_weights();
        let squares: T = weights.iter().map(|&w| w * w).sum();
        gamma * T::from_count(weights.len()) + T::half() * lambda * squares
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a TreeNode<T>)) {
        f(self);
        if let TreeNode::Split { left, right, .. } = self {
            left.visit(f);
            right.visit(f);
        }
    }
}

/// Grows one tree greedily from the rows in `rows`.
///
/// Growth stops at `max_depth`, or when no split has positive gain (which
/// also covers nodes whose rows share a single distinct feature vector).
pub fn build_tree<T: Scalar>(
    x: &[&[T]],
    rows: &[usize],
    grads: &[GradPair<T>],
    params: &BoostHyperparams<T>,
) -> Result<TreeNode<T>, GbdtError> {
    grow(x, rows, grads, params, 0)
}

fn grow<T: Scalar>(
    x: &[&[T]],
    rows: &[usize],
    grads: &[GradPair<T>],
    params: &BoostHyperparams<T>,
    depth: usize,
) -> Result<TreeNode<T>, GbdtError> {
    if depth < params.max_depth {
        if let Some(split) = best_split(x, rows, grads, params) {
            let (left, right): (Vec<usize>, Vec<usize>) = rows
                .iter()
                .partition(|&&r| x[r][split.feature] < split.threshold);
            return Ok(TreeNode::split(
                split.feature,
                split.threshold,
                grow(x, &left, grads, params, depth + 1)?,
                grow(x, &right, grads, params, depth + 1)?,
            ));
        }
    }
    let sum: GradPair<T> = rows.iter().map(|&r| grads[r]).sum();
    Ok(TreeNode::leaf(leaf_weight(sum.g, sum.h, params.lambda)?))
}

//! Edge node health classification with second-order gradient boosted
//! trees, exact Shapley explanations and baseline comparisons.
//!
//! Everything numeric is generic over [`Scalar`]; the aliases below fix the
//! scalar to `f64` or `f32`.

// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod eval;
pub mod explain;
pub mod gbdt;
pub mod scalar;

pub use scalar::Scalar;

pub type Dataset64 = data::Dataset<f64>;
pub type Dataset32 = data::Dataset<f32>;
pub type Model64 = gbdt::BoostedModel<f64>;
pub type Model32 = gbdt::BoostedModel<f32>;
pub type Hyperparams64 = gbdt::BoostHyperparams<f64>;
pub type Hyperparams32 = gbdt::BoostHyperparams<f32>;
pub type Explanation64 = explain::Explanation<f64>;
pub type Explanation32 = explain::Explanation<f32>;
pub type Background64 = explain::BackgroundSet<f64>;
pub type Background32 = explain::BackgroundSet<f32>;

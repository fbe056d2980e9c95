//! Exact Shapley attribution of model margins, plus the importance rankings
//! and per-sample tables built from it.
//!
//! The value of a coalition `S` is the interventional expectation of the
//! margin: features in `S` keep the explained sample's values, the rest are
//! taken from each row of a [`BackgroundSet`] in turn, and the resulting
//! margins are averaged. Shapley values are then the exact weighted sum over
//! all `2^n` coalitions, so `phi0 + sum(phi) == margin(x)` up to rounding.

mod importance;
mod shapley;
mod tables;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::data::Dataset;
use crate::gbdt::GbdtError;
use crate::scalar::Scalar;

pub use importance::{mean_abs_shap, weight_importance, FeatureScore};
pub use shapley::{
    explain_dataset, shapley_exact, shapley_weight, value_function, Coalition, Explanation,
    EFFICIENCY_TOLERANCE, MAX_FEATURES,
};
pub use tables::{
    beeswarm_data, dependence_data, pearson, read_shap_csv, write_shap_csv, BeeswarmRow,
    DependenceRow, DependenceTable,
};

/// Largest accepted background set.
pub const MAX_BACKGROUND: usize = 4096;
/// Background rows sampled from the training data by default.
pub const DEFAULT_BACKGROUND: usize = 256;

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error("sample has {found} features, model expects {expected}")]
    SchemaMismatch { expected: usize, found: usize },
    #[error("exact enumeration supports at most {MAX_FEATURES} features, model has {0}")]
    TooManyFeatures(usize),
    #[error("background set is empty")]
    EmptyBackground,
    #[error("background set has {0} rows, limit is {MAX_BACKGROUND}")]
    BackgroundTooLarge(usize),
    #[error("no explanations given")]
    EmptyInput,
    #[error("explanations do not align with the dataset: {0}")]
    AlignmentMismatch(String),
    #[error("feature index {0} out of range")]
    BadFeatureIndex(usize),
    #[error("bad value in shap table row {row}, column `{column}`")]
    BadValue { row: usize, column: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<GbdtError> for ExplainError {
    fn from(e: GbdtError) -> Self {
        match e {
            GbdtError::SchemaMismatch { expected, found } => {
                ExplainError::SchemaMismatch { expected, found }
            }
            other => ExplainError::AlignmentMismatch(other.to_string()),
        }
    }
}

/// Reference rows that stand in for features outside a coalition.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundSet<T> {
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> BackgroundSet<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self, ExplainError> {
        let first = rows.first().ok_or(ExplainError::EmptyBackground)?;
        if rows.len() > MAX_BACKGROUND {
            return Err(ExplainError::BackgroundTooLarge(rows.len()));
        }
        let width = first.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != width) {
            return Err(ExplainError::SchemaMismatch {
                expected: width,
                found: bad.len(),
            });
        }
        Ok(Self { rows })
    }

    /// At most `max_rows` rows drawn uniformly without replacement (seeded),
    /// kept in dataset order. Smaller datasets are used whole.
    pub fn sample_from(
        data: &Dataset<T>,
        max_rows: usize,
        seed: u64,
    ) -> Result<Self, ExplainError> {
        let mut picked: Vec<usize> = if data.len() <= max_rows {
            (0..data.len()).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            index::sample(&mut rng, data.len(), max_rows).into_vec()
        };
        picked.sort_unstable();
        Self::new(
            picked
                .iter()
                .map(|&i| data.samples()[i].features.clone())
                .collect(),
        )
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.rows[0].len()
    }
}

//! Classification metrics, the KNN and Gaussian naive Bayes baselines, and a
//! model comparison table reporting accuracy and F1 as percentages.

mod baselines;
mod metrics;

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::data::{Dataset, Health};
use crate::gbdt::{BoostedModel, GbdtError};
use crate::scalar::Scalar;

pub use baselines::{knn_predict, GaussianNb, KnnClassifier, NB_VARIANCE_FLOOR};
pub use metrics::{metrics, ClassificationMetrics, ConfusionCounts, UndefinedRatios};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{predictions} predictions but {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("nothing to evaluate")]
    EmptyInput,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset contains unlabeled samples")]
    Unlabeled,
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("training set contains a single class")]
    SingleClass,
    #[error("sample has {found} features, expected {expected}")]
    SchemaMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Model(#[from] GbdtError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Anything that assigns a health label to one feature vector.
pub trait Classifier<T>: Sync {
    fn classify(&self, x: &[T]) -> Result<Health, EvalError>;
}

impl<T: Scalar> Classifier<T> for BoostedModel<T> {
    fn classify(&self, x: &[T]) -> Result<Health, EvalError> {
        Ok(self.predict_label(x)?)
    }
}

/// One line of the comparison table. `accuracy` and `f1` are percentages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub model: String,
    pub accuracy: f64,
    pub f1: f64,
    pub metrics: ClassificationMetrics,
}

impl ComparisonRow {
    pub fn from_metrics(model: impl Into<String>, metrics: ClassificationMetrics) -> Self {
        Self {
            model: model.into(),
            accuracy: 100.0 * metrics.accuracy,
            f1: 100.0 * metrics.f1,
            metrics,
        }
    }
}

/// Labels every sample of `data`, in parallel, keeping sample order.
pub fn predict_all<T: Scalar>(
    classifier: &dyn Classifier<T>,
    data: &Dataset<T>,
) -> Result<Vec<Health>, EvalError> {
    data.samples()
        .par_iter()
        .map(|s| classifier.classify(&s.features))
        .collect()
}

/// Scores each named classifier on `test`; rows follow input order.
pub fn compare<T: Scalar>(
    models: &[(&str, &dyn Classifier<T>)],
    test: &Dataset<T>,
) -> Result<Vec<ComparisonRow>, EvalError> {
    if test.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let labels = test.labels().ok_or(EvalError::Unlabeled)?;
    models
        .iter()
        .map(|(name, model)| {
            let preds = predict_all(*model, test)?;
            Ok(ComparisonRow::from_metrics(
                *name,
                metrics(&preds, &labels)?,
            ))
        })
        .collect()
}

/// Row for predictions produced elsewhere, e.g. by another tool.
pub fn compare_predictions(
    name: &str,
    predictions: &[Health],
    labels: &[Health],
) -> Result<ComparisonRow, EvalError> {
    Ok(ComparisonRow::from_metrics(
        name,
        metrics(predictions, labels)?,
    ))
}

/// Reads external predictions: a CSV whose `prediction` column (or, failing
/// that, its last column) holds 0/1 labels.
pub fn read_predictions<R: std::io::Read>(reader: R) -> Result<Vec<Health>, EvalError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = headers
        .iter()
        .position(|h| h == "prediction")
        .or_else(|| headers.len().checked_sub(1))
        .ok_or_else(|| EvalError::BadParameter("predictions file has no columns".into()))?;
    let mut out = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let cell = record.get(col).unwrap_or("");
        let label = cell
            .parse::<u8>()
            .ok()
            .and_then(Health::from_u8)
            .ok_or_else(|| {
                EvalError::BadParameter(format!("row {row}: `{cell}` is not a 0/1 label"))
            })?;
        out.push(label);
    }
    Ok(out)
}

/// Writes `model,acc,f1` with percentages to two decimals.
pub fn write_comparison_csv<W: Write>(rows: &[ComparisonRow], writer: W) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["model", "acc", "f1"])?;
    for r in rows {
        w.write_record([
            r.model.clone(),
            format!("{:.2}", r.accuracy),
            format!("{:.2}", r.f1),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Aligned plain-text table with columns `Model | Acc | F1-score`.
pub fn render_comparison_text(rows: &[ComparisonRow]) -> String {
    let cells: Vec<[String; 3]> = rows
        .iter()
        .map(|r| {
            [
                r.model.clone(),
                format!("{:.2}", r.accuracy),
                format!("{:.2}", r.f1),
            ]
        })
        .collect();
    let header = ["Model", "Acc", "F1-score"];
    let mut widths = header.map(str::len);
    for c in &cells {
        for (w, s) in widths.iter_mut().zip(c) {
            *w = (*w).max(s.len());
        }
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<w0$} | {:>w1$} | {:>w2$}",
        header[0],
        header[1],
        header[2],
        w0 = widths[0],
        w1 = widths[1],
        w2 = widths[2]
    );
    let _ = writeln!(
        out,
        "{}-+-{}-+-{}",
        "-".repeat(widths[0]),
        "-".repeat(widths[1]),
        "-".repeat(widths[2])
    );
    for c in &cells {
        let _ = writeln!(
            out,
            "{:<w0$} | {:>w1$} | {:>w2$}",
            c[0],
            c[1],
            c[2],
            w0 = widths[0],
            w1 = widths[1],
            w2 = widths[2]
        );
    }
    out.push_str("Acc and F1-score in percent; F1 positive class is healthy (1).\n");
    out
}

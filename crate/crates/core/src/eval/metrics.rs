use serde::Serialize;

use super::EvalError;
use crate::data::Health;

/// Confusion counts with `Healthy` (label 1) as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Ratios whose denominator was zero; each such ratio is reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct UndefinedRatios {
    pub precision: bool,
    pub recall: bool,
    pub f1: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassificationMetrics {
    pub counts: ConfusionCounts,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub undefined: UndefinedRatios,
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

/// Accuracy, precision, recall and F1 of `predictions` against `labels`.
pub fn metrics(
    predictions: &[Health],
    labels: &[Health],
) -> Result<ClassificationMetrics, EvalError> {
    if predictions.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut c = ConfusionCounts::default();
    for (&p, &y) in predictions.iter().zip(labels) {
        match (p.is_healthy(), y.is_healthy()) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    let (accuracy, _) = ratio(c.tp + c.tn, c.total());
    let (precision, p_undef) = ratio(c.tp, c.tp + c.fp);
    let (recall, r_undef) = ratio(c.tp, c.tp + c.fn_);
    // 2PR / (P + R), written over counts: 2tp / (2tp + fp + fn).
    let (f1, f_undef) = if p_undef || r_undef {
        (0.0, true)
    } else {
        ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_)
    };
    let f_undef = f_undef || (!p_undef && !r_undef && precision + recall == 0.0);
    Ok(ClassificationMetrics {
        counts: c,
        accuracy,
        precision,
        recall,
        f1,
        undefined: UndefinedRatios {
            precision: p_undef,
            recall: r_undef,
            f1: f_undef,
        },
    })
}

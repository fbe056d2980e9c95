use std::io::{Read, Write};

use super::{ExplainError, Explanation};
use crate::data::{Dataset, FeatureSchema};
use crate::scalar::Scalar;

/// One point of the beeswarm summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeeswarmRow<T> {
    pub feature: usize,
    pub sample_index: usize,
    pub phi: T,
    /// Feature value min-max scaled over the dataset; 0.5 for a constant feature.
    pub normalized: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DependenceRow<T> {
    pub sample_index: usize,
    pub value: T,
    pub phi: T,
    pub color: T,
}

/// Feature value against its Shapley value, colored by a second feature.
#[derive(Debug, Clone, PartialEq)]
pub struct DependenceTable<T> {
    pub feature: usize,
    pub color_feature: usize,
    pub rows: Vec<DependenceRow<T>>,
}

fn check_alignment<T: Scalar>(
    explanations: &[Explanation<T>],
    dataset: &Dataset<T>,
) -> Result<(), ExplainError> {
    for e in explanations {
        if e.sample_index >= dataset.len() {
            return Err(ExplainError::AlignmentMismatch(format!(
                "sample {} out of range for {} samples",
                e.sample_index,
                dataset.len()
            )));
        }
        if e.phi.len() != dataset.n_features() {
            return Err(ExplainError::AlignmentMismatch(format!(
                "explanation of sample {} has {} values, dataset has {} features",
                e.sample_index,
                e.phi.len(),
                dataset.n_features()
            )));
        }
    }
    Ok(())
}

/// One row per (feature, explained sample), grouped by feature in schema
/// order. Normalization uses the min and max over the whole dataset.
pub fn beeswarm_data<T: Scalar>(
    explanations: &[Explanation<T>],
    dataset: &Dataset<T>,
) -> Result<Vec<BeeswarmRow<T>>, ExplainError> {
    check_alignment(explanations, dataset)?;
    let mut rows = Vec::with_capacity(explanations.len() * dataset.n_features());
    for feature in 0..dataset.n_features() {
        let column = dataset.column(feature);
        let (lo, hi) = column
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        for e in explanations {
            let v = column[e.sample_index];
            let normalized = if hi > lo {
                (v - lo) / (hi - lo)
            } else {
                T::half()
            };
            rows.push(BeeswarmRow {
                feature,
                sample_index: e.sample_index,
                phi: e.phi[feature],
                normalized,
            });
        }
    }
    Ok(rows)
}

/// Pearson correlation; zero when either side has no variance.
pub fn pearson<T: Scalar>(a: &[T], b: &[T]) -> T {
    let n = a.len().min(b.len());
    if n == 0 {
        return T::zero();
    }
    let count = T::from_count(n);
    let mean_a = a[..n].iter().fold(T::zero(), |s, &v| s + v) / count;
    let mean_b = b[..n].iter().fold(T::zero(), |s, &v| s + v) / count;
    let (mut cov, mut var_a, mut var_b) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - mean_a, y - mean_b);
        cov = cov + dx * dy;
        var_a = var_a + dx * dx;
        var_b = var_b + dy * dy;
    }
    let denom = (var_a * var_b).sqrt();
    if denom > T::zero() && denom.is_finite() {
        cov / denom
    } else {
        T::zero()
    }
}

/// Dependence table for `feature`. Without an explicit `color_feature` the
/// feature (other than `feature`) whose values correlate most strongly, in
/// absolute value, with `phi_feature` is chosen; ties go to the lower index.
/// A single-feature schema colors by the feature itself.
pub fn dependence_data<T: Scalar>(
    explanations: &[Explanation<T>],
    dataset: &Dataset<T>,
    feature: usize,
    color_feature: Option<usize>,
) -> Result<DependenceTable<T>, ExplainError> {
    let n = dataset.n_features();
    for f in std::iter::once(feature).chain(color_feature) {
        if f >= n {
            return Err(ExplainError::BadFeatureIndex(f));
        }
    }
    check_alignment(explanations, dataset)?;
    let value_of = |e: &Explanation<T>, f: usize| dataset.samples()[e.sample_index].features[f];

    let color_feature = color_feature.unwrap_or_else(|| {
        let phis: Vec<T> = explanations.iter().map(|e| e.phi[feature]).collect();
        let mut best = (feature, T::neg_infinity());
        for candidate in (0..n).filter(|&c| c != feature) {
            let values: Vec<T> = explanations
                .iter()
                .map(|e| value_of(e, candidate))
                .collect();
            let r = pearson(&values, &phis).abs();
            if r > best.1 {
                best = (candidate, r);
            }
        }
        best.0
    });

    let rows = explanations
        .iter()
        .map(|e| DependenceRow {
            sample_index: e.sample_index,
            value: value_of(e, feature),
            phi: e.phi[feature],
            color: value_of(e, color_feature),
        })
        .collect();
    Ok(DependenceTable {
        feature,
        color_feature,
        rows,
    })
}

/// Writes explanations as
/// `sample_index,phi0,phi_<feature>...,margin,efficiency_ok`.
pub fn write_shap_csv<T: Scalar, W: Write>(
    explanations: &[Explanation<T>],
    schema: &FeatureSchema,
    writer: W,
) -> Result<(), ExplainError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["sample_index".to_string(), "phi0".to_string()];
    header.extend(schema.names().iter().map(|n| format!("phi_{n}")));
    header.push("margin".into());
    header.push("efficiency_ok".into());
    w.write_record(&header)?;
    for e in explanations {
        if e.phi.len() != schema.len() {
            return Err(ExplainError::AlignmentMismatch(format!(
                "explanation of sample {} has {} values, schema has {}",
                e.sample_index,
                e.phi.len(),
                schema.len()
            )));
        }
        let mut record = vec![e.sample_index.to_string(), e.phi0.to_string()];
        record.extend(e.phi.iter().map(T::to_string));
        record.push(e.margin.to_string());
        record.push(u8::from(e.is_efficient()).to_string());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table produced by [`write_shap_csv`] for the given schema.
pub fn read_shap_csv<T: Scalar, R: Read>(
    reader: R,
    schema: &FeatureSchema,
) -> Result<Vec<Explanation<T>>, ExplainError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| ExplainError::AlignmentMismatch(format!("missing column `{name}`")))
    };
    let index_col = find("sample_index")?;
    let phi0_col = find("phi0")?;
    let margin_col = find("margin")?;
    let phi_cols: Vec<(usize, String)> = schema
        .names()
        .iter()
        .map(|n| {
            let name = format!("phi_{n}");
            find(&name).map(|c| (c, name))
        })
        .collect::<Result<_, _>>()?;

    let mut out = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let field = |col: usize, name: &str| -> Result<T, ExplainError> {
            record
                .get(col)
                .and_then(|s| s.parse::<T>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| ExplainError::BadValue {
                    row,
                    column: name.to_string(),
                })
        };
        let sample_index = record
            .get(index_col)
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| ExplainError::BadValue {
                row,
                column: "sample_index".into(),
            })?;
        let phi = phi_cols
            .iter()
            .map(|(c, name)| field(*c, name))
            .collect::<Result<_, _>>()?;
        out.push(Explanation {
            sample_index,
            phi0: field(phi0_col, "phi0")?,
            phi,
            margin: field(margin_col, "margin")?,
        });
    }
    Ok(out)
}

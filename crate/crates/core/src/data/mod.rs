//! Telemetry schema, samples and datasets.
//!
//! A [`Dataset`] is an ordered list of [`Sample`]s sharing one
//! [`FeatureSchema`]. Samples are validated on construction: every feature
//! value is finite, and features with a known telemetry meaning must lie in
//! their physical range (see [`telemetry_bounds`]). Out-of-range values are
//! rejected rather than clamped.

mod csv_io;
mod split;
mod synthetic;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub use csv_io::{format_sig12, load_csv, read_csv, write_csv, write_csv_path, LABEL_COLUMN};
pub use split::{train_test_split, train_test_split_indices};
pub use synthetic::{generate_synthetic, NominalProfile, Signature, NOMINAL_PROFILES};

/// Canonical telemetry feature names, in schema order.
pub const TELEMETRY_FEATURES: [&str; 8] = [
    "cpu_usage",
    "memory_usage",
    "disk_io",
    "network_latency",
    "power_consumption",
    "temperature",
    "process_count",
    "response_time",
];

/// Schema indices of the canonical telemetry features.
pub mod feature {
    pub const CPU_USAGE: usize = 0;
    pub const MEMORY_USAGE: usize = 1;
    pub const DISK_IO: usize = 2;
    pub const NETWORK_LATENCY: usize = 3;
    pub const POWER_CONSUMPTION: usize = 4;
    pub const TEMPERATURE: usize = 5;
    pub const PROCESS_COUNT: usize = 6;
    pub const RESPONSE_TIME: usize = 7;
}

/// Legal closed range of a telemetry feature, looked up by name.
///
/// Unknown names are unconstrained apart from finiteness.
pub fn telemetry_bounds(name: &str) -> Option<(f64, f64)> {
    match name {
        "cpu_usage" | "memory_usage" => Some((0.0, 1.0)),
        "temperature" => Some((-20.0, 150.0)),
        "disk_io" | "network_latency" | "power_consumption" | "process_count" | "response_time" => {
            Some((0.0, f64::INFINITY))
        }
        _ => None,
    }
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("bad value in sample {row}, column `{column}`")]
    BadValue { row: usize, column: String },
    #[error("sample {row} has {found} features, schema expects {expected}")]
    WidthMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = DataError> = std::result::Result<T, E>;

/// Binary node health label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Health {
    Abnormal = 0,
    Healthy = 1,
}

impl Health {
    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(Health::Abnormal),
            1 => Some(Health::Healthy),
            _ => None,
        }
    }

    pub fn is_healthy(self) -> bool {
        self == Health::Healthy
    }
}

impl From<bool> for Health {
    fn from(healthy: bool) -> Self {
        if healthy {
            Health::Healthy
        } else {
            Health::Abnormal
        }
    }
}

impl From<Health> for u8 {
    fn from(h: Health) -> u8 {
        h.as_u8()
    }
}

impl TryFrom<u8> for Health {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, Self::Error> {
        Health::from_u8(v).ok_or_else(|| format!("label must be 0 or 1, got {v}"))
    }
}

impl fmt::Display for Health {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// Ordered, duplicate-free list of feature names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<String>", try_from = "Vec<String>")]
pub struct FeatureSchema {
    names: Vec<String>,
}

impl FeatureSchema {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(DataError::InvalidSchema("no features".into()));
        }
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(DataError::InvalidSchema(format!(
                    "feature {i} has an empty name"
                )));
            }
            if names[..i].contains(name) {
                return Err(DataError::InvalidSchema(format!(
                    "duplicate feature `{name}`"
                )));
            }
        }
        Ok(Self { names })
    }

    /// The eight canonical edge-node telemetry features.
    pub fn telemetry() -> Self {
        Self {
            names: TELEMETRY_FEATURES.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn is_telemetry(&self) -> bool {
        self.names.iter().map(String::as_str).eq(TELEMETRY_FEATURES)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.names.get(index).map(String::as_str)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

impl From<FeatureSchema> for Vec<String> {
    fn from(s: FeatureSchema) -> Self {
        s.names
    }
}

impl TryFrom<Vec<String>> for FeatureSchema {
    type Error = DataError;

    fn try_from(names: Vec<String>) -> Result<Self> {
        FeatureSchema::new(names)
    }
}

/// One node observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub features: Vec<T>,
    pub label: Option<Health>,
}

impl<T> Sample<T> {
    pub fn new(features: Vec<T>, label: Option<Health>) -> Self {
        Self { features, label }
    }

    pub fn labeled(features: Vec<T>, label: Health) -> Self {
        Self::new(features, Some(label))
    }
}

/// Validated, ordered collection of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T = f64> {
    schema: FeatureSchema,
    samples: Vec<Sample<T>>,
}

impl<T: Scalar> Dataset<T> {
    /// Builds a dataset, checking widths, finiteness, label presence rules and
    /// telemetry ranges. Sample order is kept as given.
    pub fn new(schema: FeatureSchema, samples: Vec<Sample<T>>) -> Result<Self> {
        let bounds: Vec<Option<(f64, f64)>> =
            schema.names().iter().map(|n| telemetry_bounds(n)).collect();
        for (row, sample) in samples.iter().enumerate() {
            if sample.features.len() != schema.len() {
                return Err(DataError::WidthMismatch {
                    row,
                    expected: schema.len(),
                    found: sample.features.len(),
                });
            }
            for (col, &v) in sample.features.iter().enumerate() {
                if !value_is_legal(v, bounds[col]) {
                    return Err(DataError::BadValue {
                        row,
                        column: schema.names()[col].clone(),
                    });
                }
            }
        }
        Ok(Self { schema, samples })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn samples(&self) -> &[Sample<T>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn sample(&self, index: usize) -> Option<&Sample<T>> {
        self.samples.get(index)
    }

    /// Feature rows as borrowed slices, in sample order.
    pub fn rows(&self) -> Vec<&[T]> {
        self.samples.iter().map(|s| s.features.as_slice()).collect()
    }

    /// Values of one feature column, in sample order.
    pub fn column(&self, feature: usize) -> Vec<T> {
        self.samples.iter().map(|s| s.features[feature]).collect()
    }

    /// Labels of every sample, or `None` if any sample is unlabeled.
    pub fn labels(&self) -> Option<Vec<Health>> {
        self.samples.iter().map(|s| s.label).collect()
    }

    pub fn is_labeled(&self) -> bool {
        !self.samples.is_empty() && self.samples.iter().all(|s| s.label.is_some())
    }

    /// New dataset holding the given samples, in the order of `indices`.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            schema: self.schema.clone(),
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
        }
    }

    /// Keeps only the listed feature columns, in the listed order.
    pub fn select_features(&self, features: &[usize]) -> Result<Self> {
        let names: Vec<String> = features
            .iter()
            .map(|&f| {
                self.schema.name(f).map(str::to_string).ok_or_else(|| {
                    DataError::BadParameter(format!("feature index {f} out of range"))
                })
            })
            .collect::<Result<_>>()?;
        let schema = FeatureSchema::new(names)?;
        let samples = self
            .samples
            .iter()
            .map(|s| Sample::new(features.iter().map(|&f| s.features[f]).collect(), s.label))
            .collect();
        Ok(Self { schema, samples })
    }
}

pub(crate) fn value_is_legal<T: Scalar>(v: T, bounds: Option<(f64, f64)>) -> bool {
    if !v.is_finite() {
        return false;
    }
    match bounds {
        Some((lo, hi)) => {
            let x = v.to_f64_lossy();
            x >= lo && x <= hi
        }
        None => true,
    }
}

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{DataError, Dataset, FeatureSchema, Health, Result, Sample};
use crate::scalar::Scalar;

/// Optional label column name.
pub const LABEL_COLUMN: &str = "health_status";

/// Loads a telemetry CSV. Columns are matched by header name; unknown
/// columns are ignored. Row order is preserved.
pub fn load_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<Dataset<T>> {
    read_csv(File::open(path)?)
}

pub fn read_csv<T: Scalar, R: Read>(reader: R) -> Result<Dataset<T>> {
    let schema = FeatureSchema::telemetry();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let position = |name: &str| headers.iter().position(|h| h == name);

    let columns: Vec<usize> = schema
        .names()
        .iter()
        .map(|name| position(name).ok_or_else(|| DataError::MissingColumn(name.clone())))
        .collect::<Result<_>>()?;
    let label_column = position(LABEL_COLUMN);

    let mut samples = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let mut features = Vec::with_capacity(columns.len());
        for (name, &col) in schema.names().iter().zip(&columns) {
            let bad = || DataError::BadValue {
                row,
                column: name.clone(),
            };
            let v: T = record
                .get(col)
                .ok_or_else(bad)?
                .parse()
                .map_err(|_| bad())?;
            features.push(v);
        }
        let label = match label_column.and_then(|c| record.get(c)) {
            None | Some("") => None,
            Some(text) => Some(parse_label(text).ok_or_else(|| DataError::BadValue {
                row,
                column: LABEL_COLUMN.to_string(),
            })?),
        };
        samples.push(Sample::new(features, label));
    }
    if samples.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    Dataset::new(schema, samples)
}

fn parse_label(text: &str) -> Option<Health> {
    match text {
        "0" => Some(Health::Abnormal),
        "1" => Some(Health::Healthy),
        _ => match text.parse::<f64>().ok()? {
            0.0 => Some(Health::Abnormal),
            1.0 => Some(Health::Healthy),
            _ => None,
        },
    }
}

/// Shortest decimal text of `x` after rounding to 12 significant digits.
pub fn format_sig12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    format!("{rounded}")
}

/// Writes the dataset with a header row. The label column is emitted when
/// any sample carries a label; unlabeled cells are left empty.
pub fn write_csv<T: Scalar, W: Write>(dataset: &Dataset<T>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let with_label = dataset.samples().iter().any(|s| s.label.is_some());
    let mut header: Vec<&str> = dataset
        .schema()
        .names()
        .iter()
        .map(String::as_str)
        .collect();
    if with_label {
        header.push(LABEL_COLUMN);
    }
    w.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for sample in dataset.samples() {
        record.clear();
        record.extend(
            sample
                .features
                .iter()
                .map(|v| format_sig12(v.to_f64_lossy())),
        );
        if with_label {
            record.push(sample.label.map(|l| l.to_string()).unwrap_or_default());
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_path<T: Scalar>(dataset: &Dataset<T>, path: impl AsRef<Path>) -> Result<()> {
    write_csv(dataset, File::create(path)?)
}

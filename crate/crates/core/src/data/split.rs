use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DataError, Dataset, Health, Result};
use crate::scalar::Scalar;

/// Stratified (when fully labeled) train/test partition of sample indices.
///
/// Each class contributes `round(class_size * test_fraction)` samples to the
/// test side. Both index lists are returned in ascending order so the
/// resulting datasets keep the input's sample order.
pub fn train_test_split_indices<T: Scalar>(
    dataset: &Dataset<T>,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DataError::BadParameter(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups: Vec<Vec<usize>> = match dataset.labels() {
        Some(labels) => [Health::Abnormal, Health::Healthy]
            .iter()
            .map(|&class| (0..labels.len()).filter(|&i| labels[i] == class).collect())
            .collect(),
        None => vec![(0..dataset.len()).collect()],
    };

    let mut train = Vec::with_capacity(dataset.len());
    let mut test = Vec::new();
    for mut group in groups {
        group.shuffle(&mut rng);
        let n_test = ((group.len() as f64) * test_fraction).round() as usize;
        test.extend_from_slice(&group[..n_test]);
        train.extend_from_slice(&group[n_test..]);
    }
    if train.is_empty() || test.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn train_test_split<T: Scalar>(
    dataset: &Dataset<T>,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset<T>, Dataset<T>)> {
    let (train, test) = train_test_split_indices(dataset, test_fraction, seed)?;
    Ok((dataset.subset(&train), dataset.subset(&test)))
}

//! KNN and Gaussian naive Bayes reference classifiers.

use super::{Classifier, EvalError};
use crate::data::{Dataset, Health};
use crate::scalar::{cmp_scalar, Scalar};

/// Variance floor for the naive Bayes class-conditional Gaussians.
pub const NB_VARIANCE_FLOOR: f64 = 1e-9;

fn labeled<T: Scalar>(train: &Dataset<T>) -> Result<Vec<Health>, EvalError> {
    if train.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    train.labels().ok_or(EvalError::Unlabeled)
}

fn check_width(expected: usize, x: &[impl Sized]) -> Result<(), EvalError> {
    if x.len() != expected {
        return Err(EvalError::SchemaMismatch {
            expected,
            found: x.len(),
        });
    }
    Ok(())
}

/// k-nearest-neighbour vote under Euclidean distance on min-max scaled
/// features. Scaling is fitted on the training rows; a constant feature
/// scales to zero everywhere.
#[derive(Debug, Clone)]
pub struct KnnClassifier<T> {
    k: usize,
    mins: Vec<T>,
    ranges: Vec<T>,
    rows: Vec<Vec<T>>,
    labels: Vec<Health>,
}

impl<T: Scalar> KnnClassifier<T> {
    pub fn fit(train: &Dataset<T>, k: usize) -> Result<Self, EvalError> {
        let labels = labeled(train)?;
        if k == 0 || k > train.len() {
            return Err(EvalError::BadParameter(format!(
                "k must lie in 1..={}, got {k}",
                train.len()
            )));
        }
        let n = train.n_features();
        let mut mins = vec![T::infinity(); n];
        let mut maxs = vec![T::neg_infinity(); n];
        for s in train.samples() {
            for (f, &v) in s.features.iter().enumerate() {
                mins[f] = mins[f].min(v);
                maxs[f] = maxs[f].max(v);
            }
        }
        let ranges = mins.iter().zip(&maxs).map(|(&lo, &hi)| hi - lo).collect();
        let mut knn = Self {
            k,
            mins,
            ranges,
            rows: Vec::new(),
            labels,
        };
        knn.rows = train
            .samples()
            .iter()
            .map(|s| knn.scale(&s.features))
            .collect();
        Ok(knn)
    }

    fn scale(&self, x: &[T]) -> Vec<T> {
        x.iter()
            .zip(self.mins.iter().zip(&self.ranges))
            .map(|(&v, (&lo, &range))| {
                if range > T::zero() {
                    (v - lo) / range
                } else {
                    T::zero()
                }
            })
            .collect()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Indices of the `k` nearest training rows, nearest first; equal
    /// distances are ordered by training index.
    pub fn neighbours(&self, x: &[T]) -> Result<Vec<usize>, EvalError> {
        check_width(self.mins.len(), x)?;
        let q = self.scale(x);
        let mut dist: Vec<(T, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let d2 = r
                    .iter()
                    .zip(&q)
                    .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b));
                (d2, i)
            })
            .collect();
        let by_key = |a: &(T, usize), b: &(T, usize)| cmp_scalar(&a.0, &b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, by_key);
            dist.truncate(self.k);
        }
        dist.sort_by(by_key);
        Ok(dist.into_iter().map(|(_, i)| i).collect())
    }
}

impl<T: Scalar> Classifier<T> for KnnClassifier<T> {
    /// Majority label of the neighbours; a tied vote is `Healthy`.
    fn classify(&self, x: &[T]) -> Result<Health, EvalError> {
        let neighbours = self.neighbours(x)?;
        let healthy = neighbours
            .iter()
            .filter(|&&i| self.labels[i].is_healthy())
            .count();
        Ok(Health::from(2 * healthy >= neighbours.len()))
    }
}

/// Convenience wrapper: fit on `train` and classify one query.
pub fn knn_predict<T: Scalar>(
    train: &Dataset<T>,
    query: &[T],
    k: usize,
) -> Result<Health, EvalError> {
    KnnClassifier::fit(train, k)?.classify(query)
}

/// Gaussian naive Bayes with per-class feature means and (population)
/// variances floored at [`NB_VARIANCE_FLOOR`].
#[derive(Debug, Clone)]
pub struct GaussianNb<T> {
    /// Indexed by `Health as usize`.
    log_priors: [T; 2],
    means: [Vec<T>; 2],
    variances: [Vec<T>; 2],
}

impl<T: Scalar> GaussianNb<T> {
    pub fn fit(train: &Dataset<T>) -> Result<Self, EvalError> {
        let labels = labeled(train)?;
        let n = train.n_features();
        let mut counts = [0usize; 2];
        let mut sums = [vec![T::zero(); n], vec![T::zero(); n]];
        for (s, &y) in train.samples().iter().zip(&labels) {
            let c = y as usize;
            counts[c] += 1;
            for (acc, &v) in sums[c].iter_mut().zip(&s.features) {
                *acc = *acc + v;
            }
        }
        if counts.contains(&0) {
            return Err(EvalError::SingleClass);
        }
        let means: [Vec<T>; 2] = [0, 1].map(|c| {
            sums[c]
                .iter()
                .map(|&s| s / T::from_count(counts[c]))
                .collect()
        });
        let mut sq = [vec![T::zero(); n], vec![T::zero(); n]];
        for (s, &y) in train.samples().iter().zip(&labels) {
            let c = y as usize;
            for ((acc, &v), &mu) in sq[c].iter_mut().zip(&s.features).zip(&means[c]) {
                *acc = *acc + (v - mu) * (v - mu);
            }
        }
        let floor = T::lit(NB_VARIANCE_FLOOR);
        let variances = [0, 1].map(|c| {
            sq[c]
                .iter()
                .map(|&s| (s / T::from_count(counts[c])).max(floor))
                .collect()
        });
        let total = T::from_count(labels.len());
        let log_priors = [0, 1].map(|c| (T::from_count(counts[c]) / total).ln());
        Ok(Self {
            log_priors,
            means,
            variances,
        })
    }

    /// Unnormalized log posterior of each class, `[abnormal, healthy]`.
    pub fn log_posteriors(&self, x: &[T]) -> Result<[T; 2], EvalError> {
        check_width(self.means[0].len(), x)?;
        let two_pi = T::lit(std::f64::consts::TAU);
        Ok([0, 1].map(|c| {
            x.iter()
                .zip(self.means[c].iter().zip(&self.variances[c]))
                .fold(self.log_priors[c], |acc, (&v, (&mu, &var))| {
                    let d = v - mu;
                    acc - T::half() * (two_pi * var).ln() - d * d / (var + var)
                })
        }))
    }
}

impl<T: Scalar> Classifier<T> for GaussianNb<T> {
    /// Class with the larger posterior; equal posteriors give `Healthy`.
    fn classify(&self, x: &[T]) -> Result<Health, EvalError> {
        let [abnormal, healthy] = self.log_posteriors(x)?;
        Ok(Health::from(healthy >= abnormal))
    }
}

//! Labeled synthetic telemetry.
//!
//! Healthy samples draw every feature from a normal distribution truncated to
//! the feature's legal range. Abnormal samples additionally pick between two
//! and five anomaly signatures; each selected signature shifts the mean of
//! its features by a multiple of that feature's standard deviation.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{feature, telemetry_bounds, DataError, Dataset, FeatureSchema, Health, Result, Sample};
use crate::scalar::Scalar;

/// Nominal (healthy) distribution of one telemetry feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NominalProfile {
    pub mean: f64,
    pub std_dev: f64,
}

/// Healthy distributions in schema order.
pub const NOMINAL_PROFILES: [NominalProfile; 8] = [
    NominalProfile {
        mean: 0.45,
        std_dev: 0.15,
    },
    NominalProfile {
        mean: 0.50,
        std_dev: 0.15,
    },
    NominalProfile {
        mean: 80.0,
        std_dev: 25.0,
    },
    NominalProfile {
        mean: 20.0,
        std_dev: 8.0,
    },
    NominalProfile {
        mean: 120.0,
        std_dev: 20.0,
    },
    NominalProfile {
        mean: 55.0,
        std_dev: 8.0,
    },
    NominalProfile {
        mean: 120.0,
        std_dev: 30.0,
    },
    NominalProfile {
        mean: 150.0,
        std_dev: 40.0,
    },
];

/// Anomaly signatures an abnormal sample can exhibit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signature {
    SlowResponse,
    PowerSurge,
    DiskBurst,
    /// High network latency together with starved CPU.
    LatencyCpuStarvation,
    Overheat,
}

impl Signature {
    pub const ALL: [Signature; 5] = [
        Signature::SlowResponse,
        Signature::PowerSurge,
        Signature::DiskBurst,
        Signature::LatencyCpuStarvation,
        Signature::Overheat,
    ];

    /// Mean shifts, in standard deviations, as `(feature, sigmas)` pairs.
    pub fn shifts(self) -> &'static [(usize, f64)] {
        match self {
            Signature::SlowResponse => &[(feature::RESPONSE_TIME, 3.0)],
            Signature::PowerSurge => &[(feature::POWER_CONSUMPTION, 3.0)],
            Signature::DiskBurst => &[(feature::DISK_IO, 3.0)],
            Signature::LatencyCpuStarvation => {
                &[(feature::NETWORK_LATENCY, 3.0), (feature::CPU_USAGE, -2.0)]
            }
            Signature::Overheat => &[(feature::TEMPERATURE, 3.0)],
        }
    }
}

/// Generates `n` labeled samples, `round(n * anomaly_rate)` of them abnormal.
///
/// The output depends only on `(n, anomaly_rate, seed)`.
pub fn generate_synthetic<T: Scalar>(n: usize, anomaly_rate: f64, seed: u64) -> Result<Dataset<T>> {
    if n < 2 {
        return Err(DataError::BadParameter(format!(
            "need at least 2 samples, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&anomaly_rate) {
        return Err(DataError::BadParameter(format!(
            "anomaly rate must lie in [0, 1], got {anomaly_rate}"
        )));
    }
    let schema = FeatureSchema::telemetry();
    let bounds: Vec<(f64, f64)> = schema
        .names()
        .iter()
        .map(|n| telemetry_bounds(n).expect("telemetry feature has bounds"))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_abnormal = ((n as f64) * anomaly_rate).round() as usize;
    let mut labels = vec![Health::Healthy; n];
    for i in index::sample(&mut rng, n, n_abnormal) {
        labels[i] = Health::Abnormal;
    }

    let mut signatures = Signature::ALL;
    let mut samples = Vec::with_capacity(n);
    for label in labels {
        let mut means: Vec<f64> = NOMINAL_PROFILES.iter().map(|p| p.mean).collect();
        if label == Health::Abnormal {
            let k = rng.random_range(2..=Signature::ALL.len());
            let (chosen, _) = signatures.partial_shuffle(&mut rng, k);
            for sig in chosen.iter() {
                for &(f, sigmas) in sig.shifts() {
                    means[f] += sigmas * NOMINAL_PROFILES[f].std_dev;
                }
            }
        }
        let features = means
            .iter()
            .zip(NOMINAL_PROFILES.iter())
            .zip(&bounds)
            .enumerate()
            .map(|(f, ((&mean, profile), &(lo, hi)))| {
                let v = truncated_normal(&mut rng, mean, profile.std_dev, lo, hi);
                let v = if f == feature::PROCESS_COUNT {
                    v.round()
                } else {
                    v
                };
                T::lit(v)
            })
            .collect();
        samples.push(Sample::labeled(features, label));
    }
    Dataset::new(schema, samples)
}

/// Rejection sampling from N(mean, sd) restricted to `[lo, hi]`.
fn truncated_normal<R: Rng>(rng: &mut R, mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    let normal = Normal::new(mean, sd).expect("positive standard deviation");
    loop {
        let v = normal.sample(rng);
        if v >= lo && v <= hi {
            return v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{value_is_legal, write_csv, TELEMETRY_FEATURES};
    use proptest::prelude::*;

    fn csv_bytes(d: &Dataset<f64>) -> Vec<u8> {
        let mut buf = Vec::new();
        write_csv(d, &mut buf).unwrap();
        buf
    }

    #[test]
    fn deterministic_per_seed() {
        let a: Dataset<f64> = generate_synthetic(1000, 0.3, 42).unwrap();
        let b: Dataset<f64> = generate_synthetic(1000, 0.3, 42).unwrap();
        assert_eq!(csv_bytes(&a), csv_bytes(&b));
        let c: Dataset<f64> = generate_synthetic(1000, 0.3, 43).unwrap();
        assert_ne!(csv_bytes(&a), csv_bytes(&c));
    }

    #[test]
    fn zero_rate_is_all_healthy() {
        let d: Dataset<f64> = generate_synthetic(100, 0.0, 7).unwrap();
        assert_eq!(d.len(), 100);
        assert!(d.samples().iter().all(|s| s.label == Some(Health::Healthy)));
    }

    #[test]
    fn class_balance_and_ranges() {
        let d: Dataset<f64> = generate_synthetic(10_000, 0.3, 1).unwrap();
        let abnormal = d
            .samples()
            .iter()
            .filter(|s| s.label == Some(Health::Abnormal))
            .count();
        assert_eq!(abnormal, 3000);
        assert_eq!(d.len() - abnormal, 7000);
        for s in d.samples() {
            for (f, v) in s.features.iter().enumerate() {
                let (lo, hi) = telemetry_bounds(TELEMETRY_FEATURES[f]).unwrap();
                assert!(*v >= lo && *v <= hi);
            }
            assert_eq!(s.features[feature::PROCESS_COUNT].fract(), 0.0);
        }
    }

    #[test]
    fn abnormal_samples_are_shifted() {
        let d: Dataset<f64> = generate_synthetic(4000, 0.5, 3).unwrap();
        let mean_rt = |h: Health| {
            let v: Vec<f64> = d
                .samples()
                .iter()
                .filter(|s| s.label == Some(h))
                .map(|s| s.features[feature::RESPONSE_TIME])
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!(mean_rt(Health::Abnormal) > mean_rt(Health::Healthy) + 40.0);
    }

    #[test]
    fn bad_parameters() {
        assert!(matches!(
            generate_synthetic::<f64>(1, 0.3, 0),
            Err(DataError::BadParameter(_))
        ));
        assert!(matches!(
            generate_synthetic::<f64>(10, 1.5, 0),
            Err(DataError::BadParameter(_))
        ));
        assert!(matches!(
            generate_synthetic::<f64>(10, -0.1, 0),
            Err(DataError::BadParameter(_))
        ));
    }

    #[test]
    fn f32_generation_matches_f64_after_rounding() {
        let a: Dataset<f64> = generate_synthetic(50, 0.3, 9).unwrap();
        let b: Dataset<f32> = generate_synthetic(50, 0.3, 9).unwrap();
        for (x, y) in a.samples().iter().zip(b.samples()) {
            assert_eq!(x.label, y.label);
            for (p, q) in x.features.iter().zip(&y.features) {
                assert_eq!(*p as f32, *q);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn generated_samples_are_always_legal(seed in any::<u64>(), n in 2usize..200, rate in 0.0f64..=1.0) {
            let d: Dataset<f64> = generate_synthetic(n, rate, seed).unwrap();
            prop_assert_eq!(d.len(), n);
            let expected_abnormal = ((n as f64) * rate).round() as usize;
            let abnormal = d.samples().iter().filter(|s| s.label == Some(Health::Abnormal)).count();
            prop_assert_eq!(abnormal, expected_abnormal);
            for s in d.samples() {
                prop_assert!(s.label.is_some());
                for (f, &v) in s.features.iter().enumerate() {
                    prop_assert!(value_is_legal(v, telemetry_bounds(TELEMETRY_FEATURES[f])));
                }
            }
        }
    }
}

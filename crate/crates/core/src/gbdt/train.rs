use super::loss::{grad_hess, logit, mean_log_loss, GradPair};
use super::model::BoostedModel;
use super::tree::build_tree;
use super::{BoostHyperparams, GbdtError};
use crate::data::{Dataset, Health};
use crate::scalar::Scalar;

/// The positive-class prior is clamped to `[1e-6, 1 - 1e-6]` before taking
/// its logit, so single-class training sets still give a finite base score.
pub const PRIOR_CLAMP: f64 = 1e-6;

/// Result of [`train`]: the model and the mean training log-loss after each
/// round.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome<T> {
    pub model: BoostedModel<T>,
    pub round_log_loss: Vec<T>,
}

/// Fits `params.num_rounds` trees to a fully labeled dataset.
///
/// Deterministic: the same data and parameters always produce the same model.
pub fn train<T: Scalar>(
    data: &Dataset<T>,
    params: &BoostHyperparams<T>,
) -> Result<TrainOutcome<T>, GbdtError> {
    params.validate()?;
    if data.is_empty() {
        return Err(GbdtError::EmptyDataset);
    }
    let labels = data.labels().ok_or(GbdtError::Unlabeled)?;
    let x = data.rows();
    let rows: Vec<usize> = (0..data.len()).collect();

    let positives = labels.iter().filter(|l| l.is_healthy()).count();
    let prior = T::from_count(positives) / T::from_count(labels.len());
    let clamp = T::lit(PRIOR_CLAMP);
    let base_score = logit(prior.max(clamp).min(T::one() - clamp));

    let mut margins = vec![base_score; data.len()];
    let mut grads = vec![GradPair::default(); data.len()];
    let mut trees = Vec::with_capacity(params.num_rounds);
    let mut round_log_loss = Vec::with_capacity(params.num_rounds);

    for _ in 0..params.num_rounds {
        for ((g, &m), &y) in grads.iter_mut().zip(&margins).zip(&labels) {
            *g = grad_hess(m, y);
        }
        let tree = build_tree(&x, &rows, &grads, params)?;
        for (m, xi) in margins.iter_mut().zip(&x) {
            *m = *m + params.learning_rate * tree.predict(xi);
        }
        trees.push(tree);
        round_log_loss.push(mean_log_loss(&margins, &labels));
    }

    let model = BoostedModel::new(
        data.schema().clone(),
        base_score,
        params.learning_rate,
        trees,
        *params,
    )?;
    Ok(TrainOutcome {
        model,
        round_log_loss,
    })
}

/// Mean training log-loss of the model's base score alone.
pub fn initial_log_loss<T: Scalar>(model: &BoostedModel<T>, labels: &[Health]) -> T {
    let margins = vec![model.base_score(); labels.len()];
    mean_log_loss(&margins, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, FeatureSchema, Sample};
    use crate::gbdt::TreeNode;

    fn tiny(labels: &[u8]) -> Dataset<f64> {
        let schema = FeatureSchema::new(["a", "b"]).unwrap();
        let samples = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                Sample::labeled(
                    vec![i as f64, (i * 7 % 5) as f64],
                    Health::from_u8(l).unwrap(),
                )
            })
            .collect();
        Dataset::new(schema, samples).unwrap()
    }

    #[test]
    fn single_class_degenerates_to_prior() {
        let d = tiny(&[1, 1, 1, 1, 1, 1]);
        let out = train(&d, &BoostHyperparams::default()).unwrap();
        let base = out.model.base_score();
        assert!(base > 0.0);
        assert!((base - (1.0f64 - 1e-6).ln() + (1e-6f64).ln()).abs() < 1e-9);
        for s in d.samples() {
            assert!(out.model.predict_proba(&s.features).unwrap() >= 0.9);
        }
    }

    #[test]
    fn empty_and_unlabeled() {
        let schema = FeatureSchema::new(["a"]).unwrap();
        let empty: Dataset<f64> = Dataset::new(schema.clone(), vec![]).unwrap();
        assert!(matches!(
            train(&empty, &BoostHyperparams::default()),
            Err(GbdtError::EmptyDataset)
        ));
        let unlabeled = Dataset::new(schema, vec![Sample::new(vec![1.0], None)]).unwrap();
        assert!(matches!(
            train(&unlabeled, &BoostHyperparams::default()),
            Err(GbdtError::Unlabeled)
        ));
    }

    #[test]
    fn zero_rounds_is_constant() {
        let d = tiny(&[0, 1, 1, 0, 1]);
        let params = BoostHyperparams {
            num_rounds: 0,
            ..Default::default()
        };
        let out = train(&d, &params).unwrap();
        assert!(out.model.trees().is_empty());
        assert!(out.round_log_loss.is_empty());
        let m0 = out.model.predict_margin(&[0.0, 0.0]).unwrap();
        assert_eq!(m0, out.model.predict_margin(&[4.0, 3.0]).unwrap());
        assert!((m0 - (0.6f64 / 0.4).ln()).abs() < 1e-12);
    }

    #[test]
    fn log_has_one_entry_per_round_and_decreases() {
        let d: Dataset<f64> = generate_synthetic(400, 0.3, 8).unwrap();
        let params = BoostHyperparams {
            num_rounds: 30,
            ..Default::default()
        };
        let out = train(&d, &params).unwrap();
        assert_eq!(out.round_log_loss.len(), 30);
        let labels = d.labels().unwrap();
        assert!(out.round_log_loss[0] < initial_log_loss(&out.model, &labels));
        for w in out.round_log_loss.windows(2) {
            assert!(w[1] <= w[0], "{w:?}");
        }
    }

    #[test]
    fn leaf_weights_match_routed_rows() {
        let d: Dataset<f64> = generate_synthetic(300, 0.4, 12).unwrap();
        let params = BoostHyperparams {
            num_rounds: 5,
            lambda: 0.7,
            ..Default::default()
        };
        let out = train(&d, &params).unwrap();
        let labels = d.labels().unwrap();
        let x = d.rows();
        let model = &out.model;
        let mut margins = vec![model.base_score(); d.len()];
        for tree in model.trees() {
            let grads: Vec<GradPair<f64>> = margins
                .iter()
                .zip(&labels)
                .map(|(&m, &y)| grad_hess(m, y))
                .collect();
            // Route every row to a leaf id by walking the tree.
            let mut sums: std::collections::HashMap<u64, (f64, f64, f64)> = Default::default();
            for (i, xi) in x.iter().enumerate() {
                let (id, w) = leaf_id(tree, xi);
                let e = sums.entry(id).or_insert((0.0, 0.0, w));
                e.0 += grads[i].g;
                e.1 += grads[i].h;
            }
            for (g, h, w) in sums.values() {
                let expected = -g / (h + params.lambda);
                assert!(
                    (w - expected).abs() <= 1e-12 * expected.abs().max(1.0),
                    "{w} vs {expected}"
                );
            }
            for (m, xi) in margins.iter_mut().zip(&x) {
                *m += params.learning_rate * tree.predict(xi);
            }
        }
    }

    fn leaf_id(tree: &TreeNode<f64>, x: &[f64]) -> (u64, f64) {
        let mut node = tree;
        let mut id = 1u64;
        loop {
            match node {
                TreeNode::Leaf { weight } => return (id, *weight),
                TreeNode::Split {
                    feature_index,
                    threshold,
                    left,
                    right,
                } => {
                    if x[*feature_index] < *threshold {
                        id *= 2;
                        node = left;
                    } else {
                        id = id * 2 + 1;
                        node = right;
                    }
                }
            }
        }
    }

    #[test]
    fn deterministic_bytes() {
        let d: Dataset<f64> = generate_synthetic(300, 0.3, 4).unwrap();
        let a = train(&d, &BoostHyperparams::default())
            .unwrap()
            .model
            .to_json()
            .unwrap();
        let b = train(&d, &BoostHyperparams::default())
            .unwrap()
            .model
            .to_json()
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn large_gamma_prunes_everything() {
        let d: Dataset<f64> = generate_synthetic(300, 0.3, 6).unwrap();
        let params = BoostHyperparams {
            num_rounds: 5,
            gamma: 1e6,
            ..Default::default()
        };
        let out = train(&d, &params).unwrap();
        assert!(out.model.trees().iter().all(|t| t.leaf_count() == 1));
    }

    #[test]
    fn f32_training_works() {
        let d: Dataset<f32> = generate_synthetic(300, 0.3, 6).unwrap();
        let out = train(
            &d,
            &BoostHyperparams {
                num_rounds: 10,
                ..Default::default()
            },
        )
        .unwrap();
        let labels = d.labels().unwrap();
        let preds = out.model.predict_labels(&d).unwrap();
        let correct = preds.iter().zip(&labels).filter(|(a, b)| a == b).count();
        assert!(correct as f64 / d.len() as f64 > 0.8);
    }
}

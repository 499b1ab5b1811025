//! Inverse calibration: regress bag mean vectors onto the soft labels
//! `2 p_k - 1` with an ε-insensitive large-margin loss.

use std::time::Instant;

use llp_core::{empirical_bag_error, BagDataset, LinearHypothesis, LossKind, SparseVector};

use crate::{SolverError, TrainConfig, TrainResult};

/// Sparse per-bag mean vectors.
fn sparse_bag_means(data: &BagDataset) -> Vec<SparseVector> {
    let inst = data.instances();
    data.bags()
        .iter()
        .map(|bag| {
            let mut acc = Vec::new();
            for &i in bag.members() {
                inst[i].features.add_scaled_to(&mut acc, 1.0);
            }
            let r = bag.size() as f64;
            acc.iter_mut().for_each(|v| *v /= r);
            SparseVector::from_dense(&acc)
        })
        .collect()
}

/// Fits `½(‖w‖² + b²) + C Σ_k ω_k max(0, |w·m_k + b - t_k| - ε)` by
/// full-batch projected subgradient descent with step `1 / (λ t)`,
/// `λ = 1 / (C Σ ω)`, returning the average of the second half of the
/// iterates.
pub fn inv_cal_hypothesis(
    data: &BagDataset,
    weights: &[f64],
    config: &TrainConfig,
) -> Result<LinearHypothesis, SolverError> {
    if data.n_bags() == 0 {
        return Err(SolverError::NoBags);
    }
    assert_eq!(weights.len(), data.n_bags(), "one weight per bag");
    let means = sparse_bag_means(data);
    let targets: Vec<f64> = data.bags().iter().map(|b| 2.0 * b.proportion() - 1.0).collect();
    let dim = data.dimension();
    let total_weight: f64 = weights.iter().sum();
    let lambda = 1.0 / (config.c * total_weight);
    let radius_sq = 1.0 / lambda;
    let eps = config.invcal_epsilon;
    let iters = config.invcal_iters.max(2);
    let avg_from = iters / 2;

    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut grad = vec![0.0; dim];
    let mut avg_w = vec![0.0; dim];
    let mut avg_b = 0.0;
    for t in 1..=iters {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for ((m, &target), &omega) in means.iter().zip(&targets).zip(weights) {
            let resid = m.dot_dense(&w) + b - target;
            if resid.abs() > eps {
                let s = omega * resid.signum() / total_weight;
                m.add_scaled_to(&mut grad, s);
                grad_b += s;
            }
        }
        let eta = 1.0 / (lambda * t as f64);
        let shrink = 1.0 - eta * lambda;
        for (wj, gj) in w.iter_mut().zip(&grad) {
            *wj = shrink * *wj - eta * gj;
        }
        b = shrink * b - eta * grad_b;
        let norm_sq: f64 = w.iter().map(|v| v * v).sum::<f64>() + b * b;
        if norm_sq > radius_sq {
            let s = (radius_sq / norm_sq).sqrt();
            w.iter_mut().for_each(|v| *v *= s);
            b *= s;
        }
        if t > avg_from {
            for (a, v) in avg_w.iter_mut().zip(&w) {
                *a += v;
            }
            avg_b += b;
        }
    }
    let count = (iters - avg_from) as f64;
    avg_w.iter_mut().for_each(|v| *v /= count);
    Ok(LinearHypothesis::new(avg_w, avg_b / count))
}

pub fn train_inv_cal(data: &BagDataset, config: &TrainConfig) -> Result<TrainResult, SolverError> {
    train_inv_cal_weighted(data, &vec![1.0; data.n_bags()], config)
}

/// Inverse calibration with a per-bag loss weight.
pub fn train_inv_cal_weighted(
    data: &BagDataset,
    weights: &[f64],
    config: &TrainConfig,
) -> Result<TrainResult, SolverError> {
    config.validate()?;
    let start = Instant::now();
    let h = inv_cal_hypothesis(data, weights, config)?;
    let err = empirical_bag_error(&h, data, LossKind::Absolute)?;
    Ok(TrainResult {
        hypothesis: h,
        final_bag_error: err,
        objective_trace: Vec::new(),
        latent_labels: None,
        wall_time: start.elapsed().as_secs_f64(),
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use llp_core::{Bag, Instance};

    fn cfg() -> TrainConfig {
        TrainConfig {
            c: 10.0,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn single_pure_bag_predicts_positive_on_its_mean() {
        let xs = vec![Instance::dense(&[1.0, 0.5], None), Instance::dense(&[2.0, -0.5], None)];
        let d = BagDataset::new(xs, vec![Bag::new(vec![0, 1], 1.0).unwrap()]).unwrap();
        let h = train_inv_cal(&d, &cfg()).unwrap().hypothesis;
        assert!(h.predict(&SparseVector::from_dense(&[1.5, 0.0])).is_positive());
    }

    #[test]
    fn separated_pure_bags_fit() {
        let mut xs = Vec::new();
        for i in 0..10 {
            let jitter = (i as f64 - 4.5) * 0.1;
            xs.push(Instance::dense(&[2.0 + jitter, 1.0], None));
            xs.push(Instance::dense(&[-2.0 - jitter, 1.0], None));
        }
        let pos: Vec<usize> = (0..10).map(|i| 2 * i).collect();
        let neg: Vec<usize> = (0..10).map(|i| 2 * i + 1).collect();
        let d = BagDataset::new(xs, vec![Bag::new(pos, 1.0).unwrap(), Bag::new(neg, 0.0).unwrap()]).unwrap();
        let res = train_inv_cal(&d, &cfg()).unwrap();
        assert!(res.final_bag_error < 0.1, "{}", res.final_bag_error);
    }

    #[test]
    fn duplicated_bags_equal_doubled_weight() {
        let xs: Vec<Instance> = (0..6)
            .map(|i| Instance::dense(&[i as f64 - 2.5, (i % 2) as f64], None))
            .collect();
        let b0 = Bag::new(vec![0, 1, 2], 0.2).unwrap();
        let b1 = Bag::new(vec![3, 4, 5], 0.9).unwrap();
        let dup = BagDataset::new(xs.clone(), vec![b0.clone(), b0.clone(), b1.clone()]).unwrap();
        let dedup = BagDataset::new(xs, vec![b0, b1]).unwrap();
        let c = cfg();
        let h1 = train_inv_cal(&dup, &c).unwrap().hypothesis;
        let h2 = train_inv_cal_weighted(&dedup, &[2.0, 1.0], &c).unwrap().hypothesis;
        for (a, b) in h1.weights().iter().zip(h2.weights()) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        assert!((h1.bias() - h2.bias()).abs() < 1e-9);
    }
}

//! Class-mean estimation from bag means and proportions.
//!
//! Each bag mean is modelled as `p_k μ₊ + (1 - p_k) μ₋`; the two class means
//! are recovered per feature by least squares, and the classifier points
//! along `μ₊ - μ₋`.

use std::time::Instant;

use llp_core::{empirical_bag_error, BagDataset, LinearHypothesis, LossKind};

use crate::util::{bag_means, bias_for_rate, Slots};
use crate::{SolverError, TrainConfig, TrainResult};

/// Least-squares class means `(μ₊, μ₋)`.
pub fn estimate_class_means(data: &BagDataset) -> Result<(Vec<f64>, Vec<f64>), SolverError> {
    let m = data.n_bags();
    if m < 2 {
        return Err(SolverError::TooFewBags(m));
    }
    let props: Vec<f64> = data.bags().iter().map(|b| b.proportion()).collect();
    // normal equations of the m x 2 design with rows (p_k, 1 - p_k)
    let (mut s_pp, mut s_pq, mut s_qq) = (0.0, 0.0, 0.0);
    for &p in &props {
        let q = 1.0 - p;
        s_pp += p * p;
        s_pq += p * q;
        s_qq += q * q;
    }
    let det = s_pp * s_qq - s_pq * s_pq;
    let scale = (s_pp + s_qq).powi(2);
    if det <= 1e-12 * scale {
        return Err(SolverError::DegenerateProportions(props[0]));
    }
    let means = bag_means(data);
    let dim = data.dimension();
    let mut mu_pos = vec![0.0; dim];
    let mut mu_neg = vec![0.0; dim];
    for j in 0..dim {
        let (mut t_p, mut t_q) = (0.0, 0.0);
        for (mean, &p) in means.iter().zip(&props) {
            t_p += p * mean[j];
            t_q += (1.0 - p) * mean[j];
        }
        mu_pos[j] = (s_qq * t_p - s_pq * t_q) / det;
        mu_neg[j] = (s_pp * t_q - s_pq * t_p) / det;
    }
    Ok((mu_pos, mu_neg))
}

/// `w = μ₊ - μ₋`, bias matched to the size-weighted mean proportion.
pub fn mean_map_hypothesis(data: &BagDataset) -> Result<LinearHypothesis, SolverError> {
    let (mu_pos, mu_neg) = estimate_class_means(data)?;
    let w: Vec<f64> = mu_pos.iter().zip(&mu_neg).map(|(a, b)| a - b).collect();
    let slots = Slots::new(data);
    let scores: Vec<f64> = slots.xs.iter().map(|x| x.dot_dense(&w)).collect();
    let total: f64 = data.bags().iter().map(|b| b.size() as f64).sum();
    let prior: f64 = data
        .bags()
        .iter()
        .map(|b| b.proportion() * b.size() as f64)
        .sum::<f64>()
        / total;
    Ok(LinearHypothesis::new(w, bias_for_rate(&scores, prior)))
}

pub fn train_mean_map(data: &BagDataset, _config: &TrainConfig) -> Result<TrainResult, SolverError> {
    let start = Instant::now();
    let h = mean_map_hypothesis(data)?;
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

    fn data(points: &[[f64; 2]], bags: Vec<(Vec<usize>, f64)>) -> BagDataset {
        let xs = points.iter().map(|p| Instance::dense(p, None)).collect();
        let bags = bags.into_iter().map(|(m, p)| Bag::new(m, p).unwrap()).collect();
        BagDataset::new(xs, bags).unwrap()
    }

    #[test]
    fn pure_bags_decouple() {
        let pts = [[1.0, 2.0], [3.0, 4.0], [-1.0, 0.5], [-3.0, 1.5]];
        let d = data(&pts, vec![(vec![0, 1], 1.0), (vec![2, 3], 0.0)]);
        let (mp, mn) = estimate_class_means(&d).unwrap();
        assert_eq!(mp, vec![2.0, 3.0]);
        assert_eq!(mn, vec![-2.0, 1.0]);
    }

    #[test]
    fn equal_proportions_are_singular() {
        let pts = [[1.0, 2.0], [3.0, 4.0], [-1.0, 0.5], [-3.0, 1.5]];
        let d = data(&pts, vec![(vec![0, 1], 0.5), (vec![2, 3], 0.5)]);
        assert!(matches!(
            estimate_class_means(&d),
            Err(SolverError::DegenerateProportions(_))
        ));
        let one = data(&pts, vec![(vec![0, 1], 0.5)]);
        assert_eq!(estimate_class_means(&one), Err(SolverError::TooFewBags(1)));
    }

    #[test]
    fn invariant_to_bag_order_and_duplication() {
        let pts = [[1.0, 2.0], [3.0, 4.0], [-1.0, 0.5], [-3.0, 1.5], [0.0, 1.0]];
        let a = data(&pts, vec![(vec![0, 1, 4], 0.7), (vec![2, 3], 0.1), (vec![1, 2], 0.4)]);
        let b = data(&pts, vec![(vec![1, 2], 0.4), (vec![2, 3], 0.1), (vec![0, 1, 4], 0.7)]);
        let c = data(
            &pts,
            vec![(vec![0, 0, 1, 1, 4, 4], 0.7), (vec![2, 3], 0.1), (vec![1, 2, 1, 2], 0.4)],
        );
        let ma = estimate_class_means(&a).unwrap();
        let mb = estimate_class_means(&b).unwrap();
        let mc = estimate_class_means(&c).unwrap();
        for (x, y) in ma.0.iter().chain(&ma.1).zip(mb.0.iter().chain(&mb.1)) {
            assert!((x - y).abs() < 1e-12);
        }
        for (x, y) in ma.0.iter().chain(&ma.1).zip(mc.0.iter().chain(&mc.1)) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn bias_matches_prior() {
        let pts = [[1.0, 0.0], [2.0, 0.0], [3.0, 0.0], [-1.0, 0.0], [-2.0, 0.0], [-3.0, 0.0]];
        let d = data(&pts, vec![(vec![0, 1, 2, 3], 0.75), (vec![3, 4, 5, 0], 0.25)]);
        let h = mean_map_hypothesis(&d).unwrap();
        let slots = Slots::new(&d);
        let pos = slots.xs.iter().filter(|x| h.predict(x).is_positive()).count();
        assert_eq!(pos, 4);
    }
}

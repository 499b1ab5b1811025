//! Bag-level k-fold selection of `(C, C_p)` by held-out bag error.

use llp_core::rng::seeded;
use llp_core::{empirical_bag_error, BagDataset, LossKind};
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::{train, SolverError, TrainConfig};

/// Held-out score of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct CvScore {
    pub c: f64,
    pub c_p: f64,
    /// Mean over folds of the held-out mean absolute bag error.
    pub mean_error: f64,
    pub fold_errors: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CvOutcome {
    /// `base` with the selected `(C, C_p)`.
    pub best: TrainConfig,
    /// One entry per grid point, in grid order.
    pub scores: Vec<CvScore>,
}

/// Fold of every bag: a seeded shuffle of the bag indices, dealt round-robin.
pub fn fold_assignment(n_bags: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n_bags).collect();
    order.shuffle(&mut seeded(seed));
    let mut fold = vec![0; n_bags];
    for (pos, &bag) in order.iter().enumerate() {
        fold[bag] = pos % folds;
    }
    fold
}

/// Trains `base.with_params(c, c_p)` on `folds - 1` folds and scores the
/// remaining one, for every grid point. Ties in the mean error go to the
/// smaller `C`, then the smaller `C_p`.
pub fn cross_validate(
    data: &BagDataset,
    grid: &[(f64, f64)],
    folds: usize,
    base: &TrainConfig,
    seed: u64,
) -> Result<CvOutcome, SolverError> {
    if grid.is_empty() {
        return Err(SolverError::EmptyGrid);
    }
    if folds < 2 || data.n_bags() < folds {
        return Err(SolverError::TooFewBagsForFolds {
            bags: data.n_bags(),
            folds: folds.max(2),
        });
    }
    let fold = fold_assignment(data.n_bags(), folds, seed);
    let splits: Vec<(BagDataset, BagDataset)> = (0..folds)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..data.n_bags()).partition(|&b| fold[b] == f);
            (data.select_bags(&train), data.select_bags(&test))
        })
        .collect();

    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..folds).map(move |f| (g, f)))
        .collect();
    let errors = jobs
        .par_iter()
        .map(|&(g, f)| {
            let (c, c_p) = grid[g];
            let (train_set, test_set) = &splits[f];
            let result = train(train_set, &base.with_params(c, c_p))?;
            Ok(empirical_bag_error(&result.hypothesis, test_set, LossKind::Absolute)?)
        })
        .collect::<Result<Vec<f64>, SolverError>>()?;

    let scores: Vec<CvScore> = grid
        .iter()
        .enumerate()
        .map(|(g, &(c, c_p))| {
            let fold_errors = errors[g * folds..(g + 1) * folds].to_vec();
            CvScore {
                c,
                c_p,
                mean_error: fold_errors.iter().sum::<f64>() / folds as f64,
                fold_errors,
            }
        })
        .collect();
    let best = scores
        .iter()
        .min_by(|a, b| {
            a.mean_error
                .total_cmp(&b.mean_error)
                .then(a.c.total_cmp(&b.c))
                .then(a.c_p.total_cmp(&b.c_p))
        })
        .expect("grid is non-empty");
    Ok(CvOutcome {
        best: base.with_params(best.c, best.c_p),
        scores,
    })
}

/// Cartesian product in row-major order (`C` outer).
pub fn grid(cs: &[f64], c_ps: &[f64]) -> Vec<(f64, f64)> {
    cs.iter()
        .flat_map(|&c| c_ps.iter().map(move |&p| (c, p)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_are_balanced_and_seeded() {
        let a = fold_assignment(23, 5, 4);
        assert_eq!(a, fold_assignment(23, 5, 4));
        for f in 0..5 {
            let n = a.iter().filter(|&&x| x == f).count();
            assert!(n == 4 || n == 5);
        }
        assert_ne!(a, fold_assignment(23, 5, 5));
    }

    #[test]
    fn grid_is_row_major() {
        let g = grid(&[1.0, 2.0], &[0.1, 0.2, 0.3]);
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], (1.0, 0.1));
        assert_eq!(g[3], (2.0, 0.1));
    }
}

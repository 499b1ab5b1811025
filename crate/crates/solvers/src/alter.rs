//! Alternating minimization for the proportion-SVM objective
//!
//! ```text
//! J(w, b, y) = ½(‖w‖² + b²) + C Σ_i hinge(y_i (w·x_i + b)) + C_p Σ_k |p̂_k(y) - p_k|
//! ```
//!
//! The bias is regularized like a weight on a constant feature, which is
//! what the inner solvers minimize.
//!
//! over the latent member labels `y` and the linear model `(w, b)`. Every bag
//! member is its own training example, so an instance sampled twice into a
//! bag carries two latent labels.
//!
//! * Step A fixes `y` and fits the hinge SVM.
//! * Step B fixes `(w, b)` and relabels each bag independently. For a given
//!   number `k'` of positives the cheapest labeling puts `+1` on the `k'`
//!   members with the largest decision values (the hinge-cost difference
//!   `hinge(f) - hinge(-f)` is strictly decreasing in `f`). `k'` is searched
//!   over `{k - 1, k, k + 1}` with `k = round(p_k r_k)`.
//!
//! A Step-A result that would raise `J` is discarded and the run stops, so
//! the recorded objective trace never increases.

use std::time::Instant;

use llp_core::rng::{derive_seed, seeded, Rng};
use llp_core::{empirical_bag_error, BagDataset, Label, LinearHypothesis, LossKind};
use rand::Rng as _;
use rayon::prelude::*;

use crate::inv_cal::inv_cal_hypothesis;
use crate::mean_map::mean_map_hypothesis;
use crate::svm::{hinge, subgradient_svm, DualCoordinateSvm};
use crate::util::{rank_desc, target_count, Slots};
use crate::{InitKind, InnerSolver, SolverError, TrainConfig, TrainResult};

/// Outcome of one alternating run from one initialization.
#[derive(Debug, Clone)]
struct RunOutcome {
    hypothesis: LinearHypothesis,
    labels: Vec<Label>,
    trace: Vec<f64>,
    bag_error: f64,
    warnings: Vec<String>,
}

pub fn train_alter_psvm(data: &BagDataset, config: &TrainConfig) -> Result<TrainResult, SolverError> {
    config.validate()?;
    if data.n_bags() == 0 {
        return Err(SolverError::NoBags);
    }
    let start = Instant::now();
    let slots = Slots::new(data);
    let schedule = config.restart_schedule();
    let outcomes = schedule
        .par_iter()
        .enumerate()
        .map(|(r, &init)| run_from(data, &slots, config, init, derive_seed(config.seed, r as u64)))
        .collect::<Result<Vec<_>, SolverError>>()?;

    // lowest bag error, then lowest final objective, then earliest restart
    let best = outcomes
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| {
            a.bag_error
                .total_cmp(&b.bag_error)
                .then(last(&a.trace).total_cmp(&last(&b.trace)))
                .then(ia.cmp(ib))
        })
        .map(|(i, _)| i)
        .expect("at least one restart");
    let mut warnings: Vec<String> = outcomes
        .iter()
        .enumerate()
        .flat_map(|(r, o)| o.warnings.iter().map(move |w| format!("restart {r}: {w}")))
        .collect();
    warnings.sort();
    let best = outcomes.into_iter().nth(best).expect("index in range");
    let latent = slots
        .ranges
        .iter()
        .map(|range| best.labels[range.clone()].to_vec())
        .collect();
    Ok(TrainResult {
        hypothesis: best.hypothesis,
        final_bag_error: best.bag_error,
        objective_trace: best.trace,
        latent_labels: Some(latent),
        wall_time: start.elapsed().as_secs_f64(),
        warnings,
    })
}

/// A single alternating run whose latent labels start from the ranking of
/// `init` (top `round(p_k r_k)` members of each bag positive).
pub fn train_alter_psvm_from(
    data: &BagDataset,
    config: &TrainConfig,
    init: &LinearHypothesis,
) -> Result<TrainResult, SolverError> {
    config.validate()?;
    if data.n_bags() == 0 {
        return Err(SolverError::NoBags);
    }
    let start = Instant::now();
    let slots = Slots::new(data);
    let scores: Vec<f64> = slots.xs.iter().map(|x| init.decision(x)).collect();
    let labels = labels_from_scores(data, &slots, &scores);
    let out = alternate(data, &slots, config, labels, &mut seeded(config.seed))?;
    let latent = slots
        .ranges
        .iter()
        .map(|range| out.labels[range.clone()].to_vec())
        .collect();
    Ok(TrainResult {
        hypothesis: out.hypothesis,
        final_bag_error: out.bag_error,
        objective_trace: out.trace,
        latent_labels: Some(latent),
        wall_time: start.elapsed().as_secs_f64(),
        warnings: out.warnings,
    })
}

fn last(trace: &[f64]) -> f64 {
    trace.last().copied().unwrap_or(f64::INFINITY)
}

fn run_from(
    data: &BagDataset,
    slots: &Slots<'_>,
    config: &TrainConfig,
    init: InitKind,
    seed: u64,
) -> Result<RunOutcome, SolverError> {
    let mut rng = seeded(seed);
    let mut warnings = Vec::new();
    let scores: Vec<f64> = match init {
        InitKind::MeanMap => match mean_map_hypothesis(data) {
            Ok(h) => slots.xs.iter().map(|x| h.decision(x)).collect(),
            Err(e) => {
                warnings.push(format!("mean-map initializer unavailable ({e}); using random labels"));
                random_scores(slots.len(), &mut rng)
            }
        },
        InitKind::InvCal => {
            let h = inv_cal_hypothesis(data, &vec![1.0; data.n_bags()], config)?;
            slots.xs.iter().map(|x| h.decision(x)).collect()
        }
        InitKind::Random => random_scores(slots.len(), &mut rng),
    };
    let labels = labels_from_scores(data, slots, &scores);
    let mut out = alternate(data, slots, config, labels, &mut rng)?;
    warnings.append(&mut out.warnings);
    out.warnings = warnings;
    Ok(out)
}

fn random_scores(n: usize, rng: &mut Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Exactly `round(p_k r_k)` positives per bag, on the highest scores.
fn labels_from_scores(data: &BagDataset, slots: &Slots<'_>, scores: &[f64]) -> Vec<Label> {
    let mut labels = vec![Label::Negative; slots.len()];
    for (bag, range) in data.bags().iter().zip(&slots.ranges) {
        let k = target_count(bag.proportion(), bag.size());
        for &j in rank_desc(&scores[range.clone()]).iter().take(k) {
            labels[range.start + j] = Label::Positive;
        }
    }
    labels
}

/// `J(w, b, y)`.
pub(crate) fn joint_objective(
    h: &LinearHypothesis,
    data: &BagDataset,
    slots: &Slots<'_>,
    labels: &[Label],
    c: f64,
    c_p: f64,
) -> f64 {
    let mut hinge_sum = 0.0;
    let mut prop_sum = 0.0;
    for (bag, range) in data.bags().iter().zip(&slots.ranges) {
        let mut pos = 0usize;
        for s in range.clone() {
            hinge_sum += hinge(labels[s].sign() * h.decision(slots.xs[s]));
            pos += labels[s].is_positive() as usize;
        }
        prop_sum += (pos as f64 / bag.size() as f64 - bag.proportion()).abs();
    }
    0.5 * (h.squared_norm() + h.bias() * h.bias()) + c * hinge_sum + c_p * prop_sum
}

/// Step B for one bag: best labeling with `k'` positives, `k'` restricted to
/// `{k - 1, k, k + 1}`. Returns the labels and the number of positives.
pub fn relabel_bag(decisions: &[f64], proportion: f64, c: f64, c_p: f64) -> (Vec<Label>, usize) {
    let r = decisions.len();
    let k = target_count(proportion, r);
    let order = rank_desc(decisions);
    // cost of all-negative, then the increment of flipping each ranked member
    let base: f64 = decisions.iter().map(|&f| c * hinge(-f)).sum();
    let mut prefix = vec![0.0; r + 1];
    for (n, &j) in order.iter().enumerate() {
        let f = decisions[j];
        prefix[n + 1] = prefix[n] + c * (hinge(f) - hinge(-f));
    }
    let cost = |kk: usize| base + prefix[kk] + c_p * (kk as f64 / r as f64 - proportion).abs();
    let mut best = k;
    let mut best_cost = cost(k);
    for kk in [k.checked_sub(1), Some(k + 1)].into_iter().flatten() {
        if kk <= r {
            let v = cost(kk);
            if v < best_cost {
                best = kk;
                best_cost = v;
            }
        }
    }
    let mut labels = vec![Label::Negative; r];
    for &j in order.iter().take(best) {
        labels[j] = Label::Positive;
    }
    (labels, best)
}

fn step_b(h: &LinearHypothesis, data: &BagDataset, slots: &Slots<'_>, c: f64, c_p: f64) -> Vec<Label> {
    let mut labels = vec![Label::Negative; slots.len()];
    for (bag, range) in data.bags().iter().zip(&slots.ranges) {
        let decisions: Vec<f64> = slots.xs[range.clone()].iter().map(|x| h.decision(x)).collect();
        let (bag_labels, _) = relabel_bag(&decisions, bag.proportion(), c, c_p);
        labels[range.clone()].copy_from_slice(&bag_labels);
    }
    labels
}

fn alternate(
    data: &BagDataset,
    slots: &Slots<'_>,
    config: &TrainConfig,
    mut labels: Vec<Label>,
    rng: &mut Rng,
) -> Result<RunOutcome, SolverError> {
    let (c, c_p) = (config.c, config.c_p);
    let mut warnings = Vec::new();
    let mut trace = Vec::new();
    let mut dcd = DualCoordinateSvm::new(&slots.xs, slots.dim);
    let mut current: Option<LinearHypothesis> = None;
    // J of (current model, current labels); Step A must not exceed it
    let mut bound = f64::INFINITY;
    let mut stale = vec![Label::Negative; 0];

    for outer in 0..config.max_outer_iters.max(1) {
        // Step A
        let (mut h, mut status) = match config.inner_solver {
            InnerSolver::DualCoordinate => {
                for (s, (&old, &new)) in stale.iter().zip(&labels).enumerate() {
                    if old != new {
                        dcd.retract(s, slots.xs[s], old);
                    }
                }
                let status = dcd.solve(
                    &slots.xs,
                    &labels,
                    c,
                    config.inner_tolerance,
                    config.inner_max_epochs,
                    rng,
                );
                (dcd.hypothesis(), status)
            }
            InnerSolver::Subgradient => subgradient_svm(
                &slots.xs,
                &labels,
                slots.dim,
                c,
                config.inner_tolerance,
                config.inner_max_epochs,
                rng,
            ),
        };
        stale.clone_from(&labels);
        let mut j = joint_objective(&h, data, slots, &labels, c, c_p);
        // an approximate solve can land just above the bound, more so on
        // large problems; tighten the warm-started solve before giving up
        let mut tolerance = config.inner_tolerance;
        while j > bound && config.inner_solver == InnerSolver::DualCoordinate && tolerance > config.inner_tolerance * 1e-3 {
            tolerance /= 10.0;
            status = dcd.solve(&slots.xs, &labels, c, tolerance, config.inner_max_epochs, rng);
            h = dcd.hypothesis();
            j = joint_objective(&h, data, slots, &labels, c, c_p);
        }
        if !status.converged {
            warnings.push(format!(
                "outer iteration {outer}: inner solve stopped at the {}-epoch cap",
                status.epochs
            ));
        }
        if j > bound {
            // keep the previous model; its labels are already optimal for it
            break;
        }
        trace.push(j);
        current = Some(h);
        let h = current.as_ref().expect("just set");

        // Step B
        let next = step_b(h, data, slots, c, c_p);
        if next == labels {
            break;
        }
        bound = joint_objective(h, data, slots, &next, c, c_p);
        labels = next;
        if outer + 1 == config.max_outer_iters {
            // labels moved on the last iteration; account for them in the trace
            trace.push(bound);
        }
    }

    let hypothesis = current.expect("first Step A is always accepted");
    let bag_error = empirical_bag_error(&hypothesis, data, LossKind::Absolute)?;
    Ok(RunOutcome {
        hypothesis,
        labels,
        trace,
        bag_error,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute force over every labeling of `r` members with exactly `k`
    /// positives; returns the minimal hinge cost.
    fn brute_min_cost(decisions: &[f64], k: usize, c: f64) -> f64 {
        let r = decisions.len();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << r) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let cost: f64 = (0..r)
                .map(|i| {
                    let y = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
                    c * hinge(y * decisions[i])
                })
                .sum();
            best = best.min(cost);
        }
        best
    }

    fn hinge_cost(decisions: &[f64], labels: &[Label], c: f64) -> f64 {
        decisions.iter().zip(labels).map(|(f, y)| c * hinge(y.sign() * f)).sum()
    }

    #[test]
    fn top_k_is_optimal_for_its_count() {
        let mut rng = seeded(11);
        for r in 1..=10usize {
            for _ in 0..30 {
                let d: Vec<f64> = (0..r).map(|_| rng.random_range(-3.0..3.0)).collect();
                let p = rng.random_range(0..=r) as f64 / r as f64;
                let (labels, k) = relabel_bag(&d, p, 1.3, 0.01);
                assert_eq!(labels.iter().filter(|y| y.is_positive()).count(), k);
                let got = hinge_cost(&d, &labels, 1.3);
                assert!(got <= brute_min_cost(&d, k, 1.3) + 1e-12);
            }
        }
    }

    #[test]
    fn large_penalty_pins_count() {
        let d = [0.9, 0.8, 0.7, -0.1, -0.5];
        let (labels, k) = relabel_bag(&d, 0.4, 1.0, 1e6);
        assert_eq!(k, 2);
        assert_eq!(labels, vec![Label::Positive, Label::Positive, Label::Negative, Label::Negative, Label::Negative]);
        // a tiny penalty lets the count drift by one toward the model
        let (_, k) = relabel_bag(&d, 0.4, 1.0, 1e-6);
        assert_eq!(k, 3);
    }
}

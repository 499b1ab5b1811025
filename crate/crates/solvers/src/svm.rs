//! Label-fixed linear hinge-loss SVM: `½‖w‖² + C Σ max(0, 1 - y_i (w·x_i + b))`.
//!
//! The bias is handled as an extra constant feature of value 1, so both inner
//! solvers regularize it together with `w`.

use llp_core::{Label, LinearHypothesis, SparseVector};
use rand::seq::SliceRandom;
use rand::Rng as _;

use llp_core::rng::Rng;

pub(crate) fn hinge(margin: f64) -> f64 {
    (1.0 - margin).max(0.0)
}

/// Outcome of one inner solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerStatus {
    pub epochs: usize,
    pub converged: bool,
}

/// Warm-startable dual coordinate descent for the L1-loss linear SVM.
///
/// Keeps `w = Σ α_i y_i x_i` (bias included) consistent with the dual
/// variables, so a label flip only has to retract the flipped example's
/// contribution before the next solve.
#[derive(Debug, Clone)]
pub struct DualCoordinateSvm {
    alpha: Vec<f64>,
    w: Vec<f64>,
    bias: f64,
    qdiag: Vec<f64>,
}

impl DualCoordinateSvm {
    pub fn new(xs: &[&SparseVector], dim: usize) -> Self {
        Self {
            alpha: vec![0.0; xs.len()],
            w: vec![0.0; dim],
            bias: 0.0,
            qdiag: xs.iter().map(|x| x.squared_norm() + 1.0).collect(),
        }
    }

    /// Drops example `i`'s dual weight; call before changing its label.
    pub fn retract(&mut self, i: usize, x: &SparseVector, old: Label) {
        let a = self.alpha[i];
        if a != 0.0 {
            x.add_scaled_to(&mut self.w, -a * old.sign());
            self.bias -= a * old.sign();
            self.alpha[i] = 0.0;
        }
    }

    pub fn hypothesis(&self) -> LinearHypothesis {
        LinearHypothesis::new(self.w.clone(), self.bias)
    }

    /// Coordinate passes in random order with shrinking: examples stuck at a
    /// bound are set aside until the remaining ones meet `tolerance` (spread
    /// of projected gradients), then everything is rechecked once more.
    pub fn solve(
        &mut self,
        xs: &[&SparseVector],
        ys: &[Label],
        c: f64,
        tolerance: f64,
        max_epochs: usize,
        rng: &mut Rng,
    ) -> InnerStatus {
        let n = xs.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut active = n;
        let (mut pg_max_old, mut pg_min_old) = (f64::INFINITY, f64::NEG_INFINITY);
        for epoch in 1..=max_epochs {
            order[..active].shuffle(rng);
            let mut pg_max = f64::NEG_INFINITY;
            let mut pg_min = f64::INFINITY;
            let mut s = 0;
            while s < active {
                let i = order[s];
                let y = ys[i].sign();
                let x = xs[i];
                let g = y * (x.dot_dense(&self.w) + self.bias) - 1.0;
                let a = self.alpha[i];
                let pg = if a == 0.0 {
                    if g > pg_max_old {
                        active -= 1;
                        order.swap(s, active);
                        continue;
                    }
                    g.min(0.0)
                } else if a == c {
                    if g < pg_min_old {
                        active -= 1;
                        order.swap(s, active);
                        continue;
                    }
                    g.max(0.0)
                } else {
                    g
                };
                pg_max = pg_max.max(pg);
                pg_min = pg_min.min(pg);
                if pg.abs() > 1e-12 {
                    let next = (a - g / self.qdiag[i]).clamp(0.0, c);
                    let step = (next - a) * y;
                    if step != 0.0 {
                        x.add_scaled_to(&mut self.w, step);
                        self.bias += step;
                    }
                    self.alpha[i] = next;
                }
                s += 1;
            }
            if active == 0 || pg_max - pg_min <= tolerance {
                if active == n {
                    return InnerStatus {
                        epochs: epoch,
                        converged: true,
                    };
                }
                active = n;
                pg_max_old = f64::INFINITY;
                pg_min_old = f64::NEG_INFINITY;
                continue;
            }
            pg_max_old = if pg_max <= 0.0 { f64::INFINITY } else { pg_max };
            pg_min_old = if pg_min >= 0.0 { f64::NEG_INFINITY } else { pg_min };
        }
        InnerStatus {
            epochs: max_epochs,
            converged: n == 0,
        }
    }
}

/// Projected stochastic subgradient descent (step `1 / (λ t)`, `λ = 1 / (C n)`).
///
/// Stops after `max_epochs` passes, or earlier when the primal objective
/// changes by less than `tolerance` (relative) between passes.
pub fn subgradient_svm(
    xs: &[&SparseVector],
    ys: &[Label],
    dim: usize,
    c: f64,
    tolerance: f64,
    max_epochs: usize,
    rng: &mut Rng,
) -> (LinearHypothesis, InnerStatus) {
    let n = xs.len();
    if n == 0 {
        return (
            LinearHypothesis::new(vec![0.0; dim], 0.0),
            InnerStatus {
                epochs: 0,
                converged: true,
            },
        );
    }
    let lambda = 1.0 / (c * n as f64);
    // w = scale * v keeps the shrink step O(1)
    let mut v = vec![0.0; dim];
    let mut vb = 0.0;
    let mut scale = 1.0;
    let mut sq_norm = 0.0; // ‖(v, vb)‖² before scaling
    let radius_sq = 1.0 / lambda;
    let mut t = 0usize;
    let mut prev_obj = f64::INFINITY;
    for epoch in 1..=max_epochs {
        for _ in 0..n {
            t += 1;
            let i = rng.random_range(0..n);
            let eta = 1.0 / (lambda * t as f64);
            let y = ys[i].sign();
            let x = xs[i];
            let margin = y * scale * (x.dot_dense(&v) + vb);
            scale *= 1.0 - eta * lambda;
            if scale == 0.0 {
                // first step (t = 1) zeroes the iterate
                v.iter_mut().for_each(|e| *e = 0.0);
                vb = 0.0;
                sq_norm = 0.0;
                scale = 1.0;
            }
            if margin < 1.0 {
                let step = eta * y / scale;
                for (j, val) in x.iter() {
                    let old = v[j as usize - 1];
                    let new = old + step * val;
                    sq_norm += new * new - old * old;
                    v[j as usize - 1] = new;
                }
                let new_b = vb + step;
                sq_norm += new_b * new_b - vb * vb;
                vb = new_b;
            }
            let norm_sq = scale * scale * sq_norm;
            if norm_sq > radius_sq {
                scale *= (radius_sq / norm_sq).sqrt();
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|e| *e *= scale);
                vb *= scale;
                sq_norm *= scale * scale;
                scale = 1.0;
            }
        }
        let w: Vec<f64> = v.iter().map(|e| e * scale).collect();
        let h = LinearHypothesis::new(w, vb * scale);
        let obj = primal_objective(&h, xs, ys, c);
        if (prev_obj - obj).abs() <= tolerance * prev_obj.abs().max(1e-12) {
            return (
                h,
                InnerStatus {
                    epochs: epoch,
                    converged: true,
                },
            );
        }
        prev_obj = obj;
        if epoch == max_epochs {
            return (
                h,
                InnerStatus {
                    epochs: epoch,
                    converged: false,
                },
            );
        }
    }
    unreachable!("max_epochs >= 1 returns inside the loop")
}

/// `½(‖w‖² + b²) + C Σ hinge`, the objective both inner solvers minimize.
pub fn primal_objective(h: &LinearHypothesis, xs: &[&SparseVector], ys: &[Label], c: f64) -> f64 {
    let loss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| hinge(y.sign() * h.decision(x)))
        .sum();
    0.5 * (h.squared_norm() + h.bias() * h.bias()) + c * loss
}

/// Supervised linear SVM on labeled instances.
pub fn train_linear_svm(
    instances: &[llp_core::Instance],
    c: f64,
    tolerance: f64,
    max_epochs: usize,
    seed: u64,
) -> Result<LinearHypothesis, llp_core::CoreError> {
    let xs: Vec<&SparseVector> = instances.iter().map(|x| &x.features).collect();
    let ys = instances
        .iter()
        .enumerate()
        .map(|(i, x)| x.label.ok_or(llp_core::CoreError::UnlabeledInstance(i)))
        .collect::<Result<Vec<_>, _>>()?;
    let dim = xs.iter().map(|x| x.max_index() as usize).max().unwrap_or(0);
    let mut svm = DualCoordinateSvm::new(&xs, dim);
    let mut rng = llp_core::rng::seeded(seed);
    svm.solve(&xs, &ys, c, tolerance, max_epochs, &mut rng);
    Ok(svm.hypothesis())
}

#[cfg(test)]
mod tests {
    use super::*;
    use llp_core::rng::seeded;
    use llp_core::Instance;

    fn toy() -> (Vec<SparseVector>, Vec<Label>) {
        // separable along feature 1, feature 2 is noise
        let pts = [
            (2.0, 0.3, Label::Positive),
            (1.5, -0.7, Label::Positive),
            (3.0, 1.0, Label::Positive),
            (-2.0, 0.5, Label::Negative),
            (-1.0, -1.0, Label::Negative),
            (-2.5, 0.0, Label::Negative),
        ];
        let xs = pts.iter().map(|&(a, b, _)| SparseVector::from_dense(&[a, b])).collect();
        let ys = pts.iter().map(|&(_, _, y)| y).collect();
        (xs, ys)
    }

    #[test]
    fn dual_cd_separates_and_converges() {
        let (xs, ys) = toy();
        let refs: Vec<&SparseVector> = xs.iter().collect();
        let mut svm = DualCoordinateSvm::new(&refs, 2);
        let status = svm.solve(&refs, &ys, 10.0, 1e-6, 10_000, &mut seeded(1));
        assert!(status.converged);
        let h = svm.hypothesis();
        for (x, y) in xs.iter().zip(&ys) {
            assert_eq!(h.predict(x), *y);
        }
    }

    #[test]
    fn dual_cd_matches_subgradient_objective() {
        let (xs, ys) = toy();
        let refs: Vec<&SparseVector> = xs.iter().collect();
        let mut svm = DualCoordinateSvm::new(&refs, 2);
        svm.solve(&refs, &ys, 1.0, 1e-8, 100_000, &mut seeded(2));
        let dcd = primal_objective(&svm.hypothesis(), &refs, &ys, 1.0);
        let (h, _) = subgradient_svm(&refs, &ys, 2, 1.0, 0.0, 20_000, &mut seeded(3));
        let sgd = primal_objective(&h, &refs, &ys, 1.0);
        assert!(dcd <= sgd + 1e-9, "dcd {dcd} sgd {sgd}");
        assert!((sgd - dcd) / dcd < 0.02, "dcd {dcd} sgd {sgd}");
    }

    #[test]
    fn retract_keeps_primal_dual_link() {
        let (xs, ys) = toy();
        let refs: Vec<&SparseVector> = xs.iter().collect();
        let mut svm = DualCoordinateSvm::new(&refs, 2);
        svm.solve(&refs, &ys, 1.0, 1e-6, 1000, &mut seeded(4));
        for i in 0..xs.len() {
            svm.retract(i, &xs[i], ys[i]);
        }
        let h = svm.hypothesis();
        assert!(h.squared_norm() < 1e-20 && h.bias().abs() < 1e-10);
    }

    #[test]
    fn supervised_wrapper() {
        let (xs, ys) = toy();
        let inst: Vec<Instance> = xs.into_iter().zip(ys).map(|(x, y)| Instance::labeled(x, y)).collect();
        let h = train_linear_svm(&inst, 1.0, 1e-4, 1000, 0).unwrap();
        assert_eq!(llp_core::instance_error(&h, &inst).unwrap(), 0.0);
    }
}

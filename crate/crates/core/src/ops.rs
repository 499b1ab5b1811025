use crate::{BagDataset, CoreError, Instance, Label, LinearHypothesis, LossKind, Result};

/// Absolute tolerance used when comparing proportions.
pub const PROPORTION_TOLERANCE: f64 = 1e-9;

/// Fraction of `+1` labels, i.e. `(1/r) Σ (y_i + 1) / 2`.
pub fn proportion(labels: &[Label]) -> Result<f64> {
    if labels.is_empty() {
        return Err(CoreError::EmptyBag);
    }
    let positives = labels.iter().filter(|y| y.is_positive()).count();
    Ok(positives as f64 / labels.len() as f64)
}

/// Proportion of `+1` predictions of `h` over the members of bag `bag`.
pub fn predict_proportion(h: &LinearHypothesis, data: &BagDataset, bag: usize) -> Result<f64> {
    let bag_ref = &data.bags()[bag];
    let instances = data.instances();
    let mut positives = 0usize;
    for &i in bag_ref.members() {
        let x = instances.get(i).ok_or(CoreError::DanglingMember {
            bag,
            index: i,
            len: instances.len(),
        })?;
        if h.predict(&x.features).is_positive() {
            positives += 1;
        }
    }
    Ok(positives as f64 / bag_ref.size() as f64)
}

pub fn proportion_loss(predicted: f64, observed: f64, kind: LossKind) -> Result<f64> {
    for p in [predicted, observed] {
        if !(0.0..=1.0).contains(&p) {
            return Err(CoreError::ProportionOutOfRange(p));
        }
    }
    let gap = predicted - observed;
    Ok(match kind {
        LossKind::Absolute => gap.abs(),
        LossKind::SquaredClamped => 0.5 * gap * gap,
    })
}

/// Mean proportion loss over every bag of `data`.
pub fn empirical_bag_error(h: &LinearHypothesis, data: &BagDataset, kind: LossKind) -> Result<f64> {
    if data.n_bags() == 0 {
        return Err(CoreError::NoBags);
    }
    let mut total = 0.0;
    for (k, bag) in data.bags().iter().enumerate() {
        total += proportion_loss(predict_proportion(h, data, k)?, bag.proportion(), kind)?;
    }
    Ok(total / data.n_bags() as f64)
}

/// Fraction of instances where `h` disagrees with the ground-truth label.
pub fn instance_error(h: &LinearHypothesis, instances: &[Instance]) -> Result<f64> {
    if instances.is_empty() {
        return Err(CoreError::EmptyBag);
    }
    let mut wrong = 0usize;
    for (i, x) in instances.iter().enumerate() {
        let y = x.label.ok_or(CoreError::UnlabeledInstance(i))?;
        if h.predict(&x.features) != y {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / instances.len() as f64)
}

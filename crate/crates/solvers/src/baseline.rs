//! Per-group majority rule: every member of a group is predicted `+1` iff the
//! group's training proportion exceeds one half.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use llp_core::{BagDataset, Label};

use crate::SolverError;

/// What to predict for a group that had no training bag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fallback {
    /// Majority label of all training instances (size-weighted proportions).
    #[default]
    GlobalMajority,
    Fixed(Label),
}

#[derive(Debug)]
pub struct BaselinePredictor<K: Ord> {
    groups: BTreeMap<K, Label>,
    fallback_label: Label,
    fallbacks: AtomicUsize,
}

/// Fits the rule on `data`, where `keys[b]` names the group of bag `b`.
/// Bags sharing a key are pooled.
pub fn train_baseline<K: Ord + Clone>(
    data: &BagDataset,
    keys: &[K],
    fallback: Fallback,
) -> Result<BaselinePredictor<K>, SolverError> {
    if data.n_bags() == 0 {
        return Err(SolverError::NoBags);
    }
    if keys.len() != data.n_bags() {
        return Err(SolverError::InvalidConfig(format!(
            "{} group keys for {} bags",
            keys.len(),
            data.n_bags()
        )));
    }
    // positives and size per group, accumulated from proportions
    let mut pooled: BTreeMap<K, (f64, usize)> = BTreeMap::new();
    let (mut pos, mut total) = (0.0, 0usize);
    for (bag, key) in data.bags().iter().zip(keys) {
        let p = bag.proportion() * bag.size() as f64;
        let e = pooled.entry(key.clone()).or_default();
        e.0 += p;
        e.1 += bag.size();
        pos += p;
        total += bag.size();
    }
    let majority = |p: f64, n: usize| {
        if p / n as f64 > 0.5 {
            Label::Positive
        } else {
            Label::Negative
        }
    };
    let fallback_label = match fallback {
        Fallback::GlobalMajority => majority(pos, total),
        Fallback::Fixed(l) => l,
    };
    Ok(BaselinePredictor {
        groups: pooled.into_iter().map(|(k, (p, n))| (k, majority(p, n))).collect(),
        fallback_label,
        fallbacks: AtomicUsize::new(0),
    })
}

impl<K: Ord> BaselinePredictor<K> {
    /// Label for a group, or `None` if it was not seen in training.
    pub fn group_label(&self, key: &K) -> Option<Label> {
        self.groups.get(key).copied()
    }

    /// Label for a group; unseen groups get the fallback and are counted.
    pub fn predict(&self, key: &K) -> Label {
        self.group_label(key).unwrap_or_else(|| {
            self.fallbacks.fetch_add(1, Ordering::Relaxed);
            self.fallback_label
        })
    }

    /// Number of predictions served by the fallback so far.
    pub fn fallback_count(&self) -> usize {
        self.fallbacks.load(Ordering::Relaxed)
    }

    pub fn fallback_label(&self) -> Label {
        self.fallback_label
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    /// Mean absolute bag error on `data`: each bag is predicted as all
    /// positive or all negative.
    pub fn bag_error(&self, data: &BagDataset, keys: &[K]) -> f64 {
        let sum: f64 = data
            .bags()
            .iter()
            .zip(keys)
            .map(|(bag, key)| {
                let pred = if self.predict(key).is_positive() { 1.0 } else { 0.0 };
                (pred - bag.proportion()).abs()
            })
            .sum();
        sum / data.n_bags() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use llp_core::{Bag, Instance};
    use proptest::prelude::*;

    fn data(bags: &[(usize, f64)]) -> BagDataset {
        let n: usize = bags.iter().map(|b| b.0).sum();
        let instances = (0..n).map(|i| Instance::dense(&[i as f64], None)).collect();
        let mut next = 0;
        let bags = bags
            .iter()
            .map(|&(r, p)| {
                let members = (next..next + r).collect();
                next += r;
                Bag::new(members, p).unwrap()
            })
            .collect();
        BagDataset::new(instances, bags).unwrap()
    }

    #[test]
    fn strict_majority() {
        let d = data(&[(5, 0.6), (4, 0.5), (10, 0.1)]);
        let b = train_baseline(&d, &["a", "b", "c"], Fallback::default()).unwrap();
        assert_eq!(b.predict(&"a"), Label::Positive);
        assert_eq!(b.predict(&"b"), Label::Negative);
        assert_eq!(b.predict(&"c"), Label::Negative);
        assert_eq!(b.fallback_count(), 0);
    }

    #[test]
    fn unseen_group_uses_recorded_fallback() {
        let d = data(&[(8, 0.75), (2, 0.0)]);
        let b = train_baseline(&d, &[1, 2], Fallback::default()).unwrap();
        // 6 of 10 positive overall
        assert_eq!(b.predict(&3), Label::Positive);
        assert_eq!(b.fallback_count(), 1);
        let b = train_baseline(&d, &[1, 2], Fallback::Fixed(Label::Negative)).unwrap();
        assert_eq!(b.predict(&9), Label::Negative);
        assert_eq!(b.fallback_count(), 1);
    }

    #[test]
    fn shared_keys_pool_by_size() {
        let d = data(&[(1, 1.0), (9, 0.4)]);
        let b = train_baseline(&d, &["g", "g"], Fallback::default()).unwrap();
        // (1 + 3.6) / 10 = 0.46
        assert_eq!(b.predict(&"g"), Label::Negative);
        assert_eq!(b.n_groups(), 1);
    }

    #[test]
    fn key_count_mismatch() {
        let d = data(&[(2, 0.5)]);
        assert!(train_baseline(&d, &[0, 1], Fallback::default()).is_err());
    }

    proptest! {
        #[test]
        fn never_worse_than_all_positive(
            bags in prop::collection::vec((1usize..20, 0usize..=20), 1..12)
        ) {
            let spec: Vec<(usize, f64)> = bags
                .iter()
                .map(|&(r, k)| (r, (k.min(r)) as f64 / r as f64))
                .collect();
            let d = data(&spec);
            let keys: Vec<usize> = (0..d.n_bags()).collect();
            let b = train_baseline(&d, &keys, Fallback::default()).unwrap();
            let all_pos: f64 =
                d.bags().iter().map(|bag| 1.0 - bag.proportion()).sum::<f64>() / d.n_bags() as f64;
            prop_assert!(b.bag_error(&d, &keys) <= all_pos + 1e-12);
        }
    }
}

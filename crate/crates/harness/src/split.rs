//! Seeded train/test split of instance indices.

use std::collections::BTreeSet;

use llp_core::rng::seeded;
use llp_core::{BagDataset, Instance};
use rand::seq::SliceRandom;

use crate::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    /// A uniformly random permutation; the first `⌊n · fraction⌋` positions
    /// train, the rest test. No stratification.
    pub fn new(n: usize, fraction: f64, seed: u64) -> Self {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut seeded(seed));
        let cut = (n as f64 * fraction).floor() as usize;
        let test = idx.split_off(cut);
        Self { train: idx, test }
    }

    pub fn train_instances(&self, all: &[Instance]) -> Vec<Instance> {
        self.train.iter().map(|&i| all[i].clone()).collect()
    }

    pub fn test_instances(&self, all: &[Instance]) -> Vec<Instance> {
        self.test.iter().map(|&i| all[i].clone()).collect()
    }

    /// Checks that the two parts partition `0..n` and that every bag member
    /// of `bags`, whose instance `j` is training instance `origin[j]`, maps
    /// to a training index.
    pub fn audit(&self, n: usize, bags: &BagDataset, origin: &[usize]) -> Result<()> {
        let train: BTreeSet<usize> = self.train.iter().copied().collect();
        let test: BTreeSet<usize> = self.test.iter().copied().collect();
        let fail = |m: String| Err(HarnessError::Audit(m));
        if train.len() != self.train.len() || test.len() != self.test.len() {
            return fail("split repeats an index".into());
        }
        if let Some(i) = train.intersection(&test).next() {
            return fail(format!("instance {i} is in both parts"));
        }
        if train.len() + test.len() != n || train.iter().chain(&test).any(|&i| i >= n) {
            return fail(format!("split does not cover 0..{n}"));
        }
        if origin.len() != bags.instances().len() {
            return fail("bag instances without an origin".into());
        }
        for (b, bag) in bags.bags().iter().enumerate() {
            for &j in bag.members() {
                if !train.contains(&origin[j]) {
                    return fail(format!("bag {b} holds instance {} outside the training part", origin[j]));
                }
            }
        }
        Ok(())
    }
}

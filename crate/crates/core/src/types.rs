use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{CoreError, Result, SparseVector};

/// Binary instance label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn from_sign(value: i64) -> Result<Self> {
        match value {
            1 => Ok(Label::Positive),
            -1 => Ok(Label::Negative),
            other => Err(CoreError::InvalidLabel(other)),
        }
    }

    /// Sign of a decision value; exactly zero maps to `Positive`.
    pub fn from_decision(value: f64) -> Self {
        if value >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Positive => f.write_str("+1"),
            Label::Negative => f.write_str("-1"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub features: SparseVector,
    pub label: Option<Label>,
}

impl Instance {
    pub fn new(features: SparseVector, label: Option<Label>) -> Self {
        Self { features, label }
    }

    pub fn labeled(features: SparseVector, label: Label) -> Self {
        Self::new(features, Some(label))
    }

    /// Convenience constructor for tests and synthetic pools.
    pub fn dense(values: &[f64], label: Option<Label>) -> Self {
        Self::new(SparseVector::from_dense(values), label)
    }
}

/// A bag: member indices into a dataset plus the observed label proportion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bag {
    members: Vec<usize>,
    proportion: f64,
}

impl Bag {
    pub fn new(members: Vec<usize>, proportion: f64) -> Result<Self> {
        if members.is_empty() {
            return Err(CoreError::EmptyBag);
        }
        if !(0.0..=1.0).contains(&proportion) {
            return Err(CoreError::ProportionOutOfRange(proportion));
        }
        Ok(Self {
            members,
            proportion,
        })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn proportion(&self) -> f64 {
        self.proportion
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Instances, bags over them, and free-form provenance annotations.
///
/// Bags may share members. Every member index is checked against the instance
/// list on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BagDataset {
    instances: Vec<Instance>,
    bags: Vec<Bag>,
    metadata: BTreeMap<String, String>,
}

impl BagDataset {
    pub fn new(instances: Vec<Instance>, bags: Vec<Bag>) -> Result<Self> {
        let len = instances.len();
        for (b, bag) in bags.iter().enumerate() {
            if let Some(&index) = bag.members.iter().find(|&&i| i >= len) {
                return Err(CoreError::DanglingMember { bag: b, index, len });
            }
        }
        Ok(Self {
            instances,
            bags,
            metadata: BTreeMap::new(),
        })
    }

    pub fn with_metadata(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.metadata.insert(key.into(), value.to_string());
        self
    }

    pub fn set_metadata(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.insert(key.into(), value.to_string());
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn bags(&self) -> &[Bag] {
        &self.bags
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn n_bags(&self) -> usize {
        self.bags.len()
    }

    /// Largest feature index across all instances.
    pub fn dimension(&self) -> usize {
        self.instances
            .iter()
            .map(|x| x.features.max_index() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Ground-truth labels of a bag's members, if every member is labeled.
    pub fn bag_labels(&self, bag: usize) -> Option<Vec<Label>> {
        self.bags[bag]
            .members
            .iter()
            .map(|&i| self.instances[i].label)
            .collect()
    }

    /// True when no instance index appears in more than one bag.
    /// Repeats inside a single bag are allowed.
    pub fn bags_disjoint(&self) -> bool {
        let mut owner: Vec<Option<usize>> = vec![None; self.instances.len()];
        for (b, bag) in self.bags.iter().enumerate() {
            for &i in &bag.members {
                match owner[i] {
                    Some(o) if o != b => return false,
                    _ => owner[i] = Some(b),
                }
            }
        }
        true
    }

    /// Same instances and members, new observed proportions.
    pub fn with_proportions(&self, proportions: &[f64]) -> Result<Self> {
        assert_eq!(proportions.len(), self.bags.len(), "one proportion per bag");
        let bags = self
            .bags
            .iter()
            .zip(proportions)
            .map(|(bag, &p)| Bag::new(bag.members.clone(), p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            instances: self.instances.clone(),
            bags,
            metadata: self.metadata.clone(),
        })
    }

    /// Copy with every ground-truth label removed.
    pub fn without_labels(&self) -> Self {
        let instances = self
            .instances
            .iter()
            .map(|x| Instance::new(x.features.clone(), None))
            .collect();
        Self {
            instances,
            bags: self.bags.clone(),
            metadata: self.metadata.clone(),
        }
    }

    /// Keeps the bags at `indices` (in that order) and the full instance list.
    pub fn select_bags(&self, indices: &[usize]) -> Self {
        Self {
            instances: self.instances.clone(),
            bags: indices.iter().map(|&k| self.bags[k].clone()).collect(),
            metadata: self.metadata.clone(),
        }
    }

    pub fn into_parts(self) -> (Vec<Instance>, Vec<Bag>, BTreeMap<String, String>) {
        (self.instances, self.bags, self.metadata)
    }
}

/// Loss on the gap between a predicted and an observed proportion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LossKind {
    /// `|predicted - observed|`
    #[default]
    Absolute,
    /// `(predicted - observed)^2 / 2`; its slope on `[-1, 1]` never exceeds 1.
    SquaredClamped,
}

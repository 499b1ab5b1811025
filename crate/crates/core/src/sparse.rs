use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

/// Sparse feature vector with 1-based, strictly increasing indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    /// Builds a vector from `(index, value)` pairs in any order.
    ///
    /// Zero indices, duplicate indices and non-finite values are rejected.
    /// Explicit zeros are kept; they do not change any dot product.
    pub fn new(mut entries: Vec<(u32, f64)>) -> Result<Self> {
        entries.sort_by_key(|&(i, _)| i);
        for (k, &(idx, val)) in entries.iter().enumerate() {
            if idx == 0 {
                return Err(CoreError::ZeroFeatureIndex(idx));
            }
            if !val.is_finite() {
                return Err(CoreError::NonFiniteFeature(idx));
            }
            if k > 0 && entries[k - 1].0 == idx {
                return Err(CoreError::DuplicateFeature(idx));
            }
        }
        Ok(Self { entries })
    }

    pub fn from_dense(values: &[f64]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, &v)| (i as u32 + 1, v))
            .collect();
        Self { entries }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest feature index present, or 0 for the empty vector.
    pub fn max_index(&self) -> u32 {
        self.entries.last().map_or(0, |&(i, _)| i)
    }

    pub fn get(&self, index: u32) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map_or(0.0, |k| self.entries[k].1)
    }

    /// Dot product against a dense weight slice where `weights[i - 1]` holds
    /// the weight of feature `i`. Indices past the end contribute nothing.
    pub fn dot_dense(&self, weights: &[f64]) -> f64 {
        let mut acc = 0.0;
        for &(i, v) in &self.entries {
            if let Some(w) = weights.get(i as usize - 1) {
                acc += w * v;
            }
        }
        acc
    }

    pub fn squared_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum()
    }

    /// `dense[i - 1] += scale * self[i]`, growing `dense` if needed.
    pub fn add_scaled_to(&self, dense: &mut Vec<f64>, scale: f64) {
        let need = self.max_index() as usize;
        if dense.len() < need {
            dense.resize(need, 0.0);
        }
        for &(i, v) in &self.entries {
            dense[i as usize - 1] += scale * v;
        }
    }
}

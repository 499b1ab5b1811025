use serde::{Deserialize, Serialize};

use crate::{Label, SparseVector};

/// `h(x) = sign(w·x + b)` with `sign(0) = +1`.
///
/// Weights are held densely (`weights[i - 1]` is the weight of feature `i`);
/// features past the end of the vector have weight zero.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LinearHypothesis {
    weights: Vec<f64>,
    bias: f64,
}

impl LinearHypothesis {
    pub fn new(weights: Vec<f64>, bias: f64) -> Self {
        Self { weights, bias }
    }

    pub fn from_sparse(weights: &SparseVector, bias: f64) -> Self {
        let mut dense = Vec::new();
        weights.add_scaled_to(&mut dense, 1.0);
        Self::new(dense, bias)
    }

    /// Predicts `label` everywhere.
    pub fn constant(label: Label) -> Self {
        Self::new(Vec::new(), label.sign())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sparse_weights(&self) -> SparseVector {
        SparseVector::from_dense(&self.weights)
    }

    pub fn weight(&self, index: u32) -> f64 {
        index
            .checked_sub(1)
            .and_then(|i| self.weights.get(i as usize))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn with_bias(mut self, bias: f64) -> Self {
        self.bias = bias;
        self
    }

    pub fn decision(&self, x: &SparseVector) -> f64 {
        x.dot_dense(&self.weights) + self.bias
    }

    pub fn predict(&self, x: &SparseVector) -> Label {
        Label::from_decision(self.decision(x))
    }

    /// Flips every prediction, including ties at zero.
    ///
    /// Plain negation of `(w, b)` would send decision value 0 to +1 on both
    /// sides, so the bias is nudged to the next representable value below.
    pub fn negated(&self) -> Self {
        let weights = self.weights.iter().map(|w| -w).collect();
        Self::new(weights, next_down(-self.bias))
    }

    pub fn squared_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }
}

fn next_down(x: f64) -> f64 {
    if x.is_nan() || x == f64::NEG_INFINITY {
        return x;
    }
    if x == 0.0 {
        return -f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits - 1)
    } else {
        f64::from_bits(bits + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_decision_is_positive() {
        let h = LinearHypothesis::new(vec![1.0], 0.0);
        let x = SparseVector::new(vec![(1, 0.0)]).unwrap();
        assert_eq!(h.predict(&x), Label::Positive);
        assert_eq!(h.negated().predict(&x), Label::Negative);
    }

    #[test]
    fn negation_flips_generic_points() {
        let h = LinearHypothesis::new(vec![0.5, -2.0], 0.25);
        for v in [[1.0, 0.0], [0.0, 1.0], [-3.0, 0.5], [0.5, 0.25]] {
            let x = SparseVector::from_dense(&v);
            assert_ne!(h.predict(&x), h.negated().predict(&x));
        }
    }

    #[test]
    fn weight_lookup() {
        let h = LinearHypothesis::from_sparse(&SparseVector::new(vec![(3, 2.0)]).unwrap(), 1.0);
        assert_eq!(h.weight(3), 2.0);
        assert_eq!(h.weight(0), 0.0);
        assert_eq!(h.weight(10), 0.0);
        assert_eq!(LinearHypothesis::constant(Label::Negative).predict(&SparseVector::default()), Label::Negative);
    }
}

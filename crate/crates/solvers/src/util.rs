use llp_core::{BagDataset, SparseVector};

/// Flattened view of a dataset: one training example per bag member.
pub(crate) struct Slots<'a> {
    pub xs: Vec<&'a SparseVector>,
    pub ranges: Vec<std::ops::Range<usize>>,
    pub dim: usize,
}

impl<'a> Slots<'a> {
    pub fn new(data: &'a BagDataset) -> Self {
        let inst = data.instances();
        let mut xs = Vec::new();
        let mut ranges = Vec::with_capacity(data.n_bags());
        for bag in data.bags() {
            let start = xs.len();
            xs.extend(bag.members().iter().map(|&i| &inst[i].features));
            ranges.push(start..xs.len());
        }
        Self {
            xs,
            ranges,
            dim: data.dimension(),
        }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }
}

/// `round(x)` with halves going up.
pub(crate) fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor().max(0.0) as usize
}

/// Number of positives a bag of `size` members should carry.
pub(crate) fn target_count(proportion: f64, size: usize) -> usize {
    round_half_up(proportion * size as f64).min(size)
}

/// Per-bag feature means (dense, `means[k][i - 1]` for feature `i`).
pub(crate) fn bag_means(data: &BagDataset) -> Vec<Vec<f64>> {
    let dim = data.dimension();
    let inst = data.instances();
    data.bags()
        .iter()
        .map(|bag| {
            let mut acc = vec![0.0; dim];
            for &i in bag.members() {
                inst[i].features.add_scaled_to(&mut acc, 1.0);
            }
            let r = bag.size() as f64;
            acc.iter_mut().for_each(|v| *v /= r);
            acc
        })
        .collect()
}

/// Bias `b` such that roughly a fraction `rate` of `scores` satisfy
/// `score + b >= 0`.
pub(crate) fn bias_for_rate(scores: &[f64], rate: f64) -> f64 {
    if scores.is_empty() {
        return 0.0;
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let n = sorted.len();
    let k = round_half_up(rate.clamp(0.0, 1.0) * n as f64).min(n);
    if k == 0 {
        -(sorted[0] + 1.0)
    } else if k == n {
        -sorted[n - 1]
    } else {
        -0.5 * (sorted[k - 1] + sorted[k])
    }
}

/// Indices sorted by descending score, ties by ascending index.
pub(crate) fn rank_desc(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

use std::collections::BTreeMap;

use llp_core::rng::{seeded, RNG_ALGORITHM};
use llp_core::{Bag, BagDataset, Instance, Label, LinearHypothesis, SparseVector};
use rand::Rng as _;

use crate::sampling::{bag_from, draw_members, join_list, labels_of, Sampling};
use crate::{BaggenError, Result};

/// Metadata keys written by the generators.
pub mod keys {
    pub const GENERATOR: &str = "generator";
    pub const SEED: &str = "seed";
    pub const RNG: &str = "rng";
    pub const BAG_COMPONENTS: &str = "bag_components";
    pub const KAPPA_REJECTIONS: &str = "kappa_rejections";
    pub const COVERAGE_CONSTANT: &str = "coverage_constant";
    pub const BAG_LOCATIONS: &str = "bag_locations";
    pub const RELEASED: &str = "released_proportions";
    pub const REALIZED: &str = "realized_proportions";
}

/// Parses a comma-separated metadata list.
pub fn metadata_list<T: std::str::FromStr>(data: &BagDataset, key: &str) -> Option<Vec<T>> {
    let raw = data.metadata().get(key)?;
    if raw.is_empty() {
        return Some(Vec::new());
    }
    raw.split(',').map(|s| s.parse().ok()).collect()
}

fn stamp(data: BagDataset, generator: &str, seed: u64) -> BagDataset {
    data.with_metadata(keys::GENERATOR, generator)
        .with_metadata(keys::SEED, seed)
        .with_metadata(keys::RNG, RNG_ALGORITHM)
}

/// `m` bags of `r` members drawn uniformly with replacement from `pool`.
pub fn gen_iid_bags(pool: &[Instance], m: usize, r: usize, seed: u64) -> Result<BagDataset> {
    gen_iid_bags_with(pool, m, r, seed, Sampling::default())
}

pub fn gen_iid_bags_with(
    pool: &[Instance],
    m: usize,
    r: usize,
    seed: u64,
    sampling: Sampling,
) -> Result<BagDataset> {
    if pool.is_empty() {
        return Err(BaggenError::EmptyPool);
    }
    if m == 0 || r == 0 {
        return Err(BaggenError::InvalidArgument("m and r must be positive".into()));
    }
    let labels = labels_of(pool)?;
    let mut rng = seeded(seed);
    let bags = draw_members(pool.len(), m, r, sampling, &mut rng)?
        .into_iter()
        .map(|members| bag_from(members, &labels))
        .collect::<Result<Vec<_>>>()?;
    Ok(stamp(BagDataset::new(pool.to_vec(), bags)?, "iid", seed))
}

#[derive(Debug, Clone)]
pub struct MixtureComponent {
    pub prior: f64,
    pub pool: Vec<Instance>,
}

#[derive(Debug, Clone)]
pub struct MixtureConfig {
    pub components: Vec<MixtureComponent>,
    pub bag_size: usize,
    pub bag_count: usize,
    pub seed: u64,
}

impl MixtureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(BaggenError::InvalidPriors("no components".into()));
        }
        if let Some(c) = self.components.iter().find(|c| !(c.prior >= 0.0 && c.prior.is_finite())) {
            return Err(BaggenError::InvalidPriors(format!("prior {} is negative", c.prior)));
        }
        let total: f64 = self.components.iter().map(|c| c.prior).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(BaggenError::InvalidPriors(format!("priors sum to {total}")));
        }
        if self.components.iter().any(|c| c.pool.is_empty()) {
            return Err(BaggenError::EmptyPool);
        }
        if self.bag_size == 0 || self.bag_count == 0 {
            return Err(BaggenError::InvalidArgument("m and r must be positive".into()));
        }
        Ok(())
    }
}

/// Each bag first picks a component by its prior, then draws `r` members iid
/// from that component's pool. With a single component no component draw is
/// made, so the result equals [`gen_iid_bags`] for the same seed.
pub fn gen_mixture_bags(config: &MixtureConfig) -> Result<BagDataset> {
    config.validate()?;
    let mut instances = Vec::new();
    let mut offsets = Vec::new();
    for c in &config.components {
        offsets.push(instances.len());
        instances.extend(c.pool.iter().cloned());
    }
    let labels = labels_of(&instances)?;
    let mut rng = seeded(config.seed);
    let mut bags = Vec::with_capacity(config.bag_count);
    let mut chosen = Vec::with_capacity(config.bag_count);
    for _ in 0..config.bag_count {
        let k = if config.components.len() == 1 {
            0
        } else {
            pick_component(&config.components, rng.random::<f64>())
        };
        let n = config.components[k].pool.len();
        let members: Vec<usize> = (0..config.bag_size)
            .map(|_| offsets[k] + rng.random_range(0..n))
            .collect();
        bags.push(bag_from(members, &labels)?);
        chosen.push(k);
    }
    let data = BagDataset::new(instances, bags)?.with_metadata(keys::BAG_COMPONENTS, join_list(chosen));
    Ok(stamp(data, "mixture", config.seed))
}

fn pick_component(components: &[MixtureComponent], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, c) in components.iter().enumerate() {
        acc += c.prior;
        if u < acc {
            return k;
        }
    }
    // rounding left u above the cumulative sum; take the last positive prior
    components.iter().rposition(|c| c.prior > 0.0).unwrap_or(0)
}

#[derive(Debug, Clone)]
pub struct KappaConfig {
    pub pick_probabilities: Vec<f64>,
    pub bag_count: usize,
    pub seed: u64,
    /// Assumed `R` in `min_i p_i >= R / n`; recorded, not enforced.
    pub coverage_constant: f64,
}

/// Every bag includes pool instance `i` independently with probability `p_i`.
/// Empty draws are redrawn and counted under `kappa_rejections`.
pub fn gen_kappa_bags(pool: &[Instance], config: &KappaConfig) -> Result<BagDataset> {
    if pool.is_empty() {
        return Err(BaggenError::EmptyPool);
    }
    if config.pick_probabilities.len() != pool.len() {
        return Err(BaggenError::LengthMismatch {
            what: "pick probabilities",
            expected: pool.len(),
            got: config.pick_probabilities.len(),
        });
    }
    if let Some((index, &value)) = config
        .pick_probabilities
        .iter()
        .enumerate()
        .find(|(_, &p)| !(p > 0.0 && p < 1.0))
    {
        return Err(BaggenError::InvalidPick { index, value });
    }
    let labels = labels_of(pool)?;
    let mut rng = seeded(config.seed);
    let mut rejections = 0u64;
    let mut bags = Vec::with_capacity(config.bag_count);
    for _ in 0..config.bag_count {
        let members = loop {
            let members: Vec<usize> = config
                .pick_probabilities
                .iter()
                .enumerate()
                .filter_map(|(i, &p)| (rng.random::<f64>() < p).then_some(i))
                .collect();
            if !members.is_empty() {
                break members;
            }
            rejections += 1;
        };
        bags.push(bag_from(members, &labels)?);
    }
    let data = BagDataset::new(pool.to_vec(), bags)?
        .with_metadata(keys::KAPPA_REJECTIONS, rejections)
        .with_metadata(keys::COVERAGE_CONSTANT, config.coverage_constant);
    Ok(stamp(data, "kappa", config.seed))
}

/// One bag per distinct group, members in instance order, bags in key order.
/// Returns the key of every bag.
pub fn gen_group_bags<G: Ord + Clone>(
    instances: Vec<Instance>,
    group_of: &[G],
) -> Result<(BagDataset, Vec<G>)> {
    if group_of.is_empty() {
        return Err(BaggenError::EmptyGroupMap);
    }
    if group_of.len() != instances.len() {
        return Err(BaggenError::LengthMismatch {
            what: "group assignments",
            expected: instances.len(),
            got: group_of.len(),
        });
    }
    let labels = labels_of(&instances)?;
    let mut groups: BTreeMap<&G, Vec<usize>> = BTreeMap::new();
    for (i, g) in group_of.iter().enumerate() {
        groups.entry(g).or_default().push(i);
    }
    let keys: Vec<G> = groups.keys().map(|&g| g.clone()).collect();
    let bags = groups
        .into_values()
        .map(|members| bag_from(members, &labels))
        .collect::<Result<Vec<_>>>()?;
    let data = BagDataset::new(instances, bags)?.with_metadata(keys::GENERATOR, "group");
    Ok((data, keys))
}

/// Bags drawn iid from a uniformly chosen location pool, labelled with the
/// location's released proportion instead of the sample's own. Metadata keeps
/// the location, the released and the realized proportion of every bag.
pub fn gen_population_bags(
    pools: &[Vec<Instance>],
    population_proportions: &[f64],
    m: usize,
    r: usize,
    seed: u64,
) -> Result<BagDataset> {
    if pools.len() != population_proportions.len() {
        return Err(BaggenError::LengthMismatch {
            what: "population proportions",
            expected: pools.len(),
            got: population_proportions.len(),
        });
    }
    if pools.is_empty() || pools.iter().any(Vec::is_empty) {
        return Err(BaggenError::EmptyPool);
    }
    if m == 0 || r == 0 {
        return Err(BaggenError::InvalidArgument("m and r must be positive".into()));
    }
    let mut instances = Vec::new();
    let mut offsets = Vec::new();
    for pool in pools {
        offsets.push(instances.len());
        instances.extend(pool.iter().cloned());
    }
    let labels = labels_of(&instances)?;
    let mut rng = seeded(seed);
    let (mut bags, mut locations, mut released, mut realized) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for _ in 0..m {
        let loc = rng.random_range(0..pools.len());
        let n = pools[loc].len();
        let members: Vec<usize> = (0..r).map(|_| offsets[loc] + rng.random_range(0..n)).collect();
        let sample = bag_from(members, &labels)?;
        let p = population_proportions[loc];
        realized.push(sample.proportion());
        released.push(p);
        locations.push(loc);
        bags.push(Bag::new(sample.members().to_vec(), p)?);
    }
    let data = BagDataset::new(instances, bags)?
        .with_metadata(keys::BAG_LOCATIONS, join_list(locations))
        .with_metadata(keys::RELEASED, join_list(released))
        .with_metadata(keys::REALIZED, join_list(realized));
    Ok(stamp(data, "population", seed))
}

/// Worst case for instance recovery: `m` identical `(1 - eta)`-pure bags of
/// size `r` whose prediction table matches every bag proportion while
/// misclassifying `2 eta r` members per bag.
///
/// Member `j` of every bag is the one-hot vector `e_{j+1}` in `r` dimensions;
/// [`adversarial_hypothesis`] realizes the returned table on these features.
pub fn gen_adversarial_pure_bags(r: usize, eta: f64, m: usize) -> Result<(BagDataset, Vec<Vec<Label>>)> {
    let (truth, predicted) = adversarial_table(r, eta)?;
    if m == 0 {
        return Err(BaggenError::InvalidArgument("m must be positive".into()));
    }
    let labels = truth.repeat(m);
    let instances = labels
        .iter()
        .enumerate()
        .map(|(i, &y)| Ok(Instance::labeled(SparseVector::new(vec![((i % r) as u32 + 1, 1.0)])?, y)))
        .collect::<Result<Vec<_>>>()?;
    let bags = (0..m)
        .map(|b| bag_from((b * r..(b + 1) * r).collect(), &labels))
        .collect::<Result<Vec<_>>>()?;
    let data = BagDataset::new(instances, bags)?.with_metadata(keys::GENERATOR, "adversarial");
    Ok((data, vec![predicted; m]))
}

/// Linear rule that reproduces the adversarial prediction table on the
/// one-hot features of [`gen_adversarial_pure_bags`].
pub fn adversarial_hypothesis(r: usize, eta: f64) -> Result<LinearHypothesis> {
    let (_, predicted) = adversarial_table(r, eta)?;
    let weights = predicted.iter().map(|y| y.sign()).collect();
    Ok(LinearHypothesis::new(weights, 0.0))
}

/// True labels and predictions of one bag: `eta r` false negatives, then
/// `eta r` false positives, then `(1 - 2 eta) r` true positives.
fn adversarial_table(r: usize, eta: f64) -> Result<(Vec<Label>, Vec<Label>)> {
    let flips = eta * r as f64;
    let k = flips.round();
    if r == 0 || !(eta >= 0.0) || (flips - k).abs() > 1e-9 || 2.0 * k >= r as f64 {
        return Err(BaggenError::InfeasiblePurity(flips));
    }
    let k = k as usize;
    let (pos, neg) = (Label::Positive, Label::Negative);
    let truth = [vec![pos; k], vec![neg; k], vec![pos; r - 2 * k]].concat();
    let predicted = [vec![neg; k], vec![pos; k], vec![pos; r - 2 * k]].concat();
    Ok((truth, predicted))
}

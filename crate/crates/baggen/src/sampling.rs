use llp_core::rng::Rng;
use llp_core::{proportion, Bag, Instance, Label};
use rand::seq::index;
use rand::Rng as _;

use crate::{BaggenError, Result};

/// How bag members are drawn from a pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampling {
    /// Independent uniform draws; a member may repeat, also across bags.
    #[default]
    WithReplacement,
    /// No pool instance is used twice in the whole dataset.
    WithoutReplacement,
}

pub(crate) fn labels_of(pool: &[Instance]) -> Result<Vec<Label>> {
    pool.iter()
        .enumerate()
        .map(|(i, x)| x.label.ok_or(BaggenError::Unlabeled(i)))
        .collect()
}

pub(crate) fn bag_from(members: Vec<usize>, labels: &[Label]) -> Result<Bag> {
    let ys: Vec<Label> = members.iter().map(|&i| labels[i]).collect();
    Ok(Bag::new(members, proportion(&ys)?)?)
}

/// Draws `m` member lists of size `r` over `0..n`.
pub(crate) fn draw_members(
    n: usize,
    m: usize,
    r: usize,
    sampling: Sampling,
    rng: &mut Rng,
) -> Result<Vec<Vec<usize>>> {
    match sampling {
        Sampling::WithReplacement => Ok((0..m)
            .map(|_| (0..r).map(|_| rng.random_range(0..n)).collect())
            .collect()),
        Sampling::WithoutReplacement => {
            if m * r > n {
                return Err(BaggenError::InvalidArgument(format!(
                    "{m} disjoint bags of {r} need {} instances, pool has {n}",
                    m * r
                )));
            }
            let picked = index::sample(rng, n, m * r).into_vec();
            Ok(picked.chunks(r).map(<[usize]>::to_vec).collect())
        }
    }
}

pub(crate) fn join_list<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

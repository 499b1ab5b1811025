use llp_baggen::{
    adversarial_hypothesis, gen_adversarial_pure_bags, gen_group_bags, gen_iid_bags,
    gen_iid_bags_with, gen_kappa_bags, gen_mixture_bags, gen_population_bags, keys, metadata_list,
    BaggenError, KappaConfig, MixtureComponent, MixtureConfig, Sampling,
};
use llp_core::{empirical_bag_error, instance_error, proportion, BagDataset, Instance, Label, LossKind};
use proptest::prelude::*;

fn pool(pos: usize, neg: usize) -> Vec<Instance> {
    (0..pos + neg)
        .map(|i| {
            let y = if i < pos { Label::Positive } else { Label::Negative };
            Instance::dense(&[i as f64 + 1.0], Some(y))
        })
        .collect()
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn assert_proportions_match_labels(data: &BagDataset) {
    for (k, bag) in data.bags().iter().enumerate() {
        let ys = data.bag_labels(k).unwrap();
        assert_eq!(bag.proportion(), proportion(&ys).unwrap());
    }
}

#[test]
fn iid_degenerate_pool() {
    let data = gen_iid_bags(&pool(1, 0), 3, 5, 0).unwrap();
    assert_eq!(data.n_bags(), 3);
    assert!(data.bags().iter().all(|b| b.size() == 5 && b.proportion() == 1.0));
}

#[test]
fn iid_singletons_carry_labels() {
    let data = gen_iid_bags(&pool(7, 9), 100, 1, 4).unwrap();
    assert_eq!(data.n_bags(), 100);
    assert!(data.bags().iter().all(|b| b.proportion() == 0.0 || b.proportion() == 1.0));
    assert_proportions_match_labels(&data);
}

#[test]
fn iid_mean_proportion_is_unbiased() {
    let data = gen_iid_bags(&pool(50, 50), 10_000, 10, 12).unwrap();
    let props: Vec<f64> = data.bags().iter().map(|b| b.proportion()).collect();
    let (mean, _) = mean_sd(&props);
    // binomial oracle: Var(p̂) = 0.25 / r per bag
    let se = (0.25 / 10.0 / 10_000.0f64).sqrt();
    assert!((mean - 0.5).abs() < 3.0 * se, "mean {mean}");
}

#[test]
fn iid_rejects_unlabeled_pool() {
    let mut p = pool(2, 2);
    p[3].label = None;
    assert_eq!(gen_iid_bags(&p, 2, 2, 0).unwrap_err(), BaggenError::Unlabeled(3));
}

#[test]
fn without_replacement_is_disjoint() {
    let data = gen_iid_bags_with(&pool(30, 30), 6, 10, 1, Sampling::WithoutReplacement).unwrap();
    assert!(data.bags_disjoint());
    let mut all: Vec<usize> = data.bags().iter().flat_map(|b| b.members().to_vec()).collect();
    all.sort();
    all.dedup();
    assert_eq!(all.len(), 60);
    assert!(gen_iid_bags_with(&pool(3, 3), 2, 4, 1, Sampling::WithoutReplacement).is_err());
}

fn mixture(components: Vec<(f64, Vec<Instance>)>, r: usize, m: usize, seed: u64) -> MixtureConfig {
    MixtureConfig {
        components: components
            .into_iter()
            .map(|(prior, pool)| MixtureComponent { prior, pool })
            .collect(),
        bag_size: r,
        bag_count: m,
        seed,
    }
}

#[test]
fn single_component_mixture_equals_iid() {
    let p = pool(4, 11);
    let a = gen_mixture_bags(&mixture(vec![(1.0, p.clone())], 6, 40, 77)).unwrap();
    let b = gen_iid_bags(&p, 40, 6, 77).unwrap();
    assert_eq!(a.bags(), b.bags());
    assert_eq!(a.instances(), b.instances());
}

#[test]
fn pure_components_give_pure_bags() {
    let cfg = mixture(vec![(0.5, pool(5, 0)), (0.5, pool(0, 5))], 8, 200, 3);
    let data = gen_mixture_bags(&cfg).unwrap();
    assert!(data.bags().iter().all(|b| b.proportion() == 0.0 || b.proportion() == 1.0));
    let comps: Vec<usize> = metadata_list(&data, keys::BAG_COMPONENTS).unwrap();
    assert_eq!(comps.len(), 200);
    for (bag, c) in data.bags().iter().zip(comps) {
        assert_eq!(bag.proportion(), if c == 0 { 1.0 } else { 0.0 });
    }
}

#[test]
fn mixture_purity_meets_chernoff_bound() {
    let (r, m, eta, c) = (100usize, 5000usize, 0.3, 0.2);
    let cfg = mixture(vec![(0.5, pool(10, 90)), (0.5, pool(90, 10))], r, m, 2024);
    let data = gen_mixture_bags(&cfg).unwrap();
    let pure = data
        .bags()
        .iter()
        .filter(|b| b.proportion() >= 1.0 - eta || b.proportion() <= eta)
        .count() as f64
        / m as f64;
    let bound = 1.0 - (-2.0 * r as f64 * c * c).exp();
    let se = (bound * (1.0 - bound) / m as f64).sqrt();
    assert!(pure >= bound - 3.0 * se, "pure fraction {pure} vs bound {bound}");
    assert_proportions_match_labels(&data);
}

#[test]
fn mixture_rejects_bad_priors() {
    let cfg = mixture(vec![(0.6, pool(1, 1)), (0.6, pool(1, 1))], 2, 2, 0);
    assert!(matches!(gen_mixture_bags(&cfg), Err(BaggenError::InvalidPriors(_))));
    let cfg = mixture(vec![(1.5, pool(1, 1)), (-0.5, pool(1, 1))], 2, 2, 0);
    assert!(matches!(gen_mixture_bags(&cfg), Err(BaggenError::InvalidPriors(_))));
}

fn kappa(p: Vec<f64>, m: usize, seed: u64) -> KappaConfig {
    KappaConfig {
        pick_probabilities: p,
        bag_count: m,
        seed,
        coverage_constant: 1.0,
    }
}

#[test]
fn kappa_near_certain_inclusion() {
    let p = pool(3, 4);
    let data = gen_kappa_bags(&p, &kappa(vec![1.0 - 1e-12; 7], 1, 0)).unwrap();
    assert_eq!(data.bags()[0].members(), &[0, 1, 2, 3, 4, 5, 6]);
    assert_eq!(data.metadata()[keys::KAPPA_REJECTIONS], "0");
}

#[test]
fn kappa_bag_size_and_overlap_statistics() {
    let (n, r_hat, m) = (1000usize, 20.0, 5000usize);
    let q = r_hat / n as f64;
    let data = gen_kappa_bags(&pool(300, 700), &kappa(vec![q; n], m, 5)).unwrap();
    let sizes: Vec<f64> = data.bags().iter().map(|b| b.size() as f64).collect();
    let (mean, _) = mean_sd(&sizes);
    let se = (n as f64 * q * (1.0 - q) / m as f64).sqrt();
    assert!((mean - r_hat).abs() < 3.0 * se, "mean size {mean}");

    let overlaps: Vec<f64> = data
        .bags()
        .windows(2)
        .map(|w| w[0].members().iter().filter(|i| w[1].members().binary_search(i).is_ok()).count() as f64)
        .collect();
    let (mean, _) = mean_sd(&overlaps);
    let expect = n as f64 * q * q;
    let se = (n as f64 * q * q * (1.0 - q * q) / overlaps.len() as f64).sqrt();
    assert!((mean - expect).abs() < 3.0 * se, "mean overlap {mean} vs {expect}");
    assert_proportions_match_labels(&data);
}

#[test]
fn kappa_rejects_empty_draws_and_bad_probabilities() {
    let data = gen_kappa_bags(&pool(1, 1), &kappa(vec![0.05, 0.05], 50, 9)).unwrap();
    assert!(data.bags().iter().all(|b| b.size() >= 1));
    let rejected: u64 = data.metadata()[keys::KAPPA_REJECTIONS].parse().unwrap();
    assert!(rejected > 0);
    assert_eq!(
        gen_kappa_bags(&pool(1, 1), &kappa(vec![0.5, 1.0], 1, 0)).unwrap_err(),
        BaggenError::InvalidPick { index: 1, value: 1.0 }
    );
}

#[test]
fn group_bags() {
    let p = pool(3, 5);
    let groups = ["b", "a", "b", "c", "a", "a", "c", "b"];
    let (data, keys) = gen_group_bags(p.clone(), &groups).unwrap();
    assert_eq!(keys, vec!["a", "b", "c"]);
    assert_eq!(data.bags()[0].members(), &[1, 4, 5]);
    assert_eq!(data.bags()[1].members(), &[0, 2, 7]);
    assert!(data.bags_disjoint());
    assert_proportions_match_labels(&data);

    let (single, _) = gen_group_bags(p.clone(), &[0; 8]).unwrap();
    assert_eq!(single.n_bags(), 1);
    assert_eq!(single.bags()[0].proportion(), 3.0 / 8.0);
    assert_eq!(gen_group_bags::<u8>(p, &[]).unwrap_err(), BaggenError::EmptyGroupMap);
}

#[test]
fn population_pure_location() {
    let data = gen_population_bags(&[pool(6, 0)], &[1.0], 5, 4, 0).unwrap();
    let realized: Vec<f64> = metadata_list(&data, keys::REALIZED).unwrap();
    assert!(realized.iter().all(|&p| p == 1.0));
    assert!(data.bags().iter().all(|b| b.proportion() == 1.0));
}

#[test]
fn population_concentration_at_738() {
    // r = ln(2/δ) / (2ε²) = 737.8 for ε = δ = 0.05
    let (r, m) = (738usize, 2000usize);
    let data = gen_population_bags(&[pool(50, 50), pool(20, 80)], &[0.5, 0.2], m, r, 31).unwrap();
    let released: Vec<f64> = metadata_list(&data, keys::RELEASED).unwrap();
    let realized: Vec<f64> = metadata_list(&data, keys::REALIZED).unwrap();
    let exceed = released
        .iter()
        .zip(&realized)
        .filter(|(a, b)| (*a - *b).abs() > 0.05)
        .count() as f64
        / m as f64;
    let se = (0.05 * 0.95 / m as f64).sqrt();
    assert!(exceed <= 0.05 + 3.0 * se, "exceedance {exceed}");
    for (bag, &p) in data.bags().iter().zip(&released) {
        assert_eq!(bag.proportion(), p);
    }
}

#[test]
fn population_small_bags_sit_on_grid() {
    let data = gen_population_bags(&[pool(10, 10)], &[0.5], 100, 10, 8).unwrap();
    let realized: Vec<f64> = metadata_list(&data, keys::REALIZED).unwrap();
    for p in realized {
        assert!(((p * 10.0) - (p * 10.0).round()).abs() < 1e-12);
    }
    assert!(gen_population_bags(&[pool(1, 1)], &[0.5, 0.5], 1, 1, 0).is_err());
}

#[test]
fn adversarial_r10_eta02() {
    let (data, table) = gen_adversarial_pure_bags(10, 0.2, 3).unwrap();
    for (k, bag) in data.bags().iter().enumerate() {
        assert_eq!(bag.proportion(), 0.8);
        let truth = data.bag_labels(k).unwrap();
        assert_eq!(proportion(&table[k]).unwrap(), 0.8);
        let wrong = truth.iter().zip(&table[k]).filter(|(a, b)| a != b).count();
        assert_eq!(wrong, 4);
        let fneg = truth.iter().zip(&table[k]).filter(|(a, b)| a.is_positive() && !b.is_positive()).count();
        assert_eq!(fneg, 2);
    }
}

#[test]
fn adversarial_grid_is_machine_exact() {
    for r in 1..=40usize {
        for k in 0..r.div_ceil(2) {
            let eta = k as f64 / r as f64;
            let (data, _) = gen_adversarial_pure_bags(r, eta, 2).unwrap();
            let h = adversarial_hypothesis(r, eta).unwrap();
            assert_eq!(empirical_bag_error(&h, &data, LossKind::Absolute).unwrap(), 0.0);
            let err = instance_error(&h, data.instances()).unwrap();
            assert_eq!(err, (2 * k) as f64 / r as f64);
            for (b, bag) in data.bags().iter().enumerate() {
                let ys = data.bag_labels(b).unwrap();
                let pos = ys.iter().filter(|y| y.is_positive()).count();
                assert!(pos.max(r - pos) >= r - k, "bag {b} not pure");
                assert_eq!(bag.size(), r);
            }
        }
    }
}

#[test]
fn adversarial_infeasible() {
    assert!(matches!(gen_adversarial_pure_bags(10, 0.15, 1), Err(BaggenError::InfeasiblePurity(_))));
    assert!(matches!(gen_adversarial_pure_bags(10, 0.5, 1), Err(BaggenError::InfeasiblePurity(_))));
    let (data, table) = gen_adversarial_pure_bags(10, 0.0, 1).unwrap();
    assert_eq!(data.bag_labels(0).unwrap(), table[0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generators_are_deterministic(seed in any::<u64>(), m in 1usize..30, r in 1usize..15) {
        let p = pool(5, 8);
        prop_assert_eq!(gen_iid_bags(&p, m, r, seed).unwrap(), gen_iid_bags(&p, m, r, seed).unwrap());
        let cfg = mixture(vec![(0.3, pool(2, 5)), (0.7, pool(6, 1))], r, m, seed);
        prop_assert_eq!(gen_mixture_bags(&cfg).unwrap(), gen_mixture_bags(&cfg).unwrap());
        let kc = kappa(vec![0.2; 13], m, seed);
        prop_assert_eq!(gen_kappa_bags(&p, &kc).unwrap(), gen_kappa_bags(&p, &kc).unwrap());
    }

    #[test]
    fn generated_proportions_match_members(seed in any::<u64>(), m in 1usize..20, r in 1usize..20) {
        let data = gen_iid_bags(&pool(4, 9), m, r, seed).unwrap();
        for (k, bag) in data.bags().iter().enumerate() {
            prop_assert_eq!(bag.proportion(), proportion(&data.bag_labels(k).unwrap()).unwrap());
        }
    }
}

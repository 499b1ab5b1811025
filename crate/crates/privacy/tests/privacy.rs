use llp_core::rng::seeded;
use llp_core::{Bag, BagDataset, Instance, Label};
use llp_privacy::{
    aggregate_deviation, deviation_check, laplace_draw, laplace_sample, perturb_counts,
    release_private_proportions, PrivacyBudget, PrivacyError,
};

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

/// Disjoint bags with the given (positives, negatives) counts; labels inside
/// each bag are laid out by `order`.
fn bags(counts: &[(usize, usize)], interleave: bool) -> BagDataset {
    let mut instances = Vec::new();
    let mut out = Vec::new();
    for &(p, n) in counts {
        let start = instances.len();
        let mut labels: Vec<Label> = [vec![Label::Positive; p], vec![Label::Negative; n]].concat();
        if interleave {
            labels.reverse();
        }
        for y in labels {
            instances.push(Instance::dense(&[instances.len() as f64], Some(y)));
        }
        out.push(Bag::new((start..start + p + n).collect(), p as f64 / (p + n) as f64).unwrap());
    }
    BagDataset::new(instances, out).unwrap()
}

#[test]
fn laplace_moments() {
    let scale = 2.5;
    let mut rng = seeded(17);
    let xs: Vec<f64> = (0..1_000_000).map(|_| laplace_draw(&mut rng, scale)).collect();
    let (m, v) = mean_var(&xs);
    assert!(m.abs() < 4.0 * scale * 2f64.sqrt() / 1e3, "mean {m}");
    assert!((v / (2.0 * scale * scale) - 1.0).abs() < 0.05, "variance {v}");
}

#[test]
fn seeded_samples_are_reproducible_and_centered() {
    assert_eq!(laplace_sample(1.0, 5).unwrap(), laplace_sample(1.0, 5).unwrap());
    let xs: Vec<f64> = (0..100_000).map(|s| laplace_sample(1.0, s).unwrap()).collect();
    let (m, v) = mean_var(&xs);
    assert!(m.abs() < 4.0 * (2.0f64 / 1e5).sqrt());
    assert!((v / 2.0 - 1.0).abs() < 0.05);
}

#[test]
fn released_proportion_is_nearly_unbiased() {
    let budget = PrivacyBudget::new(1.0, 10).unwrap();
    assert_eq!(budget.scale(), 10.0);
    let ps: Vec<f64> = (0..100_000).map(|s| perturb_counts(600, 400, &budget, s).released_proportion).collect();
    let (m, v) = mean_var(&ps);
    let se = (v / ps.len() as f64).sqrt();
    assert!((m - 0.6).abs() < 3.0 * se, "mean {m} se {se}");
}

#[test]
fn huge_budget_releases_exact_proportions() {
    let data = bags(&[(3, 7), (5, 5), (0, 4)], false);
    let budget = PrivacyBudget::new(1e300, 3).unwrap();
    let (released, counts) = release_private_proportions(&data, &budget, 2).unwrap();
    for (a, b) in released.bags().iter().zip(data.bags()) {
        assert_eq!(a.proportion(), b.proportion());
    }
    assert!(released.instances().iter().all(|x| x.label.is_none()));
    assert!(counts.iter().all(|c| !c.degenerate));
    assert_eq!(released.metadata()["privacy_k"], "3");
}

#[test]
fn overlapping_bags_are_refused() {
    let instances: Vec<Instance> = (0..4).map(|i| Instance::dense(&[i as f64], Some(Label::Positive))).collect();
    let data = BagDataset::new(
        instances,
        vec![Bag::new(vec![0, 1, 2], 1.0).unwrap(), Bag::new(vec![2, 3], 1.0).unwrap()],
    )
    .unwrap();
    let budget = PrivacyBudget::new(1.0, 2).unwrap();
    let err = release_private_proportions(&data, &budget, 0).unwrap_err();
    assert_eq!(err, PrivacyError::OverlappingBags);
    assert_eq!(err.to_string(), "disjointness required for stated budget");
}

#[test]
fn output_depends_on_counts_only() {
    let budget = PrivacyBudget::new(0.5, 3).unwrap();
    let a = bags(&[(3, 7), (5, 5), (1, 4)], false);
    let b = bags(&[(3, 7), (5, 5), (1, 4)], true);
    let (ra, _) = release_private_proportions(&a, &budget, 99).unwrap();
    let (rb, _) = release_private_proportions(&b, &budget, 99).unwrap();
    assert_eq!(ra.bags(), rb.bags());
    // deterministic, and the input is left untouched
    let (again, _) = release_private_proportions(&a, &budget, 99).unwrap();
    assert_eq!(ra, again);
    assert_eq!(a, bags(&[(3, 7), (5, 5), (1, 4)], false));
}

#[test]
fn bag_noise_is_independent() {
    let data = bags(&[(50, 50), (50, 50)], false);
    let budget = PrivacyBudget::new(2.0, 2).unwrap();
    let n = 10_000;
    let (mut xs, mut ys) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for s in 0..n as u64 {
        let (_, c) = release_private_proportions(&data, &budget, s).unwrap();
        xs.push(c[0].n_plus_released - 50.0);
        ys.push(c[1].n_plus_released - 50.0);
    }
    let (mx, vx) = mean_var(&xs);
    let (my, vy) = mean_var(&ys);
    let cov = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (n as f64 - 1.0);
    let corr = cov / (vx * vy).sqrt();
    assert!(corr.abs() < 4.0 / (n as f64).sqrt(), "correlation {corr}");
}

#[test]
fn deviation_large_n_small_exceedance() {
    let budget = PrivacyBudget::new(1.0, 10).unwrap();
    let r = deviation_check(100_000, 0.3, &budget, 0.01, 10_000, 1).unwrap();
    assert!(r.rate() < 0.05, "rate {}", r.rate());
    let small = deviation_check(10, 0.3, &budget, 0.01, 10_000, 1).unwrap();
    assert!(small.rate() > 0.5, "small-n rate {}", small.rate());
}

#[test]
fn deviation_without_noise_never_exceeds() {
    let budget = PrivacyBudget::new(1e300, 1).unwrap();
    assert_eq!(deviation_check(37, 0.4, &budget, 1e-9, 2000, 3).unwrap().exceed, 0);
}

#[test]
fn deviation_monotone_in_n_and_eta() {
    let theta = 0.02;
    let rate = |n: u64, eta: f64| {
        let b = PrivacyBudget::new(eta, 10).unwrap();
        deviation_check(n, 0.5, &b, theta, 4000, 8).unwrap().rate()
    };
    let ns = [100, 1000, 10_000, 100_000];
    let etas = [0.1, 1.0, 10.0];
    for &eta in &etas {
        let rates: Vec<f64> = ns.iter().map(|&n| rate(n, eta)).collect();
        // common random numbers: the same seed gives the same noise draws
        assert!(rates.windows(2).all(|w| w[1] <= w[0]), "eta {eta}: {rates:?}");
    }
    for &n in &ns {
        let rates: Vec<f64> = etas.iter().map(|&e| rate(n, e)).collect();
        assert!(rates.windows(2).all(|w| w[1] <= w[0]), "n {n}: {rates:?}");
    }
}

#[test]
fn aggregate_claim_across_sets() {
    let k = 200;
    let budget = PrivacyBudget::new(1.0, k).unwrap();
    let counts: Vec<_> = (0..k as u64).map(|s| perturb_counts(60_000, 40_000, &budget, s)).collect();
    let agg = aggregate_deviation(&counts, 0.01, 0.05, 0.05);
    assert!(agg.exceed_fraction <= agg.allowed_fraction, "{agg:?}");
    assert!(agg.confidence > 0.6);
}

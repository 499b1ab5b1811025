//! The census experiments and the match-probability sweep.
//!
//! Seeds are derived from the configured seed by fixed stream numbers, so a
//! grid point's results do not depend on which other points are configured.
//! Independent grid points and runs are evaluated in parallel and collected
//! in (grid point, run) order.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use llp_baggen::{gen_group_bags, gen_iid_bags, gen_mixture_bags, keys, metadata_list};
use llp_baggen::{MixtureComponent, MixtureConfig};
use llp_core::rng::derive_seed;
use llp_core::{instance_error, BagDataset, Instance};
use llp_privacy::{aggregate_deviation, release_private_proportions, PrivacyBudget};
use llp_solvers::{cross_validate, grid, train, train_baseline, Fallback, TrainConfig};
use llp_theory::{binom_match_prob, monotone_breakpoint, MatchProbQuery};
use rayon::prelude::*;

use crate::config::{CurveGenerator, ExperimentConfig, ExperimentKind};
use crate::data::load_sparse_dataset;
use crate::groups::GroupMapping;
use crate::output::{
    mean_std, summarize, write_csv, CurveRow, Manifest, PrivacyRow, ResultRow, Stat, ThresholdRow,
};
use crate::split::Split;
use crate::{HarnessError, Result};

const SPLIT_STREAM: u64 = 0x5311;
const CV_STREAM: u64 = 0xc5;
const BAG_STREAM: u64 = 0xba9;
const SOLVER_STREAM: u64 = 0x501;
const NOISE_STREAM: u64 = 0x4015e;

/// Labelled instances plus the grouping attributes defined over them.
#[derive(Debug, Clone)]
pub struct Census {
    pub instances: Vec<Instance>,
    pub groups: GroupMapping,
}

impl Census {
    pub fn load(dataset: impl AsRef<Path>, groups: impl AsRef<Path>) -> Result<Self> {
        Ok(Self {
            instances: load_sparse_dataset(dataset)?,
            groups: GroupMapping::load(groups)?,
        })
    }
}

/// Seed stream keyed by a name, so it does not depend on list positions.
fn name_stream(root: u64, name: &str) -> u64 {
    name.bytes().fold(root, |s, b| derive_seed(s, b as u64))
}

fn split_for(config: &ExperimentConfig, n: usize, run: usize) -> Split {
    let base = derive_seed(config.seed, SPLIT_STREAM);
    let seed = if config.vary_split { derive_seed(base, run as u64) } else { base };
    Split::new(n, config.split_fraction, seed)
}

/// Tunes `(C, C_p)` by cross-validated bag error, using `min(folds, bags)`
/// folds. With fewer than two bags nothing can be held out and `base` is
/// returned unchanged.
fn tune(config: &ExperimentConfig, bags: &BagDataset, seed: u64) -> Result<TrainConfig> {
    let folds = config.folds.min(bags.n_bags());
    if folds < 2 {
        return Ok(config.solver.clone());
    }
    let points = grid(&config.c_grid, &config.c_p_grid);
    Ok(cross_validate(bags, &points, folds, &config.solver, seed)?.best)
}

fn error_share(wrong: usize, n: usize) -> f64 {
    wrong as f64 / n as f64
}

struct Fitted {
    train_bag_error: f64,
    test_error: f64,
    baseline_error: f64,
}

/// Trains the solver and the group-majority baseline on `bags`; `keys[b]` is
/// the group of bag `b` and `test_keys[i]` that of test instance `i`.
fn fit_and_score<K: Ord + Clone>(
    bags: &BagDataset,
    solver: &TrainConfig,
    bag_keys: &[K],
    test: &[Instance],
    test_keys: &[K],
) -> Result<Fitted> {
    let result = train(bags, solver)?;
    let baseline = train_baseline(bags, bag_keys, Fallback::GlobalMajority)?;
    let wrong = test
        .iter()
        .zip(test_keys)
        .filter(|(x, k)| Some(baseline.predict(k)) != x.label)
        .count();
    Ok(Fitted {
        train_bag_error: result.final_bag_error,
        test_error: instance_error(&result.hypothesis, test)?,
        baseline_error: error_share(wrong, test.len()),
    })
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    generator: CurveGenerator,
    bag_size: usize,
    budget: usize,
}

impl Cell {
    fn seed(&self, root: u64) -> u64 {
        let g = derive_seed(root, self.generator as u64);
        derive_seed(derive_seed(g, self.bag_size as u64), self.budget as u64)
    }

    fn bag_count(&self) -> usize {
        self.budget / self.bag_size
    }
}

/// Training bags of one learning-curve run, with the original index of every
/// bag instance, the group key of every bag and the key of every test
/// instance.
struct CurveBags {
    bags: BagDataset,
    origin: Vec<usize>,
    bag_keys: Vec<usize>,
    test_keys: Vec<usize>,
}

fn curve_bags(
    census: &Census,
    groups: &[String],
    split: &Split,
    cell: Cell,
    seed: u64,
) -> Result<CurveBags> {
    let (m, r) = (cell.bag_count(), cell.bag_size);
    match cell.generator {
        CurveGenerator::Iid => {
            let pool = split.train_instances(&census.instances);
            Ok(CurveBags {
                bags: gen_iid_bags(&pool, m, r, seed)?,
                origin: split.train.clone(),
                bag_keys: vec![0; m],
                test_keys: vec![0; split.test.len()],
            })
        }
        CurveGenerator::Mixture => {
            let mut by_group: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
            for &i in &split.train {
                by_group.entry(groups[i].as_str()).or_default().push(i);
            }
            let prior = 1.0 / by_group.len() as f64;
            let components = by_group
                .values()
                .map(|idx| MixtureComponent {
                    prior,
                    pool: idx.iter().map(|&i| census.instances[i].clone()).collect(),
                })
                .collect();
            let bags = gen_mixture_bags(&MixtureConfig {
                components,
                bag_size: r,
                bag_count: m,
                seed,
            })?;
            let bag_keys = metadata_list(&bags, keys::BAG_COMPONENTS)
                .ok_or_else(|| HarnessError::Experiment("mixture bags without components".into()))?;
            let position: BTreeMap<&str, usize> = by_group.keys().enumerate().map(|(k, g)| (*g, k)).collect();
            let test_keys = split
                .test
                .iter()
                .map(|&i| position.get(groups[i].as_str()).copied().unwrap_or(usize::MAX))
                .collect();
            Ok(CurveBags {
                bags,
                origin: by_group.into_values().flatten().collect(),
                bag_keys,
                test_keys,
            })
        }
    }
}

/// Test error against training-instance budget for each generator and bag
/// size. `(C, C_p)` is tuned once per series, on the run-0 bags drawn at
/// `tuning_budget`.
pub fn run_learning_curve(config: &ExperimentConfig, census: &Census) -> Result<Vec<ResultRow>> {
    let lc = &config.learning_curve;
    let mut cells = Vec::new();
    for &generator in &lc.generators {
        for &bag_size in &lc.bag_sizes {
            for &budget in &lc.budgets {
                let cell = Cell { generator, bag_size, budget };
                if cell.bag_count() == 0 {
                    return Err(HarnessError::Config(format!(
                        "budget {budget} is smaller than one bag of {bag_size}"
                    )));
                }
                cells.push(cell);
            }
        }
    }
    let groups = if lc.generators.contains(&CurveGenerator::Mixture) {
        census.groups.assign(&lc.mixture_attribute, &census.instances)?
    } else {
        Vec::new()
    };
    let n = census.instances.len();
    let draw = |cell: Cell, run: usize| -> Result<(Split, CurveBags)> {
        let split = split_for(config, n, run);
        let run_seed = derive_seed(cell.seed(config.seed), run as u64);
        let bags = curve_bags(census, &groups, &split, cell, derive_seed(run_seed, BAG_STREAM))?;
        split.audit(n, &bags.bags, &bags.origin)?;
        Ok((split, bags))
    };

    let series: Vec<(CurveGenerator, usize)> = lc
        .generators
        .iter()
        .flat_map(|&g| lc.bag_sizes.iter().map(move |&r| (g, r)))
        .collect();
    let tuned: Vec<TrainConfig> = series
        .par_iter()
        .map(|&(generator, bag_size)| {
            let cell = Cell { generator, bag_size, budget: lc.tuning_budget.max(bag_size) };
            tune(config, &draw(cell, 0)?.1.bags, derive_seed(cell.seed(config.seed), CV_STREAM))
        })
        .collect::<Result<_>>()?;

    let blocks = cells
        .par_iter()
        .map(|&cell| -> Result<Vec<ResultRow>> {
            let cell_seed = cell.seed(config.seed);
            let tuned = &tuned[series
                .iter()
                .position(|&s| s == (cell.generator, cell.bag_size))
                .expect("every cell belongs to a series")];
            let runs = (0..config.runs)
                .into_par_iter()
                .map(|run| -> Result<ResultRow> {
                    let start = Instant::now();
                    let (split, b) = draw(cell, run)?;
                    let solver = TrainConfig {
                        seed: derive_seed(derive_seed(cell_seed, run as u64), SOLVER_STREAM),
                        ..tuned.clone()
                    };
                    let test = split.test_instances(&census.instances);
                    let fit = fit_and_score(&b.bags, &solver, &b.bag_keys, &test, &b.test_keys)?;
                    Ok(ResultRow {
                        experiment: ExperimentKind::LearningCurve.name().into(),
                        generator: match cell.generator {
                            CurveGenerator::Iid => "iid".into(),
                            CurveGenerator::Mixture => format!("mixture-{}", lc.mixture_attribute),
                        },
                        budget: cell.bag_count() * cell.bag_size,
                        bag_count: cell.bag_count(),
                        bag_size: cell.bag_size as f64,
                        stat: Stat::Run,
                        run: Some(run),
                        c: tuned.c,
                        c_p: tuned.c_p,
                        train_bag_error: fit.train_bag_error,
                        test_error: fit.test_error,
                        baseline_error: fit.baseline_error,
                        wall_time: start.elapsed().as_secs_f64(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let mut out = runs.clone();
            out.extend(summarize(&runs));
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

/// One bag per group of each table attribute. `(C, C_p)` is tuned once per
/// attribute; the runs vary the solver seed, and also the split when
/// `vary_split` is set.
pub fn run_group_table(config: &ExperimentConfig, census: &Census) -> Result<Vec<ResultRow>> {
    let attributes: Vec<String> = match &config.grouping_attribute {
        Some(a) => vec![a.clone()],
        None => config.group_table.attributes.clone(),
    };
    let n = census.instances.len();
    let blocks = attributes
        .par_iter()
        .map(|attribute| -> Result<Vec<ResultRow>> {
            let groups = census.groups.assign(attribute, &census.instances)?;
            let attr_seed = name_stream(config.seed, attribute);
            let draw = |run: usize| -> Result<(Split, BagDataset, Vec<String>)> {
                let split = split_for(config, n, run);
                let keys: Vec<String> = split.train.iter().map(|&i| groups[i].clone()).collect();
                let (bags, bag_keys) = gen_group_bags(split.train_instances(&census.instances), &keys)?;
                split.audit(n, &bags, &split.train)?;
                Ok((split, bags, bag_keys))
            };
            let tuned = tune(config, &draw(0)?.1, derive_seed(attr_seed, CV_STREAM))?;
            let runs = (0..config.runs)
                .into_par_iter()
                .map(|run| -> Result<ResultRow> {
                    let start = Instant::now();
                    let (split, bags, bag_keys) = draw(run)?;
                    let solver = TrainConfig {
                        seed: derive_seed(derive_seed(attr_seed, run as u64), SOLVER_STREAM),
                        ..tuned.clone()
                    };
                    let test = split.test_instances(&census.instances);
                    let test_keys: Vec<String> = split.test.iter().map(|&i| groups[i].clone()).collect();
                    let fit = fit_and_score(&bags, &solver, &bag_keys, &test, &test_keys)?;
                    Ok(ResultRow {
                        experiment: ExperimentKind::GroupTable.name().into(),
                        generator: format!("group-{attribute}"),
                        budget: split.train.len(),
                        bag_count: bags.n_bags(),
                        bag_size: split.train.len() as f64 / bags.n_bags() as f64,
                        stat: Stat::Run,
                        run: Some(run),
                        c: tuned.c,
                        c_p: tuned.c_p,
                        train_bag_error: fit.train_bag_error,
                        test_error: fit.test_error,
                        baseline_error: fit.baseline_error,
                        wall_time: start.elapsed().as_secs_f64(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let mut out = runs.clone();
            out.extend(summarize(&runs));
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

/// Retrains on Laplace-perturbed group proportions for each total budget
/// `eta` (split evenly over the bags) and compares with the non-private
/// model of the same run.
pub fn run_privacy_sweep(config: &ExperimentConfig, census: &Census) -> Result<Vec<PrivacyRow>> {
    let attribute = config.grouping_attribute.clone().unwrap_or_else(|| "occupation".into());
    let groups = census.groups.assign(&attribute, &census.instances)?;
    let n = census.instances.len();
    let theta = config.privacy.theta;
    let draw = |run: usize| -> Result<(Split, BagDataset)> {
        let split = split_for(config, n, run);
        let keys: Vec<String> = split.train.iter().map(|&i| groups[i].clone()).collect();
        let (bags, _) = gen_group_bags(split.train_instances(&census.instances), &keys)?;
        split.audit(n, &bags, &split.train)?;
        Ok((split, bags))
    };
    let tuned = tune(config, &draw(0)?.1, derive_seed(config.seed, CV_STREAM))?;

    // per run: the non-private error, then one row per eta
    let per_run = (0..config.runs)
        .into_par_iter()
        .map(|run| -> Result<Vec<PrivacyRow>> {
            let (split, bags) = draw(run)?;
            let run_seed = derive_seed(config.seed, run as u64);
            let solver = TrainConfig {
                seed: derive_seed(run_seed, SOLVER_STREAM),
                ..tuned.clone()
            };
            let test = split.test_instances(&census.instances);
            let clean = instance_error(&train(&bags, &solver)?.hypothesis, &test)?;
            config
                .privacy
                .etas
                .par_iter()
                .enumerate()
                .map(|(e, &eta)| -> Result<PrivacyRow> {
                    let start = Instant::now();
                    let budget = PrivacyBudget::new(eta, bags.n_bags())?;
                    let noise_seed = derive_seed(derive_seed(run_seed, NOISE_STREAM), e as u64);
                    let (released, counts) = release_private_proportions(&bags, &budget, noise_seed)?;
                    let err = instance_error(&train(&released, &solver)?.hypothesis, &test)?;
                    Ok(PrivacyRow {
                        attribute: attribute.clone(),
                        eta,
                        bag_count: bags.n_bags(),
                        stat: Stat::Run,
                        run: Some(run),
                        test_error: err,
                        non_private_error: clean,
                        utility_loss: err - clean,
                        exceed_fraction: aggregate_deviation(&counts, theta, 0.0, 0.0).exceed_fraction,
                        theta,
                        degenerate_bags: counts.iter().filter(|c| c.degenerate).count() as f64,
                        wall_time: start.elapsed().as_secs_f64(),
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for e in 0..config.privacy.etas.len() {
        let runs: Vec<PrivacyRow> = per_run.iter().map(|r| r[e].clone()).collect();
        let col = |f: fn(&PrivacyRow) -> f64| mean_std(&runs.iter().map(f).collect::<Vec<_>>());
        let cols = [
            col(|r| r.test_error),
            col(|r| r.non_private_error),
            col(|r| r.utility_loss),
            col(|r| r.exceed_fraction),
            col(|r| r.degenerate_bags),
            col(|r| r.wall_time),
        ];
        let summary = |stat: Stat, pick: fn((f64, f64)) -> f64| PrivacyRow {
            stat,
            run: None,
            test_error: pick(cols[0]),
            non_private_error: pick(cols[1]),
            utility_loss: pick(cols[2]),
            exceed_fraction: pick(cols[3]),
            degenerate_bags: pick(cols[4]),
            wall_time: pick(cols[5]),
            ..runs[0].clone()
        };
        let (mean, std) = (summary(Stat::Mean, |p| p.0), summary(Stat::Std, |p| p.1));
        rows.extend(runs);
        rows.push(mean);
        rows.push(std);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundSweep {
    /// Curves at `ε = 0`, at `ε = 0.1`, and at the fixed bag size.
    pub panels: [Vec<CurveRow>; 3],
    pub thresholds: Vec<ThresholdRow>,
}

fn curve(panel: &str, r: u32, epsilon: f64, steps: usize) -> Result<Vec<CurveRow>> {
    let (beta_star, _) = monotone_breakpoint(r, epsilon)?;
    (0..=steps)
        .map(|j| {
            let beta = j as f64 / steps as f64;
            let match_prob = binom_match_prob(&MatchProbQuery::new(r, beta, epsilon)?);
            Ok(CurveRow {
                panel: panel.into(),
                r,
                epsilon,
                beta,
                match_prob,
                // for large slack P rounds to 1 over a stretch of small β,
                // which no inverse can resolve
                invertible: beta <= beta_star && (beta == 0.0 || match_prob < 1.0),
            })
        })
        .collect()
}

pub fn run_bound_sweep(config: &ExperimentConfig) -> Result<BoundSweep> {
    let b = &config.bound_sweep;
    if b.beta_steps == 0 {
        return Err(HarnessError::Config("beta_steps must be positive".into()));
    }
    let mut jobs: Vec<(usize, &str, u32, f64)> = Vec::new();
    jobs.extend(b.panel_r.iter().map(|&r| (0, "a", r, 0.0)));
    jobs.extend(b.panel_r.iter().map(|&r| (1, "b", r, 0.1)));
    jobs.extend(b.panel_epsilons.iter().map(|&e| (2, "c", b.panel_fixed_r, e)));
    let curves = jobs
        .par_iter()
        .map(|&(_, name, r, e)| curve(name, r, e, b.beta_steps))
        .collect::<Result<Vec<_>>>()?;
    let mut panels: [Vec<CurveRow>; 3] = Default::default();
    for (job, rows) in jobs.iter().zip(curves) {
        panels[job.0].extend(rows);
    }
    let points: Vec<(u32, f64)> = b
        .threshold_r
        .iter()
        .flat_map(|&r| b.threshold_epsilons.iter().map(move |&e| (r, e)))
        .collect();
    let thresholds = points
        .par_iter()
        .map(|&(r, epsilon)| -> Result<ThresholdRow> {
            let (beta_star, u) = monotone_breakpoint(r, epsilon)?;
            Ok(ThresholdRow { r, epsilon, beta_star, u })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundSweep { panels, thresholds })
}

/// Runs `config.experiment`, writes its CSV files and `manifest.json` into
/// `config.output_dir`, and returns the written paths.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let load = || Census::load(&config.dataset_path, &config.groups_path);
    let mut written = Vec::new();
    let mut emit = |name: &str, f: &dyn Fn(&Path) -> Result<()>| -> Result<()> {
        let path = dir.join(name);
        f(&path)?;
        written.push(PathBuf::from(name));
        Ok(())
    };
    match config.experiment {
        ExperimentKind::LearningCurve => {
            let rows = run_learning_curve(config, &load()?)?;
            emit("learning_curve.csv", &|p| write_csv(p, &rows))?;
        }
        ExperimentKind::GroupTable => {
            let rows = run_group_table(config, &load()?)?;
            emit("group_table.csv", &|p| write_csv(p, &rows))?;
        }
        ExperimentKind::PrivacySweep => {
            let rows = run_privacy_sweep(config, &load()?)?;
            emit("privacy_sweep.csv", &|p| write_csv(p, &rows))?;
        }
        ExperimentKind::BoundSweep => {
            let sweep = run_bound_sweep(config)?;
            for (name, rows) in ["a", "b", "c"].iter().zip(&sweep.panels) {
                emit(&format!("bound_panel_{name}.csv"), &|p| write_csv(p, rows))?;
            }
            emit("bound_panel_d.csv", &|p| write_csv(p, &sweep.thresholds))?;
        }
    }
    Manifest::new(config, written.clone()).write(dir.join("manifest.json"))?;
    Ok(written)
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use llp_baggen::{gen_group_bags, gen_iid_bags, gen_mixture_bags, MixtureComponent, MixtureConfig};
use llp_core::{empirical_bag_error, instance_error, BagDataset, LossKind};
use llp_harness::config::{ExperimentConfig, ExperimentKind};
use llp_harness::{adult, data, groups::GroupMapping, run_experiment, HarnessError, Result};
use llp_privacy::{deviation_check, release_private_proportions, PrivacyBudget};
use llp_solvers::{train, SolverKind, TrainConfig, TrainResult};
use llp_theory as theory;
use serde::{de::DeserializeOwned, Serialize};

/// Learning from label proportions: bag generation, training, bounds and
/// experiments.
#[derive(Parser)]
#[command(name = "llp", version)]
struct Cli {
    /// Root seed of every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Experiment configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw training bags from a sparse dataset and write them as JSON.
    Generate(GenerateArgs),
    /// Train a model on JSON bags and write the result as JSON.
    Train(TrainArgs),
    /// Report the test error of a trained model.
    Evaluate(EvaluateArgs),
    /// Evaluate one of the bound calculators.
    Theory {
        #[command(subcommand)]
        calculator: Calculator,
    },
    /// Differentially private proportion release.
    Privacy {
        #[command(subcommand)]
        action: PrivacyAction,
    },
    /// Run a configured experiment and write its CSV files and manifest.
    Experiment(ExperimentArgs),
    /// Encode the raw census file into the sparse format and write the
    /// grouping file next to it.
    PrepareAdult {
        /// The comma-separated `adult.data` file.
        input: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorArg {
    Iid,
    Mixture,
    Group,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum, default_value = "iid")]
    generator: GeneratorArg,
    /// Grouping file, for the mixture and group generators.
    #[arg(long, default_value = "data/adult.groups")]
    groups: PathBuf,
    #[arg(long)]
    attribute: Option<String>,
    /// Number of bags (iid and mixture).
    #[arg(short, long, default_value_t = 100)]
    m: usize,
    /// Bag size (iid and mixture).
    #[arg(short, long, default_value_t = 10)]
    r: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    AlterPsvm,
    MeanMap,
    InvCal,
}

#[derive(Args)]
struct TrainArgs {
    /// Bags written by `generate` or `privacy release`.
    #[arg(long)]
    bags: PathBuf,
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    c_p: Option<f64>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    /// Labelled sparse test instances.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Bags whose proportion error to report.
    #[arg(long)]
    bags: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Calculator {
    /// Probability that the predicted proportion is within epsilon.
    MatchProb {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        epsilon: f64,
    },
    /// Instance error on the decreasing branch with the given match probability.
    Invert {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        target: f64,
    },
    /// Threshold above which the match probability is invertible.
    UThreshold {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        epsilon: f64,
    },
    /// Number of bags sufficient for uniform convergence of the bag error.
    SampleComplexity {
        #[arg(long)]
        vc: u32,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
    },
    /// Guaranteed share of correctly labelled instances over many pure bags.
    Purity {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        n_bags: u64,
        #[arg(long)]
        r: f64,
    },
    /// Purity level and probability for bags of a mixture.
    MixturePurity {
        #[arg(long)]
        r: u64,
        #[arg(long)]
        c: f64,
        /// Comma-separated component priors.
        #[arg(long, value_delimiter = ',')]
        alphas: Vec<f64>,
    },
    /// Bags needed to estimate population proportions.
    PopulationSize {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
    },
}

#[derive(Subcommand)]
enum PrivacyAction {
    /// Replace the proportions of disjoint labelled bags by noisy ones.
    Release {
        #[arg(long)]
        bags: PathBuf,
        /// Total privacy budget, split evenly over the bags.
        #[arg(long)]
        eta: f64,
    },
    /// Share of releases whose proportion misses the truth by more than theta.
    Deviation {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        proportion: f64,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.01)]
        theta: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// learning-curve, group-table, bound-sweep or privacy-sweep.
    name: String,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    groups: Option<PathBuf>,
    #[arg(long)]
    attribute: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    vary_split: bool,
    /// Any other configuration key, as `key=value` or `section.key=value`.
    #[arg(long = "set")]
    overrides: Vec<String>,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string(value)? + "\n";
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn io(path: &Path, e: std::io::Error) -> HarnessError {
    HarnessError::Io { path: path.to_path_buf(), source: e }
}

fn config_of(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config = config.with_overrides(&[format!("seed={seed}")])?;
    }
    Ok(config)
}

fn generate(cli: &Cli, args: &GenerateArgs) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    let instances = data::load_sparse_dataset(&args.dataset)?;
    let grouped = || -> Result<Vec<String>> {
        let attribute = args
            .attribute
            .as_deref()
            .ok_or_else(|| HarnessError::Config("--attribute is required for this generator".into()))?;
        GroupMapping::load(&args.groups)?.assign(attribute, &instances)
    };
    let bags: BagDataset = match args.generator {
        GeneratorArg::Iid => gen_iid_bags(&instances, args.m, args.r, seed)?,
        GeneratorArg::Mixture => {
            let keys = grouped()?;
            let mut pools: std::collections::BTreeMap<&str, Vec<_>> = Default::default();
            for (x, k) in instances.iter().zip(&keys) {
                pools.entry(k.as_str()).or_default().push(x.clone());
            }
            let prior = 1.0 / pools.len() as f64;
            gen_mixture_bags(&MixtureConfig {
                components: pools.into_values().map(|pool| MixtureComponent { prior, pool }).collect(),
                bag_size: args.r,
                bag_count: args.m,
                seed,
            })?
        }
        GeneratorArg::Group => {
            let keys = grouped()?;
            let (bags, names) = gen_group_bags(instances.clone(), &keys)?;
            bags.with_metadata("group_keys", names.join(","))
        }
    };
    write_json(cli.out.as_deref(), &bags)
}

fn train_cmd(cli: &Cli, args: &TrainArgs) -> Result<()> {
    let bags: BagDataset = read_json(&args.bags)?;
    let base = config_of(cli)?.solver;
    let config = TrainConfig {
        solver: match args.solver {
            Some(SolverArg::AlterPsvm) => SolverKind::AlterPsvm,
            Some(SolverArg::MeanMap) => SolverKind::MeanMap,
            Some(SolverArg::InvCal) => SolverKind::InvCal,
            None => base.solver,
        },
        c: args.c.unwrap_or(base.c),
        c_p: args.c_p.unwrap_or(base.c_p),
        seed: cli.seed.unwrap_or(base.seed),
        ..base
    };
    let result = train(&bags, &config)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    write_json(cli.out.as_deref(), &result)
}

fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let model: TrainResult = read_json(&args.model)?;
    if let Some(path) = &args.dataset {
        let test = data::load_sparse_dataset(path)?;
        println!("test_error = {}", instance_error(&model.hypothesis, &test)?);
    }
    if let Some(path) = &args.bags {
        let bags: BagDataset = read_json(path)?;
        println!("bag_error = {}", empirical_bag_error(&model.hypothesis, &bags, LossKind::Absolute)?);
    }
    Ok(())
}

fn calculator(c: &Calculator) -> Result<()> {
    match c {
        Calculator::MatchProb { r, beta, epsilon } => {
            let q = theory::MatchProbQuery::new(*r, *beta, *epsilon)?;
            println!("match_prob = {}", theory::binom_match_prob(&q));
        }
        Calculator::Invert { r, epsilon, target } => {
            println!("beta = {}", theory::invert_match_prob(*r, *epsilon, *target)?);
        }
        Calculator::UThreshold { r, epsilon } => {
            let (beta_star, u) = theory::monotone_breakpoint(*r, *epsilon)?;
            println!("u = {u}\nbeta_star = {beta_star}");
        }
        Calculator::SampleComplexity { vc, r, epsilon, delta } => {
            println!("m = {}", theory::bag_sample_complexity(*vc, *r, *epsilon, *delta)?);
        }
        Calculator::Purity { epsilon, delta, eta, rho, tau, n_bags, r } => {
            let g = theory::purity_multi_bag(&theory::PurityQuery {
                epsilon: *epsilon,
                delta: *delta,
                eta: *eta,
                rho: *rho,
                tau: *tau,
                n_bags: *n_bags,
                r: *r,
            })?;
            println!("fraction = {}\nconfidence = {}\nvacuous = {}", g.fraction, g.confidence, g.vacuous);
        }
        Calculator::MixturePurity { r, c, alphas } => {
            let (eta, prob) = theory::mixture_purity_bound(*r, *c, alphas)?;
            println!("eta = {eta}\nprobability = {prob}");
        }
        Calculator::PopulationSize { epsilon, delta } => {
            println!("m = {}", theory::population_sample_size(*epsilon, *delta)?);
        }
    }
    Ok(())
}

fn privacy(cli: &Cli, action: &PrivacyAction) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    match action {
        PrivacyAction::Release { bags, eta } => {
            let bags: BagDataset = read_json(bags)?;
            let budget = PrivacyBudget::new(*eta, bags.n_bags())?;
            let (released, counts) = release_private_proportions(&bags, &budget, seed)?;
            let degenerate = counts.iter().filter(|c| c.degenerate).count();
            eprintln!("released {} bags, {degenerate} degenerate, noise scale {}", counts.len(), budget.scale());
            write_json(cli.out.as_deref(), &released)
        }
        PrivacyAction::Deviation { n, proportion, eta, k, theta, trials } => {
            let budget = PrivacyBudget::new(*eta, *k)?;
            let report = deviation_check(*n, *proportion, &budget, *theta, *trials, seed)?;
            println!("exceed = {}\ntrials = {}\nrate = {}", report.exceed, report.trials, report.rate());
            Ok(())
        }
    }
}

fn experiment(cli: &Cli, args: &ExperimentArgs) -> Result<()> {
    let kind = ExperimentKind::parse(&args.name).ok_or_else(|| {
        HarnessError::Config(format!(
            "unknown experiment {:?}; expected learning-curve, group-table, bound-sweep or privacy-sweep",
            args.name
        ))
    })?;
    let mut sets = vec![format!("experiment={}", kind.name())];
    let quoted = |p: &Path| format!("{:?}", p.display().to_string());
    if let Some(p) = &args.dataset {
        sets.push(format!("dataset_path={}", quoted(p)));
    }
    if let Some(p) = &args.groups {
        sets.push(format!("groups_path={}", quoted(p)));
    }
    if let Some(a) = &args.attribute {
        sets.push(format!("grouping_attribute={a:?}"));
    }
    if let Some(r) = args.runs {
        sets.push(format!("runs={r}"));
    }
    if args.vary_split {
        sets.push("vary_split=true".into());
    }
    if let Some(p) = &cli.out {
        sets.push(format!("output_dir={}", quoted(p)));
    }
    sets.extend(args.overrides.iter().cloned());
    let config = config_of(cli)?.with_overrides(&sets)?;
    for path in run_experiment(&config)? {
        println!("{}", config.output_dir.join(path).display());
    }
    Ok(())
}

fn prepare_adult(cli: &Cli, input: &Path) -> Result<()> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("data"));
    std::fs::create_dir_all(&dir).map_err(|e| io(&dir, e))?;
    let instances = adult::encode_adult_file(input)?;
    let svm = dir.join("adult.svm");
    std::fs::write(&svm, data::format_sparse(&instances)).map_err(|e| io(&svm, e))?;
    let groups = dir.join("adult.groups");
    std::fs::write(&groups, adult::adult_group_mapping()).map_err(|e| io(&groups, e))?;
    println!("{} instances -> {}", instances.len(), svm.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(a) => generate(cli, a),
        Command::Train(a) => train_cmd(cli, a),
        Command::Evaluate(a) => evaluate(a),
        Command::Theory { calculator: c } => calculator(c),
        Command::Privacy { action } => privacy(cli, action),
        Command::Experiment(a) => experiment(cli, a),
        Command::PrepareAdult { input } => prepare_adult(cli, input),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

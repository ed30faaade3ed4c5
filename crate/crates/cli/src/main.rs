use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use isc::error::RunError;
use isc::experiment::{run_experiment, trial_setup, ClassSpec, ExperimentConfig};
use isc::instgen::{
    gen_cartoon, gen_identify_hard_instance, gen_naive_greedy_counterexample, gen_threshold_line,
    reduce_set_cover_multi_h, reduce_set_cover_single_h,
};
use isc::netapp::{build_dominating_instance, parse_edge_list, sbm_graph, Graph, HypothesisClass};
use isc::oracles::{adversarial_oracle, random_consistent_oracle, TableOracle};
use isc::policies::PolicyKind;
use isc::verify::{adversarial_cost, audit_bounds};
use isc::{run_policy, Cost, HypothesisId, Instance, Oracle, PolicyError, VerifyError};
use serde_json::json;

#[derive(Parser)]
#[command(name = "isc", version, about = "Interactive submodular set cover toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one policy on an instance and print the transcript as JSON.
    Solve(SolveArgs),
    /// Run a multi-trial dominating-set experiment and write a CSV summary.
    Experiment(ExperimentArgs),
    /// Brute-force the cost bounds of a small instance; exits 2 if any fails.
    Verify {
        instance: PathBuf,
    },
    /// Write a generated instance as JSON.
    GenInstance {
        #[command(subcommand)]
        which: GenInstance,
        /// Output file; stdout if omitted.
        #[arg(short, long, global = true)]
        out: Option<PathBuf>,
    },
    /// Write a hypothesis class (groups of node ids) as JSON.
    GenClass {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        class: ClassSpec,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, default_value = "greedy")]
    policy: PolicyKind,
    /// adversarial, random[:SEED] or table:FILE
    #[arg(long, default_value = "adversarial")]
    oracle: String,
    /// Target hypothesis index. Without it the adversary uses the costliest target.
    #[arg(long)]
    target: Option<u32>,
    /// Seed for the random oracle when none is given inline.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    step_limit: Option<usize>,
}

#[derive(Args)]
struct GraphArgs {
    /// Whitespace-separated edge list, one edge per line.
    #[arg(long, conflicts_with = "synthetic")]
    graph: Option<PathBuf>,
    /// Two-community stochastic block model instead of a graph file.
    #[arg(long)]
    synthetic: bool,
    /// Community sizes of the synthetic graph.
    #[arg(long, value_delimiter = ',', default_value = "100,100")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    p_in: f64,
    #[arg(long, default_value_t = 0.01)]
    p_out: f64,
    #[arg(long, default_value_t = 1)]
    graph_seed: u64,
}

impl GraphArgs {
    fn load(&self) -> anyhow::Result<Graph> {
        match (&self.graph, self.synthetic) {
            (Some(path), _) => {
                let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
                Ok(parse_edge_list(BufReader::new(file))?)
            }
            (None, true) => Ok(sbm_graph(&self.sizes, self.p_in, self.p_out, self.graph_seed)?),
            (None, false) => bail!("either --graph or --synthetic is required"),
        }
    }

    fn dataset(&self) -> String {
        match &self.graph {
            Some(path) => path.file_stem().map_or("graph".into(), |s| s.to_string_lossy().into_owned()),
            None => format!(
                "sbm-{}",
                self.sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("x")
            ),
        }
    }
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// clusters[:K,..], noisy-clusters[:K,..]:M, balls:C:R, noisy-balls:C:R:M or expanded:K
    #[arg(long)]
    class: ClassSpec,
    #[arg(long = "policy", required = true)]
    policies: Vec<PolicyKind>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dataset label for the CSV; defaults to the graph name.
    #[arg(long)]
    dataset: Option<String>,
    /// CSV output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-trial records as JSON.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenInstance {
    NaiveGreedyCounterexample {
        #[arg(long, default_value_t = 3)]
        alpha: u64,
        #[arg(long, default_value = "1")]
        cheap: Cost,
        #[arg(long, default_value = "10")]
        expensive: Cost,
    },
    IdentifyHard {
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value = "1")]
        cheap: Cost,
        #[arg(long, default_value = "10")]
        expensive: Cost,
    },
    ThresholdLine {
        #[arg(long, default_value_t = 3)]
        k: u32,
    },
    /// Sets as `1,2;2,3;3`.
    SetCoverSingle(SetCoverArgs),
    SetCoverMulti(SetCoverArgs),
    Cartoon,
    /// Dominating-set instance from a graph and a class file.
    Dominating {
        #[command(flatten)]
        graph: GraphArgs,
        /// Class JSON as written by gen-class.
        #[arg(long)]
        class_file: PathBuf,
    },
    /// The instance of one experiment trial; prints its target and oracle seed.
    Trial {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        class: ClassSpec,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        trial: usize,
    },
}

#[derive(Args)]
struct SetCoverArgs {
    #[arg(long)]
    sets: String,
    /// Comma-separated costs, unit by default.
    #[arg(long, value_delimiter = ',')]
    costs: Vec<Cost>,
}

impl SetCoverArgs {
    fn parse(&self) -> anyhow::Result<(Vec<Vec<u32>>, Vec<Cost>)> {
        let sets = self
            .sets
            .split(';')
            .map(|set| {
                set.split(',')
                    .filter(|x| !x.trim().is_empty())
                    .map(|x| x.trim().parse::<u32>().with_context(|| format!("bad item {x:?}")))
                    .collect()
            })
            .collect::<anyhow::Result<Vec<Vec<u32>>>>()?;
        let costs = if self.costs.is_empty() {
            vec![Cost::integer(1); sets.len()]
        } else {
            self.costs.clone()
        };
        Ok((sets, costs))
    }
}

/// An error carrying its exit status.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

const USAGE: u8 = 1;
const INFEASIBLE: u8 = 2;

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure {
            code: USAGE,
            error: e.into(),
        }
    }
}

fn infeasible(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: INFEASIBLE,
        error: e.into(),
    }
}

fn run_failure(e: RunError) -> Failure {
    match e {
        RunError::NonTermination { .. } => infeasible(e),
        other => other.into(),
    }
}

fn verify_failure(e: VerifyError) -> Failure {
    match e {
        VerifyError::Run(r) => run_failure(r),
        VerifyError::Policy(PolicyError::Infeasible(_)) => infeasible(e),
        other => other.into(),
    }
}

fn policy_failure(e: PolicyError) -> Failure {
    match e {
        PolicyError::Infeasible(_) => infeasible(e),
        other => other.into(),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                out.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn load_instance(path: &Path) -> anyhow::Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Instance::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn check_target(inst: &Instance, target: u32) -> anyhow::Result<HypothesisId> {
    if target as usize >= inst.num_hypotheses() {
        bail!("target {target} out of range ({} hypotheses)", inst.num_hypotheses());
    }
    Ok(HypothesisId(target))
}

fn solve(args: &SolveArgs) -> Result<(), Failure> {
    let inst = load_instance(&args.instance)?;
    let target = args.target.map(|t| check_target(&inst, t)).transpose()?;
    let (mut oracle, target): (Box<dyn Oracle>, Option<HypothesisId>) = match args.oracle.split_once(':') {
        None if args.oracle == "adversarial" => {
            let h = match target {
                Some(h) => h,
                None => adversarial_cost(&inst, args.policy).map_err(verify_failure)?.1,
            };
            (Box::new(adversarial_oracle(&inst, h)?), Some(h))
        }
        None if args.oracle == "random" => random_oracle(&inst, target, args.seed)?,
        Some(("random", seed)) => {
            let seed = seed.parse().with_context(|| format!("bad oracle seed {seed:?}"))?;
            random_oracle(&inst, target, seed)?
        }
        Some(("table", file)) => {
            let text = fs::read_to_string(file).with_context(|| format!("reading {file}"))?;
            (Box::new(TableOracle::from_json(&inst, &text).map_err(|e| anyhow!(e))?), target)
        }
        _ => return Err(anyhow!("unknown oracle {:?}; expected adversarial, random[:SEED] or table:FILE", args.oracle).into()),
    };
    let mut policy = args.policy.build(&inst).map_err(policy_failure)?;
    let limit = args
        .step_limit
        .unwrap_or(inst.num_queries() * inst.num_responses().max(1) + 1);
    let t = run_policy(&inst, policy.as_mut(), oracle.as_mut(), limit).map_err(run_failure)?;
    let pairs = t.pairs();
    let steps: Vec<_> = t
        .steps
        .iter()
        .map(|s| json!({"query": s.query, "name": inst.query_name(s.query), "response": s.response}))
        .collect();
    let vs: Vec<String> = inst
        .version_space_of(&pairs)
        .iter()
        .map(|h| inst.hypothesis_name(h))
        .collect();
    let report = json!({
        "policy": args.policy.to_string(),
        "oracle": args.oracle,
        "target": target,
        "steps": steps,
        "queries": t.len(),
        "total_cost": t.total_cost,
        "version_space": vs,
        "satisfied": isc::run::transcript_satisfied(&inst, &t),
    });
    write_output(None, &serde_json::to_string_pretty(&report)?)?;
    Ok(())
}

fn random_oracle(
    inst: &Instance,
    target: Option<HypothesisId>,
    seed: u64,
) -> anyhow::Result<(Box<dyn Oracle>, Option<HypothesisId>)> {
    let h = target.ok_or_else(|| anyhow!("the random oracle needs --target"))?;
    Ok((Box::new(random_consistent_oracle(inst, h, seed)?), Some(h)))
}

fn experiment(args: &ExperimentArgs) -> Result<(), Failure> {
    let g = args.graph.load()?;
    let cfg = ExperimentConfig {
        dataset: args.dataset.clone().unwrap_or_else(|| args.graph.dataset()),
        class: args.class.clone(),
        policies: args.policies.clone(),
        trials: args.trials,
        seed: args.seed,
    };
    let result = run_experiment(&g, &cfg).map_err(|e| match e {
        isc::ExperimentError::Run(r) => run_failure(r),
        isc::ExperimentError::Policy(p) => policy_failure(p),
        other => other.into(),
    })?;
    if let Some(path) = &args.trace {
        write_output(Some(path), &serde_json::to_string_pretty(&result.trials)?)?;
    }
    write_output(args.out.as_deref(), &result.to_csv()?)?;
    Ok(())
}

fn verify(path: &Path) -> Result<(), Failure> {
    let inst = load_instance(path)?;
    let report = audit_bounds(&inst).map_err(verify_failure)?;
    write_output(None, &serde_json::to_string_pretty(&report)?)?;
    if !report.passed() {
        return Err(infeasible(anyhow!("bound checks failed")));
    }
    Ok(())
}

fn gen_instance(which: &GenInstance, out: Option<&Path>) -> Result<(), Failure> {
    let inst = match which {
        GenInstance::NaiveGreedyCounterexample { alpha, cheap, expensive } => {
            gen_naive_greedy_counterexample(*alpha, *cheap, *expensive)?
        }
        GenInstance::IdentifyHard { n, cheap, expensive } => gen_identify_hard_instance(*n, *cheap, *expensive)?,
        GenInstance::ThresholdLine { k } => gen_threshold_line(*k)?,
        GenInstance::SetCoverSingle(a) => {
            let (sets, costs) = a.parse()?;
            reduce_set_cover_single_h(&sets, &costs)?
        }
        GenInstance::SetCoverMulti(a) => {
            let (sets, costs) = a.parse()?;
            reduce_set_cover_multi_h(&sets, &costs)?
        }
        GenInstance::Cartoon => gen_cartoon().2,
        GenInstance::Dominating { graph, class_file } => {
            let g = graph.load()?;
            let text = fs::read_to_string(class_file).with_context(|| format!("reading {}", class_file.display()))?;
            let hc: HypothesisClass = serde_json::from_str(&text)?;
            build_dominating_instance(&g, &hc, None)?
        }
        GenInstance::Trial { graph, class, seed, trial } => {
            let g = graph.load()?;
            let base = class.base(&g, *seed)?;
            let setup = trial_setup(&base, class, *seed, *trial)?;
            let meta = json!({"trial": setup.trial, "target": setup.target, "seed": setup.seed});
            eprintln!("{meta}");
            setup.instance(&g)?
        }
    };
    write_output(out, &inst.to_json())?;
    Ok(())
}

fn gen_class(graph: &GraphArgs, class: &ClassSpec, seed: u64, out: Option<&Path>) -> Result<(), Failure> {
    let g = graph.load()?;
    let hc = class.base(&g, seed)?;
    write_output(out, &serde_json::to_string(&hc)?)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Solve(args) => solve(args),
        Command::Experiment(args) => experiment(args),
        Command::Verify { instance } => verify(instance),
        Command::GenInstance { which, out } => gen_instance(which, out.as_deref()),
        Command::GenClass { graph, class, seed, out } => gen_class(graph, class, *seed, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

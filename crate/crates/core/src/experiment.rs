//! Multi-trial policy comparisons on dominating-set instances.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::ExperimentError;
use crate::instance::Instance;
use crate::model::{Cost, HypothesisId};
use crate::netapp::{
    build_dominating_instance, gen_balls, gen_clusters_class, gen_expanded_clusters, gen_noisy_variants, rng_for,
    Graph, HypothesisClass, DEFAULT_CLUSTER_SIZES,
};
use crate::oracles::random_consistent_oracle;
use crate::policies::PolicyKind;
use crate::run::run_policy;

/// How the hypothesis class of an experiment is generated.
///
/// Textual forms: `clusters[:K1,K2,..]`, `noisy-clusters[:K1,K2,..]:M`,
/// `balls:COUNT:RADIUS`, `noisy-balls:COUNT:RADIUS:M`, `expanded:K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassSpec {
    Clusters { sizes: Vec<usize> },
    NoisyClusters { sizes: Vec<usize>, variants: usize },
    Balls { count: usize, radius: usize },
    NoisyBalls { count: usize, radius: usize, variants: usize },
    Expanded { k: usize },
}

impl ClassSpec {
    /// The class before any per-trial variants are added.
    pub fn base(&self, g: &Graph, seed: u64) -> Result<HypothesisClass, ExperimentError> {
        Ok(match self {
            ClassSpec::Clusters { sizes } | ClassSpec::NoisyClusters { sizes, .. } => gen_clusters_class(g, sizes, seed)?,
            ClassSpec::Balls { count, radius } | ClassSpec::NoisyBalls { count, radius, .. } => {
                gen_balls(g, *count, *radius, seed)?
            }
            ClassSpec::Expanded { k } => gen_expanded_clusters(g, *k, seed)?,
        })
    }

    /// Number of near-copies of the target added per trial.
    pub fn variants(&self) -> usize {
        match self {
            ClassSpec::NoisyClusters { variants, .. } | ClassSpec::NoisyBalls { variants, .. } => *variants,
            _ => 0,
        }
    }
}

fn parse_num(s: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("bad number {s:?}"))
}

fn parse_sizes(s: &str) -> Result<Vec<usize>, String> {
    s.split(',').map(parse_num).collect()
}

impl FromStr for ClassSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let default_sizes = || DEFAULT_CLUSTER_SIZES.to_vec();
        match parts.as_slice() {
            ["clusters"] => Ok(ClassSpec::Clusters { sizes: default_sizes() }),
            ["clusters", sizes] => Ok(ClassSpec::Clusters { sizes: parse_sizes(sizes)? }),
            ["noisy-clusters", m] => Ok(ClassSpec::NoisyClusters {
                sizes: default_sizes(),
                variants: parse_num(m)?,
            }),
            ["noisy-clusters", sizes, m] => Ok(ClassSpec::NoisyClusters {
                sizes: parse_sizes(sizes)?,
                variants: parse_num(m)?,
            }),
            ["balls", count, radius] => Ok(ClassSpec::Balls {
                count: parse_num(count)?,
                radius: parse_num(radius)?,
            }),
            ["noisy-balls", count, radius, m] => Ok(ClassSpec::NoisyBalls {
                count: parse_num(count)?,
                radius: parse_num(radius)?,
                variants: parse_num(m)?,
            }),
            ["expanded", k] => Ok(ClassSpec::Expanded { k: parse_num(k)? }),
            _ => Err(format!("unrecognized class spec {s:?}")),
        }
    }
}

impl fmt::Display for ClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        match self {
            ClassSpec::Clusters { sizes } => write!(f, "clusters:{}", join(sizes)),
            ClassSpec::NoisyClusters { sizes, variants } => write!(f, "noisy-clusters:{}:{variants}", join(sizes)),
            ClassSpec::Balls { count, radius } => write!(f, "balls:{count}:{radius}"),
            ClassSpec::NoisyBalls { count, radius, variants } => write!(f, "noisy-balls:{count}:{radius}:{variants}"),
            ClassSpec::Expanded { k } => write!(f, "expanded:{k}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub dataset: String,
    pub class: ClassSpec,
    pub policies: Vec<PolicyKind>,
    pub trials: usize,
    pub seed: u64,
}

/// Everything needed to replay one trial.
#[derive(Clone, Debug)]
pub struct TrialSetup {
    pub trial: usize,
    /// Seed of the trial's random consistent oracle.
    pub seed: u64,
    pub target: HypothesisId,
    pub class: HypothesisClass,
}

impl TrialSetup {
    pub fn instance(&self, g: &Graph) -> Result<Instance, ExperimentError> {
        Ok(build_dominating_instance(g, &self.class, None)?)
    }
}

/// Draws trial `trial`'s seed and target from the base class and appends
/// the target's noisy variants, if any. Classes with variants only draw
/// targets with at least two members.
pub fn trial_setup(
    base: &HypothesisClass,
    spec: &ClassSpec,
    seed: u64,
    trial: usize,
) -> Result<TrialSetup, ExperimentError> {
    if base.is_empty() {
        return Err(ExperimentError::Parameter("hypothesis class is empty".into()));
    }
    let mut rng = rng_for(seed, 1 << 32 | trial as u64);
    let trial_seed: u64 = rng.gen();
    // Near-copies need a target with at least two members.
    let eligible: Vec<u32> = (0..base.len() as u32)
        .filter(|h| spec.variants() == 0 || base.groups[*h as usize].len() >= 2)
        .collect();
    if eligible.is_empty() {
        return Err(ExperimentError::Parameter("no group has two members to perturb".into()));
    }
    let target = HypothesisId(eligible[rng.gen_range(0..eligible.len())]);
    let class = match spec.variants() {
        0 => base.clone(),
        m => gen_noisy_variants(base, target, m, trial_seed)?,
    };
    Ok(TrialSetup {
        trial,
        seed: trial_seed,
        target,
        class,
    })
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct PolicyRun {
    pub policy: String,
    pub queries: usize,
    pub cost: Cost,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub target: HypothesisId,
    pub hypotheses: usize,
    pub runs: Vec<PolicyRun>,
}

/// Runs every policy on one trial against the same seeded oracle.
pub fn run_trial(
    inst: &Instance,
    target: HypothesisId,
    seed: u64,
    policies: &[PolicyKind],
) -> Result<Vec<PolicyRun>, ExperimentError> {
    policies
        .iter()
        .map(|&kind| {
            let mut policy = kind.build(inst)?;
            let mut oracle = random_consistent_oracle(inst, target, seed)
                .map_err(|e| ExperimentError::Parameter(e.to_string()))?;
            let t = run_policy(inst, policy.as_mut(), &mut oracle, 2 * inst.num_queries() + 1)?;
            Ok(PolicyRun {
                policy: kind.to_string(),
                queries: t.len(),
                cost: t.total_cost,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentResult {
    pub dataset: String,
    pub class: String,
    pub seed: u64,
    pub policies: Vec<String>,
    pub trials: Vec<TrialRecord>,
}

pub fn run_experiment(g: &Graph, cfg: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    if cfg.trials == 0 {
        return Err(ExperimentError::Parameter("trials must be at least 1".into()));
    }
    if cfg.policies.is_empty() {
        return Err(ExperimentError::Parameter("no policies given".into()));
    }
    let base = cfg.class.base(g, cfg.seed)?;
    let trials = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let setup = trial_setup(&base, &cfg.class, cfg.seed, trial)?;
            let inst = setup.instance(g)?;
            Ok(TrialRecord {
                trial,
                seed: setup.seed,
                target: setup.target,
                hypotheses: inst.num_hypotheses(),
                runs: run_trial(&inst, setup.target, setup.seed, &cfg.policies)?,
            })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    Ok(ExperimentResult {
        dataset: cfg.dataset.clone(),
        class: cfg.class.to_string(),
        seed: cfg.seed,
        policies: cfg.policies.iter().map(|p| p.to_string()).collect(),
        trials,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PolicySummary {
    pub policy: String,
    pub mean: f64,
    pub std: f64,
}

impl ExperimentResult {
    /// Query counts of policy column `i`, in trial order.
    pub fn counts(&self, i: usize) -> Vec<f64> {
        self.trials.iter().map(|t| t.runs[i].queries as f64).collect()
    }

    pub fn summaries(&self) -> Vec<PolicySummary> {
        (0..self.policies.len())
            .map(|i| {
                let xs = self.counts(i);
                let (mean, std) = mean_std(&xs);
                PolicySummary {
                    policy: self.policies[i].clone(),
                    mean,
                    std,
                }
            })
            .collect()
    }

    /// Paired t-test of policy `i` against policy `j` (positive `t` when
    /// `i` asks more queries).
    pub fn t_test(&self, i: usize, j: usize) -> Option<TTest> {
        paired_t_test(&self.counts(i), &self.counts(j)).ok()
    }

    /// One row per policy: dataset, class, policy, trials, mean, std, then
    /// `t_vs_<p>` and `p01_vs_<p>` for every policy `p`.
    pub fn to_csv(&self) -> Result<String, ExperimentError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = ["dataset", "class", "policy", "trials", "mean", "std"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        for p in &self.policies {
            header.push(format!("t_vs_{p}"));
            header.push(format!("p01_vs_{p}"));
        }
        w.write_record(&header)?;
        for (i, s) in self.summaries().iter().enumerate() {
            let mut row = vec![
                self.dataset.clone(),
                self.class.clone(),
                s.policy.clone(),
                self.trials.len().to_string(),
                format!("{:.4}", s.mean),
                format!("{:.4}", s.std),
            ];
            for j in 0..self.policies.len() {
                match self.t_test(i, j).filter(|_| i != j) {
                    Some(t) => {
                        row.push(format!("{:.4}", t.t));
                        row.push(t.significant.to_string());
                    }
                    None => row.extend([String::new(), String::new()]),
                }
            }
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| ExperimentError::Parameter(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Mean and sample standard deviation (0 for fewer than two values).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TTest {
    pub t: f64,
    pub df: usize,
    /// Two-sided critical value at p = 0.01.
    pub critical: f64,
    pub significant: bool,
}

/// Two-sided Student t critical values at p = 0.01, by degrees of freedom.
const T_CRITICAL_P01: [(usize, f64); 37] = [
    (1, 63.657),
    (2, 9.925),
    (3, 5.841),
    (4, 4.604),
    (5, 4.032),
    (6, 3.707),
    (7, 3.499),
    (8, 3.355),
    (9, 3.250),
    (10, 3.169),
    (11, 3.106),
    (12, 3.055),
    (13, 3.012),
    (14, 2.977),
    (15, 2.947),
    (16, 2.921),
    (17, 2.898),
    (18, 2.878),
    (19, 2.861),
    (20, 2.845),
    (21, 2.831),
    (22, 2.819),
    (23, 2.807),
    (24, 2.797),
    (25, 2.787),
    (26, 2.779),
    (27, 2.771),
    (28, 2.763),
    (29, 2.756),
    (30, 2.750),
    (40, 2.704),
    (50, 2.678),
    (60, 2.660),
    (80, 2.639),
    (100, 2.626),
    (120, 2.617),
    (1000, 2.581),
];

/// Critical value for `df` degrees of freedom. Between tabulated rows the
/// row with fewer degrees of freedom is used, which is conservative.
pub fn critical_t_p01(df: usize) -> f64 {
    T_CRITICAL_P01
        .iter()
        .rev()
        .find(|(d, _)| *d <= df.max(1))
        .map(|(_, c)| *c)
        .expect("table starts at df = 1")
}

/// Paired t-test on `a − b`, two-sided at p = 0.01.
///
/// Zero variance with a nonzero mean difference is significant (`t` is
/// infinite); identical samples give `t = 0`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest, ExperimentError> {
    if a.len() != b.len() {
        return Err(ExperimentError::Parameter(format!("sample sizes differ: {} vs {}", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(ExperimentError::Parameter("paired t-test needs at least 2 pairs".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let df = d.len() - 1;
    let critical = critical_t_p01(df);
    let (mean, sd) = mean_std(&d);
    let t = if sd == 0.0 {
        if mean == 0.0 {
            0.0
        } else {
            mean.signum() * f64::INFINITY
        }
    } else {
        mean / (sd / (d.len() as f64).sqrt())
    };
    Ok(TTest {
        t,
        df,
        critical,
        significant: t.abs() > critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netapp::sbm_graph;

    #[test]
    fn t_test_examples() {
        let a = [1.0, 2.0, 3.0];
        let same = paired_t_test(&a, &a).unwrap();
        assert_eq!(same.t, 0.0);
        assert!(!same.significant);
        let flipped = paired_t_test(&a, &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(flipped.t, 0.0);
        let ones = paired_t_test(&[2.0; 10], &[1.0; 10]).unwrap();
        assert!(ones.significant);
        assert!(ones.t.is_infinite() && ones.t > 0.0);
        assert!(paired_t_test(&[1.0], &[1.0]).is_err());
        assert!(paired_t_test(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn t_test_against_direct_formula() {
        let a = [5.0, 7.0, 6.0, 9.0, 4.0];
        let b = [4.0, 5.0, 6.0, 6.0, 3.0];
        // d = [1, 2, 0, 3, 1]: mean 1.4, sample variance 1.3.
        let expected = 1.4 / (1.3f64.sqrt() / 5f64.sqrt());
        assert!((paired_t_test(&a, &b).unwrap().t - expected).abs() < 1e-12);
    }

    #[test]
    fn critical_values() {
        let crit = |n: usize| paired_t_test(&vec![0.0; n], &vec![0.0; n]).unwrap().critical;
        assert_eq!(crit(10), 3.250);
        assert_eq!(crit(2), 63.657);
        assert_eq!(crit(101), 2.626);
        // df = 99 falls back to the df = 80 row.
        assert_eq!(crit(100), 2.639);
        assert_eq!(critical_t_p01(1 << 40), 2.581);
        assert!(T_CRITICAL_P01.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 > w[1].1));
    }

    #[test]
    fn class_spec_round_trip() {
        for s in ["clusters:10,20,30,40", "noisy-clusters:20:50", "balls:100:2", "noisy-balls:100:2:100", "expanded:100"] {
            assert_eq!(s.parse::<ClassSpec>().unwrap().to_string(), s);
        }
        assert_eq!(
            "clusters".parse::<ClassSpec>().unwrap(),
            ClassSpec::Clusters { sizes: vec![10, 20, 30, 40] }
        );
        assert!("blobs:3".parse::<ClassSpec>().is_err());
        assert!("balls:x:2".parse::<ClassSpec>().is_err());
    }

    fn small_config(policies: Vec<PolicyKind>, trials: usize) -> (Graph, ExperimentConfig) {
        let g = sbm_graph(&[20, 20], 0.3, 0.02, 1).unwrap();
        let cfg = ExperimentConfig {
            dataset: "toy".into(),
            class: "noisy-clusters:4:5".parse().unwrap(),
            policies,
            trials,
            seed: 5,
        };
        (g, cfg)
    }

    #[test]
    fn single_trial_mean_is_the_run() {
        let (g, cfg) = small_config(vec![PolicyKind::Greedy], 1);
        let res = run_experiment(&g, &cfg).unwrap();
        let s = &res.summaries()[0];
        assert_eq!(s.mean, res.trials[0].runs[0].queries as f64);
        assert_eq!(s.std, 0.0);
        let csv = res.to_csv().unwrap();
        assert!(csv.starts_with("dataset,class,policy,trials,mean,std,t_vs_greedy,p01_vs_greedy\n"));
    }

    #[test]
    fn identical_policies_have_zero_t() {
        let (g, cfg) = small_config(vec![PolicyKind::Greedy, PolicyKind::Greedy], 6);
        let res = run_experiment(&g, &cfg).unwrap();
        assert_eq!(res.t_test(0, 1).unwrap().t, 0.0);
    }

    #[test]
    fn trials_are_replayable() {
        let policies = vec![PolicyKind::Greedy, PolicyKind::LearnThenCover];
        let (g, cfg) = small_config(policies.clone(), 4);
        let res = run_experiment(&g, &cfg).unwrap();
        let base = cfg.class.base(&g, cfg.seed).unwrap();
        for rec in &res.trials {
            let setup = trial_setup(&base, &cfg.class, cfg.seed, rec.trial).unwrap();
            assert_eq!((setup.seed, setup.target), (rec.seed, rec.target));
            let inst = setup.instance(&g).unwrap();
            assert_eq!(run_trial(&inst, setup.target, setup.seed, &policies).unwrap(), rec.runs);
        }
        assert_eq!(res.to_csv().unwrap(), run_experiment(&g, &cfg).unwrap().to_csv().unwrap());
    }

    #[test]
    fn rejects_bad_configs() {
        let (g, mut cfg) = small_config(vec![PolicyKind::Greedy], 0);
        assert!(run_experiment(&g, &cfg).is_err());
        cfg.trials = 1;
        cfg.policies.clear();
        assert!(run_experiment(&g, &cfg).is_err());
    }
}

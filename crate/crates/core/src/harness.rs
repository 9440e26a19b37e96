//! Seeded Monte-Carlo campaigns over the labelling pipeline.
//!
//! Trial `k` at the `i`-th entry of the `n` list draws from
//! `SplitRng::new(seed).split(i).split(k)`; its children `0`, `1` and `2`
//! feed the tree, the plan and the labelling run. Records are ordered by
//! `(n, trial)` whatever order the worker pool finishes them in, and wall
//! times go to a separate file so that records and summary are
//! byte-reproducible.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::intervals::build_interval_system;
use crate::labeller::{RunOptions, Status, run, trace_csv};
use crate::params::{Params, Rational, derive_practical_params};
use crate::prepare::{PlanTolerances, check_plan, prepare, reassign};
use crate::quasirandom::QuasiSpec;
use crate::rng::SplitRng;
use crate::tree::{Tree, degree_stats, random_tree};
use crate::verify::verify_graceful;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum TreeSource {
    /// Uniform labelled tree of each order in the `n` list.
    Random,
    /// One fixed tree for every trial; the `n` list is ignored.
    File { path: PathBuf },
}

fn default_source() -> TreeSource {
    TreeSource::Random
}

fn default_pre4_retries() -> usize {
    100
}

/// Campaign configuration, read from JSON. Only `n`, `gamma`, `m`, `ell`,
/// `trials` and `seed` are required.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: Vec<usize>,
    pub gamma: Rational,
    pub m: usize,
    pub ell: usize,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub retries: usize,
    #[serde(default)]
    pub checkpoint_every: Option<usize>,
    #[serde(default)]
    pub quasi: QuasiSpec,
    #[serde(default = "default_source")]
    pub tree: TreeSource,
    /// Redraw component intervals on each retry.
    #[serde(default)]
    pub resample_plan: bool,
    /// Interval redraws allowed while the balance check fails; 0 skips it.
    #[serde(default = "default_pre4_retries")]
    pub pre4_retries: usize,
    #[serde(default)]
    pub eps: Option<Rational>,
    #[serde(default)]
    pub threshold: Option<usize>,
    #[serde(default)]
    pub alpha0: Option<Rational>,
    #[serde(default)]
    pub alpha1: Option<Rational>,
    #[serde(default)]
    pub write_labellings: bool,
    #[serde(default)]
    pub write_traces: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    fn params_for(&self, n: usize) -> Result<Params> {
        let mut p = derive_practical_params(n, self.gamma, self.m, self.ell)?;
        if let Some(e) = self.eps {
            p.eps = e;
        }
        p.threshold = self.threshold;
        if let Some(a) = self.alpha0 {
            p.alpha0 = a;
        }
        if let Some(a) = self.alpha1 {
            p.alpha1 = a;
        }
        Ok(p)
    }

    fn options(&self) -> RunOptions {
        RunOptions {
            max_retries: self.retries,
            checkpoint_every: self.checkpoint_every,
            quasi: self.quasi.clone(),
            resample_plan: self.resample_plan,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub n: usize,
    pub trial: usize,
    /// Seed of the trial's generator.
    pub seed: u64,
    pub n_tilde: usize,
    pub max_degree: usize,
    pub components: usize,
    pub pre4_redraws: usize,
    pub pre4_passed: bool,
    pub attempts: usize,
    pub outcome: &'static str,
    pub failure_site: Option<&'static str>,
    pub failure_t: Option<usize>,
    pub first_attempt_success: bool,
    /// Success and the labelling passed the graceful check with `m = ñ`.
    pub verified: bool,
    pub quasi1_max_dev: Option<f64>,
    pub quasi2_max_sampled_dev: Option<f64>,
    pub quasi_within_alpha: Option<bool>,
    pub corv_hits: usize,
    pub core_hits: usize,
    /// Failure sites of every failed attempt in this trial.
    #[serde(skip)]
    pub failed_sites: Vec<&'static str>,
    #[serde(skip)]
    pub labels: Option<Vec<usize>>,
    #[serde(skip)]
    pub trace: Option<String>,
    #[serde(skip)]
    pub wall_ms: f64,
}

/// Two-sided 95% Clopper-Pearson interval for `k` successes in `n` trials.
pub fn clopper_pearson(k: usize, n: usize) -> Option<(f64, f64)> {
    if n == 0 {
        return None;
    }
    let a = 0.05;
    let lo = if k == 0 { 0.0 } else { Beta::new(k as f64, (n - k + 1) as f64).ok()?.inverse_cdf(a / 2.0) };
    let hi = if k == n { 1.0 } else { Beta::new((k + 1) as f64, (n - k) as f64).ok()?.inverse_cdf(1.0 - a / 2.0) };
    Some((lo, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSummary {
    pub successes: usize,
    /// `null` when there are no trials.
    pub rate: Option<f64>,
    pub ci95: Option<(f64, f64)>,
}

impl RateSummary {
    fn new(k: usize, n: usize) -> Self {
        Self { successes: k, rate: (n > 0).then(|| k as f64 / n as f64), ci95: clopper_pearson(k, n) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub n: usize,
    pub n_tilde: usize,
    pub trials: usize,
    pub rate_undefined: bool,
    pub success: RateSummary,
    pub first_attempt: RateSummary,
    pub verified: usize,
    /// Failed attempts by site, across all attempts of all trials.
    pub failure_histogram: BTreeMap<&'static str, usize>,
    /// Successful trials whose every checkpoint stayed within `α(t)`.
    pub quasi_within_alpha: usize,
    pub max_quasi1: Option<f64>,
    pub max_quasi2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub groups: Vec<GroupSummary>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

fn max_opt(it: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    it.flatten().reduce(f64::max)
}

fn run_trial(cfg: &ExperimentConfig, p: &Params, fixed: Option<&Tree>, n_idx: usize, trial: usize) -> Result<TrialRecord> {
    let start = Instant::now();
    let root = SplitRng::new(cfg.seed).split(n_idx as u64).split(trial as u64);
    let tree = match fixed {
        Some(t) => t.clone(),
        None => random_tree(p.n, &mut root.split(0))?,
    };
    let sys = build_interval_system(p)?;
    let mut prng = root.split(1);
    let mut plan = prepare(&tree, p, &sys, &mut prng)?;
    let tol = PlanTolerances::default_for(p.n, plan.threshold, sys.num_j(), p.eps.to_f64());
    let mut redraws = 0;
    let mut pre4_passed = cfg.pre4_retries == 0 || check_plan(&plan, &tree, &sys, &tol).pre4.passed;
    while !pre4_passed && redraws < cfg.pre4_retries {
        plan = reassign(&plan, &sys, &mut prng);
        redraws += 1;
        pre4_passed = check_plan(&plan, &tree, &sys, &tol).pre4.passed;
    }
    let opts = cfg.options();
    let out = run(&plan, &sys, p, &root.split(2), &opts)?;
    let mut failed_sites: Vec<&'static str> = out.failed_attempts.iter().map(|f| f.site.as_str()).collect();
    let (outcome, failure_site, failure_t, labels) = match &out.status {
        Status::Success { labels } => ("success", None, None, Some(labels.clone())),
        Status::Failure(f) => {
            failed_sites.push(f.site.as_str());
            ("failure", Some(f.site.as_str()), Some(f.t), None)
        }
    };
    let verified = match out.labelling(&tree, p.n_tilde) {
        Some(l) => verify_graceful(&l?).passed(),
        None => false,
    };
    let has_checks = cfg.checkpoint_every.is_some_and(|e| e > 0 && e <= p.n);
    Ok(TrialRecord {
        n: p.n,
        trial,
        seed: root.seed(),
        n_tilde: p.n_tilde,
        max_degree: degree_stats(&tree).max_degree,
        components: plan.num_components(),
        pre4_redraws: redraws,
        pre4_passed,
        attempts: out.attempts,
        outcome,
        failure_site,
        failure_t,
        first_attempt_success: out.first_attempt_success(),
        verified,
        quasi1_max_dev: out.max_quasi1(),
        quasi2_max_sampled_dev: out.max_quasi2(),
        quasi_within_alpha: (has_checks && out.is_success()).then_some(out.quasi_within_alpha),
        corv_hits: out.corv_hits,
        core_hits: out.core_hits,
        failed_sites,
        labels: if cfg.write_labellings { labels } else { None },
        trace: cfg.write_traces.then(|| trace_csv(&out.trace)),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let fixed = match &cfg.tree {
        TreeSource::Random => None,
        TreeSource::File { path } => Some(Tree::parse(&fs::read_to_string(path)?)?),
    };
    let ns: Vec<usize> = match &fixed {
        Some(t) => vec![t.n()],
        None => cfg.n.clone(),
    };
    if ns.is_empty() {
        return Err(Error::Config("the n list is empty".into()));
    }
    let params: Vec<Params> = ns.iter().map(|&n| cfg.params_for(n)).collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..ns.len()).flat_map(|i| (0..cfg.trials).map(move |k| (i, k))).collect();
    let records: Vec<TrialRecord> = jobs
        .par_iter()
        .map(|&(i, k)| run_trial(cfg, &params[i], fixed.as_ref(), i, k))
        .collect::<Result<_>>()?;
    let groups = params
        .iter()
        .map(|p| {
            let rs: Vec<&TrialRecord> = records.iter().filter(|r| r.n == p.n).collect();
            let mut hist = BTreeMap::new();
            for s in rs.iter().flat_map(|r| &r.failed_sites) {
                *hist.entry(*s).or_insert(0) += 1;
            }
            let succ = rs.iter().filter(|r| r.outcome == "success").count();
            let first = rs.iter().filter(|r| r.first_attempt_success).count();
            GroupSummary {
                n: p.n,
                n_tilde: p.n_tilde,
                trials: rs.len(),
                rate_undefined: rs.is_empty(),
                success: RateSummary::new(succ, rs.len()),
                first_attempt: RateSummary::new(first, rs.len()),
                verified: rs.iter().filter(|r| r.verified).count(),
                failure_histogram: hist,
                quasi_within_alpha: rs.iter().filter(|r| r.quasi_within_alpha == Some(true)).count(),
                max_quasi1: max_opt(rs.iter().map(|r| r.quasi1_max_dev)),
                max_quasi2: max_opt(rs.iter().map(|r| r.quasi2_max_sampled_dev)),
            }
        })
        .collect();
    Ok(ExperimentResult { records, summary: Summary { config: cfg.clone(), groups } })
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

fn dev(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| format!("{v:.6}"))
}

pub fn records_csv(records: &[TrialRecord]) -> String {
    let mut s = String::from(
        "n,trial,seed,n_tilde,max_degree,components,pre4_redraws,pre4_passed,attempts,outcome,failure_site,failure_t,\
         first_attempt_success,verified,quasi1_max_dev,quasi2_max_sampled_dev,quasi_within_alpha,corv_hits,core_hits\n",
    );
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.trial,
            r.seed,
            r.n_tilde,
            r.max_degree,
            r.components,
            r.pre4_redraws,
            r.pre4_passed,
            r.attempts,
            r.outcome,
            opt(r.failure_site),
            opt(r.failure_t),
            r.first_attempt_success,
            r.verified,
            dev(r.quasi1_max_dev),
            dev(r.quasi2_max_sampled_dev),
            opt(r.quasi_within_alpha),
            r.corv_hits,
            r.core_hits,
        ));
    }
    s
}

pub fn timings_csv(records: &[TrialRecord]) -> String {
    let mut s = String::from("n,trial,wall_ms\n");
    for r in records {
        s.push_str(&format!("{},{},{:.3}\n", r.n, r.trial, r.wall_ms));
    }
    s
}

pub fn summary_json(summary: &Summary) -> String {
    serde_json::to_string_pretty(summary).expect("summary serializes") + "\n"
}

/// Writes `records.csv`, `summary.json` and `timings.csv` into `dir`, plus
/// `labellings/n{n}_t{k}.json` and `traces/n{n}_t{k}.csv` when enabled.
pub fn write_outputs(dir: &Path, res: &ExperimentResult) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("records.csv"), records_csv(&res.records))?;
    fs::write(dir.join("summary.json"), summary_json(&res.summary))?;
    fs::write(dir.join("timings.csv"), timings_csv(&res.records))?;
    for r in &res.records {
        if let Some(labels) = &r.labels {
            let sub = dir.join("labellings");
            fs::create_dir_all(&sub)?;
            let body = serde_json::json!({ "n": r.n, "n_tilde": r.n_tilde, "labels": labels });
            fs::write(sub.join(format!("n{}_t{}.json", r.n, r.trial)), body.to_string() + "\n")?;
        }
        if let Some(trace) = &r.trace {
            let sub = dir.join("traces");
            fs::create_dir_all(&sub)?;
            fs::write(sub.join(format!("n{}_t{}.csv", r.n, r.trial)), trace)?;
        }
    }
    Ok(())
}

//! The sequential randomized labelling process.
//!
//! Vertex `v_t` receives a uniform label from its interval `J(v_t)` among
//! those still available whose difference to the parent's label is still an
//! available edge label. After each choice one extra vertex label and one
//! extra edge label may be discarded, drawn from the two correction
//! distributions, so that labels are consumed evenly across the range.

use serde::Serialize;

use crate::error::Result;
use crate::intervals::{CorrectionDistribution, Interval, IntervalSystem};
use crate::labelset::{DiffSet, LabelSet, sample_mask};
use crate::params::Params;
use crate::prepare::{Plan, reassign};
use crate::quasirandom::{QuasiReport, QuasiSpec, check_quasi};
use crate::rng::SplitRng;
use crate::tree::Tree;
use crate::verify::Labelling;

/// `{a' ∈ A ∩ I : |a' − a| ∈ C}` as a bit window over `I` (bit `i` is
/// `I.lo + i`).
pub fn admissible_mask(a: usize, i: Interval, av: &LabelSet, c: &DiffSet, buf: &mut Vec<u64>, out: &mut Vec<u64>) {
    av.window_into(i.lo as i64, i.len(), out);
    c.diff_window_into(a, i.lo, i.len(), buf);
    for (o, b) in out.iter_mut().zip(buf.iter()) {
        *o &= *b;
    }
}

/// `{a' ∈ A ∩ I : |a' − a| ∈ C}`.
pub fn admissible(a: usize, i: Interval, av: &LabelSet, c: &DiffSet) -> Vec<usize> {
    let (mut buf, mut out) = (Vec::new(), Vec::new());
    admissible_mask(a, i, av, c, &mut buf, &mut out);
    let mut res = Vec::new();
    for (w, &word) in out.iter().enumerate() {
        res.extend(crate::labelset::BitIter(word).map(|b| i.lo + w * 64 + b));
    }
    res
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureSite {
    ChooseLabel,
    CorvRemoval,
    CoreRemoval,
}

impl FailureSite {
    pub fn as_str(&self) -> &'static str {
        match self {
            FailureSite::ChooseLabel => "choose-label",
            FailureSite::CorvRemoval => "corv-removal",
            FailureSite::CoreRemoval => "core-removal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub t: usize,
    pub site: FailureSite,
}

/// One step of the trace. Sizes are taken after the step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: usize,
    pub chosen_label: usize,
    pub edge_label_removed: Option<usize>,
    pub rv: Option<usize>,
    pub re: Option<usize>,
    pub size_a: usize,
    pub size_c: usize,
    pub quasi1_max_dev: Option<f64>,
    pub quasi2_max_sampled_dev: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct LabellingState {
    pub a: LabelSet,
    pub c: DiffSet,
    /// `psi[v]` for vertex `v`, 0 while unlabelled.
    pub psi: Vec<usize>,
    pub t: usize,
    pub corv_hits: usize,
    pub core_hits: usize,
    pub trace: Vec<StepRecord>,
    buf: Vec<u64>,
    mask: Vec<u64>,
}

impl LabellingState {
    /// `A = [ñ]`, `C = [ñ − 1]`, nothing labelled.
    pub fn new(n: usize, n_tilde: usize) -> Self {
        Self {
            a: LabelSet::full_range(1, n_tilde),
            c: DiffSet::new(LabelSet::full_range(1, n_tilde - 1)),
            psi: vec![0; n + 1],
            t: 0,
            corv_hits: 0,
            core_hits: 0,
            trace: Vec::new(),
            buf: Vec::new(),
            mask: Vec::new(),
        }
    }

    /// Runs step `t = self.t + 1` for vertex `v` with interval `j` and parent
    /// label `parent_label` (`None` exactly at `t = 1`).
    pub fn step(
        &mut self,
        v: usize,
        j: Interval,
        parent_label: Option<usize>,
        corv: &CorrectionDistribution,
        core: &CorrectionDistribution,
        rng: &mut SplitRng,
    ) -> std::result::Result<(), Failure> {
        let t = self.t + 1;
        let fail = |site| Failure { t, site };
        let (label, edge) = match parent_label {
            None => (self.a.sample_range(j.lo, j.hi, rng).ok_or(fail(FailureSite::ChooseLabel))?, None),
            Some(p) => {
                admissible_mask(p, j, &self.a, &self.c, &mut self.buf, &mut self.mask);
                let off = sample_mask(&self.mask, rng).ok_or(fail(FailureSite::ChooseLabel))?;
                let a = j.lo + off;
                (a, Some(a.abs_diff(p)))
            }
        };
        self.a.remove(label);
        if let Some(d) = edge {
            self.c.remove(d);
        }
        self.psi[v] = label;

        let rv = match corv.sample(rng) {
            None => None,
            Some(i) => {
                let x = self.a.sample_range(i.lo, i.hi, rng).ok_or(fail(FailureSite::CorvRemoval))?;
                self.a.remove(x);
                self.corv_hits += 1;
                Some(x)
            }
        };
        let re = match core.sample(rng) {
            None => None,
            Some(i) => {
                let x = self.c.set().sample_range(i.lo, i.hi, rng).ok_or(fail(FailureSite::CoreRemoval))?;
                self.c.remove(x);
                self.core_hits += 1;
                Some(x)
            }
        };
        self.t = t;
        self.trace.push(StepRecord {
            t,
            chosen_label: label,
            edge_label_removed: edge,
            rv,
            re,
            size_a: self.a.len(),
            size_c: self.c.len(),
            quasi1_max_dev: None,
            quasi2_max_sampled_dev: None,
        });
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
#[derive(Default)]
pub struct RunOptions {
    pub max_retries: usize,
    /// Quasirandomness checkpoint period in steps; `None` disables checks.
    pub checkpoint_every: Option<usize>,
    pub quasi: QuasiSpec,
    /// Redraw the per-component intervals on each retry.
    pub resample_plan: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Status {
    Success { labels: Vec<usize> },
    Failure(Failure),
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub status: Status,
    /// Failures of the attempts before the final one, in order.
    pub failed_attempts: Vec<Failure>,
    pub attempts: usize,
    /// Trace of the final attempt.
    pub trace: Vec<StepRecord>,
    pub checkpoints: Vec<QuasiReport>,
    /// Whether every checkpoint of the final attempt was within `α(t)`.
    pub quasi_within_alpha: bool,
    /// Non-∗ correction samples in the final attempt.
    pub corv_hits: usize,
    pub core_hits: usize,
    /// Correction draws in the final attempt (one of each per completed step).
    pub correction_draws: usize,
}

impl RunOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self.status, Status::Success { .. })
    }

    pub fn first_attempt_success(&self) -> bool {
        self.is_success() && self.attempts == 1
    }

    pub fn labelling(&self, t: &Tree, n_tilde: usize) -> Option<Result<Labelling>> {
        match &self.status {
            Status::Success { labels } => Some(Labelling::new(t, labels.clone(), n_tilde)),
            Status::Failure(_) => None,
        }
    }

    pub fn max_quasi1(&self) -> Option<f64> {
        self.checkpoints.iter().map(|c| c.quasi1_max_dev).reduce(f64::max)
    }

    pub fn max_quasi2(&self) -> Option<f64> {
        self.checkpoints.iter().map(|c| c.quasi2_max_sampled_dev).reduce(f64::max)
    }
}

/// Stream key for checkpoint sampling, kept away from the small keys used
/// for attempts so that enabling checkpoints never changes a run.
const CHECKPOINT_KEY: u64 = 1 << 40;

/// One attempt of the process on `plan`.
fn attempt(
    plan: &Plan,
    sys: &IntervalSystem,
    params: &Params,
    corv: &CorrectionDistribution,
    core: &CorrectionDistribution,
    opts: &RunOptions,
    rng: &mut SplitRng,
) -> (LabellingState, Option<Failure>, Vec<QuasiReport>, bool) {
    let n = plan.order.len();
    let mut st = LabellingState::new(n, params.n_tilde);
    let mut checkpoints = Vec::new();
    let mut within = true;
    let check_root = rng.split(CHECKPOINT_KEY);
    for i in 0..n {
        let v = plan.order[i];
        let parent_label = plan.parent[i].map(|p| st.psi[plan.order[p]]);
        if let Err(f) = st.step(v, sys.j(plan.interval_at(i)), parent_label, corv, core, rng) {
            return (st, Some(f), checkpoints, within);
        }
        let t = i + 1;
        if let Some(every) = opts.checkpoint_every {
            if every > 0 && t % every == 0 {
                let from = (i + 1).saturating_sub(opts.quasi.recent_labels);
                let recent: Vec<usize> = plan.order[from..=i]
                    .iter()
                    .map(|&u| st.psi[u])
                    .collect();
                let mut crng = check_root.split(t as u64);
                let rep = check_quasi(&st.a, &st.c, sys, t, params.alpha(t), &opts.quasi, &mut crng, &recent);
                within &= rep.within_alpha();
                let last = st.trace.last_mut().expect("step recorded");
                last.quasi1_max_dev = Some(rep.quasi1_max_dev);
                last.quasi2_max_sampled_dev = Some(rep.quasi2_max_sampled_dev);
                checkpoints.push(rep);
            }
        }
    }
    (st, None, checkpoints, within)
}

/// Runs the process, retrying with fresh generator splits after a failure.
/// Attempt `k` (0-based) uses `rng.split(k)`; with `resample_plan` it also
/// redraws the component intervals from `rng.split(k).split(1)`.
pub fn run(
    plan: &Plan,
    sys: &IntervalSystem,
    params: &Params,
    rng: &SplitRng,
    opts: &RunOptions,
) -> Result<RunOutcome> {
    let corv = sys.corv()?;
    let core = sys.core()?;
    let mut failed = Vec::new();
    let mut current = plan.clone();
    for k in 0..=opts.max_retries {
        let mut arng = rng.split(k as u64);
        if k > 0 && opts.resample_plan {
            current = reassign(plan, sys, &mut arng.split(1));
        }
        let (st, fail, checkpoints, within) = attempt(&current, sys, params, &corv, &core, opts, &mut arng);
        let draws = st.t;
        let status = match fail {
            Some(f) => {
                if k < opts.max_retries {
                    failed.push(f);
                    continue;
                }
                Status::Failure(f)
            }
            None => Status::Success { labels: st.psi[1..].to_vec() },
        };
        return Ok(RunOutcome {
            status,
            failed_attempts: failed,
            attempts: k + 1,
            trace: st.trace,
            checkpoints,
            quasi_within_alpha: within,
            corv_hits: st.corv_hits,
            core_hits: st.core_hits,
            correction_draws: draws,
        });
    }
    unreachable!("the final attempt always returns")
}

/// Trace as CSV with header
/// `t,chosen_label,edge_label_removed,rv,re,size_A,size_C,quasi1_max_dev,quasi2_max_sampled_dev`.
/// Absent removals are `-1`; the two deviation columns are filled on
/// checkpoint rows only.
pub fn trace_csv(trace: &[StepRecord]) -> String {
    let mut s = String::from("t,chosen_label,edge_label_removed,rv,re,size_A,size_C,quasi1_max_dev,quasi2_max_sampled_dev\n");
    let opt = |x: Option<usize>| x.map_or("-1".to_string(), |v| v.to_string());
    let dev = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:.6}"));
    for r in trace {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.t,
            r.chosen_label,
            opt(r.edge_label_removed),
            opt(r.rv),
            opt(r.re),
            r.size_a,
            r.size_c,
            dev(r.quasi1_max_dev),
            dev(r.quasi2_max_sampled_dev)
        ));
    }
    s
}

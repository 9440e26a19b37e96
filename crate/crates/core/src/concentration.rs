//! Empirical checks of the two tail bounds the analysis relies on.
//!
//! * Independent bounded summands `0 ≤ Yᵢ ≤ aᵢ`:
//!   `P[X − μ ≥ t] ≤ exp(−2t²/Σaᵢ²)`.
//! * Adapted sequences whose conditional means sum to `μ ± ν` on an event
//!   `𝓔`: `P[𝓔 and |ΣYᵢ − μ| ≥ ν + t] ≤ 2·exp(−2t²/Σaᵢ²)`.
//!
//! A check passes when the empirical frequency is at most the bound plus
//! three binomial standard errors, the standard error taken at
//! `p = min(bound, 1)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::rng::SplitRng;

/// Distribution of one independent summand, supported on `[0, a]`.
#[derive(Debug, Clone, Serialize)]
pub enum VarSpec {
    /// `a` with probability `p`, else 0.
    Bernoulli { p: f64, a: f64 },
    /// Continuous uniform on `[0, a]`.
    Uniform { a: f64 },
    /// Finite distribution on `values ⊂ [0, a]`.
    Discrete { values: Vec<f64>, probs: Vec<f64>, a: f64 },
}

impl VarSpec {
    pub fn bound(&self) -> f64 {
        match self {
            VarSpec::Bernoulli { a, .. } | VarSpec::Uniform { a } | VarSpec::Discrete { a, .. } => *a,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            VarSpec::Bernoulli { p, a } => p * a,
            VarSpec::Uniform { a } => a / 2.0,
            VarSpec::Discrete { values, probs, .. } => values.iter().zip(probs).map(|(v, p)| v * p).sum(),
        }
    }

    pub fn draw(&self, rng: &mut SplitRng) -> f64 {
        match self {
            VarSpec::Bernoulli { p, a } => {
                if rng.bernoulli(*p) {
                    *a
                } else {
                    0.0
                }
            }
            VarSpec::Uniform { a } => rng.unit() * a,
            VarSpec::Discrete { values, probs, .. } => {
                let mut u = rng.unit();
                for (v, p) in values.iter().zip(probs) {
                    if u < *p {
                        return *v;
                    }
                    u -= p;
                }
                *values.last().expect("nonempty support")
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TailResult {
    pub scenario: String,
    pub t: f64,
    pub trials: usize,
    pub hits: usize,
    pub empirical: f64,
    pub bound: f64,
    pub se: f64,
    pub passed: bool,
}

impl TailResult {
    fn new(scenario: &str, t: f64, trials: usize, hits: usize, bound: f64) -> Self {
        let empirical = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
        let b = bound.min(1.0);
        let se = if trials == 0 { 0.0 } else { (b * (1.0 - b) / trials as f64).sqrt() };
        Self { scenario: scenario.to_string(), t, trials, hits, empirical, bound, se, passed: empirical <= bound + 3.0 * se }
    }
}

fn sum_sq(a: impl Iterator<Item = f64>) -> f64 {
    a.map(|x| x * x).sum()
}

/// Trials are split into fixed chunks with one generator each, so results do
/// not depend on the thread count.
const CHUNK: usize = 1024;

fn chunked<T: Send, F>(trials: usize, rng: &SplitRng, f: F) -> Vec<T>
where
    F: Fn(&mut SplitRng) -> T + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|k| {
            let mut r = rng.split(k as u64);
            let len = CHUNK.min(trials - k * CHUNK);
            (0..len).map(|_| f(&mut r)).collect::<Vec<_>>()
        })
        .collect()
}

/// Upper tail `P[X − μ ≥ t]` for independent summands, for each `t` in
/// `ts`, from one shared set of trials.
pub fn hoeffding_empirical(name: &str, vars: &[VarSpec], ts: &[f64], trials: usize, rng: &SplitRng) -> Vec<TailResult> {
    let mu: f64 = vars.iter().map(VarSpec::mean).sum();
    let s2 = sum_sq(vars.iter().map(VarSpec::bound));
    let devs = chunked(trials, rng, |r| vars.iter().map(|v| v.draw(r)).sum::<f64>() - mu);
    ts.iter()
        .map(|&t| {
            let hits = devs.iter().filter(|&&d| d >= t - 1e-9).count();
            let bound = if t <= 0.0 { 1.0 } else { (-2.0 * t * t / s2).exp() };
            TailResult::new(name, t, trials, hits, bound)
        })
        .collect()
}

/// An adapted process: given the history, the next summand's bound, its
/// conditional mean and a draw.
pub trait Process: Sync {
    /// Number of summands.
    fn horizon(&self) -> usize;
    /// `aᵢ`, fixed in advance.
    fn bound(&self, i: usize) -> f64;
    /// Returns `(E[Yᵢ | history], Yᵢ)`.
    fn step(&self, i: usize, history: &[f64], rng: &mut SplitRng) -> (f64, f64);
}

/// Independent Bernoulli(`p`) summands scaled by `a`.
pub struct IidBernoulli {
    pub n: usize,
    pub p: f64,
    pub a: f64,
}

impl Process for IidBernoulli {
    fn horizon(&self) -> usize {
        self.n
    }

    fn bound(&self, _: usize) -> f64 {
        self.a
    }

    fn step(&self, _: usize, _: &[f64], rng: &mut SplitRng) -> (f64, f64) {
        (self.p * self.a, if rng.bernoulli(self.p) { self.a } else { 0.0 })
    }
}

/// Self-reinforcing 0/1 sequence:
/// `P(Yᵢ = 1 | history) = clamp(0.5 + gain·(2·mean(Y₁..Yᵢ₋₁) − 1), 0, 1)`,
/// with the empty mean taken as ½.
pub struct Urn {
    pub n: usize,
    pub gain: f64,
}

impl Process for Urn {
    fn horizon(&self) -> usize {
        self.n
    }

    fn bound(&self, _: usize) -> f64 {
        1.0
    }

    fn step(&self, i: usize, history: &[f64], rng: &mut SplitRng) -> (f64, f64) {
        let mean = if i == 0 { 0.5 } else { history.iter().sum::<f64>() / i as f64 };
        let p = (0.5 + self.gain * (2.0 * mean - 1.0)).clamp(0.0, 1.0);
        (p, if rng.bernoulli(p) { 1.0 } else { 0.0 })
    }
}

/// Heterogeneous caps `aᵢ = 1 + (i mod k)`; `Yᵢ = aᵢ·Bernoulli(pᵢ)` with
/// `pᵢ` drifting with the fraction of earlier successes.
pub struct Drift {
    pub n: usize,
    pub k: usize,
}

impl Process for Drift {
    fn horizon(&self) -> usize {
        self.n
    }

    fn bound(&self, i: usize) -> f64 {
        1.0 + (i % self.k) as f64
    }

    fn step(&self, i: usize, history: &[f64], rng: &mut SplitRng) -> (f64, f64) {
        let hits = history.iter().filter(|&&y| y > 0.0).count();
        let frac = if i == 0 { 0.5 } else { hits as f64 / i as f64 };
        let p = 0.3 + 0.4 * frac;
        let a = self.bound(i);
        (p * a, if rng.bernoulli(p) { a } else { 0.0 })
    }
}

/// Two-sided tail on the event `𝓔 = {Σ E[Yᵢ|history] ∈ [μ − ν, μ + ν]}`.
pub fn seqhoeff_empirical(
    name: &str,
    process: &dyn Process,
    mu: f64,
    nu: f64,
    ts: &[f64],
    trials: usize,
    rng: &SplitRng,
) -> Vec<TailResult> {
    let n = process.horizon();
    let s2 = sum_sq((0..n).map(|i| process.bound(i)));
    let runs = chunked(trials, rng, |r| {
        let mut hist = Vec::with_capacity(n);
        let mut cond = 0.0;
        for i in 0..n {
            let (e, y) = process.step(i, &hist, r);
            debug_assert!((0.0..=process.bound(i)).contains(&y));
            cond += e;
            hist.push(y);
        }
        let in_event = (cond - mu).abs() <= nu + 1e-9;
        (in_event, (hist.iter().sum::<f64>() - mu).abs())
    });
    ts.iter()
        .map(|&t| {
            let hits = runs.iter().filter(|&&(e, d)| e && d >= nu + t - 1e-9).count();
            let bound = if t <= 0.0 { 1.0 } else { (2.0 * (-2.0 * t * t / s2).exp()).min(1.0) };
            TailResult::new(name, t, trials, hits, bound)
        })
        .collect()
}

/// `{0.5σ, 1σ, …, 4σ}` with `σ = sqrt(Σaᵢ²)/2`.
pub fn sigma_grid(sum_sq_bounds: f64) -> Vec<f64> {
    let sigma = sum_sq_bounds.sqrt() / 2.0;
    (1..=8).map(|k| k as f64 * 0.5 * sigma).collect()
}

/// The bundled scenarios at `trials` trials each.
pub fn run_bundled(trials: usize, seed: u64) -> Vec<TailResult> {
    let root = SplitRng::new(seed);
    let coins = vec![VarSpec::Bernoulli { p: 0.5, a: 1.0 }; 100];
    let mut out = Vec::new();
    let grid = sigma_grid(100.0);
    out.extend(hoeffding_empirical("fair-coins", &coins, &grid, trials, &root.split(0)));
    let hetero: Vec<VarSpec> = (0..60)
        .map(|i| match i % 3 {
            0 => VarSpec::Uniform { a: 1.0 + (i % 5) as f64 },
            1 => VarSpec::Bernoulli { p: 0.1, a: 2.0 },
            _ => VarSpec::Discrete { values: vec![0.0, 0.5, 3.0], probs: vec![0.5, 0.3, 0.2], a: 3.0 },
        })
        .collect();
    let s2: f64 = hetero.iter().map(|v| v.bound() * v.bound()).sum();
    out.extend(hoeffding_empirical("heterogeneous", &hetero, &sigma_grid(s2), trials, &root.split(1)));
    let skew = vec![VarSpec::Bernoulli { p: 0.05, a: 1.0 }; 200];
    out.extend(hoeffding_empirical("rare-events", &skew, &sigma_grid(200.0), trials, &root.split(2)));

    let iid = IidBernoulli { n: 100, p: 0.5, a: 1.0 };
    out.extend(seqhoeff_empirical("iid-sequence", &iid, 50.0, 0.0, &grid, trials, &root.split(3)));
    let urn = Urn { n: 100, gain: 0.3 };
    out.extend(seqhoeff_empirical("urn-gain-0.3", &urn, 50.0, 5.0, &grid, trials, &root.split(4)));
    let drift = Drift { n: 120, k: 4 };
    let s2d: f64 = (0..120).map(|i| drift.bound(i).powi(2)).sum();
    let mu_d: f64 = (0..120).map(|i| 0.5 * drift.bound(i)).sum();
    out.extend(seqhoeff_empirical("drift", &drift, mu_d, 10.0, &sigma_grid(s2d), trials, &root.split(5)));
    // ν covers the whole range, so the tail event is empty
    out.extend(seqhoeff_empirical("nu-covers-range", &urn, 50.0, 100.0, &grid, trials, &root.split(6)));
    out
}

pub fn results_csv(rows: &[TailResult]) -> String {
    let mut s = String::from("scenario,t,trials,hits,empirical,bound,se,passed\n");
    for r in rows {
        s.push_str(&format!(
            "{},{:.4},{},{},{:.6e},{:.6e},{:.6e},{}\n",
            r.scenario, r.t, r.trials, r.hits, r.empirical, r.bound, r.se, r.passed
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{Binomial, DiscreteCDF};

    #[test]
    fn fair_coin_examples() {
        let coins = vec![VarSpec::Bernoulli { p: 0.5, a: 1.0 }; 100];
        let r = hoeffding_empirical("c", &coins, &[0.0, 10.0], 100_000, &SplitRng::new(1));
        assert_eq!(r[0].bound, 1.0);
        assert!(r[0].passed);
        assert!((r[1].bound - (-2.0f64).exp()).abs() < 1e-12);
        let exact = Binomial::new(0.5, 100).unwrap().sf(59);
        assert!((exact - 0.0284).abs() < 1e-3);
        assert!(exact <= r[1].bound);
        assert!((r[1].empirical - exact).abs() < 5.0 * (exact * (1.0 - exact) / 1e5).sqrt());
        assert!(r[1].passed);
    }

    #[test]
    fn far_tail_is_empty() {
        let coins = vec![VarSpec::Bernoulli { p: 0.5, a: 1.0 }; 100];
        let r = hoeffding_empirical("c", &coins, &[30.0], 1_000_000, &SplitRng::new(2));
        assert!((r[0].bound - (-18.0f64).exp()).abs() < 1e-15);
        assert_eq!(r[0].hits, 0);
        let exact = Binomial::new(0.5, 100).unwrap().sf(79);
        assert!(exact < 1e-9);
    }

    #[test]
    fn iid_sequence_matches_independent_case() {
        let coins = vec![VarSpec::Bernoulli { p: 0.5, a: 1.0 }; 100];
        let ts = [10.0, 15.0];
        let a = hoeffding_empirical("c", &coins, &ts, 20_000, &SplitRng::new(3));
        let b = seqhoeff_empirical("s", &IidBernoulli { n: 100, p: 0.5, a: 1.0 }, 50.0, 0.0, &ts, 20_000, &SplitRng::new(3));
        for (x, y) in a.iter().zip(&b) {
            // two-sided bound is twice the one-sided one
            assert!((y.bound - 2.0 * x.bound).abs() < 1e-12);
            assert!(y.empirical <= 2.5 * x.empirical + 0.01);
        }
    }

    #[test]
    fn urn_means_follow_the_rule() {
        let u = Urn { n: 10, gain: 0.3 };
        let mut r = SplitRng::new(0);
        assert_eq!(u.step(0, &[], &mut r).0, 0.5);
        assert!((u.step(2, &[1.0, 1.0], &mut r).0 - 0.8).abs() < 1e-12);
        assert!((u.step(2, &[0.0, 0.0], &mut r).0 - 0.2).abs() < 1e-12);
    }

    #[test]
    fn deterministic_regardless_of_threads() {
        let a = run_bundled(3000, 9);
        let b = run_bundled(3000, 9);
        assert_eq!(results_csv(&a), results_csv(&b));
    }
}

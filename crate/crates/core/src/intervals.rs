//! Interval families over the label ranges, the edge-difference profile and
//! the two correction distributions.
//!
//! Vertex labels live in `𝔸 = [ñ]` and edge labels in `ℂ = [ñ−1]`.
//! `I_V` tiles `𝔸` by blocks of `m`, `I_E` tiles `{0, …, ñ−1}` likewise (its
//! first block contains the non-label `0`). Each `J` has length `ℓ` and lies
//! entirely in one half of `𝔸`; its complement is the mirror image
//! `s ↦ ñ + 2 − ℓ − s`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Params, Q};
use crate::rng::SplitRng;

/// Closed integer interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval {
    pub lo: usize,
    pub hi: usize,
}

impl Interval {
    pub fn new(lo: usize, hi: usize) -> Self {
        debug_assert!(lo <= hi);
        Self { lo, hi }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn contains(&self, x: usize) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, o: &Interval) -> bool {
        self.lo <= o.lo && o.hi <= self.hi
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }

    pub fn sum(&self) -> u128 {
        (self.lo as u128 + self.hi as u128) * self.len() as u128 / 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntervalSystem {
    pub n_tilde: usize,
    pub m: usize,
    pub ell: usize,
    pub iv_starts: Vec<usize>,
    pub ie_starts: Vec<usize>,
    pub j_starts: Vec<usize>,
    /// `complement[j]` is the index of `J̄` for the `J` at index `j`.
    pub complement: Vec<usize>,
}

impl IntervalSystem {
    pub fn new(n_tilde: usize, m: usize, ell: usize) -> Result<Self> {
        // an odd ℓ/m makes the Core mass at the central differences negative
        // and 4(ℓ − m) > ñ makes the ∗ masses negative
        if m == 0 || ell == 0 || !ell.is_multiple_of(2 * m) || !n_tilde.is_multiple_of(2 * m) || 2 * ell >= n_tilde || 4 * (ell - m) > n_tilde {
            return Err(Error::Params(format!(
                "need 2m | ell, 2m | n_tilde, ell < n_tilde/2 and 4(ell - m) <= n_tilde (n_tilde={n_tilde}, m={m}, ell={ell})"
            )));
        }
        let half = n_tilde / 2;
        let iv_starts: Vec<usize> = (0..n_tilde / m).map(|k| 1 + k * m).collect();
        let ie_starts: Vec<usize> = (0..n_tilde / m).map(|k| k * m).collect();
        let mut j_starts: Vec<usize> = (1..=half - ell + 1).step_by(m).collect();
        j_starts.extend((half + 1..=n_tilde - ell + 1).step_by(m));
        // the family is symmetric under s ↦ ñ + 2 − ℓ − s, which reverses it
        let nj = j_starts.len();
        let complement = (0..nj).map(|j| nj - 1 - j).collect();
        let sys = Self { n_tilde, m, ell, iv_starts, ie_starts, j_starts, complement };
        debug_assert!(sys
            .complement
            .iter()
            .enumerate()
            .all(|(j, &c)| sys.j_starts[c] == n_tilde + 2 - ell - sys.j_starts[j]));
        Ok(sys)
    }

    pub fn from_params(p: &Params) -> Result<Self> {
        Self::new(p.n_tilde, p.m, p.ell)
    }

    pub fn num_iv(&self) -> usize {
        self.iv_starts.len()
    }

    pub fn num_ie(&self) -> usize {
        self.ie_starts.len()
    }

    pub fn num_j(&self) -> usize {
        self.j_starts.len()
    }

    pub fn iv(&self, i: usize) -> Interval {
        let s = self.iv_starts[i];
        Interval::new(s, s + self.m - 1)
    }

    pub fn ie(&self, i: usize) -> Interval {
        let s = self.ie_starts[i];
        Interval::new(s, s + self.m - 1)
    }

    pub fn j(&self, i: usize) -> Interval {
        let s = self.j_starts[i];
        Interval::new(s, s + self.ell - 1)
    }

    pub fn complement_of(&self, j: usize) -> usize {
        self.complement[j]
    }

    /// Index of the `J` starting at `start`.
    pub fn j_index(&self, start: usize) -> Option<usize> {
        self.j_starts.binary_search(&start).ok()
    }

    /// Index of the `I_V` block containing vertex label `a`.
    pub fn iv_of_label(&self, a: usize) -> usize {
        (a - 1) / self.m
    }

    /// Index of the `I_E` block containing edge label `c`.
    pub fn ie_of_label(&self, c: usize) -> usize {
        c / self.m
    }

    /// Number of `J` containing `I_V` block `i`.
    pub fn cover_count(&self, i: usize) -> usize {
        let iv = self.iv(i);
        (0..self.num_j()).filter(|&j| self.j(j).contains_interval(&iv)).count()
    }

    /// `|{(a, a') ∈ J × J̄ : |a − a'| = c}|`, from the triangular profile.
    pub fn el_count(&self, j: usize, c: usize) -> usize {
        let (s, t) = (self.j_starts[j], self.j_starts[self.complement[j]]);
        let centre = s.abs_diff(t);
        let off = c.abs_diff(centre);
        self.ell.saturating_sub(off)
    }

    /// `el(J, c) = el_count / ℓ²`.
    pub fn el(&self, j: usize, c: usize) -> Q {
        Q::new(self.el_count(j, c) as i128, (self.ell * self.ell) as i128)
    }

    pub fn corv(&self) -> Result<CorrectionDistribution> {
        // common denominator ℓ²|J|; Corv numerators are ℓ(ℓ − m·cover)
        let (l, nj) = (self.ell as i128, self.num_j() as i128);
        let denom = l * l * nj;
        let mut support = Vec::with_capacity(self.num_iv());
        for i in 0..self.num_iv() {
            let num = l * (l - self.m as i128 * self.cover_count(i) as i128);
            if num < 0 {
                return Err(Error::NegativeMass { start: self.iv_starts[i], mass: Q::new(num, denom).to_string() });
            }
            support.push((self.iv(i), num));
        }
        let star = l * l * (2 * nj - self.num_iv() as i128);
        CorrectionDistribution::from_numerators(support, star, denom)
    }

    pub fn core(&self) -> Result<CorrectionDistribution> {
        let (l, nj, m) = (self.ell as i128, self.num_j() as i128, self.m as i128);
        let denom = l * l * nj;
        let mut support = Vec::with_capacity(self.num_ie());
        for i in 0..self.num_ie() {
            let c = self.ie_starts[i];
            let pairs: i128 = (0..self.num_j()).map(|j| self.el_count(j, c) as i128).sum();
            let num = l * l - m * pairs;
            if num < 0 {
                return Err(Error::NegativeMass { start: c, mass: Q::new(num, denom).to_string() });
            }
            support.push((self.ie(i), num));
        }
        let star = l * l * (2 * nj - self.num_ie() as i128);
        CorrectionDistribution::from_numerators(support, star, denom)
    }
}

pub fn build_interval_system(p: &Params) -> Result<IntervalSystem> {
    IntervalSystem::from_params(p)
}

/// Distribution over a list of intervals plus a "no removal" outcome `∗`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectionDistribution {
    pub support: Vec<(Interval, Q)>,
    pub star: Q,
    denom: u64,
    /// Cumulative integer thresholds over `support`, scaled by `denom`.
    cum: Vec<u64>,
}

impl CorrectionDistribution {
    fn from_numerators(support: Vec<(Interval, i128)>, star: i128, denom: i128) -> Result<Self> {
        if star < 0 {
            return Err(Error::NegativeMass { start: 0, mass: Q::new(star, denom).to_string() });
        }
        let total: i128 = support.iter().map(|&(_, n)| n).sum::<i128>() + star;
        if total != denom {
            return Err(Error::Params(format!("correction masses sum to {total}/{denom}")));
        }
        let mut acc = 0u64;
        let cum = support
            .iter()
            .map(|&(_, n)| {
                acc += n as u64;
                acc
            })
            .collect();
        Ok(Self {
            support: support.into_iter().map(|(i, n)| (i, Q::new(n, denom))).collect(),
            star: Q::new(star, denom),
            denom: denom as u64,
            cum,
        })
    }

    /// A distribution that always returns `∗`.
    pub fn trivial() -> Self {
        Self { support: Vec::new(), star: Q::from_integer(1), denom: 1, cum: Vec::new() }
    }

    pub fn total(&self) -> Q {
        self.support.iter().map(|&(_, p)| p).sum::<Q>() + self.star
    }

    pub fn sample(&self, rng: &mut SplitRng) -> Option<Interval> {
        let x = rng.below(self.denom);
        let k = self.cum.partition_point(|&c| c <= x);
        self.support.get(k).map(|&(i, _)| i)
    }
}

pub fn sample_correction(d: &CorrectionDistribution, rng: &mut SplitRng) -> Option<Interval> {
    d.sample(rng)
}

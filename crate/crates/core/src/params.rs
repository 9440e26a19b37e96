//! Scalar parameters of the labelling process.
//!
//! Two modes exist. *Practical* parameters are plain integers chosen by the
//! user subject to the divisibility constraints the interval system needs;
//! every runnable experiment uses them. *Paper* parameters follow the
//! asymptotic formulas exactly; their base quantity `1/μ = ⌈exp(10⁸/γ⁴)⌉` has
//! tens of millions of digits, so they live in [`paper`] as symbolic values
//! and only support formula-level checks.

pub mod paper;

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tree::{Tree, degree_stats};

/// Exact rational used throughout the crate for masses and parameters.
pub type Q = Ratio<i128>;

/// `Q` wrapper serialized as a `"p/q"` string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(pub Q);

impl Rational {
    pub fn new(p: i128, q: i128) -> Self {
        Self(Q::new(p, q))
    }

    pub fn to_f64(self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `p/q`, an integer, or a finite decimal such as `0.2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Params(format!("cannot parse rational {s:?}"));
        if let Some((p, q)) = s.split_once('/') {
            let p: i128 = p.trim().parse().map_err(|_| bad())?;
            let q: i128 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            return Ok(Self(Q::new(p, q)));
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let neg = int.starts_with('-');
            let ip: i128 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
            let fp: i128 = frac.parse().map_err(|_| bad())?;
            let den = 10i128.pow(frac.len() as u32);
            let mag = ip.abs() * den + fp;
            return Ok(Self(Q::new(if neg { -mag } else { mag }, den)));
        }
        Ok(Self(Q::from_integer(s.parse().map_err(|_| bad())?)))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Runnable parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub gamma: Rational,
    pub n: usize,
    pub n_tilde: usize,
    pub m: usize,
    pub ell: usize,
    /// Cutting parameter: `|R| ≤ eps·n` and the lower component bound `2/eps`.
    pub eps: Rational,
    /// Component-order threshold for tree cutting; `None` derives it from the
    /// tree (see [`Params::cut_threshold`]).
    pub threshold: Option<usize>,
    /// Tolerance schedule `α(t) = alpha0 + alpha1·t/n`, in units of `m`.
    pub alpha0: Rational,
    pub alpha1: Rational,
}

impl Params {
    pub fn alpha(&self, t: usize) -> f64 {
        self.alpha0.to_f64() + self.alpha1.to_f64() * t as f64 / self.n as f64
    }

    /// Threshold used for cutting `tree`: the explicit one if set, otherwise
    /// `max(⌈ℓ/16⌉, ⌈4Δ/ε⌉, ⌈2/ε⌉)`, the smallest order for which the
    /// leaf walk is guaranteed to terminate on this tree.
    pub fn cut_threshold(&self, tree: &Tree) -> usize {
        if let Some(k) = self.threshold {
            return k;
        }
        let eps = self.eps.0;
        let delta = degree_stats(tree).max_degree as i128;
        let walk_min = (Q::from_integer(4 * delta) / eps).ceil().to_integer() as usize;
        let two_over_eps = (Q::from_integer(2) / eps).ceil().to_integer() as usize;
        self.ell.div_ceil(16).max(walk_min).max(two_over_eps).max(2)
    }
}

/// `ñ = ⌈(1+γ)n⌉` rounded up to a multiple of `2m`.
pub fn practical_n_tilde(n: usize, gamma: Q, m: usize) -> usize {
    let raw = (Q::one() + gamma) * Q::from_integer(n as i128);
    let base = raw.ceil().to_integer() as usize;
    base.next_multiple_of(2 * m)
}

pub fn derive_practical_params(n: usize, gamma: Rational, m: usize, ell: usize) -> Result<Params> {
    if n < 2 {
        return Err(Error::TooFewVertices(n));
    }
    if !gamma.0.is_positive() {
        return Err(Error::Params(format!("gamma must be positive, got {gamma}")));
    }
    if m == 0 || ell == 0 {
        return Err(Error::Params("m and ell must be positive".into()));
    }
    if !ell.is_multiple_of(2 * m) {
        return Err(Error::Divisibility { what: format!("ell = {ell}"), modulus: format!("2m = {}", 2 * m) });
    }
    let n_tilde = practical_n_tilde(n, gamma.0, m);
    if 2 * ell >= n_tilde {
        return Err(Error::Params(format!("ell = {ell} must be below n_tilde/2 = {}", n_tilde / 2)));
    }
    if 4 * (ell - m) > n_tilde {
        return Err(Error::Params(format!("4(ell - m) = {} exceeds n_tilde = {n_tilde}", 4 * (ell - m))));
    }
    Ok(Params {
        gamma,
        n,
        n_tilde,
        m,
        ell,
        eps: Rational::new(9, 10),
        threshold: None,
        alpha0: Rational::new(1, 20),
        alpha1: Rational::new(3, 20),
    })
}

/// Extends `t` by a path hung on its smallest-index leaf until the order is
/// the least multiple of `modulus` that is `≥ n`. New vertices are numbered
/// `n+1, n+2, …` along the path.
pub fn pad_tree(t: &Tree, modulus: usize) -> Result<Tree> {
    if modulus == 0 {
        return Err(Error::Params("modulus must be at least 1".into()));
    }
    let n = t.n();
    let target = n.next_multiple_of(modulus);
    if target == n {
        return Ok(t.clone());
    }
    let mut edges = t.edges().to_vec();
    let mut prev = t.smallest_leaf();
    for v in n + 1..=target {
        edges.push((prev, v));
        prev = v;
    }
    Tree::new(target, edges)
}

/// Parameters in either mode, tagged for JSON.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum AnyParams {
    Practical(Params),
    Paper(Box<paper::PaperParams>),
}


#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn n_tilde_examples() {
        let p = derive_practical_params(20, Rational::new(1, 5), 2, 4).unwrap();
        assert_eq!(p.n_tilde, 24);
        let p = derive_practical_params(10_000, Rational::new(1, 5), 32, 512).unwrap();
        assert_eq!(p.n_tilde, 12_032);
    }

    #[test]
    fn practical_errors() {
        // ell >= n_tilde / 2
        assert!(matches!(derive_practical_params(20, Rational::new(1, 5), 2, 12), Err(Error::Params(_))));
        assert!(matches!(derive_practical_params(20, Rational::new(1, 5), 3, 4), Err(Error::Divisibility { .. })));
        assert!(derive_practical_params(20, Rational::new(0, 1), 2, 4).is_err());
        assert!(matches!(derive_practical_params(40, Rational::new(1, 5), 2, 6), Err(Error::Divisibility { .. })));
    }

    #[test]
    fn rational_parsing() {
        assert_eq!("0.2".parse::<Rational>().unwrap(), Rational::new(1, 5));
        assert_eq!("1/5".parse::<Rational>().unwrap(), Rational::new(1, 5));
        assert_eq!("3".parse::<Rational>().unwrap(), Rational::new(3, 1));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("abc".parse::<Rational>().is_err());
        let json = serde_json::to_string(&Rational::new(2, 4)).unwrap();
        assert_eq!(json, "\"1/2\"");
    }

    #[test]
    fn params_json_has_mode_tag() {
        let p = derive_practical_params(20, Rational::new(1, 5), 2, 4).unwrap();
        let v = serde_json::to_value(AnyParams::Practical(p.clone())).unwrap();
        assert_eq!(v["mode"], "practical");
        assert_eq!(v["gamma"], "1/5");
        let back: Params = serde_json::from_value(v).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn pad_examples() {
        let mut rng = crate::rng::SplitRng::new(3);
        let t = crate::tree::random_tree(10, &mut rng).unwrap();
        let p = pad_tree(&t, 12).unwrap();
        assert_eq!(p.n(), 12);
        for &(u, v) in t.edges() {
            assert!(p.has_edge(u, v));
        }
        let t12 = crate::tree::random_tree(12, &mut rng).unwrap();
        assert_eq!(pad_tree(&t12, 12).unwrap(), t12);
        let p5 = pad_tree(&Tree::path(2).unwrap(), 5).unwrap();
        assert_eq!(degree_stats(&p5).max_degree, 2);
        assert_eq!(p5.n(), 5);
        // a path whose two leaves are the only degree-1 vertices
        assert_eq!(p5.vertices().filter(|&v| p5.degree(v) == 1).count(), 2);
    }

    #[test]
    fn padding_restricts_graceful_labellings() {
        // a graceful labelling of the padded tree restricted to the original
        // vertices is injective with distinct edge differences
        let t = Tree::star(4, 1).unwrap();
        let padded = pad_tree(&t, 6).unwrap();
        let lab = crate::exact::exact_graceful(&padded, 6, crate::exact::DEFAULT_CAP).unwrap().unwrap();
        let restricted: Vec<usize> = lab.labels()[..4].to_vec();
        let r = crate::verify::Labelling::new(&t, restricted, 6).unwrap();
        assert!(crate::verify::verify_graceful(&r).passed());
    }

    proptest! {
        #[test]
        fn practical_invariants(n in 2usize..50_000, g in 1i128..20, m in 1usize..64, k in 1usize..16) {
            let ell = m * k;
            if let Ok(p) = derive_practical_params(n, Rational::new(g, 10), m, ell) {
                prop_assert_eq!(p.ell % p.m, 0);
                prop_assert_eq!(p.n_tilde % (2 * p.m), 0);
                prop_assert!(2 * p.ell < p.n_tilde);
                prop_assert!(p.n_tilde as f64 >= (1.0 + g as f64 / 10.0) * n as f64 - 1e-9);
            }
        }

        #[test]
        fn pad_tree_order(n in 2usize..60, k in 1usize..20, seed in any::<u64>()) {
            let t = crate::tree::random_tree(n, &mut crate::rng::SplitRng::new(seed)).unwrap();
            let p = pad_tree(&t, k).unwrap();
            prop_assert_eq!(p.n() % k, 0);
            prop_assert!(p.n() >= n && p.n() < n + k);
            for &(u, v) in t.edges() {
                prop_assert!(p.has_edge(u, v));
            }
        }
    }
}

//! Structure counts and the two quasirandomness conditions.
//!
//! A structure fixes some labels and leaves interval slots free:
//!
//! * `X1⟦I⟧`: a free vertex label in `I`.
//! * `X3⟦a,I⟧`: a free vertex label `b ∈ I` joined to fixed `a`.
//! * `X4⟦a,a',I⟧`: a free `b ∈ I` joined to both fixed `a` and `a'`.
//! * `X2⟦a,I,c,I'⟧`: `a − b − b'` with `b ∈ I`, `b' ∈ I'` and the fixed edge
//!   label `c = |b − b'|`.
//!
//! `(A, C)` is `α`-quasirandom when every `I_E` holds about `m·|A|/ñ`
//! available edge labels and every structure count is about its value at
//! `(𝔸, ℂ)` scaled by `(|A|/ñ)^free`, both up to `α·m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervals::{Interval, IntervalSystem};
use crate::labelset::{BitIter, DiffSet, LabelSet, popcount};
use crate::params::Q;
use crate::prepare::Plan;
use crate::rng::SplitRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    X1,
    X2,
    X3,
    X4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Structure {
    X1 { i: Interval },
    X2 { a: usize, i: Interval, c: usize, i2: Interval },
    X3 { a: usize, i: Interval },
    X4 { a: usize, a2: usize, i: Interval },
}

impl Structure {
    pub fn kind(&self) -> Kind {
        match self {
            Structure::X1 { .. } => Kind::X1,
            Structure::X2 { .. } => Kind::X2,
            Structure::X3 { .. } => Kind::X3,
            Structure::X4 { .. } => Kind::X4,
        }
    }

    /// Number of free vertex and edge labels.
    pub fn free(&self) -> u32 {
        match self {
            Structure::X1 { .. } => 1,
            Structure::X2 { .. } => 3,
            Structure::X3 { .. } => 2,
            Structure::X4 { .. } => 3,
        }
    }

    /// Free vertex slots.
    pub fn free_intervals(&self) -> Vec<Interval> {
        match *self {
            Structure::X1 { i } | Structure::X3 { i, .. } | Structure::X4 { i, .. } => vec![i],
            Structure::X2 { i, i2, .. } => vec![i, i2],
        }
    }

    /// `Diff(e) = |a − min I|` for each free edge between a fixed label `a`
    /// and a free slot `I`.
    pub fn free_edge_diffs(&self) -> Vec<usize> {
        match *self {
            Structure::X1 { .. } => vec![],
            Structure::X2 { a, i, .. } | Structure::X3 { a, i } => vec![a.abs_diff(i.lo)],
            Structure::X4 { a, a2, i } => vec![a.abs_diff(i.lo), a2.abs_diff(i.lo)],
        }
    }

    /// Slots must be members of `I_V`, fixed labels in `[ñ]` and pairwise
    /// distinct, and the two X2 slots distinct.
    pub fn validate(&self, sys: &IntervalSystem) -> Result<()> {
        let nt = sys.n_tilde;
        let slot_ok = |i: &Interval| i.len() == sys.m && i.lo >= 1 && i.hi <= nt && (i.lo - 1).is_multiple_of(sys.m);
        let label_ok = |a: usize| (1..=nt).contains(&a);
        let ok = match self {
            Structure::X1 { i } => slot_ok(i),
            Structure::X3 { a, i } => slot_ok(i) && label_ok(*a),
            Structure::X4 { a, a2, i } => slot_ok(i) && label_ok(*a) && label_ok(*a2) && a != a2,
            Structure::X2 { a, i, c, i2 } => slot_ok(i) && slot_ok(i2) && label_ok(*a) && i != i2 && *c < nt,
        };
        if ok { Ok(()) } else { Err(Error::Precondition(format!("malformed structure {self:?}"))) }
    }
}

/// Scratch buffers for window arithmetic.
#[derive(Default)]
struct Scratch {
    w1: Vec<u64>,
    w2: Vec<u64>,
}

fn and_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d &= *s;
    }
}

fn clear_bit(words: &mut [u64], lo: usize, x: usize, len: usize) {
    if x >= lo && x < lo + len {
        let off = x - lo;
        words[off / 64] &= !(1u64 << (off % 64));
    }
}

fn count_with(x: &Structure, a_set: &LabelSet, c: &DiffSet, s: &mut Scratch) -> usize {
    match *x {
        Structure::X1 { i } => a_set.count_range(i.lo, i.hi),
        Structure::X3 { a, i } => {
            a_set.window_into(i.lo as i64, i.len(), &mut s.w1);
            c.diff_window_into(a, i.lo, i.len(), &mut s.w2);
            and_into(&mut s.w1, &s.w2);
            clear_bit(&mut s.w1, i.lo, a, i.len());
            popcount(&s.w1)
        }
        Structure::X4 { a, a2, i } => {
            a_set.window_into(i.lo as i64, i.len(), &mut s.w1);
            c.diff_window_into(a, i.lo, i.len(), &mut s.w2);
            and_into(&mut s.w1, &s.w2);
            c.diff_window_into(a2, i.lo, i.len(), &mut s.w2);
            and_into(&mut s.w1, &s.w2);
            clear_bit(&mut s.w1, i.lo, a, i.len());
            clear_bit(&mut s.w1, i.lo, a2, i.len());
            // the midpoint induces the same label on both edges
            if (a + a2) % 2 == 0 {
                clear_bit(&mut s.w1, i.lo, (a + a2) / 2, i.len());
            }
            popcount(&s.w1)
        }
        Structure::X2 { a, i, c: cl, i2 } => {
            if cl == 0 {
                return 0;
            }
            a_set.window_into(i.lo as i64, i.len(), &mut s.w1);
            c.diff_window_into(a, i.lo, i.len(), &mut s.w2);
            and_into(&mut s.w1, &s.w2);
            clear_bit(&mut s.w1, i.lo, a, i.len());
            // |a − b| ≠ c; this also rules out b' = a
            clear_bit(&mut s.w1, i.lo, a + cl, i.len());
            if a > cl {
                clear_bit(&mut s.w1, i.lo, a - cl, i.len());
            }
            let mut total = 0;
            for (w, &word) in s.w1.iter().enumerate() {
                for bit in BitIter(word) {
                    let b = i.lo + w * 64 + bit;
                    let up = b + cl;
                    if i2.contains(up) && a_set.contains(up) {
                        total += 1;
                    }
                    if b > cl && i2.contains(b - cl) && a_set.contains(b - cl) {
                        total += 1;
                    }
                }
            }
            total
        }
    }
}

/// `|X(A, C)|`.
pub fn count_structure(x: &Structure, a: &LabelSet, c: &DiffSet) -> usize {
    count_with(x, a, c, &mut Scratch::default())
}

/// The full sets `𝔸 = [ñ]`, `ℂ = [ñ − 1]`.
pub struct Ambient {
    pub a: LabelSet,
    pub c: DiffSet,
}

impl Ambient {
    pub fn new(n_tilde: usize) -> Self {
        Self { a: LabelSet::full_range(1, n_tilde), c: DiffSet::new(LabelSet::full_range(1, n_tilde - 1)) }
    }

    pub fn count(&self, x: &Structure) -> usize {
        count_structure(x, &self.a, &self.c)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct QuasiSpec {
    /// Random structures per kind (X2, X3, X4) and checkpoint.
    pub per_kind: usize,
    /// How many of the most recently used labels also serve as fixed labels.
    pub recent_labels: usize,
}

impl Default for QuasiSpec {
    fn default() -> Self {
        Self { per_kind: 256, recent_labels: 8 }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct QuasiReport {
    pub t: usize,
    pub alpha: f64,
    /// `max_{I_E} ||I_E ∩ C| − m|A|/ñ| / m`.
    pub quasi1_max_dev: f64,
    /// Largest sampled `||X(A,C)| − |X(𝔸,ℂ)|(|A|/ñ)^free| / m`.
    pub quasi2_max_sampled_dev: f64,
    /// Per-kind maxima in the order X1, X2, X3, X4.
    pub quasi2_by_kind: [f64; 4],
    pub structures_checked: usize,
    /// The structure attaining `quasi2_max_sampled_dev`.
    pub worst: Option<Structure>,
}

impl QuasiReport {
    pub fn within_alpha(&self) -> bool {
        self.quasi1_max_dev <= self.alpha && self.quasi2_max_sampled_dev <= self.alpha
    }
}

/// Deviation of `|I_E ∩ C|` from `m|A|/ñ`, in units of `m`, maximised over
/// `I_E`.
pub fn quasi1_max_dev(a: &LabelSet, c: &DiffSet, sys: &IntervalSystem) -> f64 {
    let m = sys.m as f64;
    let target = m * a.len() as f64 / sys.n_tilde as f64;
    (0..sys.num_ie())
        .map(|k| {
            let i = sys.ie(k);
            (c.set().count_range(i.lo, i.hi) as f64 - target).abs() / m
        })
        .fold(0.0, f64::max)
}

fn random_label(a: &LabelSet, rng: &mut SplitRng) -> Option<usize> {
    if a.is_empty() {
        return None;
    }
    a.select_range(0, a.max_element(), rng.below(a.len() as u64) as usize)
}

fn random_iv(sys: &IntervalSystem, rng: &mut SplitRng) -> Interval {
    sys.iv(rng.below(sys.num_iv() as u64) as usize)
}

fn random_x2(a: usize, sys: &IntervalSystem, rng: &mut SplitRng) -> Structure {
    let i = random_iv(sys, rng);
    let mut i2 = random_iv(sys, rng);
    while i2 == i {
        i2 = random_iv(sys, rng);
    }
    // a difference realised by some pair of the two slots
    let b = rng.range_inclusive(i.lo, i.hi);
    let b2 = rng.range_inclusive(i2.lo, i2.hi);
    Structure::X2 { a, i, c: b.abs_diff(b2), i2 }
}

/// The structures examined at a checkpoint: every `X1`, `per_kind` random
/// X2/X3/X4 with fixed labels uniform over `A` and slots uniform over
/// `I_V`, plus one of each kind anchored at every label in `fixed`.
pub fn sample_structures(
    a: &LabelSet,
    sys: &IntervalSystem,
    spec: &QuasiSpec,
    rng: &mut SplitRng,
    fixed: &[usize],
) -> Vec<Structure> {
    let mut out: Vec<Structure> = (0..sys.num_iv()).map(|k| Structure::X1 { i: sys.iv(k) }).collect();
    if a.len() >= 2 {
        for _ in 0..spec.per_kind {
            let x = random_label(a, rng).expect("nonempty");
            out.push(Structure::X3 { a: x, i: random_iv(sys, rng) });
            out.push(random_x2(x, sys, rng));
            let mut y = random_label(a, rng).expect("nonempty");
            while y == x {
                y = random_label(a, rng).expect("nonempty");
            }
            out.push(Structure::X4 { a: x, a2: y, i: random_iv(sys, rng) });
        }
    }
    for &x in fixed {
        out.push(Structure::X3 { a: x, i: random_iv(sys, rng) });
        out.push(random_x2(x, sys, rng));
        let y = rng.range_inclusive(1, sys.n_tilde);
        if y != x {
            out.push(Structure::X4 { a: x, a2: y, i: random_iv(sys, rng) });
        }
    }
    out
}

/// Evaluates both conditions at step `t`: the per-interval deviation
/// exhaustively, the structure counts on [`sample_structures`].
#[allow(clippy::too_many_arguments)]
pub fn check_quasi(
    a: &LabelSet,
    c: &DiffSet,
    sys: &IntervalSystem,
    t: usize,
    alpha: f64,
    spec: &QuasiSpec,
    rng: &mut SplitRng,
    fixed: &[usize],
) -> QuasiReport {
    let q1 = quasi1_max_dev(a, c, sys);
    let structures = sample_structures(a, sys, spec, rng, fixed);
    let ambient = Ambient::new(sys.n_tilde);
    let dens = a.len() as f64 / sys.n_tilde as f64;
    let m = sys.m as f64;
    let mut s = Scratch::default();
    let mut by_kind = [0.0f64; 4];
    let mut worst = None;
    let mut best = -1.0;
    for x in &structures {
        let actual = count_with(x, a, c, &mut s) as f64;
        let full = count_with(x, &ambient.a, &ambient.c, &mut s) as f64;
        let dev = (actual - full * dens.powi(x.free() as i32)).abs() / m;
        let k = x.kind() as usize;
        by_kind[k] = by_kind[k].max(dev);
        if dev > best {
            best = dev;
            worst = Some(*x);
        }
    }
    QuasiReport {
        t,
        alpha,
        quasi1_max_dev: q1,
        quasi2_max_sampled_dev: best.max(0.0),
        quasi2_by_kind: by_kind,
        structures_checked: structures.len(),
        worst,
    }
}

/// Per-step expected consumption under perfectly uniform choices.
#[derive(Debug, Clone, PartialEq)]
pub struct CrudeEstimates {
    pub t: usize,
    /// `J(v_t)` index.
    pub j: usize,
    /// `p_{I_E,t} = m·el(J(v_t), min I_E)` for each `I_E`.
    pub p_edge: Vec<Q>,
    n_tilde: usize,
    ell: usize,
}

pub fn crude_estimates(plan: &Plan, sys: &IntervalSystem, t: usize) -> Result<CrudeEstimates> {
    if t == 0 || t > plan.order.len() {
        return Err(Error::Precondition(format!("t = {t} outside 1..={}", plan.order.len())));
    }
    let j = plan.interval_at(t - 1);
    let m = Q::from_integer(sys.m as i128);
    let p_edge = sys.ie_starts.iter().map(|&c| m * sys.el(j, c)).collect();
    Ok(CrudeEstimates { t, j, p_edge, n_tilde: sys.n_tilde, ell: sys.ell })
}

impl CrudeEstimates {
    /// `p_{X,t} = |X(𝔸,ℂ)|·((ñ−t)/ñ)^{free−1}·(Σ_{I free} 1[I ⊂ J]/ℓ + Σ_{e free} el(J, Diff(e)))`.
    pub fn p_struct(&self, x: &Structure, sys: &IntervalSystem, ambient: &Ambient) -> Q {
        let full = Q::from_integer(ambient.count(x) as i128);
        let ratio = Q::new((self.n_tilde - self.t) as i128, self.n_tilde as i128);
        let scale = num_traits::pow::Pow::pow(ratio, x.free() - 1);
        let jv = sys.j(self.j);
        let inside = x.free_intervals().iter().filter(|i| jv.contains_interval(i)).count();
        let vsum = Q::new(inside as i128, self.ell as i128);
        let esum: Q = x.free_edge_diffs().iter().map(|&d| sys.el(self.j, d)).sum();
        full * scale * (vsum + esum)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowCheck {
    pub count: usize,
    pub target: f64,
    pub halfwidth: f64,
    pub inside: bool,
}

impl WindowCheck {
    fn new(count: usize, target: f64, halfwidth: f64) -> Self {
        Self { count, target, halfwidth, inside: (count as f64 - target).abs() <= halfwidth }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JWindowReport {
    pub x2: WindowCheck,
    pub x3: WindowCheck,
    pub x4: WindowCheck,
}

impl JWindowReport {
    pub fn all_inside(&self) -> bool {
        self.x2.inside && self.x3.inside && self.x4.inside
    }
}

/// `J`-level counts, as sums of block-level counts over `I ⊂ J` (and
/// `I' ⊂ J̄` for X2), against
/// `X3: (|A|/ñ)²ℓ ± 2αℓ`, `X4: (|A|/ñ)³ℓ ± 2αℓ`,
/// `X2: (|A|/ñ)³·ℓ²·el(J,c) ± 3αℓ`.
#[allow(clippy::too_many_arguments)]
pub fn j_window_check(
    a_set: &LabelSet,
    c: &DiffSet,
    sys: &IntervalSystem,
    alpha: f64,
    a: usize,
    a2: usize,
    cl: usize,
    j: usize,
) -> JWindowReport {
    let blocks = |jj: usize| {
        let ji = sys.j(jj);
        (0..sys.num_iv()).map(|k| sys.iv(k)).filter(move |i| ji.contains_interval(i)).collect::<Vec<_>>()
    };
    let (inner, outer) = (blocks(j), blocks(sys.complement_of(j)));
    let mut s = Scratch::default();
    let x3: usize = inner.iter().map(|&i| count_with(&Structure::X3 { a, i }, a_set, c, &mut s)).sum();
    let x4: usize = inner.iter().map(|&i| count_with(&Structure::X4 { a, a2, i }, a_set, c, &mut s)).sum();
    let mut x2 = 0;
    for &i in &inner {
        for &i2 in &outer {
            x2 += count_with(&Structure::X2 { a, i, c: cl, i2 }, a_set, c, &mut s);
        }
    }
    let d = a_set.len() as f64 / sys.n_tilde as f64;
    let l = sys.ell as f64;
    let pairs = sys.el_count(j, cl) as f64;
    JWindowReport {
        x2: WindowCheck::new(x2, d.powi(3) * pairs, 3.0 * alpha * l),
        x3: WindowCheck::new(x3, d * d * l, 2.0 * alpha * l),
        x4: WindowCheck::new(x4, d.powi(3) * l, 2.0 * alpha * l),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(max: usize, xs: &[usize]) -> LabelSet {
        LabelSet::from_iter_with_max(max, xs.iter().copied())
    }

    fn brute(x: &Structure, a: &LabelSet, c: &DiffSet) -> usize {
        let inc = |u: usize, v: usize| c.contains(u.abs_diff(v));
        match *x {
            Structure::X1 { i } => i.iter().filter(|&b| a.contains(b)).count(),
            Structure::X3 { a: f, i } => i.iter().filter(|&b| a.contains(b) && b != f && inc(f, b)).count(),
            Structure::X4 { a: f, a2: g, i } => i
                .iter()
                .filter(|&b| {
                    a.contains(b) && b != f && b != g && inc(f, b) && inc(g, b) && f.abs_diff(b) != g.abs_diff(b)
                })
                .count(),
            Structure::X2 { a: f, i, c: cl, i2 } => {
                let mut n = 0;
                for b in i.iter() {
                    for b2 in i2.iter() {
                        if a.contains(b)
                            && a.contains(b2)
                            && b.abs_diff(b2) == cl
                            && inc(f, b)
                            && f.abs_diff(b) != cl
                            && f != b
                            && f != b2
                            && b != b2
                        {
                            n += 1;
                        }
                    }
                }
                n
            }
        }
    }

    #[test]
    fn count_examples() {
        let c = DiffSet::new(set(23, &[3, 4]));
        assert_eq!(count_structure(&Structure::X1 { i: Interval::new(1, 2) }, &set(24, &[2]), &c), 1);
        assert_eq!(count_structure(&Structure::X3 { a: 5, i: Interval::new(1, 2) }, &set(24, &[1, 2]), &c), 2);
        let c = DiffSet::new(set(23, &[1, 2, 3]));
        let a = set(24, &[2, 3, 4]);
        assert_eq!(count_structure(&Structure::X4 { a: 1, a2: 5, i: Interval::new(2, 4) }, &a, &c), 2);
    }

    #[test]
    fn x3_equals_admissible() {
        let mut rng = SplitRng::new(8);
        let sys = IntervalSystem::new(96, 4, 16).unwrap();
        for _ in 0..500 {
            let a = LabelSet::from_iter_with_max(96, (1..=96).filter(|_| rng.bernoulli(0.5)));
            let c = DiffSet::new(LabelSet::from_iter_with_max(95, (1..96).filter(|_| rng.bernoulli(0.5))));
            let f = rng.range_inclusive(1, 96);
            let i = random_iv(&sys, &mut rng);
            let adm: Vec<usize> = crate::labeller::admissible(f, i, &a, &c).into_iter().filter(|&x| x != f).collect();
            assert_eq!(count_structure(&Structure::X3 { a: f, i }, &a, &c), adm.len());
        }
    }

    #[test]
    fn full_state_quasi() {
        let sys = IntervalSystem::new(240, 4, 16).unwrap();
        let amb = Ambient::new(240);
        let rep = check_quasi(&amb.a, &amb.c, &sys, 0, 0.05, &QuasiSpec::default(), &mut SplitRng::new(1), &[]);
        assert!(rep.quasi1_max_dev <= 1.0 / 4.0 + 1e-12);
        assert!(rep.quasi2_max_sampled_dev <= 4.0 / 4.0 + 1e-12, "{rep:?}");
        let structures = sample_structures(&amb.a, &sys, &QuasiSpec::default(), &mut SplitRng::new(2), &[]);
        for x in &structures {
            assert!(amb.count(x) <= sys.m);
        }
    }

    #[test]
    fn emptied_interval_shows_in_quasi1() {
        let sys = IntervalSystem::new(240, 4, 16).unwrap();
        let amb = Ambient::new(240);
        let mut c = amb.c.clone();
        for x in 40..44 {
            c.remove(x);
        }
        let q = quasi1_max_dev(&amb.a, &c, &sys);
        assert!(q >= 1.0);
    }

    #[test]
    fn crude_examples() {
        let sys = IntervalSystem::new(24, 2, 4).unwrap();
        let t = crate::tree::Tree::path(3).unwrap();
        let ord = crate::prepare::order_vertices(&t, &[]);
        let mut plan = crate::prepare::assign_intervals(&t, &[], &ord, &sys, &mut SplitRng::new(0));
        plan.interval_of[1] = 0;
        let ce = crude_estimates(&plan, &sys, 1).unwrap();
        let at = |c: usize| ce.p_edge[sys.ie_of_label(c)];
        assert_eq!(at(20), Q::new(1, 2));
        for (k, p) in ce.p_edge.iter().enumerate() {
            if sys.el(0, sys.ie_starts[k]) == Q::from_integer(0) {
                assert_eq!(*p, Q::from_integer(0));
            }
        }
        assert!(ce.p_edge.iter().sum::<Q>() <= Q::from_integer(1));
        assert!(crude_estimates(&plan, &sys, 0).is_err());
    }

    #[test]
    fn crude_struct_bound() {
        let sys = IntervalSystem::new(96, 4, 16).unwrap();
        let amb = Ambient::new(96);
        let t = crate::tree::random_tree(60, &mut SplitRng::new(5)).unwrap();
        let plan = crate::prepare::assign_intervals(
            &t,
            &[],
            &crate::prepare::order_vertices(&t, &[]),
            &sys,
            &mut SplitRng::new(6),
        );
        let mut rng = SplitRng::new(7);
        let cap = Q::new(4 * 4, 16);
        for step in 1..=60 {
            let ce = crude_estimates(&plan, &sys, step).unwrap();
            assert!(ce.p_edge.iter().sum::<Q>() <= Q::from_integer(1));
            for x in sample_structures(&amb.a, &sys, &QuasiSpec { per_kind: 20, recent_labels: 0 }, &mut rng, &[]) {
                assert!(ce.p_struct(&x, &sys, &amb) <= cap);
            }
        }
    }

    #[test]
    fn j_window_full_sets() {
        let sys = IntervalSystem::new(96, 4, 16).unwrap();
        let amb = Ambient::new(96);
        // a ∉ J
        let rep = j_window_check(&amb.a, &amb.c, &sys, 1.0 / 16.0, 90, 91, 50, 0);
        assert_eq!(rep.x3.count, 16);
        assert!(rep.all_inside(), "{rep:?}");
        // a ∈ J shifts the counts by at most one
        let rep = j_window_check(&amb.a, &amb.c, &sys, 1.0 / 16.0, 3, 91, 50, 0);
        assert_eq!(rep.x3.count, 15);
        assert!(rep.x3.inside && rep.x4.inside);
        // X2 target is the pair count at full density
        let rep = j_window_check(&amb.a, &amb.c, &sys, 1.0 / 16.0, 90, 91, sys.j_starts[sys.complement_of(0)] - 1, 0);
        assert_eq!(rep.x2.target, sys.el_count(0, sys.j_starts[sys.complement_of(0)] - 1) as f64);
    }

    #[test]
    fn validation() {
        let sys = IntervalSystem::new(24, 2, 4).unwrap();
        assert!(Structure::X1 { i: Interval::new(1, 2) }.validate(&sys).is_ok());
        assert!(Structure::X1 { i: Interval::new(2, 3) }.validate(&sys).is_err());
        assert!(Structure::X4 { a: 3, a2: 3, i: Interval::new(1, 2) }.validate(&sys).is_err());
        let i = Interval::new(1, 2);
        assert!(Structure::X2 { a: 3, i, c: 1, i2: i }.validate(&sys).is_err());
    }

    fn arb_state() -> impl Strategy<Value = (Vec<bool>, Vec<bool>)> {
        (prop::collection::vec(any::<bool>(), 48), prop::collection::vec(any::<bool>(), 47))
    }

    proptest! {
        #[test]
        fn counts_match_brute_force((am, cm) in arb_state(), f in 1usize..=48, g in 1usize..=48, bi in 0usize..12, bj in 0usize..12, cl in 0usize..48) {
            let a = LabelSet::from_iter_with_max(48, (1..=48).filter(|&x| am[x - 1]));
            let c = DiffSet::new(LabelSet::from_iter_with_max(47, (1..48).filter(|&x| cm[x - 1])));
            let i = Interval::new(1 + 4 * bi, 4 + 4 * bi);
            let i2 = Interval::new(1 + 4 * bj, 4 + 4 * bj);
            let mut xs = vec![Structure::X1 { i }, Structure::X3 { a: f, i }, Structure::X2 { a: f, i, c: cl, i2 }];
            if f != g {
                xs.push(Structure::X4 { a: f, a2: g, i });
            }
            for x in xs {
                prop_assert_eq!(count_structure(&x, &a, &c), brute(&x, &a, &c), "{:?}", x);
            }
        }

        #[test]
        fn single_removal_sensitivity((am, cm) in arb_state(), f in 1usize..=48, g in 1usize..=48, bi in 0usize..12, bj in 0usize..12, cl in 1usize..48, drop_a in 1usize..=48, drop_c in 1usize..48) {
            prop_assume!(f != g && bi != bj);
            let a = LabelSet::from_iter_with_max(48, (1..=48).filter(|&x| am[x - 1]));
            let c = DiffSet::new(LabelSet::from_iter_with_max(47, (1..48).filter(|&x| cm[x - 1])));
            let i = Interval::new(1 + 4 * bi, 4 + 4 * bi);
            let i2 = Interval::new(1 + 4 * bj, 4 + 4 * bj);
            let mut a2 = a.clone();
            a2.remove(drop_a);
            let mut c2 = c.clone();
            c2.remove(drop_c);
            for (x, cap_c) in [
                (Structure::X3 { a: f, i }, 2),
                (Structure::X2 { a: f, i, c: cl, i2 }, 2),
                (Structure::X4 { a: f, a2: g, i }, 4),
            ] {
                let base = count_structure(&x, &a, &c);
                // the slots are intervals not containing the partner label, so
                // a vertex label completes at most one counted configuration
                prop_assert!(base.abs_diff(count_structure(&x, &a2, &c)) <= 1);
                prop_assert!(base.abs_diff(count_structure(&x, &a, &c2)) <= cap_c);
            }
        }
    }
}

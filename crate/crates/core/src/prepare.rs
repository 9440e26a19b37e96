//! Preprocessing: cut the tree into small components, order the vertices so
//! each component is contiguous, two-colour, and hand every vertex an
//! interval `J(v)` so that the endpoints of every kept edge receive
//! complementary intervals.

use std::collections::{HashSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::intervals::IntervalSystem;
use crate::params::{Params, Q};
use crate::rng::SplitRng;
use crate::tree::{Tree, degree_stats};

fn norm(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

/// Edge set `R` whose removal leaves components of order at most `k`.
///
/// The tree is rooted at its smallest-index leaf. Repeatedly walk from the
/// root towards the child with the largest subtree (ties to the smaller
/// index) until reaching a vertex whose subtree has at most `k` vertices, and
/// cut the edge above it. The root stays in the remaining part, so subtree
/// sizes are updated along the walked path only.
///
/// Requires `k ≥ 2` and `Δ(T) ≤ ε·k/4`; then every cut removes more than
/// `k/Δ ≥ 4/ε` vertices and `|R| ≤ ε·n/4`.
pub fn cut_tree(t: &Tree, eps: Q, k: usize) -> Result<Vec<(usize, usize)>> {
    if k < 2 {
        return Err(Error::Precondition(format!("component threshold k = {k} must be at least 2")));
    }
    let delta = degree_stats(t).max_degree;
    if Q::from_integer(4 * delta as i128) > eps * Q::from_integer(k as i128) {
        return Err(Error::Precondition(format!(
            "max degree {delta} exceeds eps*k/4 = {}",
            eps * Q::from_integer(k as i128) / Q::from_integer(4)
        )));
    }
    let n = t.n();
    let root = t.smallest_leaf();
    let order = t.bfs_order(root);
    let mut parent = vec![0usize; n + 1];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for &u in &order {
        for &w in t.neighbors(u) {
            if w != parent[u] {
                parent[w] = u;
                children[u].push(w);
            }
        }
    }
    let mut size = vec![1usize; n + 1];
    for &u in order.iter().rev() {
        if u != root {
            size[parent[u]] += size[u];
        }
    }
    let mut cut = Vec::new();
    let mut path = Vec::new();
    while size[root] > k {
        path.clear();
        let mut v = root;
        loop {
            path.push(v);
            // children are ascending, so a strict comparison keeps the smaller index on ties
            let mut best = 0;
            for &c in &children[v] {
                if best == 0 || size[c] > size[best] {
                    best = c;
                }
            }
            if size[best] <= k {
                let removed = size[best];
                children[v].retain(|&c| c != best);
                cut.push(norm(v, best));
                for &p in &path {
                    size[p] -= removed;
                }
                break;
            }
            v = best;
        }
    }
    Ok(cut)
}

/// Component id per vertex (index 0 unused) of `T − R`, numbered in order of
/// first appearance along `order`.
pub fn components(t: &Tree, removed: &[(usize, usize)], order: &[usize]) -> Vec<usize> {
    let r: HashSet<(usize, usize)> = removed.iter().map(|&(u, v)| norm(u, v)).collect();
    let mut comp = vec![usize::MAX; t.n() + 1];
    let mut next = 0;
    for &s in order {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = next;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &w in t.neighbors(u) {
                if comp[w] == usize::MAX && !r.contains(&norm(u, w)) {
                    comp[w] = next;
                    q.push_back(w);
                }
            }
        }
        next += 1;
    }
    comp[0] = 0;
    comp
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ordering {
    /// `order[i]` is `v_{i+1}`.
    pub order: Vec<usize>,
    /// `parent[i]` is the position of `prt(v_{i+1})`; `None` for `v_1`.
    pub parent: Vec<Option<usize>>,
}

/// Breadth-first order from vertex 1 that finishes the current component of
/// `T − R` before crossing an `R` edge. Crossings are queued first-in
/// first-out.
pub fn order_vertices(t: &Tree, removed: &[(usize, usize)]) -> Ordering {
    let n = t.n();
    let r: HashSet<(usize, usize)> = removed.iter().map(|&(u, v)| norm(u, v)).collect();
    let mut pos = vec![usize::MAX; n + 1];
    let mut seen = vec![false; n + 1];
    let mut order = Vec::with_capacity(n);
    let mut parent = Vec::with_capacity(n);
    let mut frontier: VecDeque<(usize, Option<usize>)> = VecDeque::from([(1, None)]);
    seen[1] = true;
    while let Some((s, p)) = frontier.pop_front() {
        let mut local = VecDeque::from([(s, p)]);
        while let Some((u, pu)) = local.pop_front() {
            pos[u] = order.len();
            order.push(u);
            parent.push(pu.map(|x| pos[x]));
            for &w in t.neighbors(u) {
                if seen[w] {
                    continue;
                }
                seen[w] = true;
                if r.contains(&norm(u, w)) {
                    frontier.push_back((w, Some(u)));
                } else {
                    local.push_back((w, Some(u)));
                }
            }
        }
    }
    Ordering { order, parent }
}

/// Output of preprocessing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub order: Vec<usize>,
    pub parent: Vec<Option<usize>>,
    pub removed_edges: Vec<(usize, usize)>,
    /// `J` index per vertex (index 0 unused).
    pub interval_of: Vec<usize>,
    /// `true` = red (even distance from vertex 1); index 0 unused.
    pub coloring: Vec<bool>,
    /// Component id per vertex, numbered along `order`.
    pub component_of: Vec<usize>,
    /// `J(T_k)` index per component.
    pub component_interval: Vec<usize>,
    /// Threshold the cut was made with.
    pub threshold: usize,
}

#[derive(Serialize)]
struct PlanJson<'a> {
    order: &'a [usize],
    parents: Vec<Option<usize>>,
    removed_edges: &'a [(usize, usize)],
    interval_start: Vec<usize>,
}

impl Plan {
    /// `J(v_t)` index for position `i = t − 1`.
    #[inline]
    pub fn interval_at(&self, i: usize) -> usize {
        self.interval_of[self.order[i]]
    }

    pub fn num_components(&self) -> usize {
        self.component_interval.len()
    }

    /// `{"order", "parents" (as vertices), "removed_edges", "interval_start"}`,
    /// the last indexed by vertex − 1.
    pub fn to_json(&self, sys: &IntervalSystem) -> serde_json::Value {
        let view = PlanJson {
            order: &self.order,
            parents: self.parent.iter().map(|p| p.map(|i| self.order[i])).collect(),
            removed_edges: &self.removed_edges,
            interval_start: self.interval_of[1..].iter().map(|&j| sys.j_starts[j]).collect(),
        };
        serde_json::to_value(view).expect("plan serializes")
    }
}

/// One uniform `J` per component; red vertices get it, blue ones its
/// complement.
pub fn assign_intervals(
    t: &Tree,
    removed: &[(usize, usize)],
    ordering: &Ordering,
    sys: &IntervalSystem,
    rng: &mut SplitRng,
) -> Plan {
    let comp = components(t, removed, &ordering.order);
    let ncomp = ordering.order.iter().map(|&v| comp[v]).max().map_or(0, |c| c + 1);
    let component_interval: Vec<usize> = (0..ncomp).map(|_| rng.below(sys.num_j() as u64) as usize).collect();
    let coloring = t.two_coloring();
    let mut interval_of = vec![0; t.n() + 1];
    for v in t.vertices() {
        let j = component_interval[comp[v]];
        interval_of[v] = if coloring[v] { j } else { sys.complement_of(j) };
    }
    Plan {
        order: ordering.order.clone(),
        parent: ordering.parent.clone(),
        removed_edges: removed.iter().map(|&(u, v)| norm(u, v)).collect(),
        interval_of,
        coloring,
        component_of: comp,
        component_interval,
        threshold: 0,
    }
}

/// Cut, order and assign with the parameters' threshold.
pub fn prepare(t: &Tree, p: &Params, sys: &IntervalSystem, rng: &mut SplitRng) -> Result<Plan> {
    let k = p.cut_threshold(t);
    let removed = cut_tree(t, p.eps.0, k)?;
    let ordering = order_vertices(t, &removed);
    let mut plan = assign_intervals(t, &removed, &ordering, sys, rng);
    plan.threshold = k;
    Ok(plan)
}

/// Redraws only the per-component intervals of an existing plan.
pub fn reassign(plan: &Plan, sys: &IntervalSystem, rng: &mut SplitRng) -> Plan {
    let mut out = plan.clone();
    for j in out.component_interval.iter_mut() {
        *j = rng.below(sys.num_j() as u64) as usize;
    }
    for v in 1..out.interval_of.len() {
        let j = out.component_interval[out.component_of[v]];
        out.interval_of[v] = if out.coloring[v] { j } else { sys.complement_of(j) };
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanTolerances {
    pub eps: f64,
    /// Bound on `|i − j|` for kept edges `v_i v_j`.
    pub k: usize,
    /// Allowed deviation of per-`J` counts over index windows, in vertices.
    pub pre4: f64,
}

impl PlanTolerances {
    /// `pre4 = 2k + sqrt(n·k·ln(200·n²·|J|)/2)`: two partial components at
    /// the window ends plus a Hoeffding bound over whole components (each
    /// contributing at most `k`), union-bounded over all windows and all `J`
    /// at total failure probability 1/100.
    pub fn default_for(n: usize, k: usize, num_j: usize, eps: f64) -> Self {
        let (nf, kf) = (n as f64, k as f64);
        let union = (200.0 * nf * nf * num_j as f64).ln();
        Self { eps, k, pre4: 2.0 * kf + (nf * kf * union / 2.0).sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub passed: bool,
    pub witness: Option<String>,
}

impl Check {
    fn pass() -> Self {
        Self { passed: true, witness: None }
    }

    fn fail(w: String) -> Self {
        Self { passed: false, witness: Some(w) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanReport {
    pub pre1: Check,
    pub pre2: Check,
    pub pre3: Check,
    pub pre4: Check,
    /// Largest window deviation observed, in vertices.
    pub pre4_max_dev: f64,
    pub pre5: Check,
}

impl PlanReport {
    pub fn all_passed(&self) -> bool {
        self.pre1.passed && self.pre2.passed && self.pre3.passed && self.pre4.passed && self.pre5.passed
    }
}

/// Largest `|Σ_{i∈S} 1[J(v_i) = J] − |S|/|J||` over index windows `S` and
/// all `J`, with the maximising `J`.
///
/// For each `J` the walk `D(i) = #{hits ≤ i} − i/|J|` decreases between hits,
/// so its maximum is attained just after a hit and its minimum just before
/// one (or at the ends). The window deviation is `max D − min D`.
pub fn pre4_deviation(plan: &Plan, num_j: usize) -> (f64, usize) {
    let step = 1.0 / num_j as f64;
    let mut hits = vec![0usize; num_j];
    let mut hi = vec![0.0f64; num_j];
    let mut lo = vec![0.0f64; num_j];
    for i in 0..plan.order.len() {
        let j = plan.interval_at(i);
        let before = hits[j] as f64 - i as f64 * step;
        lo[j] = lo[j].min(before);
        hits[j] += 1;
        let after = hits[j] as f64 - (i + 1) as f64 * step;
        hi[j] = hi[j].max(after);
    }
    let n = plan.order.len() as f64;
    let mut best = (0.0, 0);
    for j in 0..num_j {
        let end = hits[j] as f64 - n * step;
        let dev = hi[j].max(end) - lo[j].min(end);
        if dev > best.0 {
            best = (dev, j);
        }
    }
    best
}

pub fn check_plan(plan: &Plan, t: &Tree, sys: &IntervalSystem, tol: &PlanTolerances) -> PlanReport {
    let n = t.n();
    let pre1 = if plan.removed_edges.len() as f64 <= tol.eps * n as f64 {
        Check::pass()
    } else {
        Check::fail(format!("|R| = {} > eps*n = {}", plan.removed_edges.len(), tol.eps * n as f64))
    };

    let mut pos = vec![usize::MAX; n + 1];
    let mut pre2 = Check::pass();
    if plan.order.len() != n {
        pre2 = Check::fail(format!("order has {} entries", plan.order.len()));
    } else {
        for (i, &v) in plan.order.iter().enumerate() {
            if v == 0 || v > n || pos[v] != usize::MAX {
                pre2 = Check::fail(format!("order is not a permutation at index {}", i + 1));
                break;
            }
            pos[v] = i;
        }
        if pre2.passed {
            for (i, &v) in plan.order.iter().enumerate().skip(1) {
                let earlier = t.neighbors(v).iter().filter(|&&w| pos[w] < i).count();
                if earlier != 1 {
                    pre2 = Check::fail(format!("v_{} = {v} has {earlier} earlier neighbours", i + 1));
                    break;
                }
            }
        }
    }

    let r: HashSet<(usize, usize)> = plan.removed_edges.iter().copied().collect();
    let kept = || t.edges().iter().filter(|e| !r.contains(e));
    let mut pre3 = Check::pass();
    let mut pre5 = Check::pass();
    for &(u, v) in kept() {
        if pre2.passed && pos[u].abs_diff(pos[v]) > tol.k && pre3.passed {
            pre3 = Check::fail(format!("edge {u}-{v} spans {} positions", pos[u].abs_diff(pos[v])));
        }
        if plan.interval_of[u] != sys.complement_of(plan.interval_of[v]) && pre5.passed {
            pre5 = Check::fail(format!("edge {u}-{v}: intervals are not complementary"));
        }
    }
    if !pre2.passed {
        pre3 = Check::fail("order invalid".into());
    }

    let (dev, j) = if pre2.passed { pre4_deviation(plan, sys.num_j()) } else { (f64::INFINITY, 0) };
    let pre4 = if dev <= tol.pre4 {
        Check::pass()
    } else {
        Check::fail(format!("J starting at {} deviates by {dev:.2} > {:.2}", sys.j_starts[j], tol.pre4))
    };
    PlanReport { pre1, pre2, pre3, pre4, pre4_max_dev: dev, pre5 }
}

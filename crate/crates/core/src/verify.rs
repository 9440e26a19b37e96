//! Labelling verifiers and the cyclic-shift packing construction.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::Tree;

/// A vertex labelling `ψ: V(T) → [m]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labelling {
    tree: Tree,
    labels: Vec<usize>,
    m: usize,
}

impl Labelling {
    /// `labels[i]` is `ψ(i + 1)`. Every label must lie in `1..=m`.
    pub fn new(tree: &Tree, labels: Vec<usize>, m: usize) -> Result<Self> {
        if labels.len() != tree.n() {
            return Err(Error::Config(format!("{} labels for a tree on {} vertices", labels.len(), tree.n())));
        }
        if let Some((i, &l)) = labels.iter().enumerate().find(|&(_, &l)| l == 0 || l > m) {
            return Err(Error::Config(format!("label {l} of vertex {} outside 1..={m}", i + 1)));
        }
        Ok(Self { tree: tree.clone(), labels, m })
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn label(&self, v: usize) -> usize {
        self.labels[v - 1]
    }

    pub fn edge_label(&self, u: usize, v: usize) -> usize {
        self.label(u).abs_diff(self.label(v))
    }

    pub fn to_file(&self) -> LabellingFile {
        LabellingFile { n: self.tree.n(), n_tilde: self.m, labels: self.labels.clone() }
    }
}

/// On-disk form: `{"n": …, "n_tilde": …, "labels": [ψ(1), …, ψ(n)]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabellingFile {
    pub n: usize,
    pub n_tilde: usize,
    pub labels: Vec<usize>,
}

impl LabellingFile {
    pub fn into_labelling(self, tree: &Tree) -> Result<Labelling> {
        if self.n != tree.n() {
            return Err(Error::Config(format!("labelling is for n = {}, tree has {}", self.n, tree.n())));
        }
        Labelling::new(tree, self.labels, self.n_tilde)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    RepeatedVertexLabel { u: usize, v: usize, label: usize },
    RepeatedEdgeLabel { first: (usize, usize), second: (usize, usize), label: usize },
    RepeatedEdgeSum { first: (usize, usize), second: (usize, usize), residue: usize },
    ClassesOverlap { max_low: usize, min_high: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RepeatedVertexLabel { u, v, label } => write!(f, "vertices {u} and {v} share label {label}"),
            Violation::RepeatedEdgeLabel { first, second, label } => {
                write!(f, "edges {first:?} and {second:?} share edge label {label}")
            }
            Violation::RepeatedEdgeSum { first, second, residue } => {
                write!(f, "edges {first:?} and {second:?} share edge sum residue {residue}")
            }
            Violation::ClassesOverlap { max_low, min_high } => {
                write!(f, "low class reaches {max_low}, high class starts at {min_high}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub passed: bool,
    pub violation: Option<Violation>,
}

impl Report {
    fn ok() -> Self {
        Self { passed: true, violation: None }
    }

    fn fail(v: Violation) -> Self {
        Self { passed: false, violation: Some(v) }
    }

    pub fn passed(&self) -> bool {
        self.passed
    }
}

fn injectivity(lab: &Labelling) -> Option<Violation> {
    let mut owner = vec![0usize; lab.m + 1];
    for (i, &l) in lab.labels.iter().enumerate() {
        if owner[l] != 0 {
            return Some(Violation::RepeatedVertexLabel { u: owner[l], v: i + 1, label: l });
        }
        owner[l] = i + 1;
    }
    None
}

/// Injective vertex labels with pairwise distinct `|ψ(x) − ψ(y)|` on edges.
pub fn verify_graceful(lab: &Labelling) -> Report {
    if let Some(v) = injectivity(lab) {
        return Report::fail(v);
    }
    let mut seen: Vec<Option<(usize, usize)>> = vec![None; lab.m];
    for &(u, v) in lab.tree.edges() {
        let d = lab.edge_label(u, v);
        if let Some(first) = seen[d] {
            return Report::fail(Violation::RepeatedEdgeLabel { first, second: (u, v), label: d });
        }
        seen[d] = Some((u, v));
    }
    Report::ok()
}

/// Graceful, and every label of the class marked `true` in `low_class`
/// (indexed by vertex, entry 0 unused) is below every label of the other
/// class. Errors if `low_class` is not a proper two-colouring.
pub fn verify_bipartite_graceful(lab: &Labelling, low_class: &[bool]) -> Result<Report> {
    if low_class.len() != lab.tree.n() + 1 {
        return Err(Error::Config("colouring must have one entry per vertex plus a leading dummy".into()));
    }
    if let Some(&(u, v)) = lab.tree.edges().iter().find(|&&(u, v)| low_class[u] == low_class[v]) {
        return Err(Error::ImproperColoring(u, v));
    }
    let g = verify_graceful(lab);
    if !g.passed {
        return Ok(g);
    }
    let verts = || lab.tree.vertices();
    let max_low = verts().filter(|&v| low_class[v]).map(|v| lab.label(v)).max().unwrap_or(0);
    let min_high = verts().filter(|&v| !low_class[v]).map(|v| lab.label(v)).min().unwrap_or(usize::MAX);
    if max_low < min_high {
        Ok(Report::ok())
    } else {
        Ok(Report::fail(Violation::ClassesOverlap { max_low, min_high }))
    }
}

/// Injective labels whose edge sums `ψ(x) + ψ(y)` are distinct modulo `q`.
pub fn verify_harmonious(lab: &Labelling, q: usize) -> Result<Report> {
    if q == 0 {
        return Err(Error::Config("harmonious modulus must be at least 1".into()));
    }
    if let Some(v) = injectivity(lab) {
        return Ok(Report::fail(v));
    }
    let mut seen: Vec<Option<(usize, usize)>> = vec![None; q];
    for &(u, v) in lab.tree.edges() {
        let r = (lab.label(u) + lab.label(v)) % q;
        if let Some(first) = seen[r] {
            return Ok(Report::fail(Violation::RepeatedEdgeSum { first, second: (u, v), residue: r }));
        }
        seen[r] = Some((u, v));
    }
    Ok(Report::ok())
}

/// Copies of a tree embedded in `K_h` on vertices `0..h`, `h = 2m − 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Packing {
    pub host: usize,
    /// Each copy's edges as `(x, y)` with `x < y`.
    pub copies: Vec<Vec<(usize, usize)>>,
}

impl Packing {
    /// One line per copy: `k: x-y x-y …`.
    pub fn to_text(&self) -> String {
        let mut s = format!("host {}\n", self.host);
        for (k, copy) in self.copies.iter().enumerate() {
            let edges: Vec<String> = copy.iter().map(|(x, y)| format!("{x}-{y}")).collect();
            s.push_str(&format!("{k}: {}\n", edges.join(" ")));
        }
        s
    }
}

/// The `2m − 1` cyclic shifts of `ψ` in `K_{2m−1}`: copy `s` sends vertex `v`
/// to `(ψ(v) + s) mod (2m − 1)`.
pub fn build_cyclic_packing(lab: &Labelling) -> Result<Packing> {
    let r = verify_graceful(lab);
    if !r.passed {
        return Err(Error::NotGraceful(r.violation.map(|v| v.to_string()).unwrap_or_default()));
    }
    let h = 2 * lab.m - 1;
    let copies = (0..h)
        .map(|s| {
            lab.tree
                .edges()
                .iter()
                .map(|&(u, v)| {
                    let (x, y) = ((lab.label(u) + s) % h, (lab.label(v) + s) % h);
                    (x.min(y), x.max(y))
                })
                .collect()
        })
        .collect();
    Ok(Packing { host: h, copies })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PackingReport {
    pub edge_disjoint: bool,
    pub decomposition: bool,
    /// Two copies sharing a host edge (or a loop/out-of-range edge in one copy).
    pub witness: Option<(usize, usize, (usize, usize))>,
    pub total_edges: usize,
}

impl PackingReport {
    pub fn passed(&self) -> bool {
        self.edge_disjoint
    }
}

/// Edge-disjointness via an occupancy table over the `C(h, 2)` host edges.
pub fn verify_packing(p: &Packing) -> PackingReport {
    let h = p.host;
    let slot = |x: usize, y: usize| x * h - x * (x + 1) / 2 + (y - x - 1);
    let mut owner = vec![u32::MAX; h * h.saturating_sub(1) / 2];
    let mut total = 0;
    for (k, copy) in p.copies.iter().enumerate() {
        for &(x, y) in copy {
            total += 1;
            let (x, y) = (x.min(y), x.max(y));
            if x == y || y >= h {
                return PackingReport { edge_disjoint: false, decomposition: false, witness: Some((k, k, (x, y))), total_edges: total };
            }
            let i = slot(x, y);
            if owner[i] != u32::MAX {
                return PackingReport {
                    edge_disjoint: false,
                    decomposition: false,
                    witness: Some((owner[i] as usize, k, (x, y))),
                    total_edges: total,
                };
            }
            owner[i] = k as u32;
        }
    }
    PackingReport { edge_disjoint: true, decomposition: total == owner.len(), witness: None, total_edges: total }
}

//! Labelled trees on `1..=n`, the Prüfer bijection, and uniform sampling.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitRng;

/// Immutable tree on vertices `1..=n`. Edges are stored with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub max_degree: usize,
    pub sum_sq_degree: u64,
}

impl Tree {
    /// Builds and validates a tree: `n - 1` edges, no loops or repeats, connected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewVertices(n));
        }
        let mut norm = Vec::with_capacity(n - 1);
        let mut seen = BTreeSet::new();
        for (u, v) in edges {
            if u == 0 || v == 0 || u > n || v > n {
                return Err(Error::InvalidTree(format!("edge {u}-{v} has an endpoint outside 1..={n}")));
            }
            if u == v {
                return Err(Error::InvalidTree(format!("self-loop at {u}")));
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(Error::InvalidTree(format!("parallel edge {}-{}", e.0, e.1)));
            }
            norm.push(e);
        }
        if norm.len() != n - 1 {
            return Err(Error::InvalidTree(format!("{} edges for {} vertices", norm.len(), n)));
        }
        norm.sort_unstable();
        let mut adj = vec![Vec::new(); n + 1];
        for &(u, v) in &norm {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
        }
        let t = Self { n, edges: norm, adj };
        if t.bfs_order(1).len() != n {
            return Err(Error::InvalidTree("graph is disconnected".into()));
        }
        Ok(t)
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|i| (i, i + 1)))
    }

    /// Star with the given centre; the leaves are all other vertices.
    pub fn star(n: usize, center: usize) -> Result<Self> {
        Self::new(n, (1..=n).filter(|&v| v != center).map(|v| (center, v)))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> {
        1..=self.n
    }

    pub fn smallest_leaf(&self) -> usize {
        self.vertices().find(|&v| self.degree(v) == 1).expect("trees have leaves")
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Breadth-first order from `root`, neighbours in ascending order.
    pub fn bfs_order(&self, root: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n + 1];
        let mut order = Vec::with_capacity(self.n);
        let mut q = VecDeque::from([root]);
        seen[root] = true;
        while let Some(u) = q.pop_front() {
            order.push(u);
            for &w in &self.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    q.push_back(w);
                }
            }
        }
        order
    }

    /// Proper 2-colouring; `true` for vertices at even distance from vertex 1.
    /// Index 0 is unused.
    pub fn two_coloring(&self) -> Vec<bool> {
        let mut color = vec![false; self.n + 1];
        let mut seen = vec![false; self.n + 1];
        let mut q = VecDeque::from([1usize]);
        seen[1] = true;
        color[1] = true;
        while let Some(u) = q.pop_front() {
            for &w in &self.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    color[w] = !color[u];
                    q.push_back(w);
                }
            }
        }
        color
    }

    /// Parses the text format: first line `n`, then `n - 1` lines `u v`.
    /// Blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (ln, first) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
        let n: usize = first
            .parse()
            .map_err(|_| Error::Parse { line: ln, msg: format!("expected vertex count, got {first:?}") })?;
        let mut edges = Vec::new();
        for (ln, l) in lines {
            let mut it = l.split_whitespace();
            let mut next = || -> Result<usize> {
                it.next()
                    .ok_or(Error::Parse { line: ln, msg: "expected two endpoints".into() })?
                    .parse()
                    .map_err(|_| Error::Parse { line: ln, msg: format!("bad endpoint in {l:?}") })
            };
            let (u, v) = (next()?, next()?);
            if it.next().is_some() {
                return Err(Error::Parse { line: ln, msg: "trailing tokens".into() });
            }
            edges.push((u, v));
        }
        Self::new(n, edges)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for &(u, v) in &self.edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    /// Canonical string of the unlabelled tree (AHU encoding rooted at the
    /// centre, or the smaller of the two encodings for a bicentral tree).
    pub fn canonical_form(&self) -> String {
        self.centers()
            .into_iter()
            .map(|c| self.ahu(c, 0))
            .min()
            .expect("a tree has one or two centres")
    }

    fn ahu(&self, v: usize, parent: usize) -> String {
        let mut kids: Vec<String> = self.adj[v]
            .iter()
            .filter(|&&w| w != parent)
            .map(|&w| self.ahu(w, v))
            .collect();
        kids.sort_unstable();
        let mut s = String::from("(");
        for k in kids {
            s.push_str(&k);
        }
        s.push(')');
        s
    }

    fn centers(&self) -> Vec<usize> {
        let mut deg: Vec<usize> = (0..=self.n).map(|v| if v == 0 { 0 } else { self.degree(v) }).collect();
        let mut layer: Vec<usize> = self.vertices().filter(|&v| deg[v] <= 1).collect();
        let mut remaining = self.n;
        while remaining > 2 {
            remaining -= layer.len();
            let mut next = Vec::new();
            for &u in &layer {
                for &w in &self.adj[u] {
                    if deg[w] > 1 {
                        deg[w] -= 1;
                        if deg[w] == 1 {
                            next.push(w);
                        }
                    }
                }
                deg[u] = 0;
            }
            layer = next;
        }
        layer
    }
}

/// Decodes a Prüfer sequence of length `n - 2` into its tree.
pub fn prufer_decode(seq: &[usize], n: usize) -> Result<Tree> {
    if n < 2 {
        return Err(Error::TooFewVertices(n));
    }
    if seq.len() != n - 2 {
        return Err(Error::PruferLength { len: seq.len(), expected: n - 2 });
    }
    let mut degree = vec![1usize; n + 1];
    for (i, &x) in seq.iter().enumerate() {
        if x == 0 || x > n {
            return Err(Error::PruferEntryOutOfRange { position: i, value: x, n });
        }
        degree[x] += 1;
    }
    // Linear-time decoding: `ptr` scans for the smallest leaf, `leaf` may
    // jump back below `ptr` when a code entry becomes a leaf.
    let mut edges = Vec::with_capacity(n - 1);
    let mut ptr = 1;
    while degree[ptr] != 1 {
        ptr += 1;
    }
    let mut leaf = ptr;
    for &x in seq {
        edges.push((leaf, x));
        degree[x] -= 1;
        if degree[x] == 1 && x < ptr {
            leaf = x;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    edges.push((leaf, n));
    Tree::new(n, edges)
}

/// Prüfer code by repeated smallest-leaf elimination.
pub fn prufer_encode(t: &Tree) -> Vec<usize> {
    let n = t.n();
    let mut parent = vec![0usize; n + 1];
    // Root at n so the last survivor is n.
    let order = t.bfs_order(n);
    for &u in &order {
        for &w in t.neighbors(u) {
            if w != parent[u] {
                parent[w] = u;
            }
        }
    }
    let mut degree: Vec<usize> = (0..=n).map(|v| if v == 0 { 0 } else { t.degree(v) }).collect();
    let mut code = Vec::with_capacity(n.saturating_sub(2));
    let mut ptr = 1;
    while degree[ptr] != 1 {
        ptr += 1;
    }
    let mut leaf = ptr;
    for _ in 0..n.saturating_sub(2) {
        let p = parent[leaf];
        code.push(p);
        degree[p] -= 1;
        if degree[p] == 1 && p < ptr {
            leaf = p;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    code
}

/// Uniform labelled tree on `n` vertices via a uniform Prüfer sequence.
pub fn random_tree(n: usize, rng: &mut SplitRng) -> Result<Tree> {
    if n < 2 {
        return Err(Error::TooFewVertices(n));
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.range_inclusive(1, n)).collect();
    prufer_decode(&seq, n)
}

pub fn degree_stats(t: &Tree) -> DegreeStats {
    t.vertices().fold(DegreeStats { max_degree: 0, sum_sq_degree: 0 }, |acc, v| {
        let d = t.degree(v);
        DegreeStats {
            max_degree: acc.max_degree.max(d),
            sum_sq_degree: acc.sum_sq_degree + (d * d) as u64,
        }
    })
}

/// One representative of every isomorphism class of trees on `n` vertices.
///
/// Candidates are produced by hanging a new leaf on every vertex of every
/// class representative on `n - 1` vertices; candidates are then filtered by
/// canonical form. Output is sorted by canonical form.
pub fn nonisomorphic_trees(n: usize) -> Vec<Tree> {
    assert!(n >= 2);
    let mut reps = vec![Tree::path(2).expect("valid")];
    for k in 3..=n {
        let mut seen = std::collections::BTreeMap::new();
        for t in &reps {
            for v in t.vertices() {
                let mut edges = t.edges().to_vec();
                edges.push((v, k));
                let cand = Tree::new(k, edges).expect("leaf extension keeps a tree");
                seen.entry(cand.canonical_form()).or_insert(cand);
            }
        }
        reps = seen.into_values().collect();
    }
    reps
}

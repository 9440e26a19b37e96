//! Exhaustive backtracking search for `m`-graceful labellings of small trees.
//!
//! Vertices are placed in breadth-first order from vertex 1, so each vertex
//! after the first has exactly one already-labelled neighbour and a candidate
//! label is admissible iff the vertex label and the single new edge label are
//! both unused. Used labels live in two `u128` masks.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tree::Tree;
use crate::verify::Labelling;

pub const DEFAULT_CAP: usize = 24;
/// Largest `m` the bitmask state can hold.
pub const MAX_M: usize = 127;

struct Search {
    order: Vec<usize>,
    /// Position of each placed vertex's parent in `order`.
    parent: Vec<usize>,
    m: usize,
}

impl Search {
    fn new(t: &Tree, m: usize, cap: usize) -> Result<Self> {
        let n = t.n();
        if n > cap {
            return Err(Error::CapExceeded { n, cap });
        }
        if m < n {
            return Err(Error::Precondition(format!("m = {m} is below n = {n}")));
        }
        if m > MAX_M {
            return Err(Error::CapExceeded { n: m, cap: MAX_M });
        }
        let order = t.bfs_order(1);
        let mut pos = vec![0; n + 1];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let parent = order
            .iter()
            .map(|&v| t.neighbors(v).iter().map(|&w| pos[w]).min().unwrap_or(0))
            .collect();
        Ok(Self { order, parent, m })
    }

    /// Admissibility of label `l` at position `i` given labels so far.
    #[inline]
    fn admissible(&self, i: usize, l: usize, labels: &[usize], used_v: u128, used_e: u128) -> Option<usize> {
        if used_v >> l & 1 == 1 {
            return None;
        }
        if i == 0 {
            return Some(0);
        }
        let d = l.abs_diff(labels[self.parent[i]]);
        (used_e >> d & 1 == 0).then_some(d)
    }

    fn find(&self, i: usize, labels: &mut [usize], used_v: u128, used_e: u128) -> bool {
        if i == self.order.len() {
            return true;
        }
        for l in 1..=self.m {
            if let Some(d) = self.admissible(i, l, labels, used_v, used_e) {
                labels[i] = l;
                let ue = if i == 0 { used_e } else { used_e | 1 << d };
                if self.find(i + 1, labels, used_v | 1 << l, ue) {
                    return true;
                }
            }
        }
        false
    }

    fn count(&self, i: usize, labels: &mut [usize], used_v: u128, used_e: u128) -> u64 {
        if i == self.order.len() {
            return 1;
        }
        let mut total = 0;
        for l in 1..=self.m {
            if let Some(d) = self.admissible(i, l, labels, used_v, used_e) {
                labels[i] = l;
                let ue = if i == 0 { used_e } else { used_e | 1 << d };
                total += self.count(i + 1, labels, used_v | 1 << l, ue);
            }
        }
        total
    }

    fn to_vertex_labels(&self, by_pos: &[usize]) -> Vec<usize> {
        let mut out = vec![0; by_pos.len()];
        for (i, &v) in self.order.iter().enumerate() {
            out[v - 1] = by_pos[i];
        }
        out
    }
}

/// First `m`-graceful labelling in search order, or `None` if there is none.
pub fn exact_graceful(t: &Tree, m: usize, cap: usize) -> Result<Option<Labelling>> {
    let s = Search::new(t, m, cap)?;
    let n = t.n();
    let found = (1..=m).into_par_iter().find_map_first(|l| {
        let mut labels = vec![0; n];
        labels[0] = l;
        s.find(1, &mut labels, 1 << l, 0).then_some(labels)
    });
    found.map(|by_pos| Labelling::new(t, s.to_vertex_labels(&by_pos), m)).transpose()
}

/// Number of `m`-graceful labellings, counted as maps.
pub fn exact_count(t: &Tree, m: usize, cap: usize) -> Result<u64> {
    let s = Search::new(t, m, cap)?;
    let n = t.n();
    Ok((1..=m)
        .into_par_iter()
        .map(|l| {
            let mut labels = vec![0; n];
            labels[0] = l;
            s.count(1, &mut labels, 1 << l, 0)
        })
        .sum())
}

/// The search's own acceptance predicate applied to a complete labelling.
pub fn feasible(t: &Tree, labels: &[usize], m: usize) -> bool {
    let Ok(s) = Search::new(t, m, MAX_M) else { return false };
    if labels.len() != t.n() || labels.iter().any(|&l| l == 0 || l > m) {
        return false;
    }
    let by_pos: Vec<usize> = s.order.iter().map(|&v| labels[v - 1]).collect();
    let (mut uv, mut ue) = (0u128, 0u128);
    for (i, &l) in by_pos.iter().enumerate() {
        match s.admissible(i, l, &by_pos, uv, ue) {
            Some(d) => {
                uv |= 1 << l;
                if i > 0 {
                    ue |= 1 << d;
                }
            }
            None => return false,
        }
    }
    true
}

/// `ψ(i) = 1, n, 2, n − 1, …` along the path `1 − 2 − ⋯ − n`.
pub fn path_labelling(n: usize) -> Result<Labelling> {
    let t = Tree::path(n)?;
    let labels = (1..=n).map(|i| if i % 2 == 1 { i.div_ceil(2) } else { n + 1 - i / 2 }).collect();
    Labelling::new(&t, labels, n)
}

/// Centre labelled 1, leaves labelled `2..=n` in vertex order.
pub fn star_labelling(n: usize, center: usize) -> Result<Labelling> {
    let t = Tree::star(n, center)?;
    let mut next = 2;
    let labels = (1..=n)
        .map(|v| {
            if v == center {
                1
            } else {
                next += 1;
                next - 1
            }
        })
        .collect();
    Labelling::new(&t, labels, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::verify_graceful;

    #[test]
    fn p4_found() {
        let t = Tree::path(4).unwrap();
        let l = exact_graceful(&t, 4, DEFAULT_CAP).unwrap().unwrap();
        assert!(verify_graceful(&l).passed());
        assert!(feasible(&t, &[1, 4, 2, 3], 4));
    }

    #[test]
    fn counts() {
        let e = Tree::path(2).unwrap();
        assert_eq!(exact_count(&e, 2, DEFAULT_CAP).unwrap(), 2);
        assert_eq!(exact_count(&e, 3, DEFAULT_CAP).unwrap(), 6);
        assert_eq!(exact_count(&Tree::path(3).unwrap(), 3, DEFAULT_CAP).unwrap(), 4);
    }

    #[test]
    fn errors() {
        let t = Tree::path(25).unwrap();
        assert_eq!(exact_graceful(&t, 25, DEFAULT_CAP).unwrap_err(), Error::CapExceeded { n: 25, cap: 24 });
        assert!(exact_count(&Tree::path(4).unwrap(), 3, DEFAULT_CAP).is_err());
    }

    #[test]
    fn count_properties() {
        for n in 2..=6 {
            for t in crate::tree::nonisomorphic_trees(n) {
                let mut prev = 0;
                for m in n..=n + 3 {
                    let c = exact_count(&t, m, DEFAULT_CAP).unwrap();
                    assert_eq!(c % 2, 0, "complement symmetry");
                    assert!(c >= prev);
                    assert_eq!(c > 0, exact_graceful(&t, m, DEFAULT_CAP).unwrap().is_some());
                    prev = c;
                }
            }
        }
    }

    #[test]
    fn complement_of_witness_is_graceful() {
        for t in crate::tree::nonisomorphic_trees(7) {
            let l = exact_graceful(&t, 7, DEFAULT_CAP).unwrap().unwrap();
            let comp: Vec<usize> = l.labels().iter().map(|&x| 8 - x).collect();
            assert!(verify_graceful(&Labelling::new(&t, comp, 7).unwrap()).passed());
        }
    }

    #[test]
    fn verifier_agrees_with_search_predicate() {
        // every map from V(P4) and V(K_{1,3}) into [5]
        for t in [Tree::path(4).unwrap(), Tree::star(4, 2).unwrap()] {
            for code in 0..5usize.pow(4) {
                let labels: Vec<usize> = (0..4).map(|i| code / 5usize.pow(i) % 5 + 1).collect();
                let l = Labelling::new(&t, labels.clone(), 5).unwrap();
                assert_eq!(verify_graceful(&l).passed(), feasible(&t, &labels, 5), "{labels:?}");
            }
        }
    }

    #[test]
    fn known_classes() {
        for n in 2..=50 {
            assert!(verify_graceful(&path_labelling(n).unwrap()).passed());
            assert!(verify_graceful(&star_labelling(n, 1).unwrap()).passed());
            assert!(verify_graceful(&star_labelling(n, n).unwrap()).passed());
        }
    }
}

//! Dynamic subsets of a label range backed by a bitset with per-block
//! popcounts.
//!
//! The labelling loop needs, for a short interval `I`, the elements of
//! `A ∩ I` whose difference to a fixed label is in `C`. Both sides are
//! extracted as word windows and combined with AND, so an interval-restricted
//! count or uniform draw costs `O(|I| / 64)` regardless of density.

use crate::rng::SplitRng;

const WORD: usize = 64;
/// Words per popcount block.
const BLOCK_WORDS: usize = 8;
const BLOCK_BITS: usize = WORD * BLOCK_WORDS;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    /// Largest representable element; the universe is `0..=max`.
    max: usize,
    words: Vec<u64>,
    block_counts: Vec<u32>,
    len: usize,
}

impl LabelSet {
    pub fn empty(max: usize) -> Self {
        let nwords = (max + 1).div_ceil(WORD);
        Self {
            max,
            words: vec![0; nwords],
            block_counts: vec![0; nwords.div_ceil(BLOCK_WORDS)],
            len: 0,
        }
    }

    /// The set `lo..=hi` inside universe `0..=hi`.
    pub fn full_range(lo: usize, hi: usize) -> Self {
        let mut s = Self::empty(hi);
        for x in lo..=hi {
            s.insert(x);
        }
        s
    }

    pub fn from_iter_with_max(max: usize, items: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(max);
        for x in items {
            s.insert(x);
        }
        s
    }

    #[inline]
    pub fn max_element(&self) -> usize {
        self.max
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, x: usize) -> bool {
        x <= self.max && self.words[x / WORD] >> (x % WORD) & 1 == 1
    }

    /// Inserts `x`; returns whether it was absent.
    pub fn insert(&mut self, x: usize) -> bool {
        assert!(x <= self.max, "label {x} outside 0..={}", self.max);
        let (w, b) = (x / WORD, x % WORD);
        if self.words[w] >> b & 1 == 1 {
            return false;
        }
        self.words[w] |= 1 << b;
        self.block_counts[w / BLOCK_WORDS] += 1;
        self.len += 1;
        true
    }

    /// Removes `x`; returns whether it was present.
    pub fn remove(&mut self, x: usize) -> bool {
        if !self.contains(x) {
            return false;
        }
        let (w, b) = (x / WORD, x % WORD);
        self.words[w] &= !(1 << b);
        self.block_counts[w / BLOCK_WORDS] -= 1;
        self.len -= 1;
        true
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| BitIter(w).map(move |b| wi * WORD + b))
    }

    /// `|self ∩ [lo, hi]|`, skipping whole blocks via their popcounts.
    pub fn count_range(&self, lo: usize, hi: usize) -> usize {
        if lo > hi || lo > self.max {
            return 0;
        }
        let hi = hi.min(self.max);
        let mut total = 0usize;
        let mut pos = lo;
        while pos <= hi {
            if pos.is_multiple_of(BLOCK_BITS) && pos + BLOCK_BITS - 1 <= hi {
                total += self.block_counts[pos / BLOCK_BITS] as usize;
                pos += BLOCK_BITS;
            } else {
                let w = pos / WORD;
                let start = pos % WORD;
                let end = (hi - w * WORD).min(WORD - 1);
                total += (self.words[w] & range_mask(start, end)).count_ones() as usize;
                pos = w * WORD + end + 1;
            }
        }
        total
    }

    /// The `k`-th smallest element (0-based) of `self ∩ [lo, hi]`.
    pub fn select_range(&self, lo: usize, hi: usize, mut k: usize) -> Option<usize> {
        if lo > hi || lo > self.max {
            return None;
        }
        let hi = hi.min(self.max);
        let mut pos = lo;
        while pos <= hi {
            if pos.is_multiple_of(BLOCK_BITS) && pos + BLOCK_BITS - 1 <= hi {
                let c = self.block_counts[pos / BLOCK_BITS] as usize;
                if k >= c {
                    k -= c;
                    pos += BLOCK_BITS;
                    continue;
                }
            }
            let w = pos / WORD;
            let start = pos % WORD;
            let end = (hi - w * WORD).min(WORD - 1);
            let bits = self.words[w] & range_mask(start, end);
            let c = bits.count_ones() as usize;
            if k < c {
                return Some(w * WORD + select_in_word(bits, k));
            }
            k -= c;
            pos = w * WORD + end + 1;
        }
        None
    }

    /// Uniform element of `self ∩ [lo, hi]`, or `None` if that set is empty.
    pub fn sample_range(&self, lo: usize, hi: usize, rng: &mut SplitRng) -> Option<usize> {
        let c = self.count_range(lo, hi);
        if c == 0 {
            return None;
        }
        self.select_range(lo, hi, rng.below(c as u64) as usize)
    }

    /// 64 membership bits starting at position `pos` (may be negative or
    /// beyond the universe; such positions read as absent).
    #[inline]
    pub fn bits_at(&self, pos: i64) -> u64 {
        let word = |q: i64| -> u64 {
            if q < 0 {
                0
            } else {
                self.words.get(q as usize).copied().unwrap_or(0)
            }
        };
        if pos >= 0 {
            let (q, r) = (pos >> 6, (pos & 63) as u32);
            if r == 0 {
                word(q)
            } else {
                (word(q) >> r) | (word(q + 1) << (64 - r))
            }
        } else {
            let p = -pos;
            if p >= 64 {
                0
            } else {
                word(0) << p
            }
        }
    }

    /// Writes the membership window `[start, start + len)` into `out`, bit
    /// `i` of the window at word `i / 64`, bit `i % 64`.
    pub fn window_into(&self, start: i64, len: usize, out: &mut Vec<u64>) {
        out.clear();
        let nwords = len.div_ceil(WORD);
        for w in 0..nwords {
            out.push(self.bits_at(start + (w * WORD) as i64));
        }
        trim_tail(out, len);
    }
}

/// Edge-label set kept together with its mirror image, so that the labels
/// `|a - b|` for `b` ranging over an interval can be read as one window
/// whichever side of `a` the interval lies on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffSet {
    fwd: LabelSet,
    /// `mirror` contains `max - x` for each `x` in `fwd`.
    mirror: LabelSet,
}

impl DiffSet {
    pub fn new(set: LabelSet) -> Self {
        let max = set.max_element();
        let mirror = LabelSet::from_iter_with_max(max, set.iter().map(|x| max - x));
        Self { fwd: set, mirror }
    }

    pub fn set(&self) -> &LabelSet {
        &self.fwd
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.fwd.is_empty()
    }

    #[inline]
    pub fn contains(&self, x: usize) -> bool {
        self.fwd.contains(x)
    }

    pub fn remove(&mut self, x: usize) -> bool {
        let max = self.fwd.max_element();
        if self.fwd.remove(x) {
            self.mirror.remove(max - x);
            true
        } else {
            false
        }
    }

    pub fn insert(&mut self, x: usize) -> bool {
        let max = self.fwd.max_element();
        if self.fwd.insert(x) {
            self.mirror.insert(max - x);
            true
        } else {
            false
        }
    }

    /// Window over `b ∈ [lo, lo + len)`: bit `b - lo` is set iff `|a - b|` is
    /// in the set. `b = a` never qualifies because the universe's `0` is
    /// treated as absent by callers that keep `0` out of the set.
    pub fn diff_window_into(&self, a: usize, lo: usize, len: usize, out: &mut Vec<u64>) {
        let max = self.fwd.max_element() as i64;
        let (a, lo) = (a as i64, lo as i64);
        out.clear();
        for w in 0..len.div_ceil(WORD) {
            let off = (w * WORD) as i64;
            // b > a: label b - a, read forward from lo - a
            let above = self.fwd.bits_at(lo - a + off);
            // b < a: label a - b = a - lo - i, read from the mirror at max - a + lo + i
            let below = self.mirror.bits_at(max - a + lo + off);
            out.push(above | below);
        }
        trim_tail(out, len);
    }
}

#[inline]
fn range_mask(start: usize, end: usize) -> u64 {
    debug_assert!(start <= end && end < WORD);
    let upper = if end == WORD - 1 { u64::MAX } else { (1u64 << (end + 1)) - 1 };
    upper & !((1u64 << start) - 1)
}

fn trim_tail(out: &mut [u64], len: usize) {
    let rem = len % WORD;
    if rem != 0 {
        if let Some(last) = out.last_mut() {
            *last &= (1u64 << rem) - 1;
        }
    }
}

/// Position of the `k`-th (0-based) set bit of `w`.
#[inline]
pub fn select_in_word(mut w: u64, k: usize) -> usize {
    for _ in 0..k {
        w &= w - 1;
    }
    w.trailing_zeros() as usize
}

pub fn popcount(words: &[u64]) -> usize {
    words.iter().map(|w| w.count_ones() as usize).sum()
}

/// Uniformly chosen set bit across a multi-word mask.
pub fn sample_mask(words: &[u64], rng: &mut SplitRng) -> Option<usize> {
    let total = popcount(words);
    if total == 0 {
        return None;
    }
    let mut k = rng.below(total as u64) as usize;
    for (i, &w) in words.iter().enumerate() {
        let c = w.count_ones() as usize;
        if k < c {
            return Some(i * WORD + select_in_word(w, k));
        }
        k -= c;
    }
    unreachable!("rank below popcount")
}

pub struct BitIter(pub u64);

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(b)
    }
}

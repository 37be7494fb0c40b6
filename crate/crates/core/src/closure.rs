//! Reflexive-transitive subclass closure stored as dense bit rows.

use alloc::vec;
use alloc::vec::Vec;

use crate::model::{ClassId, KnowledgeBase};

/// Fixed-width square bit matrix, one row per class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitMatrix { n, words, bits: vec![0; n * words] }
    }

    #[inline]
    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.words + col / 64] & (1 << (col % 64)) != 0
    }

    /// Returns true if the bit was newly set.
    #[inline]
    pub fn insert(&mut self, row: usize, col: usize) -> bool {
        let w = &mut self.bits[row * self.words + col / 64];
        let mask = 1 << (col % 64);
        let fresh = *w & mask == 0;
        *w |= mask;
        fresh
    }

    pub fn row(&self, row: usize) -> &[u64] {
        &self.bits[row * self.words..(row + 1) * self.words]
    }

    pub fn iter_row(&self, row: usize) -> impl Iterator<Item = usize> + '_ {
        let n = self.n;
        self.row(row).iter().enumerate().flat_map(move |(wi, &w)| {
            let mut w = w;
            core::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + tz)
            })
            .take_while(move |&c| c < n)
        })
    }

    pub fn count_row(&self, row: usize) -> usize {
        self.row(row).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `row(dst) |= row(src)`; returns true if anything changed.
    pub fn union_rows(&mut self, src: usize, dst: usize) -> bool {
        let mut changed = false;
        for i in 0..self.words {
            let s = self.bits[src * self.words + i];
            let d = &mut self.bits[dst * self.words + i];
            let new = *d | s;
            changed |= new != *d;
            *d = new;
        }
        changed
    }

    pub fn size(&self) -> usize {
        self.n
    }
}

/// For each class, its superclasses (`up`) and subclasses (`down`), both
/// reflexive. Cycles make their members mutual sub- and superclasses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubclassClosure {
    up: BitMatrix,
    down: BitMatrix,
}

impl SubclassClosure {
    pub fn compute(kb: &KnowledgeBase) -> Self {
        let n = kb.class_count();
        let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(child, parent) in kb.subclass_edges() {
            parents[child.index()].push(parent.index());
        }
        let mut up = BitMatrix::new(n);
        let mut stack = Vec::new();
        for start in 0..n {
            up.insert(start, start);
            stack.push(start);
            while let Some(node) = stack.pop() {
                for &p in &parents[node] {
                    if up.insert(start, p) {
                        stack.push(p);
                    }
                }
            }
        }
        let mut down = BitMatrix::new(n);
        for c in 0..n {
            for sup in up.iter_row(c) {
                down.insert(sup, c);
            }
        }
        SubclassClosure { up, down }
    }

    pub fn len(&self) -> usize {
        self.up.size()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `sub ⊑ sup` under the closure.
    #[inline]
    pub fn is_subclass(&self, sub: ClassId, sup: ClassId) -> bool {
        self.up.contains(sub.index(), sup.index())
    }

    pub fn superclasses(&self, c: ClassId) -> impl Iterator<Item = ClassId> + '_ {
        self.up.iter_row(c.index()).map(|i| ClassId(i as u32))
    }

    pub fn subclasses(&self, c: ClassId) -> impl Iterator<Item = ClassId> + '_ {
        self.down.iter_row(c.index()).map(|i| ClassId(i as u32))
    }

    pub fn superclass_count(&self, c: ClassId) -> usize {
        self.up.count_row(c.index())
    }

    pub fn subclass_count(&self, c: ClassId) -> usize {
        self.down.count_row(c.index())
    }

    /// Some class lies below both `a` and `b` (either may itself be it).
    pub fn have_common_subclass(&self, a: ClassId, b: ClassId) -> bool {
        self.down
            .row(a.index())
            .iter()
            .zip(self.down.row(b.index()))
            .any(|(x, y)| x & y != 0)
    }

    /// Pair `(c1, c2)` lies under `(d1, d2)` in the product order, either orientation.
    #[inline]
    pub fn pair_below(&self, c1: ClassId, c2: ClassId, d1: ClassId, d2: ClassId) -> bool {
        (self.is_subclass(c1, d1) && self.is_subclass(c2, d2))
            || (self.is_subclass(c1, d2) && self.is_subclass(c2, d1))
    }
}

//! The canonical pair list: every unordered pair of distinct classes with its
//! disjointness status.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::model::{ClassId, KnowledgeBase};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairLabel {
    Unknown,
    Disjoint,
    NotDisjoint,
    /// Derived disjointness met material evidence of overlap. Terminal.
    Conflict,
}

impl PairLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PairLabel::Unknown => "unknown",
            PairLabel::Disjoint => "disjoint",
            PairLabel::NotDisjoint => "not_disjoint",
            PairLabel::Conflict => "conflict",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    None,
    Asserted,
    InferredDisjoint,
    JointSubclass,
    JointInstance,
    OracleVerdict,
    OraclePropagation,
    ConflictEvidence,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::None => "none",
            Provenance::Asserted => "asserted",
            Provenance::InferredDisjoint => "inferred_disjoint",
            Provenance::JointSubclass => "joint_subclass",
            Provenance::JointInstance => "joint_instance",
            Provenance::OracleVerdict => "oracle_verdict",
            Provenance::OraclePropagation => "oracle_propagation",
            Provenance::ConflictEvidence => "conflict_evidence",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnknownToken(pub alloc::string::String);

impl fmt::Display for UnknownToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown token {:?}", self.0)
    }
}

impl FromStr for PairLabel {
    type Err = UnknownToken;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "unknown" => PairLabel::Unknown,
            "disjoint" => PairLabel::Disjoint,
            "not_disjoint" => PairLabel::NotDisjoint,
            "conflict" => PairLabel::Conflict,
            _ => return Err(UnknownToken(s.into())),
        })
    }
}

impl FromStr for Provenance {
    type Err = UnknownToken;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "none" => Provenance::None,
            "asserted" => Provenance::Asserted,
            "inferred_disjoint" => Provenance::InferredDisjoint,
            "joint_subclass" => Provenance::JointSubclass,
            "joint_instance" => Provenance::JointInstance,
            "oracle_verdict" => Provenance::OracleVerdict,
            "oracle_propagation" => Provenance::OraclePropagation,
            "conflict_evidence" => Provenance::ConflictEvidence,
            _ => return Err(UnknownToken(s.into())),
        })
    }
}

impl fmt::Display for PairLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Index into a [`PairMatrix`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairIdx(pub usize);

/// Labels for every unordered pair of distinct classes.
///
/// Pairs are enumerated by the rank of each class in IRI order, so pair
/// `(a, b)` always has `iri(a) < iri(b)` and index order is canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairMatrix {
    /// rank -> class
    sorted: Vec<ClassId>,
    /// class -> rank
    rank: Vec<u32>,
    labels: Vec<PairLabel>,
    provenance: Vec<Provenance>,
}

impl PairMatrix {
    /// All pairs, all `Unknown`. Fewer than two classes gives an empty matrix.
    pub fn new(kb: &KnowledgeBase) -> Self {
        let mut sorted: Vec<ClassId> = kb.classes().collect();
        sorted.sort_by(|a, b| kb.iri(*a).cmp(kb.iri(*b)));
        let mut rank = vec![0u32; sorted.len()];
        for (r, c) in sorted.iter().enumerate() {
            rank[c.index()] = r as u32;
        }
        let n = sorted.len();
        let len = n * n.saturating_sub(1) / 2;
        PairMatrix {
            sorted,
            rank,
            labels: vec![PairLabel::Unknown; len],
            provenance: vec![Provenance::None; len],
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.sorted.len()
    }

    /// `None` when `a == b`.
    pub fn index_of(&self, a: ClassId, b: ClassId) -> Option<PairIdx> {
        let (ra, rb) = (self.rank[a.index()] as usize, self.rank[b.index()] as usize);
        if ra == rb {
            return None;
        }
        let (i, j) = (ra.min(rb), ra.max(rb));
        let n = self.sorted.len();
        Some(PairIdx(i * (2 * n - i - 1) / 2 + (j - i - 1)))
    }

    /// Canonical `(first, second)` with the IRI of `first` smaller.
    pub fn pair(&self, idx: PairIdx) -> (ClassId, ClassId) {
        let n = self.sorted.len();
        let k = idx.0;
        // last row whose start is <= k
        let (mut lo, mut hi) = (0, n - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if row_start(mid, n) <= k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let i = lo;
        let j = k - row_start(i, n) + i + 1;
        (self.sorted[i], self.sorted[j])
    }

    /// Orders `a`, `b` canonically.
    pub fn canonical(&self, a: ClassId, b: ClassId) -> (ClassId, ClassId) {
        if self.rank[a.index()] <= self.rank[b.index()] {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn label(&self, idx: PairIdx) -> PairLabel {
        self.labels[idx.0]
    }

    pub fn provenance(&self, idx: PairIdx) -> Provenance {
        self.provenance[idx.0]
    }

    pub fn label_of(&self, a: ClassId, b: ClassId) -> Option<PairLabel> {
        self.index_of(a, b).map(|i| self.label(i))
    }

    pub fn set(&mut self, idx: PairIdx, label: PairLabel, provenance: Provenance) {
        self.labels[idx.0] = label;
        self.provenance[idx.0] = provenance;
    }

    pub fn indices(&self) -> impl Iterator<Item = PairIdx> {
        (0..self.labels.len()).map(PairIdx)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ClassId, ClassId, PairLabel, Provenance)> + '_ {
        let n = self.sorted.len();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j))).zip(self.indices()).map(
            move |((i, j), idx)| {
                (self.sorted[i], self.sorted[j], self.labels[idx.0], self.provenance[idx.0])
            },
        )
    }

    pub fn count(&self, label: PairLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn counts(&self) -> LabelCounts {
        let mut c = LabelCounts::default();
        for l in &self.labels {
            match l {
                PairLabel::Unknown => c.unknown += 1,
                PairLabel::Disjoint => c.disjoint += 1,
                PairLabel::NotDisjoint => c.not_disjoint += 1,
                PairLabel::Conflict => c.conflict += 1,
            }
        }
        c
    }

    /// Canonical order of classes (by IRI).
    pub fn sorted_classes(&self) -> &[ClassId] {
        &self.sorted
    }

    /// Pairs currently carrying `label`, in canonical order.
    pub fn pairs_with(&self, label: PairLabel) -> impl Iterator<Item = (ClassId, ClassId)> + '_ {
        self.iter().filter(move |p| p.2 == label).map(|p| (p.0, p.1))
    }
}

fn row_start(i: usize, n: usize) -> usize {
    i * (2 * n - i - 1) / 2
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LabelCounts {
    pub unknown: usize,
    pub disjoint: usize,
    pub not_disjoint: usize,
    pub conflict: usize,
}

//! Resolves the remaining unknown pairs with an oracle.
//!
//! Each verdict is propagated through the subclass closure before the next
//! pair is chosen: a disjoint answer labels every pair below the queried one,
//! a not-disjoint answer labels every pair above it. Labels are never
//! overwritten, so the oracle is only asked about pairs whose answer is not
//! yet implied. A disjoint answer that would contradict a known overlap
//! further down is overridden to not-disjoint.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::closure::SubclassClosure;
use crate::matrix::{PairIdx, PairLabel, PairMatrix, Provenance};
use crate::model::{ClassId, KnowledgeBase};
use crate::oracle::{Disjointness, Oracle, Question, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectionPolicy {
    /// Uniform over the remaining unknown pairs. The draw depends only on the
    /// seed and the matrix state, so an interrupted run resumes identically.
    Random(u64),
    /// First unknown pair in canonical order.
    Lexicographic,
}

fn draw(seed: u64, unknown: usize) -> usize {
    let mixed = seed ^ (unknown as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut rng = ChaCha8Rng::seed_from_u64(mixed);
    rng.random_range(0..unknown)
}

impl SelectionPolicy {
    fn rank(self, unknown: usize) -> usize {
        match self {
            SelectionPolicy::Lexicographic => 0,
            SelectionPolicy::Random(seed) => draw(seed, unknown),
        }
    }
}

/// Picks the next unknown pair by scanning the matrix.
pub fn select_next_unknown(m: &PairMatrix, policy: SelectionPolicy) -> Option<PairIdx> {
    let unknown = m.count(PairLabel::Unknown);
    if unknown == 0 {
        return None;
    }
    let k = policy.rank(unknown);
    m.indices().filter(|&i| m.label(i) == PairLabel::Unknown).nth(k)
}

/// Fenwick tree over pair indices flagging the unknown ones.
#[derive(Clone, Debug)]
struct UnknownIndex {
    tree: Vec<u32>,
    total: usize,
}

impl UnknownIndex {
    fn build(m: &PairMatrix) -> Self {
        let n = m.len();
        let mut tree = vec![0u32; n + 1];
        for i in 0..n {
            if m.label(PairIdx(i)) == PairLabel::Unknown {
                tree[i + 1] += 1;
            }
            let parent = (i + 1) + ((i + 1) & (!(i + 1) + 1));
            if parent <= n {
                tree[parent] += tree[i + 1];
            }
        }
        let total = m.count(PairLabel::Unknown);
        UnknownIndex { tree, total }
    }

    fn remove(&mut self, idx: PairIdx) {
        let mut i = idx.0 + 1;
        while i < self.tree.len() {
            self.tree[i] -= 1;
            i += i & (!i + 1);
        }
        self.total -= 1;
    }

    /// Index of the k-th (0-based) unknown pair.
    fn nth(&self, k: usize) -> PairIdx {
        let n = self.tree.len() - 1;
        let mut pos = 0;
        let mut rem = k as u32;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= rem {
                pos = next;
                rem -= self.tree[next];
            }
            step >>= 1;
        }
        PairIdx(pos)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EnrichStats {
    pub oracle_calls: usize,
    /// Pairs already labeled (including conflicts) before the first query.
    pub initially_labeled: usize,
    pub propagated_disjoint: usize,
    pub propagated_not_disjoint: usize,
    pub overridden_verdicts: usize,
    pub conflicts: usize,
}

/// What one verdict did to the matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepOutcome {
    pub first: ClassId,
    pub second: ClassId,
    pub verdict: Verdict,
    pub effective: Disjointness,
    /// Descendant pair whose overlap forced the override, if any.
    pub override_witness: Option<(ClassId, ClassId)>,
    pub labeled_down: usize,
    pub labeled_up: usize,
    pub unknown_after: usize,
}

#[derive(Debug, PartialEq, Eq)]
pub enum EnrichError<E> {
    Oracle { first: ClassId, second: ClassId, error: E },
    /// A verdict was committed for a pair that is no longer unknown.
    NotUnknown { first: ClassId, second: ClassId, label: PairLabel },
    /// The two classes do not form a pair of the matrix.
    NoSuchPair { first: ClassId, second: ClassId },
}

impl<E: fmt::Display> fmt::Display for EnrichError<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnrichError::Oracle { first, second, error } => {
                write!(f, "oracle failed on pair ({first}, {second}): {error}")
            }
            EnrichError::NotUnknown { first, second, label } => {
                write!(f, "pair ({first}, {second}) is already {label}")
            }
            EnrichError::NoSuchPair { first, second } => {
                write!(f, "({first}, {second}) is not a pair of distinct classes")
            }
        }
    }
}

/// Effective verdict for `idx`, plus the witness when a disjoint answer is
/// overridden because some descendant pair already overlaps.
pub fn guard_verdict(
    m: &PairMatrix,
    cl: &SubclassClosure,
    idx: PairIdx,
    v: Disjointness,
) -> (Disjointness, Option<(ClassId, ClassId)>) {
    if v == Disjointness::NotDisjoint {
        return (v, None);
    }
    let (d1, d2) = m.pair(idx);
    for c1 in cl.subclasses(d1) {
        for c2 in cl.subclasses(d2) {
            let Some(j) = m.index_of(c1, c2) else { continue };
            if matches!(m.label(j), PairLabel::NotDisjoint | PairLabel::Conflict) {
                return (Disjointness::NotDisjoint, Some(m.pair(j)));
            }
        }
    }
    (v, None)
}

/// Labels the queried pair and everything its verdict implies.
///
/// Returns `(labeled_down, labeled_up)`, each counting the queried pair when
/// it was labeled in that direction. `on_label` sees every newly labeled index.
pub fn apply_verdict(
    m: &mut PairMatrix,
    cl: &SubclassClosure,
    idx: PairIdx,
    v: Disjointness,
    mut on_label: impl FnMut(PairIdx),
) -> (usize, usize) {
    debug_assert_eq!(m.label(idx), PairLabel::Unknown);
    let (d1, d2) = m.pair(idx);
    let mut set = |m: &mut PairMatrix, j: PairIdx, label: PairLabel| -> bool {
        if m.label(j) != PairLabel::Unknown {
            debug_assert!(
                label != PairLabel::NotDisjoint || m.label(j) != PairLabel::Disjoint,
                "upward target already disjoint"
            );
            return false;
        }
        let prov = if j == idx { Provenance::OracleVerdict } else { Provenance::OraclePropagation };
        m.set(j, label, prov);
        on_label(j);
        true
    };
    let mut count = 0;
    match v {
        Disjointness::Disjoint => {
            let below2: Vec<ClassId> = cl.subclasses(d2).collect();
            for c1 in cl.subclasses(d1) {
                for &c2 in &below2 {
                    if let Some(j) = m.index_of(c1, c2) {
                        count += set(m, j, PairLabel::Disjoint) as usize;
                    }
                }
            }
            (count, 0)
        }
        Disjointness::NotDisjoint => {
            let above2: Vec<ClassId> = cl.superclasses(d2).collect();
            for c1 in cl.superclasses(d1) {
                for &c2 in &above2 {
                    if let Some(j) = m.index_of(c1, c2) {
                        count += set(m, j, PairLabel::NotDisjoint) as usize;
                    }
                }
            }
            (0, count)
        }
    }
}

/// Step-wise driver of the query loop.
///
/// Callers that persist progress use [`next_pair`](Self::next_pair) and
/// [`commit`](Self::commit) directly; [`run`](Self::run) loops to completion.
pub struct Enricher<'a> {
    closure: &'a SubclassClosure,
    matrix: PairMatrix,
    policy: SelectionPolicy,
    labels: Vec<String>,
    iris: Vec<&'a str>,
    unknown: UnknownIndex,
    stats: EnrichStats,
}

impl<'a> Enricher<'a> {
    /// `matrix` is the output of the entailment passes; conflict pairs are
    /// never queried.
    pub fn new(
        kb: &'a KnowledgeBase,
        closure: &'a SubclassClosure,
        matrix: PairMatrix,
        policy: SelectionPolicy,
    ) -> Self {
        let labels = kb.classes().map(|c| kb.label_of(c)).collect();
        let iris = kb.classes().map(|c| kb.iri(c).as_str()).collect();
        let unknown = UnknownIndex::build(&matrix);
        let stats = EnrichStats {
            initially_labeled: matrix.len() - unknown.total,
            conflicts: matrix.count(PairLabel::Conflict),
            ..EnrichStats::default()
        };
        Enricher { closure, matrix, policy, labels, iris, unknown, stats }
    }

    pub fn matrix(&self) -> &PairMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> PairMatrix {
        self.matrix
    }

    pub fn stats(&self) -> EnrichStats {
        self.stats
    }

    pub fn unknown_count(&self) -> usize {
        self.unknown.total
    }

    pub fn next_pair(&self) -> Option<(ClassId, ClassId)> {
        if self.unknown.total == 0 {
            return None;
        }
        let k = self.policy.rank(self.unknown.total);
        Some(self.matrix.pair(self.unknown.nth(k)))
    }

    /// Question for a pair in canonical order.
    pub fn question(&self, first: ClassId, second: ClassId) -> Question<'_> {
        Question {
            first_iri: self.iris[first.index()],
            second_iri: self.iris[second.index()],
            first_label: &self.labels[first.index()],
            second_label: &self.labels[second.index()],
        }
    }

    /// Guards and applies a verdict for an unknown pair.
    pub fn commit<E>(
        &mut self,
        first: ClassId,
        second: ClassId,
        verdict: Verdict,
    ) -> Result<StepOutcome, EnrichError<E>> {
        let idx = self
            .matrix
            .index_of(first, second)
            .ok_or(EnrichError::NoSuchPair { first, second })?;
        let label = self.matrix.label(idx);
        if label != PairLabel::Unknown {
            return Err(EnrichError::NotUnknown { first, second, label });
        }
        let (effective, witness) = guard_verdict(&self.matrix, self.closure, idx, verdict.value);
        if witness.is_some() {
            self.stats.overridden_verdicts += 1;
        }
        let unknown = &mut self.unknown;
        let (down, up) =
            apply_verdict(&mut self.matrix, self.closure, idx, effective, |j| unknown.remove(j));
        self.stats.oracle_calls += 1;
        match effective {
            Disjointness::Disjoint => self.stats.propagated_disjoint += down - 1,
            Disjointness::NotDisjoint => self.stats.propagated_not_disjoint += up - 1,
        }
        let (first, second) = self.matrix.pair(idx);
        Ok(StepOutcome {
            first,
            second,
            verdict,
            effective,
            override_witness: witness,
            labeled_down: down,
            labeled_up: up,
            unknown_after: self.unknown.total,
        })
    }

    /// Selects, queries and commits one pair. `None` once nothing is unknown.
    pub fn step<O: Oracle>(
        &mut self,
        oracle: &mut O,
    ) -> Option<Result<StepOutcome, EnrichError<O::Error>>> {
        let (first, second) = self.next_pair()?;
        let verdict = match oracle.ask(&self.question(first, second)) {
            Ok(v) => v,
            Err(error) => return Some(Err(EnrichError::Oracle { first, second, error })),
        };
        Some(self.commit(first, second, verdict))
    }

    pub fn run<O: Oracle>(mut self, oracle: &mut O) -> Result<EnrichmentRun, EnrichError<O::Error>> {
        while let Some(outcome) = self.step(oracle) {
            outcome?;
        }
        Ok(EnrichmentRun { policy: self.policy, stats: self.stats, matrix: self.matrix })
    }
}

#[derive(Clone, Debug)]
pub struct EnrichmentRun {
    pub policy: SelectionPolicy,
    pub stats: EnrichStats,
    pub matrix: PairMatrix,
}

impl EnrichmentRun {
    pub fn axioms(&self) -> AxiomSet {
        AxiomSet::from_matrix(&self.matrix)
    }
}

/// Unordered class pairs meant as disjointness axioms, stored `(min, max)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AxiomSet {
    pairs: BTreeSet<(ClassId, ClassId)>,
}

impl AxiomSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_matrix(m: &PairMatrix) -> Self {
        m.pairs_with(PairLabel::Disjoint).collect()
    }

    pub fn insert(&mut self, a: ClassId, b: ClassId) -> bool {
        debug_assert_ne!(a, b);
        self.pairs.insert((a.min(b), a.max(b)))
    }

    pub fn contains(&self, a: ClassId, b: ClassId) -> bool {
        self.pairs.contains(&(a.min(b), a.max(b)))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ClassId, ClassId)> + '_ {
        self.pairs.iter().copied()
    }
}

impl FromIterator<(ClassId, ClassId)> for AxiomSet {
    fn from_iter<T: IntoIterator<Item = (ClassId, ClassId)>>(iter: T) -> Self {
        let mut s = AxiomSet::new();
        for (a, b) in iter {
            s.insert(a, b);
        }
        s
    }
}

/// Keeps only the pairs that are maximal under the product order of the
/// subclass closure. Every dropped pair lies below a kept one, so the result
/// entails the input and no kept pair is redundant. Among mutually
/// equivalent pairs (subclass cycles) the last in set order is kept.
pub fn prune(set: &AxiomSet, cl: &SubclassClosure) -> AxiomSet {
    set.iter()
        .filter(|&(c1, c2)| {
            let p = (c1, c2);
            let above2: Vec<ClassId> = cl.superclasses(c2).collect();
            !cl.superclasses(c1).any(|d1| {
                above2.iter().any(|&d2| {
                    if d1 == d2 || !set.contains(d1, d2) {
                        return false;
                    }
                    let q = (d1.min(d2), d1.max(d2));
                    if q == p {
                        return false;
                    }
                    let equivalent = cl.pair_below(d1, d2, c1, c2);
                    !equivalent || q > p
                })
            })
        })
        .collect()
}

/// Serializes the set as sorted `owl:disjointWith` N-Triples lines.
pub fn emit_axioms(set: &AxiomSet, kb: &KnowledgeBase) -> String {
    let mut lines: Vec<(&str, &str)> = set
        .iter()
        .map(|(a, b)| {
            let (a, b) = (kb.iri(a).as_str(), kb.iri(b).as_str());
            if a <= b { (a, b) } else { (b, a) }
        })
        .collect();
    lines.sort_unstable();
    let mut out = String::new();
    for (a, b) in lines {
        out.push('<');
        out.push_str(a);
        out.push_str("> <");
        out.push_str(crate::ntriples::OWL_DISJOINT_WITH);
        out.push_str("> <");
        out.push_str(b);
        out.push_str("> .\n");
    }
    out
}

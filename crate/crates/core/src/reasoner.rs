//! Labels every pair whose status already follows from the knowledge base.
//!
//! Three passes, in order:
//!
//! 1. asserted disjointness is pushed down to every pair of subclasses
//!    (a class below both sides of an asserted pair is incoherent);
//! 2. two classes sharing a subclass cannot be disjoint, provided every named
//!    class is assumed to have instances;
//! 3. two classes sharing an instance (after closing typings upward) cannot
//!    be disjoint; if they were derived disjoint the knowledge base is
//!    unsatisfiable and a witness is recorded.
//!
//! Contradicting evidence never overwrites: the pair becomes `Conflict`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::closure::SubclassClosure;
use crate::matrix::{PairIdx, PairLabel, PairMatrix, Provenance};
use crate::model::{ClassId, Iri, KnowledgeBase};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReasonerOptions {
    /// Every named class has at least one instance, so a shared subclass is
    /// evidence of overlap. When off the joint-subclass pass is skipped.
    pub assume_nonempty: bool,
}

impl Default for ReasonerOptions {
    fn default() -> Self {
        ReasonerOptions { assume_nonempty: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnsatWitness {
    pub individual: Iri,
    pub first: ClassId,
    pub second: ClassId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConflictRecord {
    pub first: ClassId,
    pub second: ClassId,
    /// How disjointness was derived.
    pub disjoint_by: Provenance,
    /// The overlap evidence that contradicted it.
    pub evidence: Provenance,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Diagnostics {
    pub incoherent_classes: BTreeSet<ClassId>,
    pub unsat_witnesses: Vec<UnsatWitness>,
    pub conflicts: Vec<ConflictRecord>,
}

impl Diagnostics {
    pub fn is_clean(&self) -> bool {
        self.incoherent_classes.is_empty()
            && self.unsat_witnesses.is_empty()
            && self.conflicts.is_empty()
    }
}

/// Per-pass counts of newly labeled pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PassCounts {
    pub disjoint: usize,
    pub joint_subclass: usize,
    pub joint_instance: usize,
}

/// Output of [`derive_entailed_labels`].
#[derive(Clone, Debug)]
pub struct Entailed {
    pub closure: SubclassClosure,
    pub matrix: PairMatrix,
    pub diagnostics: Diagnostics,
    pub counts: PassCounts,
}

/// Marks overlap evidence on `idx`; returns true when a fresh `NotDisjoint`
/// label was written.
fn mark_overlap(
    m: &mut PairMatrix,
    idx: PairIdx,
    evidence: Provenance,
    diag: &mut Diagnostics,
) -> bool {
    match m.label(idx) {
        PairLabel::Unknown => {
            m.set(idx, PairLabel::NotDisjoint, evidence);
            true
        }
        PairLabel::Disjoint => {
            let (first, second) = m.pair(idx);
            diag.conflicts.push(ConflictRecord {
                first,
                second,
                disjoint_by: m.provenance(idx),
                evidence,
            });
            m.set(idx, PairLabel::Conflict, Provenance::ConflictEvidence);
            false
        }
        PairLabel::NotDisjoint | PairLabel::Conflict => false,
    }
}

/// Pushes each asserted disjoint pair down to all pairs of subclasses.
pub fn propagate_asserted_disjointness(
    m: &mut PairMatrix,
    kb: &KnowledgeBase,
    cl: &SubclassClosure,
    diag: &mut Diagnostics,
) -> usize {
    let mut labeled = 0;
    for &(d1, d2) in kb.asserted_disjoint() {
        let asserted = m.index_of(d1, d2);
        let below1: Vec<ClassId> = cl.subclasses(d1).collect();
        let below2: Vec<ClassId> = cl.subclasses(d2).collect();
        for &c1 in &below1 {
            for &c2 in &below2 {
                let Some(idx) = m.index_of(c1, c2) else {
                    diag.incoherent_classes.insert(c1);
                    continue;
                };
                let prov = if Some(idx) == asserted {
                    Provenance::Asserted
                } else {
                    Provenance::InferredDisjoint
                };
                match m.label(idx) {
                    PairLabel::Unknown => {
                        m.set(idx, PairLabel::Disjoint, prov);
                        labeled += 1;
                    }
                    PairLabel::Disjoint if prov == Provenance::Asserted => {
                        m.set(idx, PairLabel::Disjoint, prov);
                    }
                    PairLabel::NotDisjoint => {
                        let (first, second) = m.pair(idx);
                        diag.conflicts.push(ConflictRecord {
                            first,
                            second,
                            disjoint_by: prov,
                            evidence: m.provenance(idx),
                        });
                        m.set(idx, PairLabel::Conflict, Provenance::ConflictEvidence);
                    }
                    PairLabel::Disjoint | PairLabel::Conflict => {}
                }
            }
        }
    }
    labeled
}

/// Any two superclasses of a common class overlap.
pub fn mark_joint_subclass_pairs(
    m: &mut PairMatrix,
    cl: &SubclassClosure,
    diag: &mut Diagnostics,
) -> usize {
    let mut labeled = 0;
    let mut above = Vec::new();
    for s in 0..cl.len() as u32 {
        above.clear();
        above.extend(cl.superclasses(ClassId(s)));
        for (i, &a) in above.iter().enumerate() {
            for &b in &above[i + 1..] {
                let idx = m.index_of(a, b).expect("distinct classes");
                if mark_overlap(m, idx, Provenance::JointSubclass, diag) {
                    labeled += 1;
                }
            }
        }
    }
    labeled
}

/// Classes sharing an instance overlap; typings are closed upward first.
pub fn mark_joint_instance_pairs(
    m: &mut PairMatrix,
    kb: &KnowledgeBase,
    cl: &SubclassClosure,
    diag: &mut Diagnostics,
) -> usize {
    // identical closed type sets need to be visited once; keep the
    // lexicographically first individual as the witness
    let mut groups: BTreeMap<Vec<ClassId>, &Iri> = BTreeMap::new();
    for (individual, types) in kb.instance_types() {
        let closed: BTreeSet<ClassId> = types.iter().flat_map(|&t| cl.superclasses(t)).collect();
        if closed.len() < 2 {
            continue;
        }
        groups.entry(closed.into_iter().collect()).or_insert(individual);
    }
    let mut labeled = 0;
    let mut witnessed: BTreeSet<PairIdx> = BTreeSet::new();
    for (closed, individual) in groups {
        for (i, &a) in closed.iter().enumerate() {
            for &b in &closed[i + 1..] {
                let idx = m.index_of(a, b).expect("distinct classes");
                let was = m.label(idx);
                if mark_overlap(m, idx, Provenance::JointInstance, diag) {
                    labeled += 1;
                }
                let derived_disjoint = matches!(was, PairLabel::Disjoint | PairLabel::Conflict);
                if derived_disjoint && witnessed.insert(idx) {
                    let (first, second) = m.pair(idx);
                    diag.unsat_witnesses.push(UnsatWitness {
                        individual: individual.clone(),
                        first,
                        second,
                    });
                }
            }
        }
    }
    labeled
}

/// Builds the pair matrix and runs the three passes.
pub fn derive_entailed_labels(kb: &KnowledgeBase, opts: ReasonerOptions) -> Entailed {
    let closure = SubclassClosure::compute(kb);
    let mut matrix = PairMatrix::new(kb);
    let mut diagnostics = Diagnostics::default();
    let mut counts = PassCounts {
        disjoint: propagate_asserted_disjointness(&mut matrix, kb, &closure, &mut diagnostics),
        ..PassCounts::default()
    };
    if opts.assume_nonempty {
        counts.joint_subclass = mark_joint_subclass_pairs(&mut matrix, &closure, &mut diagnostics);
    }
    counts.joint_instance =
        mark_joint_instance_pairs(&mut matrix, kb, &closure, &mut diagnostics);
    Entailed { closure, matrix, diagnostics, counts }
}

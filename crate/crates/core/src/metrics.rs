//! Agreement between gold labels and oracle predictions.

use alloc::vec::Vec;
use core::fmt;

use crate::matrix::{PairLabel, PairMatrix};
use crate::model::ClassId;
use crate::oracle::{Disjointness, Oracle, Question};

/// Two-class confusion counts with `Disjoint` as the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn record(&mut self, gold: Disjointness, predicted: Disjointness) {
        match (gold, predicted) {
            (Disjointness::Disjoint, Disjointness::Disjoint) => self.tp += 1,
            (Disjointness::Disjoint, Disjointness::NotDisjoint) => self.fn_ += 1,
            (Disjointness::NotDisjoint, Disjointness::Disjoint) => self.fp += 1,
            (Disjointness::NotDisjoint, Disjointness::NotDisjoint) => self.tn += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.fp + self.tn
    }

    /// Same counts with `NotDisjoint` as the positive class.
    pub fn swapped(&self) -> Self {
        ConfusionCounts { tp: self.tn, fn_: self.fp, fp: self.fn_, tn: self.tp }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MissingPrediction {
    pub first: ClassId,
    pub second: ClassId,
}

impl fmt::Display for MissingPrediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "no prediction for gold pair ({}, {})", self.first, self.second)
    }
}

/// Counts over gold pairs labeled `Disjoint` or `NotDisjoint`; others are skipped.
pub fn confusion(
    gold: &PairMatrix,
    mut predicted: impl FnMut(ClassId, ClassId) -> Option<Disjointness>,
) -> Result<ConfusionCounts, MissingPrediction> {
    let mut c = ConfusionCounts::default();
    for (first, second, label, _) in gold.iter() {
        let g = match label {
            PairLabel::Disjoint => Disjointness::Disjoint,
            PairLabel::NotDisjoint => Disjointness::NotDisjoint,
            PairLabel::Unknown | PairLabel::Conflict => continue,
        };
        let p = predicted(first, second).ok_or(MissingPrediction { first, second })?;
        c.record(g, p);
    }
    Ok(c)
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Undefined ratios are `None`, never zero.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MetricsReport {
    pub dr: Option<f64>,
    pub ndf1: Option<f64>,
    /// F1 with `Disjoint` as the positive class.
    pub f1_disjoint: Option<f64>,
    pub sc: Option<f64>,
    pub accuracy: Option<f64>,
    pub counts: ConfusionCounts,
    pub n_pairs: u64,
    pub n_sc_pairs: u64,
}

pub fn metrics(c: ConfusionCounts) -> MetricsReport {
    MetricsReport {
        dr: ratio(c.tp, c.tp + c.fn_),
        f1_disjoint: ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_),
        ndf1: ratio(2 * c.tn, 2 * c.tn + c.fn_ + c.fp),
        accuracy: ratio(c.tp + c.tn, c.total()),
        sc: None,
        counts: c,
        n_pairs: c.total(),
        n_sc_pairs: 0,
    }
}

/// Recall of the `NotDisjoint` class.
pub fn not_disjoint_recall(c: ConfusionCounts) -> Option<f64> {
    ratio(c.tn, c.tn + c.fp)
}

/// Outcome of asking both orders of a set of pairs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SymmetryOutcome {
    pub agreeing: u64,
    pub asked: u64,
    /// `(forward, backward)` effective verdicts per pair, in input order.
    pub verdicts: Vec<(Disjointness, Disjointness)>,
}

impl SymmetryOutcome {
    pub fn sc(&self) -> Option<f64> {
        ratio(self.agreeing, self.asked)
    }
}

/// Asks every pair as `(a, b)` and `(b, a)`; the score is the fraction of
/// pairs whose two answers agree. On failure the partial outcome is returned
/// alongside the error.
pub fn symmetric_consistency<O: Oracle>(
    questions: &[Question<'_>],
    oracle: &mut O,
) -> Result<SymmetryOutcome, (SymmetryOutcome, O::Error)> {
    let mut out = SymmetryOutcome::default();
    for q in questions {
        let fwd = match oracle.ask(q) {
            Ok(v) => v.value,
            Err(e) => return Err((out, e)),
        };
        let back = match oracle.ask(&q.swapped()) {
            Ok(v) => v.value,
            Err(e) => return Err((out, e)),
        };
        out.asked += 1;
        if fwd == back {
            out.agreeing += 1;
        }
        out.verdicts.push((fwd, back));
    }
    Ok(out)
}

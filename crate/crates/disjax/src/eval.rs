//! Scores an oracle against gold pair labels.

use std::collections::HashMap;
use std::path::Path;

use disjax_core::{
    confusion, metrics, symmetric_consistency, ClassId, KnowledgeBase, MetricsReport, Oracle,
    PairLabel, PairMatrix, PromptSpec, Question,
};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::formats::{matrix_from_rows, read_pair_rows};

/// Gold labels placed on `kb`; IRIs missing from it are added as bare classes.
pub fn load_gold(path: &Path, mut kb: KnowledgeBase) -> Result<(KnowledgeBase, PairMatrix)> {
    let rows = read_pair_rows(path)?;
    for row in &rows {
        for iri in [&row.class_a, &row.class_b] {
            if kb.lookup(iri).is_none() {
                kb.intern_str(iri).map_err(|e| Error::Format {
                    path: path.to_path_buf(),
                    line: row.line,
                    message: format!("{iri}: {e}"),
                })?;
            }
        }
    }
    let gold = matrix_from_rows(&rows, &kb, path)?;
    Ok((kb, gold))
}

/// Canonical-order verdicts give the confusion counts; both orders give SC.
pub fn evaluate<O>(kb: &KnowledgeBase, gold: &PairMatrix, oracle: &mut O) -> Result<MetricsReport>
where
    O: Oracle,
    O::Error: Into<Error>,
{
    let pairs: Vec<(ClassId, ClassId)> = gold
        .iter()
        .filter(|(_, _, l, _)| matches!(l, PairLabel::Disjoint | PairLabel::NotDisjoint))
        .map(|(a, b, _, _)| (a, b))
        .collect();
    if pairs.is_empty() {
        return Err(Error::Usage("no gold pairs".into()));
    }
    let labels: Vec<String> = kb.classes().map(|c| kb.label_of(c)).collect();
    let questions: Vec<Question<'_>> = pairs
        .iter()
        .map(|&(a, b)| Question {
            first_iri: kb.iri(a).as_str(),
            second_iri: kb.iri(b).as_str(),
            first_label: &labels[a.index()],
            second_label: &labels[b.index()],
        })
        .collect();
    let outcome = symmetric_consistency(&questions, oracle).map_err(|(partial, e)| {
        log::error!("evaluation stopped after {} of {} pairs", partial.asked, pairs.len());
        e.into()
    })?;
    let predicted: HashMap<(ClassId, ClassId), _> =
        pairs.iter().zip(&outcome.verdicts).map(|(&p, &(fwd, _))| (p, fwd)).collect();
    let counts = confusion(gold, |a, b| predicted.get(&(a, b)).copied())
        .map_err(|e| Error::Invariant(e.to_string()))?;
    let mut report = metrics(counts);
    report.sc = outcome.sc();
    report.n_sc_pairs = outcome.asked;
    Ok(report)
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |x| format!("{x:.4}"))
}

/// `model prompt qa dr ndf1 f1 sc accuracy`, tab-separated.
pub fn tsv_row(model: &str, spec: PromptSpec, r: &MetricsReport) -> String {
    let mut cols = vec![model.to_string(), spec.strategy.as_str().into(), spec.qa_mode.as_str().into()];
    cols.extend([r.dr, r.ndf1, r.f1_disjoint, r.sc, r.accuracy].map(cell));
    cols.join("\t")
}

pub fn report_json(model: &str, spec: PromptSpec, r: &MetricsReport) -> Value {
    let c = r.counts;
    json!({
        "model": model,
        "prompt": spec.strategy.as_str(),
        "qa": spec.qa_mode.as_str(),
        "dr": r.dr,
        "ndf1": r.ndf1,
        "f1_disjoint": r.f1_disjoint,
        "sc": r.sc,
        "accuracy": r.accuracy,
        "counts": {"tp": c.tp, "fn": c.fn_, "fp": c.fp, "tn": c.tn},
        "n_pairs": r.n_pairs,
        "n_sc_pairs": r.n_sc_pairs,
    })
}

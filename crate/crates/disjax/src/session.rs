//! Resumable enrichment runs backed by an append-only event log.
//!
//! Every committed verdict is appended to `events.jsonl` before the next pair
//! is selected. On restart the log is replayed onto the entailed matrix, which
//! reproduces the exact state reached before the interruption because pair
//! selection depends only on the seed and the matrix.

use std::fs;
use std::path::{Path, PathBuf};

use disjax_core::{
    emit_axioms, AxiomSet, ClassId, Disjointness, EnrichError, EnrichStats, Enricher, Entailed,
    KnowledgeBase, Oracle, PairMatrix, SelectionPolicy, StepOutcome, Verdict,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::formats::{matrix_tsv, write_atomic, write_json};
use crate::transcript::{append_line, open_append, read_jsonl};

pub const EVENTS_FILE: &str = "events.jsonl";
pub const FINAL_MATRIX_FILE: &str = "final_matrix.tsv";
pub const AXIOMS_FILE: &str = "axioms.nt";
pub const STATS_FILE: &str = "enrich_stats.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub step: usize,
    pub first: String,
    pub second: String,
    pub raw_verdict: String,
    pub raw_response: String,
    pub ambiguous_retries: u32,
    pub fallback: bool,
    pub effective_verdict: String,
    pub override_witness: Option<(String, String)>,
    pub labeled_down: usize,
    pub labeled_up: usize,
    pub unknown_after: usize,
}

impl EventRecord {
    fn new(step: usize, o: &StepOutcome, kb: &KnowledgeBase) -> Self {
        let iri = |c: ClassId| kb.iri(c).as_str().to_string();
        EventRecord {
            step,
            first: iri(o.first),
            second: iri(o.second),
            raw_verdict: o.verdict.value.as_str().into(),
            raw_response: o.verdict.raw_response.clone(),
            ambiguous_retries: o.verdict.ambiguous_retries,
            fallback: o.verdict.fallback,
            effective_verdict: o.effective.as_str().into(),
            override_witness: o.override_witness.map(|(a, b)| (iri(a), iri(b))),
            labeled_down: o.labeled_down,
            labeled_up: o.labeled_up,
            unknown_after: o.unknown_after,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionOutcome {
    pub stats: EnrichStats,
    /// Verdicts restored from the event log.
    pub replayed: usize,
    /// Verdicts obtained from the oracle in this invocation.
    pub fresh: usize,
    pub unknown_left: usize,
    /// Disjoint pairs in the final matrix; `None` while the run is incomplete.
    pub axioms: Option<usize>,
}

impl SessionOutcome {
    pub fn complete(&self) -> bool {
        self.unknown_left == 0
    }
}

/// Enrichment state of one output directory.
pub struct Session<'a> {
    kb: &'a KnowledgeBase,
    dir: PathBuf,
    enricher: Enricher<'a>,
    events: fs::File,
    replayed: usize,
}

impl<'a> Session<'a> {
    /// Opens `dir`, replaying any verdicts already logged there.
    pub fn open(
        kb: &'a KnowledgeBase,
        entailed: &'a Entailed,
        policy: SelectionPolicy,
        dir: &Path,
    ) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join(EVENTS_FILE);
        let (log, len) = read_jsonl::<EventRecord>(&path)?;
        let mut enricher =
            Enricher::new(kb, &entailed.closure, entailed.matrix.clone(), policy);
        for (i, ev) in log.iter().enumerate() {
            replay(&mut enricher, kb, ev).map_err(|message| Error::Format {
                path: path.clone(),
                line: i + 1,
                message,
            })?;
        }
        if !log.is_empty() {
            log::info!("resumed {} verdicts from {}", log.len(), path.display());
        }
        let events = open_append(&path, len)?;
        Ok(Session { kb, dir: dir.to_path_buf(), enricher, events, replayed: log.len() })
    }

    pub fn matrix(&self) -> &PairMatrix {
        self.enricher.matrix()
    }

    pub fn unknown_count(&self) -> usize {
        self.enricher.unknown_count()
    }

    /// Queries until nothing is unknown or `limit` fresh verdicts were logged.
    pub fn run<O>(&mut self, oracle: &mut O, limit: Option<usize>) -> Result<SessionOutcome>
    where
        O: Oracle,
        O::Error: Into<Error>,
    {
        let mut fresh = 0;
        while limit.is_none_or(|l| fresh < l) {
            let Some(step) = self.enricher.step(oracle) else { break };
            let outcome = step.map_err(|e| match e {
                EnrichError::Oracle { error, .. } => error.into(),
                EnrichError::NotUnknown { first, second, label } => {
                    Error::Invariant(format!("selected pair ({first}, {second}) is already {label}"))
                }
                EnrichError::NoSuchPair { first, second } => {
                    Error::Invariant(format!("selected ({first}, {second}) is not a pair"))
                }
            })?;
            let step_no = self.replayed + fresh + 1;
            append_line(&mut self.events, &EventRecord::new(step_no, &outcome, self.kb))?;
            fresh += 1;
            log::debug!(
                "step {step_no}: {} / {} -> {}",
                self.kb.iri(outcome.first),
                self.kb.iri(outcome.second),
                outcome.effective.as_str()
            );
        }
        let unknown_left = self.enricher.unknown_count();
        let axioms = if unknown_left == 0 { Some(self.finish()?) } else { None };
        Ok(SessionOutcome { stats: self.enricher.stats(), replayed: self.replayed, fresh, unknown_left, axioms })
    }

    fn finish(&self) -> Result<usize> {
        let m = self.enricher.matrix();
        write_atomic(&self.dir.join(FINAL_MATRIX_FILE), matrix_tsv(m, self.kb).as_bytes())?;
        let set = AxiomSet::from_matrix(m);
        write_atomic(&self.dir.join(AXIOMS_FILE), emit_axioms(&set, self.kb).as_bytes())?;
        let s = self.enricher.stats();
        write_json(
            &self.dir.join(STATS_FILE),
            &json!({
                "oracle_calls": s.oracle_calls,
                "initially_labeled": s.initially_labeled,
                "propagated_disjoint": s.propagated_disjoint,
                "propagated_not_disjoint": s.propagated_not_disjoint,
                "overridden_verdicts": s.overridden_verdicts,
                "conflicts": s.conflicts,
                "disjoint_pairs": set.len(),
            }),
        )?;
        Ok(set.len())
    }
}

fn replay(enricher: &mut Enricher<'_>, kb: &KnowledgeBase, ev: &EventRecord) -> Result<(), String> {
    let class = |iri: &str| kb.lookup(iri).ok_or_else(|| format!("unknown class {iri}"));
    let (first, second) = (class(&ev.first)?, class(&ev.second)?);
    if enricher.next_pair() != Some((first, second)) {
        log::warn!("logged pair ({}, {}) differs from the current selection", ev.first, ev.second);
    }
    let value: Disjointness = ev.raw_verdict.parse().map_err(|e| format!("{e}"))?;
    let verdict = Verdict {
        value,
        raw_response: ev.raw_response.clone(),
        ambiguous_retries: ev.ambiguous_retries,
        fallback: ev.fallback,
    };
    let outcome = enricher.commit::<()>(first, second, verdict).map_err(|e| match e {
        EnrichError::NotUnknown { label, .. } => {
            format!("pair ({}, {}) is already {label}", ev.first, ev.second)
        }
        _ => format!("({}, {}) is not a pair", ev.first, ev.second),
    })?;
    if outcome.effective.as_str() != ev.effective_verdict || outcome.unknown_after != ev.unknown_after {
        return Err("log does not match this ontology".into());
    }
    Ok(())
}

//! Reasoning core for enriching a class hierarchy with disjointness axioms.
//!
//! Pair labels that already follow from the knowledge base are derived
//! first ([`reasoner`]); the remaining unknown pairs are settled by a yes/no
//! [`oracle`] whose answers are propagated through the subclass closure
//! ([`enrich`]) so the result never contradicts itself. The final axiom set
//! is pruned to its maximal pairs and predictions can be scored against gold
//! labels ([`metrics`]).
//!
//! The crate is `no_std` and needs only `alloc`. Reading files, talking to a
//! model endpoint and the command-line front end live in the `disjax` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod closure;
pub mod enrich;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod ntriples;
pub mod oracle;
pub mod reasoner;

pub use closure::SubclassClosure;
pub use enrich::{
    apply_verdict, emit_axioms, guard_verdict, prune, select_next_unknown, AxiomSet, EnrichError,
    EnrichStats, Enricher, EnrichmentRun, SelectionPolicy, StepOutcome,
};
pub use matrix::{PairIdx, PairLabel, PairMatrix, Provenance};
pub use metrics::{confusion, metrics, symmetric_consistency, ConfusionCounts, MetricsReport};
pub use model::{ClassId, Iri, IriError, KnowledgeBase};
pub use ntriples::{parse_line, KbBuilder, ParseReport, VocabularyMap};
pub use oracle::{
    parse_verdict, render_prompt, AmbiguityFallback, Disjointness, GoldOracle, Oracle, PromptSpec,
    QaMode, Question, Strategy, Verdict,
};
pub use reasoner::{derive_entailed_labels, Diagnostics, Entailed, ReasonerOptions};

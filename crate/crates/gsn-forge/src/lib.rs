//! Tooling for Goal Structuring Notation (GSN) assurance cases and
//! assurance-case patterns.
//!
//! The crate covers the full loop of pattern-driven assurance-case work:
//!
//! * [`graph`]: the core graph model with elements, relationships, decorators,
//!   pattern annotations, depth computation, and counting.
//! * [`predicate`]: the line-oriented predicate text format (`.gsnp`), a
//!   strict parser with source spans and a canonical serializer.
//! * [`prose`]: the indented prose format (`.gsnt`) used for generated
//!   cases, with strict and lenient parsers plus a canonical renderer.
//! * [`dot`]: Graphviz DOT export.
//! * [`validate`]: the structural rule set R1..R11 over case and pattern
//!   profiles.
//! * [`instantiate`]: deterministic expansion of a pattern into a case
//!   under an explicit [`instantiate::BindingPlan`].
//! * [`metrics`]: text similarity scores (normalized indel match, BLEU,
//!   TF-IDF cosine), Kendall tau-b, and median/stddev aggregation.
//! * [`prompt`]: prompt assembly for the E1..E9 knowledge-ablation grid.
//! * [`gateway`]: chat-completion backends (HTTP and deterministic mock)
//!   with retry, concurrency, and JSON-lines transcripts.
//! * [`runner`]: batch experiment execution, resumable by request digest,
//!   with CSV/JSON/Markdown report emission and leave-one-out rotation.

pub mod dot;
pub mod gateway;
pub mod graph;
pub mod instantiate;
pub mod metrics;
pub mod predicate;
pub mod prompt;
pub mod prose;
pub mod runner;
pub mod validate;

pub use graph::{
    AnnotationKind, CardinalityLabel, CountSummary, Decorator, DepthError, Element, ElementKind,
    GsnGraph, PatternAnnotation, RelationKind, Relationship,
};

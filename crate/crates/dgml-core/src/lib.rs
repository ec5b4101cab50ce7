//! Design-reuse toolkit: UI design modules as structured DGML text
//! documents in a keyword-indexed repository, requirement-driven
//! candidate inference ranked by the design reusable factor, greedy
//! maximum-coverage skeleton composition, and effort accounting.
//!
//! The crate is organized around four parts:
//!
//! - [`model`] / [`parse`] / [`serialize`] / [`validate`] — the document
//!   format: value types, a strict reader with located diagnostics, and
//!   a canonical byte-stable emitter.
//! - [`repo`] — the file-backed store: one canonical `.dgml` file per
//!   module plus a rebuildable keyword index cache, with the reuse and
//!   scoring lifecycle.
//! - [`infer`] — keyword extraction, DRF-ranked search, and greedy
//!   set-cover composition of skeleton designs.
//! - [`effort`] — TED and conventional effort totals and the comparison
//!   and involvement reports.
//!
//! With the default `parallel` feature, repository loading, candidate
//! scoring and greedy rounds fan out over a rayon pool; disabling the
//! feature swaps in sequential loops with identical results.

pub mod effort;
pub mod infer;
pub mod model;
pub mod parse;
pub mod repo;
pub mod serialize;
pub mod validate;

pub use effort::{
    comparison_report, compute_ted, conventional_total, involvement_report,
    ConventionalEffortRecord, DgmlEffortRecord, EffortError, EffortReport, EffortRow, Hours,
    InvolvementRow,
};
pub use infer::{
    accept_skeleton, compose_skeleton, extract_keywords, search, InferError, MatchCandidate,
    RequirementSpec, SkeletonDesign,
};
pub use model::{DesignElement, DesignModule, DgmlDocument, ElementKind, DGML_VERSION};
pub use parse::{parse_dgml, ParseError};
pub use repo::{KeywordIndex, OpenWarning, ReindexReport, RepoError, Repository, SkippedFile};
pub use serialize::serialize_dgml;
pub use validate::{validate, Violation};

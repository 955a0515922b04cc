//! Builds a canonical knowledge base of legal entities out of noisy,
//! partially populated, role-tagged records extracted from contracts.
//!
//! The library is organised as a pipeline:
//!
//! 1. [`entity`] — the domain vocabulary: the seven attribute roles, raw
//!    per-contract observations and canonical consensus records.
//! 2. [`text`] — normalization and the hybrid string similarity combining a
//!    character-level Ratcliff–Obershelp ratio with a token-level Jaccard
//!    index.
//! 3. [`ap`] — exemplar clustering by damped affinity-propagation message
//!    passing, plus an exhaustive oracle for small instances.
//! 4. [`pipeline`] — the two-stage construction: cluster raw records, elect a
//!    consensus value per role, filter weakly supported clusters and assemble
//!    the knowledge base.
//! 5. [`synth`] — seeded generation of ground-truth entities and noisy
//!    observation corpora for benchmarking.
//! 6. [`eval`] — scoring of a generated knowledge base against ground truth
//!    (`%key` / `%all`), bucketed by cluster size.
//!
//! Everything in this crate is deterministic: identical inputs (including
//! seeds) produce bit-identical outputs. All randomness flows through
//! ChaCha8, keyed from caller-supplied seeds. The crate is `no_std`
//! (`alloc` only); IO and serialization live in the companion CLI crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod ap;
pub mod entity;
pub mod eval;
pub mod pipeline;
mod rng;
pub mod synth;
pub mod text;

pub use entity::{
    BasicEntity, Ingestion, LegalEntityRecord, MemberId, RawLegalEntity, Role, RoleConsensus,
    RoleWeights, UncheckedRecord,
};
pub use pipeline::{KnowledgeBase, PipelineConfig, SimMode};

//! Merkle commit-and-open arguments and the three-phase succinct protocol.

pub mod accounting;
pub mod extract;
pub mod hash;
pub mod merkle;
pub mod protocol;
pub mod rs;
pub mod saok;
pub mod wire;

pub use hash::{Digest, HashKind, HashSpec};
pub use merkle::{commit_bytes, merkle_commit, merkle_verify, MerkleCommitment, MerklePath, MerkleRoot};
pub use saok::{catch_probability, saok_run, saok_run_with, CommittedProver, Opening, Relation, SaokProver, SaokTranscript};
pub use extract::{classical_extract, default_budget, ExtractOutcome};
pub use protocol::{run_succinct_protocol, HonestSuccinctProver, SuccinctConfig, SuccinctProver, SuccinctTranscript, VerdictRelation};
pub use accounting::{account, accounting_sweep, fit_log2_squared, AccountingParams, AccountingRow};

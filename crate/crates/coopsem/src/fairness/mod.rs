//! Fairness analyses: statement identities, enabled sets, lasso
//! detection, fairness verdicts, scheduling distances, and the embedding
//! of scheduler runs into the nondeterministic semantics.

pub mod identity;

pub use identity::StmtIdentity;

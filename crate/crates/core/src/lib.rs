//! Verification and search toolkit for quantum codes that correct Pauli
//! exchange errors.
//!
//! Amplitudes and inner products are exact in Q(i, √m) ([`field`]), states
//! are sparse maps over basis strings ([`qstate`]), errors are symbolic
//! ([`errors`]). [`klcheck`] evaluates the error-correction conditions
//! exactly, [`recovery`] builds and tests a syndrome-based recovery in
//! floating point, and [`search`] explores permutation-invariant families.

pub mod codes;
pub mod error;
pub mod errors;
pub mod field;
pub mod klcheck;
pub mod linalg;
pub mod qstate;
pub mod recovery;
pub mod search;

pub use error::{Error, Result};

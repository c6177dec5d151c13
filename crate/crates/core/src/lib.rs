//! Endomorphism rings of ordinary abelian surfaces with maximal real
//! multiplication, computed from class-group relations.

pub mod arith;
pub mod classgroup;
pub mod cm;
pub mod endoring;
pub mod error;
pub mod field;
pub mod ideals;
pub mod lattice;
pub mod io;
pub mod job;
pub mod linalg;
pub mod orders;
pub mod poly;
pub mod relations;
pub mod oracle;
pub mod ring;
pub mod sim;
pub mod textfmt;

pub use error::{Error, Result};

/// Arbitrary-precision integer used by all number-theoretic layers.
pub type Int = num_bigint::BigInt;
/// Exact rational numbers over [`Int`].
pub type Rat = num_rational::BigRational;

//! Reversibility analysis for Hermiticity-preserving, possibly not
//! completely positive, quantum maps.
//!
//! * [`pseudolinalg`]: indefinite-metric linear algebra.
//! * [`superop`]: A-matrix, B-matrix and signed operator-sum representations.
//! * [`qec`]: error-correction conditions, syndromes, recovery and witnesses.
//! * [`equivalence`]: pseudounitary freedom between decompositions.

pub mod equivalence;
pub mod error;
pub mod linalg;
pub mod models;
pub mod pseudolinalg;
pub mod qec;
pub mod random;
pub mod superop;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector, DEFAULT_TOL};
pub use pseudolinalg::Signature;
pub use qec::{analyze, CodeSpace, QecReport, Verdict};
pub use superop::{AMatrix, BMatrix, Sign, SignedOperatorSum, SignedTerm};

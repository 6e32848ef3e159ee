//! Exact arithmetic for Cartier operators on fields of positive characteristic.
//!
//! The crate implements the operator calculus on `F_q[[T]]` and `F_q((T))`:
//! Hasse derivatives, the Cartier families `Δ_{r,m}`, `φ_n`, `ψ_n`, shift
//! operators, the five orthonormal bases of continuous `F_q`-linear functions,
//! their digit extensions to all continuous functions, the `p`-adic analogues
//! on `Z_p`, and Wronskian linear-independence certificates. All computations
//! are exact over truncated series with explicit precision tracking.

pub mod carlitz;
pub mod cli;
pub mod digit;
pub mod error;
pub mod fq;
pub mod linbasis;
pub mod operators;
pub mod padic;
pub mod series;
pub mod verify;
pub mod wronskian;

pub use error::{Error, Result};
pub use fq::{Field, FieldElem};
pub use series::TruncatedLaurent;

//! Computer-assisted proofs that settle which triangular numbers are written
//! with a single repeated decimal digit, and (per block) which are written
//! with a repeated two-digit block.
//!
//! The pipeline: reduce "`T_k` is a repdigit" to a perfect-square condition
//! on `1 + 8 * repdigit`, screen digits by residues, turn each surviving
//! parity class into a generalized Pell equation `x^2 - D y^2 = N`, and rule
//! out the required shape `c * 10^r` of one coordinate with a pair of moduli.
//! Every proof serializes to a plain-text certificate that [`certcheck`]
//! re-verifies from scratch.

pub mod certcheck;
pub mod cli;
pub mod error;
pub mod hensel;
pub mod natarith;
pub mod pell;
pub mod prover;
pub mod residue;

pub use error::{Error, Result};
pub use natarith::{Block, Digit, Int, Natural, Problem};

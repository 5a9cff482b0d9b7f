//! Plain-text proof certificates and an independent checker.
//!
//! [`format::serialize`] and [`format::parse`] define the file format;
//! [`verify::verify`] recomputes every recorded quantity from the equation
//! and the listed bases alone, and treats recorded tables as claims to test.

pub mod format;
pub mod verify;

pub use format::{parse, serialize, ParseError};
pub use verify::{verify, Verdict};

use crate::natarith::{Int, Natural};
use crate::pell::RepresentativeBound;
use crate::prover::CaseSpec;

/// Base solutions are cross-checked by direct search up to this `y`.
pub const BRUTE_FORCE_LIMIT: u64 = 10_000;

/// One solution family and its residue data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyRecord {
    pub x0: Int,
    pub y0: Natural,
    pub period_m1: u64,
    pub period_m2: u64,
    /// Steps `n (mod period_m1)` at which the target coordinate is `0 mod m1`.
    pub index_set_m1: Vec<u64>,
    /// Target coordinate mod `m2` at those steps.
    pub values_m2: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TenPowerRecord {
    pub preperiod: u64,
    pub period: u64,
    /// `{multiplier * 10^r mod m2 : r >= r_start}`.
    pub attained: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallCaseHit {
    /// Zero-based family index.
    pub family: usize,
    /// Zero-based position in the family chain.
    pub step: usize,
    pub other: Natural,
    pub k: Natural,
    pub triangular: Natural,
}

/// Outcome of direct enumeration at one `r` below the threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallCaseRecord {
    pub r: u64,
    pub target: Natural,
    pub hit: Option<SmallCaseHit>,
}

/// No family member has target coordinate `multiplier * 10^r` for
/// `r >= r_start`; the transcript settles `r_first <= r < r_start`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObstructionCertificate {
    pub case: CaseSpec,
    pub unit_u: Natural,
    pub unit_v: Natural,
    pub bound: RepresentativeBound,
    pub brute_force_limit: u64,
    pub r_start: u64,
    pub m1: u64,
    pub m2: u64,
    pub classical: bool,
    pub ten_power: TenPowerRecord,
    pub families: Vec<FamilyRecord>,
    pub small_cases: Vec<SmallCaseRecord>,
}

/// `x^2 - root^2 y^2 = N` has finitely many solutions, all listed; none has
/// the target shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareFormCertificate {
    pub case: CaseSpec,
    pub root: u64,
    /// `(x, y)` pairs sorted by `(y, x)`.
    pub solutions: Vec<(Natural, Natural)>,
}

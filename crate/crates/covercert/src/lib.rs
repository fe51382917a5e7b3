//! Construction and verification of Sierpinski/Riesel witnesses among
//! binomial coefficients.
//!
//! The library builds integers `k` (and sometimes `r`) for which every value
//! of `C(k,r) * a^n + 1` (or `- 1`) is divisible by a small prime drawn from a
//! covering system of exponent congruences, packages the resulting case
//! analysis into a self-contained certificate, and verifies such certificates
//! from scratch using nothing but exact arithmetic.
//!
//! Module layout:
//!
//! * [`modmath`] — arbitrary-precision modular arithmetic, digits, CRT;
//! * [`lucas`] — exact and modular binomial coefficients;
//! * [`polyfield`] — root finding for `C(x,r) - t` over prime fields;
//! * [`factorbase`] — primality, factorization, primitive prime divisors,
//!   and the curated factor table for numbers of the form `2^(2^m) + 1`;
//! * [`coverings`] — covering systems and their primitive-prime decoration;
//! * [`tables`] — the digit tables, pair census, ten-prime assignment and
//!   density counts behind the witness constructions;
//! * [`witness`] — the witness constructions themselves;
//! * [`certify`] — certificate assembly, serialization and the adversarial
//!   verifier.

use std::fmt;

use rug::Integer;

pub mod certify;
pub mod coverings;
pub mod factorbase;
pub mod lucas;
pub mod modmath;
mod par;
pub mod polyfield;
pub mod tables;
pub mod witness;

/// Crate-wide error type. Variant names are stable: the CLI prints them
/// verbatim on failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// `mod_inv` argument shares a factor with the modulus.
    NotInvertible,
    /// A CRT system has no common solution.
    Inconsistent,
    /// `mult_order` arguments are not coprime.
    NotCoprime,
    /// `binom_poly` needs `r < p` so that `r!` is invertible.
    RNotLessThanP,
    /// Root finding on the zero polynomial is undefined.
    ZeroPolynomial,
    /// Factorization gave up; carries the unfactored cofactor.
    BudgetExceeded(Integer),
    /// The order of 2 modulo the argument is not a power of two above 2.
    NotFermatDivisor,
    /// No curated cofactor prime is available for this prime.
    TableMiss,
    /// No residue in `[1,640]` may go unassigned; carries the failing r.
    Unsatisfiable(u64),
    /// Coverage scan refused: lcm of moduli exceeds the configured bound.
    PeriodTooLarge,
    /// No distinct primitive prime assignment exists for the covering.
    NoAssignment,
    /// A two-digit shift needs two distinct digit positions.
    IndicesEqual,
    /// The base-641 digits of r satisfy neither witness condition.
    ConditionUnsatisfied,
    /// The base-a hypothesis fails (a+1 a power of two, or no usable level).
    HypothesisFailed,
    /// A simultaneous-kind witness needs a partitioned covering.
    PartitionMissing,
    /// Certificate or table text that does not parse; carries line and cause.
    Malformed(usize, String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotInvertible => write!(f, "NotInvertible"),
            Error::Inconsistent => write!(f, "Inconsistent"),
            Error::NotCoprime => write!(f, "NotCoprime"),
            Error::RNotLessThanP => write!(f, "RNotLessThanP"),
            Error::ZeroPolynomial => write!(f, "ZeroPolynomial"),
            Error::BudgetExceeded(c) => write!(f, "BudgetExceeded: unfactored cofactor {c}"),
            Error::NotFermatDivisor => write!(f, "NotFermatDivisor"),
            Error::TableMiss => write!(f, "TableMiss"),
            Error::Unsatisfiable(r) => write!(f, "Unsatisfiable: r={r}"),
            Error::PeriodTooLarge => write!(f, "PeriodTooLarge"),
            Error::NoAssignment => write!(f, "NoAssignment"),
            Error::IndicesEqual => write!(f, "IndicesEqual"),
            Error::ConditionUnsatisfied => write!(f, "ConditionUnsatisfied"),
            Error::HypothesisFailed => write!(f, "HypothesisFailed"),
            Error::Malformed(line, what) => write!(f, "MalformedCertificate: line {line}: {what}"),
            Error::PartitionMissing => write!(f, "PartitionMissing"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

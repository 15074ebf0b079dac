//! Exact arithmetic for B-free systems over Z and quadratic rings of integers.
//!
//! A collection `B` of nonzero ideals in a ring of integers `O_K` determines
//! the set of B-free integers (those contained in no member) and its 0/1
//! indicator array `eta`. This crate constructs such systems exactly and
//! verifies their structural properties at desk scale: ideal arithmetic in
//! Hermite normal form, `eta` windows over Folner boxes, periodicity and
//! Toeplitz diagnostics, coset progressions inside the set of multiples,
//! periodic structures, constructive matching shifts, and a Z^2 sublattice
//! toolkit where the ideal theory fails.
//!
//! Everything is integer-exact (`num-bigint`); no floating point, no
//! truncation-based verdicts. Operations that could require unbounded search
//! take explicit effort caps and fail loudly when they are exceeded.
//!
//! The runnable examples under `examples/` walk through each capability; the
//! thin `bfree` binary exposes window generation and the verification suites
//! from the command line.

pub mod arith;
pub mod error;
pub mod essential;
pub mod family;
pub mod hnf;
pub mod progression;
pub mod toeplitz;
pub mod ideal;
pub mod lattice;
pub mod report;
pub mod ring;

pub use arith::FactorBudget;
pub use error::{Error, Result};
pub use family::{lcm_of, BFamily, Cell, EtaWindow, FiniteFamily};
pub use ideal::{coset_avoid, crt, primes_above, Ideal, PrimeFactorization};
pub use ring::{Element, FolnerBox, OmegaKind, RingOfIntegers};

/// Effort caps shared by operations that enumerate or factor.
#[derive(Debug, Clone)]
pub struct Caps {
    pub factor: FactorBudget,
    /// Largest residue system that may be materialized.
    pub residue_cap: u64,
    /// Largest number of filtration stages explored before giving up.
    pub stage_cap: usize,
    /// Generic scan budget (witness searches, return-set scans).
    pub scan_cap: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            factor: FactorBudget::default(),
            residue_cap: 4_000_000,
            stage_cap: 256,
            scan_cap: 1_000_000,
        }
    }
}

/// Crate version, embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

//! Hypothesis checkers for the non-leaf theorems and the certificates they emit.
//!
//! Every check returns a [`Verdict`]. Claims about infinitely many family members
//! are verified on the first `depth` members and otherwise rest on the family's
//! declared guarantees, which the verdict lists as assumptions.

mod guarantees;
mod non_repeating;
mod periodic;
mod repetition;
mod theorems;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::abelian::PrimePower;
use crate::groups::{ExtendedCount, FactorLabel};
use crate::pattern::{Guarantee, PatternError};

pub use non_repeating::check_non_repeating;
pub use periodic::{check_non_periodic, Mode};
pub use repetition::{max_disjoint_deleted_blocks_bound, repeats_finitely, Bound, BoundSource, Summand};
pub use theorems::{check_theorem_a, check_theorem_b, check_theorem_c, Certificate, Hypothesis, Theorem, CONCLUSION};

/// Family members inspected when a check quantifies over an infinite family.
pub const DEFAULT_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CriteriaError {
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("block {0} is trivial; every manifold contains arbitrarily many deleted spheres")]
    TrivialBlock(String),
    #[error("block {block} has dimension {dim} but the manifold has dimension {expected}")]
    DimensionMismatch { block: String, dim: u32, expected: u32 },
    #[error("block {0} is used by the manifold but missing from the catalog")]
    NotInCatalog(String),
    #[error("sampling depth must be positive")]
    ZeroDepth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Certified,
    Refuted,
    UndecidableAtDepth,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Certified => "certified",
            Status::Refuted => "refuted",
            Status::UndecidableAtDepth => "undecidable-at-depth",
        }
    }

    /// Refuted beats undecidable beats certified.
    pub fn combine(self, other: Status) -> Status {
        match (self, other) {
            (Status::Refuted, _) | (_, Status::Refuted) => Status::Refuted,
            (Status::UndecidableAtDepth, _) | (_, Status::UndecidableAtDepth) => Status::UndecidableAtDepth,
            _ => Status::Certified,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A declared fact the verdict relies on but cannot verify.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Assumption {
    /// What the declaration is about, e.g. `family F` or `label G`.
    pub subject: String,
    pub guarantee: String,
    pub statement: String,
}

impl Assumption {
    pub fn family(family: &str, g: Guarantee) -> Self {
        Assumption {
            subject: format!("family {family}"),
            guarantee: g.as_str().to_string(),
            statement: g.statement().to_string(),
        }
    }

    pub fn opaque_label(name: &str) -> Self {
        Assumption {
            subject: format!("label {name}"),
            guarantee: "odd_torsion_generated".to_string(),
            statement: format!("the group {name} is generated by torsion elements of odd order"),
        }
    }
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} declares {}: {}", self.subject, self.guarantee, self.statement)
    }
}

/// Structured evidence attached to a verdict.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    DimensionMismatch { block: String, dim: u32, expected: u32 },
    SharedFactor { left: String, right: String, label: FactorLabel },
    NoDistinguishingSummand { block: String },
    DistinguishingSummand { block: String, r: u32, prime_power: PrimePower },
    SignatureCollision { left: String, right: String, signature: String },
    Usage { block: String, usage: ExtendedCount },
    CountingBound { block: String, bound: Bound },
    OddTorsionObstruction { block: String, label: FactorLabel },
    InfiniteRank { degree: u32, rank: ExtendedCount },
    EvenPrimePower { degree: u32, prime_power: PrimePower, multiplicity: ExtendedCount },
    InfiniteMultiplicity { degree: u32, prime_power: PrimePower },
    FinitelyManyPrimePowers { degree: u32, finite_nonzero: u64 },
    TerminalSetFinite { blocks: Vec<String> },
    NoInfiniteFamily,
    NotAnInfiniteTree { pattern: String },
    GuaranteeViolated { family: String, guarantee: Guarantee, block: String, detail: String },
    GuaranteeMissing { family: String, guarantee: Guarantee },
    Sampled { family: String, members: u64, first_prime: u64, last_prime: u64 },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::DimensionMismatch { block, dim, expected } => {
                write!(f, "{block} has dimension {dim}, expected {expected}")
            }
            Witness::SharedFactor { left, right, label } => {
                write!(f, "{left} and {right} share the free factor {label}")
            }
            Witness::NoDistinguishingSummand { block } => {
                write!(f, "{block} has no prime-power summand absent from every other block")
            }
            Witness::DistinguishingSummand { block, r, prime_power } => {
                write!(f, "{block} is distinguished by Z_{prime_power} in H_{r}")
            }
            Witness::SignatureCollision { left, right, signature } => {
                write!(f, "{left} and {right} are indistinguishable in this model ({signature})")
            }
            Witness::Usage { block, usage } => write!(f, "{block} is used {usage} times"),
            Witness::CountingBound { block, bound } => write!(f, "{block}: {bound}"),
            Witness::OddTorsionObstruction { block, label } => {
                write!(f, "{block} has free factor {label}, which is not generated by torsion elements of odd order")
            }
            Witness::InfiniteRank { degree, rank } => write!(f, "degree {degree} has free rank {rank}"),
            Witness::EvenPrimePower { degree, prime_power, multiplicity } => {
                write!(f, "degree {degree} contains Z_{prime_power} with multiplicity {multiplicity}, an even order")
            }
            Witness::InfiniteMultiplicity { degree, prime_power } => {
                write!(f, "degree {degree} contains Z_{prime_power} with multiplicity ω")
            }
            Witness::FinitelyManyPrimePowers { degree, finite_nonzero } => {
                write!(f, "degree {degree} has only {finite_nonzero} prime powers of finite nonzero multiplicity")
            }
            Witness::TerminalSetFinite { blocks } => {
                write!(
                    f,
                    "only {} blocks are used a finite nonzero number of times: [{}]",
                    blocks.len(),
                    blocks.join(", ")
                )
            }
            Witness::NoInfiniteFamily => f.write_str("the pattern uses no infinite family of blocks"),
            Witness::NotAnInfiniteTree { pattern } => write!(f, "the pattern is not an infinite tree: {pattern}"),
            Witness::GuaranteeViolated { family, guarantee, block, detail } => {
                write!(f, "family {family} violates {guarantee} at {block}: {detail}")
            }
            Witness::GuaranteeMissing { family, guarantee } => {
                write!(f, "family {family} does not declare {guarantee}; no violation found in the sample")
            }
            Witness::Sampled { family, members, first_prime, last_prime } => {
                write!(f, "checked {members} members of {family}, primes {first_prime} to {last_prime}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub witnesses: Vec<Witness>,
    pub assumptions: Vec<Assumption>,
}

impl Verdict {
    pub fn certified(witnesses: Vec<Witness>, assumptions: Vec<Assumption>) -> Self {
        Self::new(Status::Certified, witnesses, assumptions)
    }

    pub fn refuted(witnesses: Vec<Witness>) -> Self {
        Self::new(Status::Refuted, witnesses, Vec::new())
    }

    pub fn undecidable(witnesses: Vec<Witness>) -> Self {
        Self::new(Status::UndecidableAtDepth, witnesses, Vec::new())
    }

    fn new(status: Status, witnesses: Vec<Witness>, mut assumptions: Vec<Assumption>) -> Self {
        assumptions.sort();
        assumptions.dedup();
        Verdict { status, witnesses, assumptions }
    }

    pub fn is_certified(&self) -> bool {
        self.status == Status::Certified
    }
}

/// Accumulates the outcome of several sub-checks: the first refutation wins, then
/// the first undecidable step, and otherwise everything is certified together.
#[derive(Debug, Default)]
pub(crate) struct VerdictBuilder {
    refuted: Vec<Witness>,
    undecidable: Vec<Witness>,
    evidence: Vec<Witness>,
    assumptions: Vec<Assumption>,
}

impl VerdictBuilder {
    pub fn refute(&mut self, w: Witness) {
        self.refuted.push(w);
    }

    pub fn undecided(&mut self, w: Witness) {
        self.undecidable.push(w);
    }

    pub fn evidence(&mut self, w: Witness) {
        self.evidence.push(w);
    }

    pub fn assume(&mut self, a: Assumption) {
        self.assumptions.push(a);
    }

    pub fn is_refuted(&self) -> bool {
        !self.refuted.is_empty()
    }

    pub fn absorb(&mut self, v: Verdict) {
        match v.status {
            Status::Refuted => self.refuted.extend(v.witnesses),
            Status::UndecidableAtDepth => self.undecidable.extend(v.witnesses),
            Status::Certified => {
                self.evidence.extend(v.witnesses);
                self.assumptions.extend(v.assumptions);
            }
        }
    }

    pub fn finish(self) -> Verdict {
        if !self.refuted.is_empty() {
            Verdict::refuted(self.refuted)
        } else if !self.undecidable.is_empty() {
            Verdict::undecidable(self.undecidable)
        } else {
            Verdict::certified(self.evidence, self.assumptions)
        }
    }
}

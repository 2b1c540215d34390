use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::guarantees::Sample;
use super::{CriteriaError, Verdict, VerdictBuilder, Witness};
use crate::blocks::Block;
use crate::pattern::{Guarantee, SumManifold};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Homotopy,
    Homology,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Homotopy => "homotopy",
            Mode::Homology => "homology",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "homotopy" => Ok(Mode::Homotopy),
            "homology" => Ok(Mode::Homology),
            other => Err(format!("unknown mode {other:?}; expected homotopy or homology")),
        }
    }
}

/// `π_k(W)` (or `H_k(W)`) must be a direct sum of cyclic groups of odd prime-power
/// order in which infinitely many prime powers occur with finite nonzero multiplicity.
///
/// Finitely many named blocks can only supply finitely many prime powers, so the
/// infinite part has to come from a family tail and its three guarantees.
pub fn check_non_periodic(w: &SumManifold, k: u32, mode: Mode, depth: usize) -> Result<Verdict, CriteriaError> {
    if depth == 0 {
        return Err(CriteriaError::ZeroDepth);
    }
    let g = match mode {
        Mode::Homotopy => w.homotopy(k)?,
        Mode::Homology => w.homology(k)?,
    };
    let mut out = VerdictBuilder::default();
    if !g.rank().is_zero() {
        out.refute(Witness::InfiniteRank { degree: k, rank: g.rank() });
    }
    for (q, &m) in g.head() {
        if !q.is_odd() {
            out.refute(Witness::EvenPrimePower { degree: k, prime_power: *q, multiplicity: m });
        }
    }
    match g.tail() {
        None => {
            for (q, m) in g.head() {
                if !m.is_finite() {
                    out.refute(Witness::InfiniteMultiplicity { degree: k, prime_power: *q });
                }
            }
            let finite_nonzero = g.head().values().filter(|m| m.is_finite()).count() as u64;
            out.refute(Witness::FinitelyManyPrimePowers { degree: k, finite_nonzero });
        }
        Some(tail) => {
            let named: Vec<Block> = w.used_blocks()?.into_iter().map(|(b, _)| b).collect();
            let sample = Sample::of_tail(tail, depth);
            out.evidence(sample.witness());
            for guarantee in [Guarantee::AllOdd, Guarantee::Distinct, Guarantee::FiniteNonzero] {
                sample.require(guarantee, &named, &mut out);
            }
        }
    }
    Ok(out.finish())
}

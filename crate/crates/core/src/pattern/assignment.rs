use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::catalog::{BlockId, Family};
use crate::groups::ExtendedCount;

/// Order in which family members are laid along the base rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "sequence", rename_all = "snake_case", deny_unknown_fields)]
pub enum PrimeSequence {
    /// The `i`-th family prime, repeated `i` times.
    Triangular,
    /// Each `(prime, count)` in turn, then `then` re-indexed from zero.
    List { entries: Vec<ListEntry>, then: Box<BaseRule> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ListEntry {
    pub prime: u64,
    pub count: u64,
}

/// Block at each position of the base sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseRule {
    Constant { block: String },
    Cycle { blocks: Vec<String> },
    Family(PrimeSequence),
}

impl BaseRule {
    fn validate(&self, family: Option<&Family>) -> Result<(), String> {
        match self {
            BaseRule::Constant { .. } => Ok(()),
            BaseRule::Cycle { blocks } if blocks.is_empty() => Err("cycle rule needs at least one block".into()),
            BaseRule::Cycle { .. } => Ok(()),
            BaseRule::Family(seq) => {
                let family = family.ok_or("family rule without a declared family")?;
                if let PrimeSequence::List { entries, then } = seq {
                    for e in entries {
                        if !family.contains_prime(e.prime) {
                            return Err(format!("{} is not a prime of family {}", e.prime, family.name()));
                        }
                    }
                    then.validate(Some(family))?;
                }
                Ok(())
            }
        }
    }

    fn at(&self, i: u64, family: Option<&Family>) -> BlockId {
        match self {
            BaseRule::Constant { block } => BlockId::Named(block.clone()),
            BaseRule::Cycle { blocks } => BlockId::Named(blocks[(i % blocks.len() as u64) as usize].clone()),
            BaseRule::Family(seq) => {
                let family = family.expect("validated family rule");
                match seq {
                    PrimeSequence::Triangular => family.id(family.prime_at(triangular_index(i))),
                    PrimeSequence::List { entries, then } => {
                        let mut rest = i;
                        for e in entries {
                            if rest < e.count {
                                return family.id(e.prime);
                            }
                            rest -= e.count;
                        }
                        then.at(rest, Some(family))
                    }
                }
            }
        }
    }

    fn named(&self, out: &mut BTreeSet<String>) {
        match self {
            BaseRule::Constant { block } => {
                out.insert(block.clone());
            }
            BaseRule::Cycle { blocks } => out.extend(blocks.iter().cloned()),
            BaseRule::Family(PrimeSequence::List { then, .. }) => then.named(out),
            BaseRule::Family(PrimeSequence::Triangular) => {}
        }
    }

    fn uses_family(&self) -> bool {
        match self {
            BaseRule::Family(PrimeSequence::List { entries, then }) => {
                entries.iter().any(|e| e.count > 0) || then.uses_family()
            }
            BaseRule::Family(PrimeSequence::Triangular) => true,
            _ => false,
        }
    }

    fn family_support_is_infinite(&self) -> bool {
        match self {
            BaseRule::Family(PrimeSequence::Triangular) => true,
            BaseRule::Family(PrimeSequence::List { then, .. }) => then.family_support_is_infinite(),
            _ => false,
        }
    }

    fn family_usage(&self, family: &Family, p: u64) -> u64 {
        match self {
            BaseRule::Family(PrimeSequence::Triangular) => family.position(p).unwrap_or(0),
            BaseRule::Family(PrimeSequence::List { entries, then }) => {
                entries.iter().filter(|e| e.prime == p).map(|e| e.count).sum::<u64>() + then.family_usage(family, p)
            }
            _ => 0,
        }
    }

    fn listed_primes(&self, out: &mut BTreeSet<u64>) {
        if let BaseRule::Family(PrimeSequence::List { entries, then }) = self {
            out.extend(entries.iter().filter(|e| e.count > 0).map(|e| e.prime));
            then.listed_primes(out);
        }
    }

    /// Base index past which the occurrence count of `name` no longer changes,
    /// when that is finite.
    fn named_settles_at(&self, name: &str) -> Option<u64> {
        match self {
            BaseRule::Constant { block } => (block != name).then_some(0),
            BaseRule::Cycle { blocks } => (!blocks.iter().any(|b| b == name)).then_some(0),
            BaseRule::Family(PrimeSequence::Triangular) => Some(0),
            BaseRule::Family(PrimeSequence::List { entries, then }) => {
                let offset: u64 = entries.iter().map(|e| e.count).sum();
                then.named_settles_at(name).map(|s| if s == 0 { 0 } else { offset + s })
            }
        }
    }

    fn family_settles_at(&self, family: &Family, p: u64) -> u64 {
        match self {
            BaseRule::Family(PrimeSequence::Triangular) => match family.position(p) {
                Some(k) => k * (k + 1) / 2,
                None => 0,
            },
            BaseRule::Family(PrimeSequence::List { entries, then }) => {
                let mut end = 0;
                let mut offset = 0;
                for e in entries {
                    offset += e.count;
                    if e.prime == p && e.count > 0 {
                        end = offset;
                    }
                }
                match then.family_settles_at(family, p) {
                    0 => end,
                    s => offset + s,
                }
            }
            _ => 0,
        }
    }
}

/// Smallest `k >= 1` with `i < k(k+1)/2`.
fn triangular_index(i: u64) -> u64 {
    let mut k = ((2.0 * i as f64).sqrt() as u64).max(1);
    while k * (k + 1) / 2 <= i {
        k += 1;
    }
    while k > 1 && (k - 1) * k / 2 > i {
        k -= 1;
    }
    k
}

/// Deterministic vertex-to-block rule for infinite trees.
///
/// Vertices listed in `inserts` receive the named block; the remaining vertices,
/// in order, follow the base rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assignment {
    pub base: BaseRule,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub inserts: BTreeMap<u64, String>,
}

impl Assignment {
    pub fn new(base: BaseRule) -> Self {
        Assignment { base, inserts: BTreeMap::new() }
    }

    pub fn constant(block: impl Into<String>) -> Self {
        Self::new(BaseRule::Constant { block: block.into() })
    }

    pub fn triangular() -> Self {
        Self::new(BaseRule::Family(PrimeSequence::Triangular))
    }

    pub fn with_insert(mut self, vertex: u64, block: impl Into<String>) -> Self {
        self.inserts.insert(vertex, block.into());
        self
    }

    pub(crate) fn validate(&self, family: Option<&Family>) -> Result<(), String> {
        self.base.validate(family)
    }

    pub fn block_at(&self, n: u64, family: Option<&Family>) -> BlockId {
        if let Some(name) = self.inserts.get(&n) {
            return BlockId::Named(name.clone());
        }
        let shifted = self.inserts.range(..n).count() as u64;
        self.base.at(n - shifted, family)
    }

    /// Named blocks that occur somewhere in the tree.
    pub fn named_blocks(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.inserts.values().cloned().collect();
        self.base.named(&mut out);
        out
    }

    pub fn uses_family(&self) -> bool {
        self.base.uses_family()
    }

    /// Infinitely many family members occur.
    pub fn family_support_is_infinite(&self) -> bool {
        self.base.family_support_is_infinite()
    }

    /// Primes of members placed by explicit list entries.
    pub fn listed_primes(&self) -> BTreeSet<u64> {
        let mut out = BTreeSet::new();
        self.base.listed_primes(&mut out);
        out
    }

    /// Number of vertices carrying family member `p`; always finite.
    pub fn family_usage(&self, family: &Family, p: u64) -> ExtendedCount {
        if !family.contains_prime(p) {
            return ExtendedCount::ZERO;
        }
        ExtendedCount::Finite(self.base.family_usage(family, p))
    }

    /// Vertex count after which the occurrence count of `name` is final, if it is.
    pub fn named_settles_at(&self, name: &str) -> Option<u64> {
        let base = self.base.named_settles_at(name)?;
        Some(self.vertex_for_base(base).max(self.inserts.keys().next_back().map_or(0, |&v| v + 1)))
    }

    /// Vertex count after which member `p` no longer appears.
    pub fn family_settles_at(&self, family: &Family, p: u64) -> u64 {
        self.vertex_for_base(self.base.family_settles_at(family, p))
    }

    /// Number of vertices needed for the base rule to have placed `base` entries.
    fn vertex_for_base(&self, base: u64) -> u64 {
        if base == 0 {
            return 0;
        }
        // the vertex holding base index `base - 1`, plus one
        let mut v = base - 1;
        for &ins in self.inserts.keys() {
            if ins <= v {
                v += 1;
            } else {
                break;
            }
        }
        v + 1
    }

    /// Blocks of vertices `0, 1, 2, ...`, sharing work across consecutive vertices.
    pub fn iter<'a>(&'a self, family: Option<&'a Family>) -> impl Iterator<Item = BlockId> + 'a {
        let mut family_primes = family.map(|f| f.primes());
        let mut triangular = (0u64, 0u64, 0u64);
        let mut base_index = 0u64;
        (0u64..).map(move |n| {
            if let Some(name) = self.inserts.get(&n) {
                return BlockId::Named(name.clone());
            }
            let i = base_index;
            base_index += 1;
            match (&self.base, family, family_primes.as_mut()) {
                (BaseRule::Family(PrimeSequence::Triangular), Some(f), Some(primes)) => {
                    // (current prime, its 1-based position, remaining repetitions)
                    let (ref mut p, ref mut k, ref mut left) = triangular;
                    if *left == 0 {
                        *p = primes.next().expect("infinitely many primes");
                        *k += 1;
                        *left = *k;
                    }
                    *left -= 1;
                    f.id(*p)
                }
                _ => self.base.at(i, family),
            }
        })
    }
}

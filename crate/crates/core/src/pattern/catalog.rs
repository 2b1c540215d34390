use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::PatternError;
use crate::abelian::primes::{is_prime, next_prime, nth_prime_from, prime_position, primes_from};
use crate::abelian::{FgAbelianGroup, PrimePower};
use crate::blocks::{lens_block, smale_block, suspension_block, Block};
use crate::groups::ExtendedCount;

/// Identifies a block used in a pattern: a named catalog entry or a family member.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockId {
    Named(String),
    Member { family: String, prime: u64 },
}

impl BlockId {
    pub fn named(name: impl Into<String>) -> Self {
        BlockId::Named(name.into())
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockId::Named(name) => f.write_str(name),
            BlockId::Member { family, prime } => write!(f, "{family}[{prime}]"),
        }
    }
}

impl Serialize for BlockId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Property declared for every member of a family, verified on a finite sample and
/// otherwise trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Guarantee {
    /// Every prime appearing in a member's invariants is odd.
    AllOdd,
    /// Members are pairwise model-distinct, share no free factor or homology summand,
    /// and contribute nothing that the named blocks of the pattern also contribute.
    Distinct,
    /// Every member is used a finite, nonzero number of times.
    FiniteNonzero,
}

impl Guarantee {
    pub fn as_str(self) -> &'static str {
        match self {
            Guarantee::AllOdd => "all_odd",
            Guarantee::Distinct => "distinct",
            Guarantee::FiniteNonzero => "finite_nonzero",
        }
    }

    pub fn statement(self) -> &'static str {
        match self {
            Guarantee::AllOdd => "every prime in the invariants of every family member is odd",
            Guarantee::Distinct => {
                "family members are pairwise distinct and share no prime factor or prime-power summand with each other or with the named blocks"
            }
            Guarantee::FiniteNonzero => "every family member is used a finite, nonzero number of times",
        }
    }
}

impl fmt::Display for Guarantee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A prime-indexed preset; member `p` depends only on the prime `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyTemplate {
    /// `L(p, 1)`.
    Lens,
    /// 5-dimensional block with `H₂ = Z_{p^j} ⊕ Z_{p^j}`.
    Smale {
        #[serde(default = "one")]
        exponent: u32,
    },
    /// `(k-1)`-connected `d`-block with `H_k = Z_{p^j}`.
    Suspension {
        dim: u32,
        #[serde(default = "one")]
        exponent: u32,
        #[serde(default = "two")]
        k: u32,
    },
}

fn one() -> u32 {
    1
}

fn two() -> u32 {
    2
}

impl FamilyTemplate {
    pub fn dim(&self) -> u32 {
        match self {
            FamilyTemplate::Lens => 3,
            FamilyTemplate::Smale { .. } => 5,
            FamilyTemplate::Suspension { dim, .. } => *dim,
        }
    }

    fn build(&self, p: u64) -> Result<Block, PatternError> {
        let block = match *self {
            FamilyTemplate::Lens => lens_block(p, 1),
            FamilyTemplate::Smale { exponent } => {
                let q = PrimePower::new(p, exponent).map_err(|e| PatternError::Family(e.to_string()))?;
                smale_block(&FgAbelianGroup::from_prime_powers([q]))
            }
            FamilyTemplate::Suspension { dim, exponent, k } => {
                let q = PrimePower::new(p, exponent).map_err(|e| PatternError::Family(e.to_string()))?;
                suspension_block(dim, q, k)
            }
        };
        block.map_err(|e| PatternError::Family(e.to_string()))
    }
}

/// An infinite catalog of blocks, one per prime `>= primes_from`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Family {
    name: String,
    template: FamilyTemplate,
    primes_from: u64,
    guarantees: BTreeSet<Guarantee>,
}

impl Family {
    pub fn new(
        name: impl Into<String>,
        template: FamilyTemplate,
        primes_from: u64,
        guarantees: impl IntoIterator<Item = Guarantee>,
    ) -> Result<Family, PatternError> {
        let family = Family {
            name: name.into(),
            template,
            primes_from: primes_from.max(2),
            guarantees: guarantees.into_iter().collect(),
        };
        // the first member must build; later members differ only in the prime
        family.member(family.first_prime())?;
        Ok(family)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn template(&self) -> &FamilyTemplate {
        &self.template
    }

    pub fn primes_from(&self) -> u64 {
        self.primes_from
    }

    pub fn guarantees(&self) -> &BTreeSet<Guarantee> {
        &self.guarantees
    }

    pub fn declares(&self, g: Guarantee) -> bool {
        self.guarantees.contains(&g)
    }

    pub fn dim(&self) -> u32 {
        self.template.dim()
    }

    pub fn first_prime(&self) -> u64 {
        next_prime(self.primes_from)
    }

    pub fn contains_prime(&self, p: u64) -> bool {
        p >= self.primes_from && is_prime(p)
    }

    /// 1-based position of `p` among the family primes.
    pub fn position(&self, p: u64) -> Option<u64> {
        prime_position(p, self.primes_from)
    }

    /// The `index`-th family prime, 1-based.
    pub fn prime_at(&self, index: u64) -> u64 {
        nth_prime_from(self.primes_from, index)
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> {
        primes_from(self.primes_from)
    }

    pub fn id(&self, p: u64) -> BlockId {
        BlockId::Member { family: self.name.clone(), prime: p }
    }

    pub fn member(&self, p: u64) -> Result<Block, PatternError> {
        if !self.contains_prime(p) {
            return Err(PatternError::NotAMember { family: self.name.clone(), prime: p });
        }
        Ok(self.template.build(p)?.renamed(self.id(p).to_string()))
    }

    /// The first `n` members in prime order.
    pub fn sample(&self, n: usize) -> Vec<(u64, Block)> {
        self.primes().take(n).map(|p| (p, self.member(p).expect("family members build for every prime"))).collect()
    }
}

/// Named blocks, an optional prime-indexed family, and declared usage counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Catalog {
    blocks: BTreeMap<String, Block>,
    family: Option<Family>,
    usage: BTreeMap<String, ExtendedCount>,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_blocks(blocks: impl IntoIterator<Item = Block>) -> Result<Self, PatternError> {
        let mut catalog = Catalog::new();
        for b in blocks {
            catalog.add_block(b)?;
        }
        Ok(catalog)
    }

    pub fn add_block(&mut self, block: Block) -> Result<(), PatternError> {
        let name = block.name().to_string();
        if name.contains('[') || name.is_empty() {
            return Err(PatternError::InvalidName(name));
        }
        if self.blocks.contains_key(&name) || self.family.as_ref().is_some_and(|f| f.name() == name) {
            return Err(PatternError::DuplicateName(name));
        }
        self.blocks.insert(name, block);
        Ok(())
    }

    pub fn with_block(mut self, block: Block) -> Result<Self, PatternError> {
        self.add_block(block)?;
        Ok(self)
    }

    pub fn set_family(&mut self, family: Family) -> Result<(), PatternError> {
        if self.blocks.contains_key(family.name()) {
            return Err(PatternError::DuplicateName(family.name().to_string()));
        }
        self.family = Some(family);
        Ok(())
    }

    pub fn with_family(mut self, family: Family) -> Result<Self, PatternError> {
        self.set_family(family)?;
        Ok(self)
    }

    pub fn declare_usage(&mut self, name: impl Into<String>, count: ExtendedCount) {
        self.usage.insert(name.into(), count);
    }

    pub fn with_usage(mut self, name: impl Into<String>, count: ExtendedCount) -> Self {
        self.declare_usage(name, count);
        self
    }

    pub(crate) fn clear_usage(&mut self) {
        self.usage.clear();
    }

    pub fn blocks(&self) -> &BTreeMap<String, Block> {
        &self.blocks
    }

    pub fn block(&self, name: &str) -> Option<&Block> {
        self.blocks.get(name)
    }

    pub fn family(&self) -> Option<&Family> {
        self.family.as_ref()
    }

    pub fn declared_usage(&self, name: &str) -> Option<ExtendedCount> {
        self.usage.get(name).copied()
    }

    pub fn declared_usages(&self) -> &BTreeMap<String, ExtendedCount> {
        &self.usage
    }

    pub fn is_infinite(&self) -> bool {
        self.family.is_some()
    }

    pub fn resolve(&self, id: &BlockId) -> Result<Cow<'_, Block>, PatternError> {
        match id {
            BlockId::Named(name) => {
                self.blocks.get(name).map(Cow::Borrowed).ok_or_else(|| PatternError::UnknownBlock(name.clone()))
            }
            BlockId::Member { family, prime } => match &self.family {
                Some(f) if f.name() == family => f.member(*prime).map(Cow::Owned),
                _ => Err(PatternError::UnknownBlock(family.clone())),
            },
        }
    }

    /// Named blocks followed by the first `family_samples` family members.
    pub fn enumerate(&self, family_samples: usize) -> Vec<Block> {
        let mut out: Vec<Block> = self.blocks.values().cloned().collect();
        if let Some(f) = &self.family {
            out.extend(f.sample(family_samples).into_iter().map(|(_, b)| b));
        }
        out
    }
}

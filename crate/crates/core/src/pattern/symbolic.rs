use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::assignment::Assignment;
use super::catalog::{Family, Guarantee};
use crate::abelian::PrimePower;
use crate::blocks::Block;
use crate::groups::{ExtendedCount, FactorLabel, FreeProductClass};

/// The infinitely many family members placed by an infinite tree, with their usage.
///
/// Every template's invariants mention only the prime that indexes the member, so a
/// label or prime power is contributed by at most one member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyTail {
    family: Family,
    assignment: Assignment,
}

impl FamilyTail {
    pub(crate) fn new(family: Family, assignment: Assignment) -> Self {
        FamilyTail { family, assignment }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn guarantees(&self) -> &BTreeSet<Guarantee> {
        self.family.guarantees()
    }

    pub fn usage(&self, p: u64) -> ExtendedCount {
        self.assignment.family_usage(&self.family, p)
    }

    /// `(prime, member, usage)` for members in use, in prime order; infinite.
    pub fn members(&self) -> impl Iterator<Item = (u64, Block, ExtendedCount)> + '_ {
        self.family.primes().filter_map(move |p| {
            let usage = self.usage(p);
            (!usage.is_zero()).then(|| (p, self.family.member(p).expect("family prime"), usage))
        })
    }

    fn member_for(&self, p: u64) -> Option<(Block, ExtendedCount)> {
        if !self.family.contains_prime(p) {
            return None;
        }
        let usage = self.usage(p);
        (!usage.is_zero()).then(|| (self.family.member(p).expect("family prime"), usage))
    }

    fn label_prime(label: &FactorLabel) -> Option<u64> {
        match label {
            FactorLabel::FiniteCyclic(n) => Some(*n),
            _ => None,
        }
    }

    pub fn count_factor(&self, label: &FactorLabel) -> ExtendedCount {
        Self::label_prime(label)
            .and_then(|p| self.member_for(p))
            .map_or(ExtendedCount::ZERO, |(b, u)| b.pi1().count_factor(label) * u)
    }

    pub fn count_summands(&self, r: u32, q: &PrimePower) -> ExtendedCount {
        self.member_for(q.prime())
            .and_then(|(b, u)| b.homology(r).map(|g| ExtendedCount::Finite(g.count_summands(q)) * u))
            .unwrap_or(ExtendedCount::ZERO)
    }

    fn template_member(&self) -> Block {
        self.family.member(self.family.first_prime()).expect("first member builds")
    }
}

/// `π₁` of a sum-manifold: a finite class plus, for infinite trees, family factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicFreeProduct {
    head: FreeProductClass,
    tail: Option<FamilyTail>,
}

impl SymbolicFreeProduct {
    pub(crate) fn new(head: FreeProductClass, tail: Option<FamilyTail>) -> Self {
        let tail = tail.filter(|t| !t.template_member().pi1().is_trivial());
        SymbolicFreeProduct { head, tail }
    }

    pub fn head(&self) -> &FreeProductClass {
        &self.head
    }

    pub fn tail(&self) -> Option<&FamilyTail> {
        self.tail.as_ref()
    }

    /// The whole class, when no family contributes.
    pub fn as_finite(&self) -> Option<&FreeProductClass> {
        self.tail.is_none().then_some(&self.head)
    }

    pub fn is_trivial(&self) -> bool {
        self.tail.is_none() && self.head.is_trivial()
    }

    pub fn grushko_factor_count(&self) -> ExtendedCount {
        match self.tail {
            Some(_) => ExtendedCount::Omega,
            None => self.head.grushko_factor_count(),
        }
    }

    pub fn count_factor(&self, label: &FactorLabel) -> ExtendedCount {
        self.head.count_factor(label) + self.tail.as_ref().map_or(ExtendedCount::ZERO, |t| t.count_factor(label))
    }
}

impl fmt::Display for SymbolicFreeProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.tail {
            None => write!(f, "{}", self.head),
            Some(t) if self.head.is_trivial() => write!(f, "*_p pi1({}[p])", t.family.name()),
            Some(t) => write!(f, "{} * *_p pi1({}[p])", self.head, t.family.name()),
        }
    }
}

/// `H_r` or `π_k` of a sum-manifold: rank, finitely many prime-power multiplicities,
/// and optionally the contribution of infinitely many family members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicAbelianGroup {
    degree: u32,
    rank: ExtendedCount,
    head: BTreeMap<PrimePower, ExtendedCount>,
    tail: Option<FamilyTail>,
}

impl SymbolicAbelianGroup {
    pub(crate) fn new(
        degree: u32,
        rank: ExtendedCount,
        head: BTreeMap<PrimePower, ExtendedCount>,
        tail: Option<FamilyTail>,
    ) -> Self {
        let tail = tail.filter(|t| t.template_member().homology(degree).is_some_and(|g| !g.is_trivial()));
        let head = head.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        SymbolicAbelianGroup { degree, rank, head, tail }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn rank(&self) -> ExtendedCount {
        self.rank
    }

    pub fn head(&self) -> &BTreeMap<PrimePower, ExtendedCount> {
        &self.head
    }

    pub fn tail(&self) -> Option<&FamilyTail> {
        self.tail.as_ref()
    }

    /// Total multiplicity of `Z_q` as a direct summand.
    pub fn multiplicity(&self, q: &PrimePower) -> ExtendedCount {
        let head = self.head.get(q).copied().unwrap_or_default();
        head + self.tail.as_ref().map_or(ExtendedCount::ZERO, |t| t.count_summands(self.degree, q))
    }

    /// Tail entries `(q, multiplicity)` in prime order; infinite when present.
    pub fn tail_entries(&self) -> impl Iterator<Item = (PrimePower, ExtendedCount)> + '_ {
        let degree = self.degree;
        self.tail.iter().flat_map(move |t| {
            t.members().flat_map(move |(_, block, usage)| {
                let torsion: Vec<(PrimePower, u64)> = block
                    .homology(degree)
                    .map(|g| g.torsion().iter().map(|(q, &c)| (*q, c)).collect())
                    .unwrap_or_default();
                torsion.into_iter().map(move |(q, c)| (q, ExtendedCount::Finite(c) * usage))
            })
        })
    }

    /// Head and tail entries combined for the first `n` tail members.
    pub fn sample(&self, n: usize) -> BTreeMap<PrimePower, ExtendedCount> {
        let mut out = self.head.clone();
        if let Some(t) = &self.tail {
            for (_, block, usage) in t.members().take(n) {
                if let Some(g) = block.homology(self.degree) {
                    for (q, &c) in g.torsion() {
                        *out.entry(*q).or_default() += ExtendedCount::Finite(c) * usage;
                    }
                }
            }
        }
        out
    }

    pub fn is_finitely_described(&self) -> bool {
        self.tail.is_none()
    }

    pub fn has_omega(&self) -> bool {
        self.tail.is_some() || !self.rank.is_finite() || self.head.values().any(|c| !c.is_finite())
    }
}

impl fmt::Display for SymbolicAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.rank {
            ExtendedCount::Finite(0) => {}
            ExtendedCount::Finite(1) => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for (q, c) in &self.head {
            match c {
                ExtendedCount::Finite(1) => parts.push(format!("Z_{q}")),
                c => parts.push(format!("(Z_{q})x{c}")),
            }
        }
        if let Some(t) = &self.tail {
            parts.push(format!("+_p H_{}({}[p])^usage(p)", self.degree, t.family.name()));
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

#[derive(Serialize)]
struct HeadEntry {
    p: crate::exact::Exact,
    j: u32,
    count: ExtendedCount,
}

#[derive(Serialize)]
struct TailDescription<'a> {
    family: &'a str,
    guarantees: &'a BTreeSet<Guarantee>,
}

impl Serialize for SymbolicAbelianGroup {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let head: Vec<HeadEntry> = self
            .head
            .iter()
            .map(|(q, &count)| HeadEntry { p: crate::exact::Exact(q.prime()), j: q.exponent(), count })
            .collect();
        let tail = self.tail.as_ref().map(|t| TailDescription { family: t.family.name(), guarantees: t.guarantees() });
        let mut s = serializer.serialize_struct("SymbolicAbelianGroup", 4)?;
        s.serialize_field("degree", &self.degree)?;
        s.serialize_field("rank", &self.rank)?;
        s.serialize_field("head", &head)?;
        s.serialize_field("tail", &tail)?;
        s.end()
    }
}

impl Serialize for SymbolicFreeProduct {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let tail = self.tail.as_ref().map(|t| TailDescription { family: t.family.name(), guarantees: t.guarantees() });
        let mut s = serializer.serialize_struct("SymbolicFreeProduct", 2)?;
        s.serialize_field("head", &self.head)?;
        s.serialize_field("tail", &tail)?;
        s.end()
    }
}

//! Finitely generated abelian groups in primary normal form.
//!
//! A group is stored as its free rank together with the multiset of prime-power
//! cyclic summands `Z_{p^j}`. Two groups are isomorphic exactly when their
//! canonical forms compare equal, so all comparisons are structural.

pub mod primes;
mod snf;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact;

pub use snf::smith_normal_form;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AbelianError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("prime power exponent must be at least 1")]
    ZeroExponent,
    #[error("presentation row {row} has {found} entries, expected {expected}")]
    RaggedRow { row: usize, found: usize, expected: usize },
    #[error("prime power {p}^{j} overflows 64 bits")]
    Overflow { p: u64, j: u32 },
}

/// The cyclic group order `p^j` with `p` prime and `j >= 1`.
///
/// Ordered by `p`, then `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PrimePower {
    #[serde(serialize_with = "exact::serialize_u64", deserialize_with = "exact::deserialize_u64")]
    p: u64,
    j: u32,
}

impl PrimePower {
    pub fn new(p: u64, j: u32) -> Result<Self, AbelianError> {
        if j == 0 {
            return Err(AbelianError::ZeroExponent);
        }
        if !primes::is_prime(p) {
            return Err(AbelianError::NotPrime(p));
        }
        Ok(PrimePower { p, j })
    }

    /// A prime power for a prime the caller already knows to be prime.
    pub(crate) fn new_unchecked(p: u64, j: u32) -> Self {
        debug_assert!(j >= 1 && primes::is_prime(p));
        PrimePower { p, j }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn exponent(&self) -> u32 {
        self.j
    }

    /// `p^j` as an exact integer.
    pub fn order(&self) -> BigUint {
        num_traits::pow(BigUint::from(self.p), self.j as usize)
    }

    pub fn order_u64(&self) -> Option<u64> {
        self.p.checked_pow(self.j)
    }

    pub fn is_odd(&self) -> bool {
        self.p % 2 == 1
    }
}

impl fmt::Display for PrimePower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.j == 1 {
            write!(f, "{}", self.p)
        } else {
            write!(f, "{}^{}", self.p, self.j)
        }
    }
}

/// A finitely generated abelian group `Z^rank ⊕ ⊕ Z_{p^j}^{m}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FgAbelianGroup {
    rank: u64,
    torsion: BTreeMap<PrimePower, u64>,
}

impl FgAbelianGroup {
    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn free(rank: u64) -> Self {
        FgAbelianGroup { rank, torsion: BTreeMap::new() }
    }

    /// `Z_n` for `n >= 1`, or `Z` for `n == 0`.
    pub fn cyclic(n: u64) -> Self {
        primary_decomposition(&[BigUint::from(n)])
    }

    pub fn from_parts(rank: u64, torsion: impl IntoIterator<Item = (PrimePower, u64)>) -> Self {
        let mut group = FgAbelianGroup::free(rank);
        for (q, count) in torsion {
            group.add_summands(q, count);
        }
        group
    }

    pub fn from_prime_powers(torsion: impl IntoIterator<Item = PrimePower>) -> Self {
        Self::from_parts(0, torsion.into_iter().map(|q| (q, 1)))
    }

    pub(crate) fn add_summands(&mut self, q: PrimePower, count: u64) {
        if count > 0 {
            *self.torsion.entry(q).or_insert(0) += count;
        }
    }

    pub fn rank(&self) -> u64 {
        self.rank
    }

    pub fn torsion(&self) -> &BTreeMap<PrimePower, u64> {
        &self.torsion
    }

    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.rank == 0
    }

    /// The torsion subgroup, as a group of rank zero.
    pub fn torsion_subgroup(&self) -> FgAbelianGroup {
        FgAbelianGroup { rank: 0, torsion: self.torsion.clone() }
    }

    pub fn direct_sum(&self, other: &FgAbelianGroup) -> FgAbelianGroup {
        let mut out = self.clone();
        out.rank += other.rank;
        for (&q, &c) in &other.torsion {
            out.add_summands(q, c);
        }
        out
    }

    /// The `n`-fold direct sum of this group with itself.
    pub fn repeated(&self, n: u64) -> FgAbelianGroup {
        FgAbelianGroup {
            rank: self.rank * n,
            torsion: if n == 0 { BTreeMap::new() } else { self.torsion.iter().map(|(&q, &c)| (q, c * n)).collect() },
        }
    }

    /// Multiplicity of `Z_q` in the primary decomposition.
    ///
    /// `Z_q` is a direct summand exactly when this is at least one.
    pub fn count_summands(&self, q: &PrimePower) -> u64 {
        self.torsion.get(q).copied().unwrap_or(0)
    }

    /// Number of cyclic summands of infinite or prime-power order.
    pub fn cyclic_summand_total(&self) -> u64 {
        self.rank + self.torsion.values().sum::<u64>()
    }

    /// Group order, if finite.
    pub fn order(&self) -> Option<BigUint> {
        if self.rank > 0 {
            return None;
        }
        Some(self.torsion.iter().fold(BigUint::one(), |acc, (q, &c)| acc * num_traits::pow(q.order(), c as usize)))
    }

    /// Invariant factors `d_1 | d_2 | ... ` of the torsion part followed by `rank` zeros.
    ///
    /// This is the inverse of [`primary_decomposition`]: prime-power summands are
    /// multiplied back together per prime, largest with largest.
    pub fn invariant_factors(&self) -> Vec<BigUint> {
        let mut per_prime: BTreeMap<u64, Vec<PrimePower>> = BTreeMap::new();
        for (&q, &c) in &self.torsion {
            let list = per_prime.entry(q.p).or_default();
            list.extend(std::iter::repeat_n(q, c as usize));
        }
        let length = per_prime.values().map(Vec::len).max().unwrap_or(0);
        let mut factors = vec![BigUint::one(); length];
        for list in per_prime.values() {
            // list is ascending by exponent; align the largest powers with the last factors
            let offset = length - list.len();
            for (i, q) in list.iter().enumerate() {
                factors[offset + i] *= q.order();
            }
        }
        factors.extend(std::iter::repeat_n(BigUint::zero(), self.rank as usize));
        factors
    }
}

impl fmt::Display for FgAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return f.write_str("0");
        }
        let mut parts = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for (q, &c) in &self.torsion {
            let base = if q.j == 1 { format!("Z_{}", q.p) } else { format!("Z_{}^{}", q.p, q.j) };
            parts.push(if c == 1 { base } else { format!("({base})x{c}") });
        }
        f.write_str(&parts.join(" + "))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SummandRecord {
    #[serde(serialize_with = "exact::serialize_u64", deserialize_with = "exact::deserialize_u64")]
    p: u64,
    j: u32,
    #[serde(serialize_with = "exact::serialize_u64", deserialize_with = "exact::deserialize_u64")]
    count: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupRecord {
    #[serde(serialize_with = "exact::serialize_u64", deserialize_with = "exact::deserialize_u64")]
    rank: u64,
    torsion: Vec<SummandRecord>,
}

impl Serialize for FgAbelianGroup {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        GroupRecord {
            rank: self.rank,
            torsion: self.torsion.iter().map(|(q, &count)| SummandRecord { p: q.p, j: q.j, count }).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FgAbelianGroup {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let record = GroupRecord::deserialize(deserializer)?;
        let mut group = FgAbelianGroup::free(record.rank);
        for s in record.torsion {
            let q = PrimePower::new(s.p, s.j).map_err(serde::de::Error::custom)?;
            group.add_summands(q, s.count);
        }
        Ok(group)
    }
}

/// An integer matrix read as a presentation: columns are generators, rows are relations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerPresentation {
    generators: usize,
    rows: Vec<Vec<BigInt>>,
}

impl IntegerPresentation {
    pub fn new(generators: usize, rows: Vec<Vec<BigInt>>) -> Result<Self, AbelianError> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != generators {
                return Err(AbelianError::RaggedRow { row: i, found: row.len(), expected: generators });
            }
        }
        Ok(IntegerPresentation { generators, rows })
    }

    /// Builds a presentation from small integer rows. Panics on ragged input.
    pub fn from_rows<T: Into<BigInt> + Copy>(rows: &[Vec<T>]) -> Self {
        let generators = rows.first().map_or(0, Vec::len);
        let rows = rows.iter().map(|r| r.iter().map(|&x| x.into()).collect()).collect();
        Self::new(generators, rows).expect("ragged presentation")
    }

    /// A presentation with generators and no relations.
    pub fn free(generators: usize) -> Self {
        IntegerPresentation { generators, rows: Vec::new() }
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn relations(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn entry(&self, row: usize, col: usize) -> &BigInt {
        &self.rows[row][col]
    }

    /// Canonical presentation of a group: one relation `p^j * x = 0` per torsion
    /// summand and one unrelated generator per free summand.
    pub fn canonical(group: &FgAbelianGroup) -> Self {
        let torsion: Vec<PrimePower> =
            group.torsion().iter().flat_map(|(&q, &c)| std::iter::repeat_n(q, c as usize)).collect();
        let generators = torsion.len() + group.rank() as usize;
        let rows = torsion
            .iter()
            .enumerate()
            .map(|(i, q)| {
                let mut row = vec![BigInt::zero(); generators];
                row[i] = BigInt::from(q.order());
                row
            })
            .collect();
        IntegerPresentation { generators, rows }
    }

    /// Block-diagonal stacking: the presented group is the direct sum.
    pub fn stack(&self, other: &IntegerPresentation) -> IntegerPresentation {
        let generators = self.generators + other.generators;
        let mut rows = Vec::with_capacity(self.rows.len() + other.rows.len());
        for row in &self.rows {
            let mut r = row.clone();
            r.resize(generators, BigInt::zero());
            rows.push(r);
        }
        for row in &other.rows {
            let mut r = vec![BigInt::zero(); self.generators];
            r.extend(row.iter().cloned());
            rows.push(r);
        }
        IntegerPresentation { generators, rows }
    }

    pub(crate) fn rows_mut(&mut self) -> &mut Vec<Vec<BigInt>> {
        &mut self.rows
    }
}

/// The group presented by `m`: generators modulo the row span.
pub fn from_presentation(m: &IntegerPresentation) -> FgAbelianGroup {
    let diagonal = smith_normal_form(m);
    let nonzero = diagonal.iter().filter(|d| !d.is_zero()).count();
    let mut group = primary_decomposition(&diagonal);
    group.rank = (m.generators() - nonzero) as u64;
    group
}

/// Splits each invariant factor into prime-power parts. Zeros add free rank; ones vanish.
pub fn primary_decomposition(invariant_factors: &[BigUint]) -> FgAbelianGroup {
    let mut group = FgAbelianGroup::trivial();
    for d in invariant_factors {
        if d.is_zero() {
            group.rank += 1;
        } else if !d.is_one() {
            for (p, j) in primes::factor_biguint(d) {
                group.add_summands(PrimePower::new_unchecked(p, j), 1);
            }
        }
    }
    group
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(p: u64, j: u32) -> PrimePower {
        PrimePower::new(p, j).unwrap()
    }

    fn big(xs: &[u64]) -> Vec<BigUint> {
        xs.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn prime_power_validation() {
        assert!(PrimePower::new(4, 1).is_err());
        assert!(PrimePower::new(3, 0).is_err());
        assert!(pp(2, 3) > pp(2, 1));
        assert!(pp(3, 1) > pp(2, 5));
    }

    #[test]
    fn presentation_examples() {
        let g = from_presentation(&IntegerPresentation::from_rows(&[vec![2, 0], vec![0, 3]]));
        assert_eq!(g, FgAbelianGroup::from_prime_powers([pp(2, 1), pp(3, 1)]));

        let g = from_presentation(&IntegerPresentation::free(2));
        assert_eq!(g, FgAbelianGroup::free(2));

        let g = from_presentation(&IntegerPresentation::from_rows(&[vec![2, 4], vec![-2, 6]]));
        assert_eq!(g, FgAbelianGroup::from_parts(0, [(pp(2, 1), 2), (pp(5, 1), 1)]));
        assert_eq!(g.cyclic_summand_total(), 3);
    }

    #[test]
    fn primary_decomposition_examples() {
        assert_eq!(primary_decomposition(&big(&[1, 6])), FgAbelianGroup::from_prime_powers([pp(2, 1), pp(3, 1)]));
        assert_eq!(primary_decomposition(&big(&[0])), FgAbelianGroup::free(1));
        assert_eq!(
            primary_decomposition(&big(&[2, 10])),
            FgAbelianGroup::from_parts(0, [(pp(2, 1), 2), (pp(5, 1), 1)])
        );
    }

    #[test]
    fn direct_sum_examples() {
        let z4 = FgAbelianGroup::cyclic(4);
        let z2 = FgAbelianGroup::cyclic(2);
        assert_eq!(z4.direct_sum(&FgAbelianGroup::trivial()), z4);
        let sum = z4.direct_sum(&z2);
        assert_eq!(sum, FgAbelianGroup::from_prime_powers([pp(2, 2), pp(2, 1)]));
        assert_ne!(sum, FgAbelianGroup::cyclic(8));

        let z = FgAbelianGroup::free(1);
        let left = z.direct_sum(&z).direct_sum(&z);
        let right = FgAbelianGroup::free(2).direct_sum(&z);
        assert_eq!(left, right);
        assert_eq!(left.rank(), 3);
    }

    #[test]
    fn summand_counting() {
        let g = FgAbelianGroup::from_prime_powers([pp(2, 2), pp(2, 1), pp(2, 1)]);
        assert_eq!(g.count_summands(&pp(2, 1)), 2);
        assert_eq!(FgAbelianGroup::cyclic(4).count_summands(&pp(2, 1)), 0);
        let g = FgAbelianGroup::from_prime_powers([pp(3, 2), pp(3, 1)]);
        assert_eq!(g.count_summands(&pp(3, 2)), 1);
    }

    #[test]
    fn cyclic_totals() {
        assert_eq!(FgAbelianGroup::trivial().cyclic_summand_total(), 0);
        let g = FgAbelianGroup::from_parts(1, [(pp(2, 1), 2)]);
        assert_eq!(g.cyclic_summand_total(), 3);
    }

    #[test]
    fn invariant_factors_roundtrip() {
        let g = FgAbelianGroup::from_parts(2, [(pp(2, 1), 2), (pp(2, 3), 1), (pp(3, 1), 1), (pp(5, 2), 1)]);
        let d = g.invariant_factors();
        assert_eq!(d, big(&[2, 2, 600, 0, 0]));
        assert_eq!(primary_decomposition(&d), g);
    }

    #[test]
    fn display() {
        let g = FgAbelianGroup::from_parts(2, [(pp(3, 1), 2), (pp(7, 2), 1)]);
        assert_eq!(g.to_string(), "Z^2 + (Z_3)x2 + Z_7^2");
        assert_eq!(FgAbelianGroup::trivial().to_string(), "0");
    }

    #[test]
    fn serde_roundtrip() {
        let g = FgAbelianGroup::from_parts(1, [(pp(3, 1), 2)]);
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(json, r#"{"rank":1,"torsion":[{"p":3,"j":1,"count":2}]}"#);
        let back: FgAbelianGroup = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<FgAbelianGroup>(r#"{"rank":0,"torsion":[{"p":4,"j":1,"count":1}]}"#).is_err());
    }
}

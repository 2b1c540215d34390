//! Free products of freely indecomposable groups, compared by label.
//!
//! Isomorphism of factors is nominal: cyclic factors are identified by their order,
//! opaque factors by their declared name.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("finite cyclic factor needs order at least 2, got {0}")]
    CyclicOrder(u64),
    #[error("opaque factor name must be non-empty")]
    EmptyName,
}

/// A multiplicity in `N ∪ {ω}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtendedCount {
    Finite(u64),
    Omega,
}

impl Default for ExtendedCount {
    fn default() -> Self {
        ExtendedCount::ZERO
    }
}

impl ExtendedCount {
    pub const ZERO: ExtendedCount = ExtendedCount::Finite(0);
    pub const ONE: ExtendedCount = ExtendedCount::Finite(1);

    pub fn is_zero(self) -> bool {
        self == Self::ZERO
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedCount::Finite(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            ExtendedCount::Finite(n) => Some(n),
            ExtendedCount::Omega => None,
        }
    }

    /// `⌊self / divisor⌋` for a positive finite divisor; `ω / c = ω`.
    pub fn div_floor(self, divisor: u64) -> ExtendedCount {
        assert!(divisor > 0, "division by zero multiplicity");
        match self {
            ExtendedCount::Finite(n) => ExtendedCount::Finite(n / divisor),
            ExtendedCount::Omega => ExtendedCount::Omega,
        }
    }
}

impl From<u64> for ExtendedCount {
    fn from(n: u64) -> Self {
        ExtendedCount::Finite(n)
    }
}

impl Add for ExtendedCount {
    type Output = ExtendedCount;

    fn add(self, rhs: ExtendedCount) -> ExtendedCount {
        match (self, rhs) {
            (ExtendedCount::Finite(a), ExtendedCount::Finite(b)) => {
                ExtendedCount::Finite(a.checked_add(b).expect("multiplicity overflow"))
            }
            _ => ExtendedCount::Omega,
        }
    }
}

impl AddAssign for ExtendedCount {
    fn add_assign(&mut self, rhs: ExtendedCount) {
        *self = *self + rhs;
    }
}

impl Mul for ExtendedCount {
    type Output = ExtendedCount;

    /// `0 · ω = 0`, otherwise `ω` absorbs.
    fn mul(self, rhs: ExtendedCount) -> ExtendedCount {
        match (self, rhs) {
            (ExtendedCount::Finite(a), ExtendedCount::Finite(b)) => {
                ExtendedCount::Finite(a.checked_mul(b).expect("multiplicity overflow"))
            }
            (ExtendedCount::Finite(0), ExtendedCount::Omega) | (ExtendedCount::Omega, ExtendedCount::Finite(0)) => {
                ExtendedCount::ZERO
            }
            _ => ExtendedCount::Omega,
        }
    }
}

impl std::iter::Sum for ExtendedCount {
    fn sum<I: Iterator<Item = ExtendedCount>>(iter: I) -> ExtendedCount {
        iter.fold(ExtendedCount::ZERO, Add::add)
    }
}

impl fmt::Display for ExtendedCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedCount::Finite(n) => write!(f, "{n}"),
            ExtendedCount::Omega => f.write_str("ω"),
        }
    }
}

impl Serialize for ExtendedCount {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtendedCount::Finite(n) => exact::serialize_u64(n, serializer),
            ExtendedCount::Omega => serializer.serialize_str("omega"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedCount {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(u64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(n) => Ok(ExtendedCount::Finite(n)),
            Raw::Text(s) if s == "omega" => Ok(ExtendedCount::Omega),
            Raw::Text(s) => s
                .parse()
                .map(ExtendedCount::Finite)
                .map_err(|_| serde::de::Error::custom(format!("expected a count or \"omega\", got {s:?}"))),
        }
    }
}

/// A freely indecomposable factor, identified by label.
#[derive(Debug, Clone)]
pub enum FactorLabel {
    InfiniteCyclic,
    FiniteCyclic(u64),
    /// A user-declared group; `odd_torsion_generated` is trusted, not computed.
    Opaque {
        name: String,
        odd_torsion_generated: bool,
    },
}

impl FactorLabel {
    pub fn finite_cyclic(n: u64) -> Result<Self, GroupError> {
        if n < 2 {
            return Err(GroupError::CyclicOrder(n));
        }
        Ok(FactorLabel::FiniteCyclic(n))
    }

    pub fn opaque(name: impl Into<String>, odd_torsion_generated: bool) -> Result<Self, GroupError> {
        let name = name.into();
        if name.is_empty() {
            return Err(GroupError::EmptyName);
        }
        Ok(FactorLabel::Opaque { name, odd_torsion_generated })
    }

    /// Whether this factor is generated by elements of odd finite order.
    pub fn odd_torsion_generated(&self) -> bool {
        match self {
            FactorLabel::InfiniteCyclic => false,
            FactorLabel::FiniteCyclic(n) => n % 2 == 1,
            FactorLabel::Opaque { odd_torsion_generated, .. } => *odd_torsion_generated,
        }
    }

    pub fn is_opaque(&self) -> bool {
        matches!(self, FactorLabel::Opaque { .. })
    }

    fn rank(&self) -> u8 {
        match self {
            FactorLabel::InfiniteCyclic => 0,
            FactorLabel::FiniteCyclic(_) => 1,
            FactorLabel::Opaque { .. } => 2,
        }
    }
}

impl PartialEq for FactorLabel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for FactorLabel {}

impl PartialOrd for FactorLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FactorLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (FactorLabel::FiniteCyclic(a), FactorLabel::FiniteCyclic(b)) => a.cmp(b),
            (FactorLabel::Opaque { name: a, .. }, FactorLabel::Opaque { name: b, .. }) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl std::hash::Hash for FactorLabel {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            FactorLabel::InfiniteCyclic => {}
            FactorLabel::FiniteCyclic(n) => n.hash(state),
            FactorLabel::Opaque { name, .. } => name.hash(state),
        }
    }
}

impl fmt::Display for FactorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorLabel::InfiniteCyclic => f.write_str("Z"),
            FactorLabel::FiniteCyclic(n) => write!(f, "Z_{n}"),
            FactorLabel::Opaque { name, .. } => f.write_str(name),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum LabelRecord {
    InfiniteCyclic,
    FiniteCyclic {
        #[serde(serialize_with = "exact::serialize_u64", deserialize_with = "exact::deserialize_u64")]
        n: u64,
    },
    Opaque {
        name: String,
        odd_torsion_generated: bool,
    },
}

impl Serialize for FactorLabel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            FactorLabel::InfiniteCyclic => LabelRecord::InfiniteCyclic,
            FactorLabel::FiniteCyclic(n) => LabelRecord::FiniteCyclic { n: *n },
            FactorLabel::Opaque { name, odd_torsion_generated } => {
                LabelRecord::Opaque { name: name.clone(), odd_torsion_generated: *odd_torsion_generated }
            }
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FactorLabel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match LabelRecord::deserialize(deserializer)? {
            LabelRecord::InfiniteCyclic => Ok(FactorLabel::InfiniteCyclic),
            LabelRecord::FiniteCyclic { n } => FactorLabel::finite_cyclic(n).map_err(serde::de::Error::custom),
            LabelRecord::Opaque { name, odd_torsion_generated } => {
                FactorLabel::opaque(name, odd_torsion_generated).map_err(serde::de::Error::custom)
            }
        }
    }
}

/// A free product as a multiset of factor labels; the empty multiset is the trivial group.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FreeProductClass {
    factors: BTreeMap<FactorLabel, ExtendedCount>,
}

impl FreeProductClass {
    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn single(label: FactorLabel) -> Self {
        Self::with(label, ExtendedCount::ONE)
    }

    pub fn with(label: FactorLabel, count: impl Into<ExtendedCount>) -> Self {
        let mut class = Self::trivial();
        class.insert(label, count.into());
        class
    }

    pub fn from_factors(factors: impl IntoIterator<Item = (FactorLabel, ExtendedCount)>) -> Self {
        let mut class = Self::trivial();
        for (label, count) in factors {
            class.insert(label, count);
        }
        class
    }

    pub(crate) fn insert(&mut self, label: FactorLabel, count: ExtendedCount) {
        if !count.is_zero() {
            *self.factors.entry(label).or_insert(ExtendedCount::ZERO) += count;
        }
    }

    pub fn factors(&self) -> &BTreeMap<FactorLabel, ExtendedCount> {
        &self.factors
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn free_product(&self, other: &FreeProductClass) -> FreeProductClass {
        let mut out = self.clone();
        for (label, &count) in &other.factors {
            out.insert(label.clone(), count);
        }
        out
    }

    /// `count` copies of this class in a free product.
    pub fn repeated(&self, count: ExtendedCount) -> FreeProductClass {
        Self::from_factors(self.factors.iter().map(|(l, &c)| (l.clone(), c * count)))
    }

    /// Total number `m` of Grushko factors.
    pub fn grushko_factor_count(&self) -> ExtendedCount {
        self.factors.values().copied().sum()
    }

    pub fn count_factor(&self, label: &FactorLabel) -> ExtendedCount {
        self.factors.get(label).copied().unwrap_or(ExtendedCount::ZERO)
    }

    /// True iff some label occurs in both.
    pub fn shares_factor(&self, other: &FreeProductClass) -> bool {
        self.shared_factors(other).next().is_some()
    }

    pub fn shared_factors<'a>(&'a self, other: &'a FreeProductClass) -> impl Iterator<Item = &'a FactorLabel> + 'a {
        self.factors.keys().filter(move |l| other.factors.contains_key(*l))
    }

    pub fn generated_by_odd_torsion(&self) -> bool {
        self.factors.keys().all(FactorLabel::odd_torsion_generated)
    }

    /// Labels that prevent generation by odd-order torsion.
    pub fn odd_torsion_obstructions(&self) -> impl Iterator<Item = &FactorLabel> {
        self.factors.keys().filter(|l| !l.odd_torsion_generated())
    }

    pub fn has_finite_multiplicities(&self) -> bool {
        self.factors.values().all(|c| c.is_finite())
    }
}

impl fmt::Display for FreeProductClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(l, c)| match c {
                ExtendedCount::Finite(1) => l.to_string(),
                _ => format!("{l}^*{c}"),
            })
            .collect();
        f.write_str(&parts.join(" * "))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorRecord {
    label: FactorLabel,
    count: ExtendedCount,
}

impl Serialize for FreeProductClass {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let records: Vec<FactorRecord> =
            self.factors.iter().map(|(label, &count)| FactorRecord { label: label.clone(), count }).collect();
        records.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FreeProductClass {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let records = Vec::<FactorRecord>::deserialize(deserializer)?;
        Ok(Self::from_factors(records.into_iter().map(|r| (r.label, r.count))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    use ExtendedCount::{Finite, Omega};

    fn z(n: u64) -> FactorLabel {
        FactorLabel::finite_cyclic(n).unwrap()
    }

    fn class(items: &[(u64, ExtendedCount)]) -> FreeProductClass {
        FreeProductClass::from_factors(items.iter().map(|&(n, c)| (z(n), c)))
    }

    #[test]
    fn extended_arithmetic() {
        assert_eq!(Omega + Finite(3), Omega);
        assert_eq!(Finite(2) + Finite(3), Finite(5));
        assert_eq!(Omega * Finite(2), Omega);
        assert_eq!(Finite(0) * Omega, Finite(0));
        assert_eq!(Omega * Finite(0), Finite(0));
        assert!(Finite(u64::MAX) < Omega);
        assert_eq!(Finite(7).div_floor(2), Finite(3));
        assert_eq!(Omega.div_floor(2), Omega);
    }

    #[test]
    fn extended_serde() {
        assert_eq!(serde_json::to_string(&Omega).unwrap(), "\"omega\"");
        assert_eq!(serde_json::to_string(&Finite(4)).unwrap(), "4");
        assert_eq!(serde_json::from_str::<ExtendedCount>("\"omega\"").unwrap(), Omega);
        assert_eq!(serde_json::from_str::<ExtendedCount>("12").unwrap(), Finite(12));
        assert!(serde_json::from_str::<ExtendedCount>("\"many\"").is_err());
    }

    #[test]
    fn label_validation_and_equality() {
        assert!(FactorLabel::finite_cyclic(1).is_err());
        assert_eq!(z(3), z(3));
        assert_ne!(z(3), z(5));
        let a = FactorLabel::opaque("G", true).unwrap();
        let b = FactorLabel::opaque("G", false).unwrap();
        assert_eq!(a, b);
        assert!(FactorLabel::opaque("", true).is_err());
    }

    #[test]
    fn free_product_examples() {
        let g = class(&[(3, Finite(2)), (5, Finite(1))]);
        assert_eq!(FreeProductClass::trivial().free_product(&g), g);
        assert_eq!(class(&[(3, Finite(1))]).free_product(&class(&[(3, Finite(1))])), class(&[(3, Finite(2))]));
        assert_eq!(
            class(&[(3, Finite(1))]).free_product(&class(&[(5, Finite(1))])),
            class(&[(3, Finite(1)), (5, Finite(1))])
        );
    }

    #[test]
    fn counting_examples() {
        assert_eq!(FreeProductClass::trivial().grushko_factor_count(), Finite(0));
        assert_eq!(class(&[(3, Finite(2)), (5, Finite(1))]).grushko_factor_count(), Finite(3));
        assert_eq!(class(&[(3, Omega)]).grushko_factor_count(), Omega);
        assert_eq!(class(&[(3, Finite(2)), (5, Finite(1))]).count_factor(&z(3)), Finite(2));
        assert_eq!(class(&[(3, Finite(2))]).count_factor(&z(5)), Finite(0));
        assert_eq!(class(&[(3, Omega)]).count_factor(&z(3)), Omega);
    }

    #[test]
    fn sharing_examples() {
        assert!(class(&[(3, Finite(1))]).shares_factor(&class(&[(3, Finite(1)), (5, Finite(1))])));
        assert!(!class(&[(3, Finite(1))]).shares_factor(&class(&[(5, Finite(1))])));
        assert!(!FreeProductClass::trivial().shares_factor(&class(&[(5, Finite(1))])));
    }

    #[test]
    fn odd_torsion_examples() {
        assert!(class(&[(3, Finite(1)), (7, Finite(1))]).generated_by_odd_torsion());
        assert!(!FreeProductClass::single(FactorLabel::InfiniteCyclic).generated_by_odd_torsion());
        assert!(!class(&[(2, Finite(1))]).generated_by_odd_torsion());
        assert!(FreeProductClass::trivial().generated_by_odd_torsion());
        assert!(FreeProductClass::single(FactorLabel::opaque("H", true).unwrap()).generated_by_odd_torsion());
    }

    #[test]
    fn class_serde_roundtrip() {
        let g = FreeProductClass::from_factors([
            (z(3), Finite(2)),
            (FactorLabel::InfiniteCyclic, Omega),
            (FactorLabel::opaque("H", true).unwrap(), Finite(1)),
        ]);
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(serde_json::from_str::<FreeProductClass>(&json).unwrap(), g);
    }

    fn label() -> impl Strategy<Value = FactorLabel> {
        prop_oneof![
            Just(FactorLabel::InfiniteCyclic),
            (2u64..12).prop_map(FactorLabel::FiniteCyclic),
            (0u8..3, any::<bool>())
                .prop_map(|(i, odd)| FactorLabel::Opaque { name: format!("G{i}"), odd_torsion_generated: odd }),
        ]
    }

    fn count() -> impl Strategy<Value = ExtendedCount> {
        prop_oneof![4 => (0u64..4).prop_map(Finite), 1 => Just(Omega)]
    }

    fn any_class() -> impl Strategy<Value = FreeProductClass> {
        prop::collection::vec((label(), count()), 0..5).prop_map(|items| {
            // opaque flags must be consistent per name within one instance
            let items = items.into_iter().map(|(l, c)| match l {
                FactorLabel::Opaque { name, .. } => {
                    let odd = name != "G2";
                    (FactorLabel::Opaque { name, odd_torsion_generated: odd }, c)
                }
                other => (other, c),
            });
            FreeProductClass::from_factors(items)
        })
    }

    proptest! {
        #[test]
        fn monoid_laws(a in any_class(), b in any_class(), c in any_class()) {
            prop_assert_eq!(a.free_product(&b), b.free_product(&a));
            prop_assert_eq!(a.free_product(&b).free_product(&c), a.free_product(&b.free_product(&c)));
            prop_assert_eq!(a.free_product(&FreeProductClass::trivial()), a.clone());
        }

        #[test]
        fn counting_is_additive(a in any_class(), b in any_class(), q in label()) {
            prop_assert_eq!(a.free_product(&b).count_factor(&q), a.count_factor(&q) + b.count_factor(&q));
        }

        #[test]
        fn odd_torsion_is_conjunctive(a in any_class(), b in any_class()) {
            prop_assert_eq!(
                a.free_product(&b).generated_by_odd_torsion(),
                a.generated_by_odd_torsion() && b.generated_by_odd_torsion()
            );
        }

        #[test]
        fn sharing_is_symmetric(a in any_class(), b in any_class()) {
            prop_assert_eq!(a.shares_factor(&b), b.shares_factor(&a));
            prop_assert_eq!(a.shares_factor(&a), !a.is_trivial());
        }
    }
}

use std::collections::BTreeMap;

use super::{Assumption, VerdictBuilder, Witness};
use crate::abelian::PrimePower;
use crate::blocks::Block;
use crate::groups::{ExtendedCount, FactorLabel};
use crate::pattern::{Family, FamilyTail, Guarantee};

/// The first `depth` family members with their usage in the manifold.
pub(crate) struct Sample<'a> {
    pub family: &'a Family,
    pub members: Vec<(u64, Block, ExtendedCount)>,
}

impl<'a> Sample<'a> {
    pub fn of_tail(tail: &'a FamilyTail, depth: usize) -> Self {
        let family = tail.family();
        let members = family.sample(depth).into_iter().map(|(p, b)| (p, b, tail.usage(p))).collect();
        Sample { family, members }
    }

    /// Members without usage information, for checks on a catalog alone.
    pub fn of_family(family: &'a Family, depth: usize) -> Self {
        let members = family.sample(depth).into_iter().map(|(p, b)| (p, b, ExtendedCount::ZERO)).collect();
        Sample { family, members }
    }

    pub fn witness(&self) -> Witness {
        Witness::Sampled {
            family: self.family.name().to_string(),
            members: self.members.len() as u64,
            first_prime: self.members.first().map_or(0, |m| m.0),
            last_prime: self.members.last().map_or(0, |m| m.0),
        }
    }

    fn violation(&self, g: Guarantee, block: &Block, detail: String) -> Witness {
        Witness::GuaranteeViolated {
            family: self.family.name().to_string(),
            guarantee: g,
            block: block.name().to_string(),
            detail,
        }
    }

    /// First counterexample to `g` among the sampled members; `others` are the named
    /// blocks the members must stay disjoint from.
    pub fn violation_of(&self, g: Guarantee, others: &[Block]) -> Option<Witness> {
        match g {
            Guarantee::AllOdd => {
                self.members.iter().find_map(|(_, b, _)| even_prime(b).map(|detail| self.violation(g, b, detail)))
            }
            Guarantee::FiniteNonzero => self.members.iter().find_map(|(_, b, u)| {
                (u.is_zero() || !u.is_finite()).then(|| self.violation(g, b, format!("used {u} times")))
            }),
            Guarantee::Distinct => self.distinct_violation(others),
        }
    }

    fn distinct_violation(&self, others: &[Block]) -> Option<Witness> {
        let mut labels: BTreeMap<&FactorLabel, &str> = BTreeMap::new();
        let mut summands: BTreeMap<(u32, PrimePower), &str> = BTreeMap::new();
        let mut signatures: BTreeMap<String, &str> = BTreeMap::new();
        for b in others {
            labels.extend(b.pi1().factors().keys().map(|l| (l, b.name())));
            for (r, g) in b.homology_groups() {
                summands.extend(g.torsion().keys().map(|q| ((r, *q), b.name())));
            }
        }
        for (_, b, _) in &self.members {
            for label in b.pi1().factors().keys() {
                if let Some(other) = labels.insert(label, b.name()) {
                    return Some(self.violation(
                        Guarantee::Distinct,
                        b,
                        format!("shares free factor {label} with {other}"),
                    ));
                }
            }
            for (r, g) in b.homology_groups() {
                for q in g.torsion().keys() {
                    if let Some(other) = summands.insert((r, *q), b.name()) {
                        return Some(self.violation(
                            Guarantee::Distinct,
                            b,
                            format!("shares summand Z_{q} of H_{r} with {other}"),
                        ));
                    }
                }
            }
            if let Some(other) = signatures.insert(b.signature().to_string(), b.name()) {
                return Some(self.violation(Guarantee::Distinct, b, format!("has the same invariants as {other}")));
            }
        }
        None
    }

    /// Refutes on a sampled counterexample; otherwise records the guarantee as an
    /// assumption, or marks the check undecidable when it is not declared.
    pub fn require(&self, g: Guarantee, others: &[Block], out: &mut VerdictBuilder) {
        if let Some(w) = self.violation_of(g, others) {
            out.refute(w);
        } else if self.family.declares(g) {
            out.assume(Assumption::family(self.family.name(), g));
        } else {
            out.undecided(Witness::GuaranteeMissing { family: self.family.name().to_string(), guarantee: g });
        }
    }
}

fn even_prime(b: &Block) -> Option<String> {
    for label in b.pi1().factors().keys() {
        if let FactorLabel::FiniteCyclic(n) = label {
            if n % 2 == 0 {
                return Some(format!("free factor {label} has even order"));
            }
        }
    }
    for (r, g) in b.homology_groups() {
        if let Some(q) = g.torsion().keys().find(|q| !q.is_odd()) {
            return Some(format!("H_{r} has summand Z_{q}"));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::lens_block;
    use crate::criteria::Status;
    use crate::pattern::FamilyTemplate;

    #[test]
    fn all_odd_catches_two() {
        let f = Family::new("L", FamilyTemplate::Lens, 2, [Guarantee::AllOdd]).unwrap();
        let s = Sample::of_family(&f, 4);
        assert!(matches!(s.violation_of(Guarantee::AllOdd, &[]), Some(Witness::GuaranteeViolated { .. })));
        let f = Family::new("L", FamilyTemplate::Lens, 3, [Guarantee::AllOdd]).unwrap();
        assert_eq!(Sample::of_family(&f, 4).violation_of(Guarantee::AllOdd, &[]), None);
    }

    #[test]
    fn distinct_against_named_blocks() {
        let f = Family::new("L", FamilyTemplate::Lens, 3, [Guarantee::Distinct]).unwrap();
        let s = Sample::of_family(&f, 4);
        assert_eq!(s.violation_of(Guarantee::Distinct, &[]), None);
        let clash = lens_block(5, 2).unwrap();
        assert!(s.violation_of(Guarantee::Distinct, &[clash]).is_some());
    }

    #[test]
    fn missing_guarantee_is_undecidable() {
        let f = Family::new("L", FamilyTemplate::Lens, 3, []).unwrap();
        let mut out = VerdictBuilder::default();
        Sample::of_family(&f, 4).require(Guarantee::Distinct, &[], &mut out);
        assert_eq!(out.finish().status, Status::UndecidableAtDepth);
    }
}

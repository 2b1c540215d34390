use std::collections::BTreeSet;

use super::guarantees::Sample;
use super::{Assumption, Verdict, Witness};
use crate::abelian::PrimePower;
use crate::blocks::Block;
use crate::groups::FactorLabel;
use crate::pattern::{Catalog, Family, Guarantee};

/// Family member indexed by the prime that `label` or `q` mentions, if it lies past
/// the sample. Members' invariants involve only their own prime.
fn unsampled_member(family: Option<&Family>, p: u64, last_sampled: u64) -> Option<Block> {
    let family = family?;
    (p > last_sampled && family.contains_prime(p)).then(|| family.member(p).expect("family prime"))
}

fn label_prime(label: &FactorLabel) -> Option<u64> {
    match label {
        FactorLabel::FiniteCyclic(n) => Some(*n),
        _ => None,
    }
}

/// Least `(r, q)` such that `Z_q` is a summand of `H_r(b)` and of no other block.
fn distinguishing_summand(
    b: &Block,
    others: &[&Block],
    family: Option<&Family>,
    last_sampled: u64,
) -> Option<(u32, PrimePower)> {
    b.homology_groups().find_map(|(r, g)| {
        g.torsion()
            .keys()
            .copied()
            .find(|q| {
                let absent = |o: &Block| o.homology(r).is_none_or(|h| h.count_summands(q) == 0);
                others.iter().all(|o| absent(o))
                    && unsampled_member(family, q.prime(), last_sampled)
                        .is_none_or(|m| m.name() == b.name() || absent(&m))
            })
            .map(|q| (r, q))
    })
}

/// A catalog is non-repeating when no two blocks share a free factor and every
/// simply connected block owns a prime-power homology summand that no other block has.
///
/// Named blocks are compared exactly, including against every family member. Family
/// members are compared with each other on the first `depth` members, and the
/// family's `distinct` guarantee covers the rest.
pub fn check_non_repeating(s: &Catalog, depth: usize) -> Verdict {
    let sample = s.family().map(|f| Sample::of_family(f, depth));
    let mut pool: Vec<&Block> = s.blocks().values().collect();
    if let Some(sample) = &sample {
        pool.extend(sample.members.iter().map(|(_, b, _)| b));
    }
    let last_sampled = sample.as_ref().and_then(|s| s.members.last()).map_or(0, |m| m.0);
    let family = s.family();

    if let Some(expected) = pool.first().map(|b| b.dim()) {
        let mismatched: Vec<Witness> = pool
            .iter()
            .filter(|b| b.dim() != expected)
            .map(|b| Witness::DimensionMismatch { block: b.name().to_string(), dim: b.dim(), expected })
            .collect();
        if !mismatched.is_empty() {
            return Verdict::refuted(mismatched);
        }
    }

    let mut violations: BTreeSet<Witness> = BTreeSet::new();
    for (i, a) in pool.iter().enumerate() {
        for b in &pool[i + 1..] {
            for label in a.pi1().shared_factors(b.pi1()) {
                violations.insert(Witness::SharedFactor {
                    left: a.name().to_string(),
                    right: b.name().to_string(),
                    label: label.clone(),
                });
            }
        }
        if i < s.blocks().len() {
            for label in a.pi1().factors().keys() {
                let Some(member) = label_prime(label).and_then(|p| unsampled_member(family, p, last_sampled)) else {
                    continue;
                };
                if !member.pi1().count_factor(label).is_zero() {
                    violations.insert(Witness::SharedFactor {
                        left: a.name().to_string(),
                        right: member.name().to_string(),
                        label: label.clone(),
                    });
                }
            }
        }
    }

    let mut evidence = Vec::new();
    for (i, b) in pool.iter().enumerate() {
        if !b.is_simply_connected() {
            continue;
        }
        let others: Vec<&Block> = pool.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, o)| *o).collect();
        match distinguishing_summand(b, &others, family, last_sampled) {
            Some((r, q)) => {
                evidence.push(Witness::DistinguishingSummand { block: b.name().to_string(), r, prime_power: q })
            }
            None => {
                violations.insert(Witness::NoDistinguishingSummand { block: b.name().to_string() });
            }
        }
    }

    if !violations.is_empty() {
        return Verdict::refuted(violations.into_iter().collect());
    }
    let mut assumptions = Vec::new();
    if let (Some(sample), Some(family)) = (&sample, family) {
        evidence.push(sample.witness());
        if family.declares(Guarantee::Distinct) {
            assumptions.push(Assumption::family(family.name(), Guarantee::Distinct));
        } else {
            return Verdict::undecidable(vec![Witness::GuaranteeMissing {
                family: family.name().to_string(),
                guarantee: Guarantee::Distinct,
            }]);
        }
    }
    Verdict::certified(evidence, assumptions)
}

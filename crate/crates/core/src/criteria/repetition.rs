use std::fmt;

use serde::Serialize;

use super::{CriteriaError, Verdict, Witness};
use crate::abelian::PrimePower;
use crate::blocks::Block;
use crate::groups::{ExtendedCount, FactorLabel};
use crate::pattern::{BlockId, SumManifold};

/// A cyclic summand of a block's homology.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Summand {
    Free,
    Torsion { prime_power: PrimePower },
}

impl fmt::Display for Summand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Summand::Free => f.write_str("Z"),
            Summand::Torsion { prime_power } => write!(f, "Z_{prime_power}"),
        }
    }
}

/// The invariant that attains the minimum in the counting bound.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "via", rename_all = "snake_case")]
pub enum BoundSource {
    Factor { label: FactorLabel, in_manifold: ExtendedCount, in_block: u64 },
    Summand { r: u32, summand: Summand, in_manifold: ExtendedCount, in_block: u64 },
}

/// Upper bound on the number of pairwise disjoint deleted copies of a block.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Bound {
    pub value: ExtendedCount,
    pub source: BoundSource,
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            BoundSource::Factor { label, in_manifold, in_block } => write!(
                f,
                "at most {} disjoint deleted copies: free factor {label} occurs {in_manifold} times in the manifold and {in_block} times in the block",
                self.value
            ),
            BoundSource::Summand { r, summand, in_manifold, in_block } => write!(
                f,
                "at most {} disjoint deleted copies: {summand} occurs {in_manifold} times in H_{r} of the manifold and {in_block} times in the block",
                self.value
            ),
        }
    }
}

fn keep_least(best: &mut Option<Bound>, candidate: Bound) {
    if best.as_ref().is_none_or(|b| candidate.value < b.value) {
        *best = Some(candidate);
    }
}

/// Disjoint deleted copies of `b` each contribute their free factors to `π₁(W)` and
/// their cyclic summands to `H_r(W)`, so the number of copies is at most the least
/// ratio of multiplicities. Ties go to the first label, or the least `(r, summand)`.
pub fn max_disjoint_deleted_blocks_bound(w: &SumManifold, b: &Block) -> Result<Bound, CriteriaError> {
    if b.dim() != w.dim() {
        return Err(CriteriaError::DimensionMismatch { block: b.name().to_string(), dim: b.dim(), expected: w.dim() });
    }
    if b.is_trivial() {
        return Err(CriteriaError::TrivialBlock(b.name().to_string()));
    }
    let mut best: Option<Bound> = None;
    if !b.is_simply_connected() {
        let pi1 = w.fundamental_group()?;
        for (label, count) in b.pi1().factors() {
            let in_block = count.finite().expect("block multiplicities are finite");
            let in_manifold = pi1.count_factor(label);
            let source = BoundSource::Factor { label: label.clone(), in_manifold, in_block };
            keep_least(&mut best, Bound { value: in_manifold.div_floor(in_block), source });
        }
    } else {
        for (r, g) in b.homology_groups() {
            if g.is_trivial() {
                continue;
            }
            let h = w.homology(r)?;
            if g.rank() > 0 {
                let source =
                    BoundSource::Summand { r, summand: Summand::Free, in_manifold: h.rank(), in_block: g.rank() };
                keep_least(&mut best, Bound { value: h.rank().div_floor(g.rank()), source });
            }
            for (q, &c) in g.torsion() {
                let in_manifold = h.multiplicity(q);
                let summand = Summand::Torsion { prime_power: *q };
                let source = BoundSource::Summand { r, summand, in_manifold, in_block: c };
                keep_least(&mut best, Bound { value: in_manifold.div_floor(c), source });
            }
        }
    }
    Ok(best.expect("non-trivial blocks have a factor or a summand"))
}

/// Certified when `W` contains a deleted copy of the block and the counting bound
/// is finite.
pub fn repeats_finitely(w: &SumManifold, id: &BlockId) -> Result<Verdict, CriteriaError> {
    let block = w.catalog().resolve(id).map_err(CriteriaError::from)?;
    let usage = w.usage_count(id)?;
    let bound = max_disjoint_deleted_blocks_bound(w, &block)?;
    let finite = bound.value.is_finite();
    let witnesses =
        vec![Witness::Usage { block: id.to_string(), usage }, Witness::CountingBound { block: id.to_string(), bound }];
    Ok(if !usage.is_zero() && finite { Verdict::certified(witnesses, Vec::new()) } else { Verdict::refuted(witnesses) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::FgAbelianGroup;
    use crate::blocks::{lens_block, smale_block, suspension_block};
    use crate::criteria::Status;
    use crate::pattern::{Assignment, Catalog, FiniteGraph, Pattern, TreeShape};

    fn pp(p: u64) -> PrimePower {
        PrimePower::new(p, 1).unwrap()
    }

    fn finite(blocks: Vec<Block>, names: &[&str]) -> SumManifold {
        let ids = names.iter().map(|n| BlockId::named(*n)).collect();
        SumManifold::new(Pattern::Finite(FiniteGraph::path(ids).unwrap()), Catalog::from_blocks(blocks).unwrap())
            .unwrap()
    }

    #[test]
    fn lens_counting() {
        let l3 = lens_block(3, 1).unwrap().renamed("A");
        let l5 = lens_block(5, 1).unwrap().renamed("B");
        let w = finite(vec![l3.clone(), l5], &["A", "B", "A", "B", "A"]);
        let bound = max_disjoint_deleted_blocks_bound(&w, &l3).unwrap();
        assert_eq!(bound.value, ExtendedCount::Finite(3));
        assert!(matches!(bound.source, BoundSource::Factor { label: FactorLabel::FiniteCyclic(3), .. }));
        let unused = lens_block(7, 1).unwrap();
        assert_eq!(max_disjoint_deleted_blocks_bound(&w, &unused).unwrap().value, ExtendedCount::ZERO);
    }

    #[test]
    fn homology_counting_ties_break_low() {
        let s = suspension_block(6, pp(3), 2).unwrap().renamed("S");
        let w = finite(vec![s.clone()], &["S", "S"]);
        let bound = max_disjoint_deleted_blocks_bound(&w, &s).unwrap();
        assert_eq!(bound.value, ExtendedCount::Finite(2));
        assert!(matches!(bound.source, BoundSource::Summand { r: 2, .. }));
    }

    #[test]
    fn trivial_and_mismatched_blocks_rejected() {
        let s = suspension_block(6, pp(3), 2).unwrap().renamed("S");
        let w = finite(vec![s], &["S"]);
        assert!(matches!(
            max_disjoint_deleted_blocks_bound(&w, &Block::sphere(6).unwrap()),
            Err(CriteriaError::TrivialBlock(_))
        ));
        assert!(matches!(
            max_disjoint_deleted_blocks_bound(&w, &lens_block(3, 1).unwrap()),
            Err(CriteriaError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn smale_blocks_divide_by_two() {
        let m = smale_block(&FgAbelianGroup::cyclic(3)).unwrap().renamed("M");
        let w = finite(vec![m.clone()], &["M", "M", "M"]);
        let bound = max_disjoint_deleted_blocks_bound(&w, &m).unwrap();
        assert_eq!(bound.value, ExtendedCount::Finite(3));
        assert!(matches!(
            bound.source,
            BoundSource::Summand { in_manifold: ExtendedCount::Finite(6), in_block: 2, .. }
        ));
    }

    #[test]
    fn repeated_ray_repeats_infinitely() {
        let catalog = Catalog::from_blocks([lens_block(3, 1).unwrap().renamed("L")])
            .unwrap()
            .with_usage("L", ExtendedCount::Omega);
        let w =
            SumManifold::new(Pattern::Tree { shape: TreeShape::Ray, assignment: Assignment::constant("L") }, catalog)
                .unwrap();
        let v = repeats_finitely(&w, &BlockId::named("L")).unwrap();
        assert_eq!(v.status, Status::Refuted);
    }

    #[test]
    fn unused_block_is_refuted() {
        let a = suspension_block(6, pp(3), 2).unwrap().renamed("A");
        let b = suspension_block(6, pp(5), 2).unwrap().renamed("B");
        let w = finite(vec![a, b], &["A"]);
        assert_eq!(repeats_finitely(&w, &BlockId::named("B")).unwrap().status, Status::Refuted);
        assert_eq!(repeats_finitely(&w, &BlockId::named("A")).unwrap().status, Status::Certified);
    }
}

use std::fmt;

use serde::Serialize;

use super::guarantees::Sample;
use super::{
    check_non_periodic, check_non_repeating, repeats_finitely, Assumption, CriteriaError, Mode, Status, Verdict,
    VerdictBuilder, Witness,
};
use crate::blocks::Block;
use crate::groups::FactorLabel;
use crate::pattern::{BlockId, Catalog, Guarantee, SumManifold};

pub const CONCLUSION: &str = "not homeomorphic to any leaf of a codimension one foliation of a compact manifold";

const SIGNATURE_LIMITATION: &str = "non-homeomorphic blocks are modeled as blocks with distinct invariant signatures; \
     blocks with equal signatures are indistinguishable in this model";
const NOMINAL_LIMITATION: &str =
    "free factors are compared nominally: two factors are isomorphic exactly when their labels agree";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    TheoremA,
    TheoremB,
    TheoremC,
}

impl Theorem {
    pub fn tag(self) -> &'static str {
        match self {
            Theorem::TheoremA => "theorem-a",
            Theorem::TheoremB => "theorem-b",
            Theorem::TheoremC => "theorem-c",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hypothesis {
    pub name: String,
    pub statement: String,
    pub verdict: Verdict,
}

impl Hypothesis {
    fn new(name: &str, statement: &str, verdict: Verdict) -> Self {
        Hypothesis { name: name.to_string(), statement: statement.to_string(), verdict }
    }
}

/// Which hypotheses of a non-leaf theorem hold for a manifold, and on what grounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub theorem: Theorem,
    pub manifold: String,
    pub depth: u64,
    pub status: Status,
    /// First hypothesis whose verdict determines a non-certified status.
    pub decided_by: Option<String>,
    pub conclusion: Option<String>,
    pub hypotheses: Vec<Hypothesis>,
    pub assumptions: Vec<Assumption>,
    pub model_limitations: Vec<String>,
}

impl Certificate {
    fn assemble(theorem: Theorem, w: &SumManifold, depth: usize, hypotheses: Vec<Hypothesis>) -> Self {
        let status = hypotheses.iter().fold(Status::Certified, |s, h| s.combine(h.verdict.status));
        let decided_by = hypotheses
            .iter()
            .find(|h| status != Status::Certified && h.verdict.status == status)
            .map(|h| h.name.clone());
        let mut assumptions: Vec<Assumption> =
            hypotheses.iter().flat_map(|h| h.verdict.assumptions.iter().cloned()).collect();
        assumptions.sort();
        assumptions.dedup();
        Certificate {
            theorem,
            manifold: w.describe(),
            depth: depth as u64,
            status,
            decided_by,
            conclusion: (status == Status::Certified).then(|| CONCLUSION.to_string()),
            hypotheses,
            assumptions,
            model_limitations: model_limitations(w),
        }
    }
}

fn model_limitations(w: &SumManifold) -> Vec<String> {
    let mut out = vec![SIGNATURE_LIMITATION.to_string(), NOMINAL_LIMITATION.to_string()];
    let mut filled: Vec<String> = w
        .used_blocks()
        .map(|used| used.into_iter().filter(|(b, _)| b.duality_filled()).map(|(b, _)| b.name().to_string()).collect())
        .unwrap_or_default();
    if let Some(tail) = w.family_tail() {
        let family = tail.family();
        if family.member(family.first_prime()).is_ok_and(|b| b.duality_filled()) {
            filled.push(format!("{}[p]", family.name()));
        }
    }
    if !filled.is_empty() {
        out.push(format!(
            "homology of {} beyond the preset degree is filled in by the torsion-duality convention",
            filled.join(", ")
        ));
    }
    out
}

fn infinite_tree(w: &SumManifold) -> Hypothesis {
    let verdict = if w.is_infinite_tree() {
        Verdict::certified(Vec::new(), Vec::new())
    } else {
        Verdict::refuted(vec![Witness::NotAnInfiniteTree { pattern: w.describe() }])
    };
    Hypothesis::new("infinite-tree", "the pattern is an infinite locally finite tree", verdict)
}

/// `π₁` of every block, and of every family member, is generated by torsion elements
/// of odd order.
fn odd_torsion(blocks: &[Block], family: Option<Sample<'_>>) -> Hypothesis {
    let mut out = VerdictBuilder::default();
    let sampled = family.as_ref().map(|s| s.members.iter().map(|(_, b, _)| b)).into_iter().flatten();
    for b in blocks.iter().chain(sampled) {
        for label in b.pi1().odd_torsion_obstructions() {
            out.refute(Witness::OddTorsionObstruction { block: b.name().to_string(), label: label.clone() });
        }
        for label in b.pi1().factors().keys() {
            if let FactorLabel::Opaque { name, odd_torsion_generated: true } = label {
                out.assume(Assumption::opaque_label(name));
            }
        }
    }
    if let (Some(sample), false) = (&family, out.is_refuted()) {
        out.evidence(sample.witness());
        if !sample.family.declares(Guarantee::AllOdd) {
            out.undecided(Witness::GuaranteeMissing {
                family: sample.family.name().to_string(),
                guarantee: Guarantee::AllOdd,
            });
        } else if let Some(w) = sample.violation_of(Guarantee::AllOdd, &[]) {
            out.refute(w);
        } else {
            out.assume(Assumption::family(sample.family.name(), Guarantee::AllOdd));
        }
    }
    Hypothesis::new(
        "odd-torsion",
        "every block has fundamental group generated by torsion elements of odd order",
        out.finish(),
    )
}

fn used_named_blocks(w: &SumManifold) -> Result<Vec<Block>, CriteriaError> {
    Ok(w.used_blocks()?.into_iter().map(|(b, _)| b).collect())
}

/// Certifies the hypotheses of the non-leaf theorem for sum-manifolds over infinite
/// trees: odd-torsion fundamental groups and infinitely many pairwise distinct blocks
/// that repeat finitely.
pub fn check_theorem_a(w: &SumManifold, depth: usize) -> Result<Certificate, CriteriaError> {
    if depth == 0 {
        return Err(CriteriaError::ZeroDepth);
    }
    let named = used_named_blocks(w)?;
    let tail = w.family_tail();
    let mut hypotheses = vec![infinite_tree(w), odd_torsion(&named, tail.as_ref().map(|t| Sample::of_tail(t, depth)))];

    let mut out = VerdictBuilder::default();
    match &tail {
        None => out.refute(Witness::NoInfiniteFamily),
        Some(tail) => {
            let sample = Sample::of_tail(tail, depth);
            let mut seen = std::collections::BTreeMap::new();
            for (_, b, _) in &sample.members {
                if let Some(other) = seen.insert(b.signature(), b.name().to_string()) {
                    out.refute(Witness::SignatureCollision {
                        left: other,
                        right: b.name().to_string(),
                        signature: b.signature().to_string(),
                    });
                }
            }
            for (p, _, _) in &sample.members {
                out.absorb(repeats_finitely(
                    w,
                    &BlockId::Member { family: tail.family().name().to_string(), prime: *p },
                )?);
            }
            if !out.is_refuted() {
                out.evidence(sample.witness());
                sample.require(Guarantee::Distinct, &named, &mut out);
                sample.require(Guarantee::FiniteNonzero, &named, &mut out);
            }
        }
    }
    hypotheses.push(Hypothesis::new(
        "infinitely-many-blocks-repeat-finitely",
        "infinitely many pairwise non-homeomorphic blocks repeat finitely",
        out.finish(),
    ));
    Ok(Certificate::assemble(Theorem::TheoremA, w, depth, hypotheses))
}

/// Checks non-periodicity of `π_k` or `H_k`; a non-periodic manifold then has to
/// satisfy the hypotheses of [`check_theorem_a`], which are checked as well.
pub fn check_theorem_b(w: &SumManifold, k: u32, mode: Mode, depth: usize) -> Result<Certificate, CriteriaError> {
    let verdict = check_non_periodic(w, k, mode, depth)?;
    let certified = verdict.is_certified();
    let mut hypotheses = vec![Hypothesis::new(
        "non-periodic",
        &format!("the manifold is non-periodic in {mode} in degree {k}"),
        verdict,
    )];
    if certified {
        hypotheses.extend(check_theorem_a(w, depth)?.hypotheses);
    }
    Ok(Certificate::assemble(Theorem::TheoremB, w, depth, hypotheses))
}

/// Certifies the hypotheses of the non-leaf theorem for sum-manifolds whose blocks
/// come from a non-repeating catalog `s`: the blocks used a finite nonzero number of
/// times must form an infinite set.
pub fn check_theorem_c(w: &SumManifold, s: &Catalog, depth: usize) -> Result<Certificate, CriteriaError> {
    if depth == 0 {
        return Err(CriteriaError::ZeroDepth);
    }
    let named = used_named_blocks(w)?;
    for (id, b, _) in w.used_ids()? {
        let known = match &id {
            BlockId::Named(name) => s.block(name).map(Block::signature) == Some(b.signature()),
            BlockId::Member { .. } => s.family() == w.catalog().family(),
        };
        if !known {
            return Err(CriteriaError::NotInCatalog(id.to_string()));
        }
    }
    let tail = w.family_tail();
    if let Some(t) = &tail {
        if s.family() != Some(t.family()) {
            return Err(CriteriaError::NotInCatalog(t.family().name().to_string()));
        }
    }

    let catalog_blocks: Vec<Block> = s.blocks().values().cloned().collect();
    let mut hypotheses = vec![
        infinite_tree(w),
        Hypothesis::new(
            "non-repeating",
            "no two catalog blocks share a prime free factor, and every simply connected block has a prime-power homology summand no other block has",
            check_non_repeating(s, depth),
        ),
        odd_torsion(&catalog_blocks, s.family().map(|f| Sample::of_family(f, depth))),
    ];

    let mut terminal = VerdictBuilder::default();
    let mut chained = VerdictBuilder::default();
    let finite_nonzero: Vec<(BlockId, Block)> =
        w.used_ids()?.into_iter().filter(|(_, _, u)| u.is_finite()).map(|(id, b, _)| (id, b)).collect();
    for (id, _) in &finite_nonzero {
        chained.absorb(repeats_finitely(w, id)?);
    }
    match &tail {
        None => terminal.refute(Witness::TerminalSetFinite {
            blocks: finite_nonzero.iter().map(|(id, _)| id.to_string()).collect(),
        }),
        Some(tail) => {
            let sample = Sample::of_tail(tail, depth);
            terminal.evidence(sample.witness());
            sample.require(Guarantee::FiniteNonzero, &named, &mut terminal);
            for (p, _, usage) in &sample.members {
                if !usage.is_zero() && usage.is_finite() {
                    let id = BlockId::Member { family: tail.family().name().to_string(), prime: *p };
                    chained.absorb(repeats_finitely(w, &id)?);
                }
            }
            chained.evidence(sample.witness());
        }
    }
    hypotheses.push(Hypothesis::new(
        "finitely-used-blocks-infinite",
        "the set of blocks used a finite non-zero number of times is infinite",
        terminal.finish(),
    ));
    hypotheses.push(Hypothesis::new(
        "finitely-used-blocks-repeat-finitely",
        "every block used a finite non-zero number of times repeats finitely, as the non-repeating hypothesis implies",
        chained.finish(),
    ));
    Ok(Certificate::assemble(Theorem::TheoremC, w, depth, hypotheses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{FgAbelianGroup, PrimePower};
    use crate::blocks::{lens_block, smale_block};
    use crate::groups::{ExtendedCount, FreeProductClass};
    use crate::pattern::{Assignment, Family, FamilyTemplate, FiniteGraph, Pattern, TreeShape};
    use std::collections::BTreeMap;

    const ALL: [Guarantee; 3] = [Guarantee::AllOdd, Guarantee::Distinct, Guarantee::FiniteNonzero];

    fn family_ray(template: FamilyTemplate, extra: Option<(Block, u64)>) -> SumManifold {
        let family = Family::new("F", template, 3, ALL).unwrap();
        let mut catalog = Catalog::new().with_family(family).unwrap();
        let mut assignment = Assignment::triangular();
        if let Some((b, vertex)) = extra {
            let name = b.name().to_string();
            catalog = catalog.with_block(b).unwrap().with_usage(name.clone(), ExtendedCount::ONE);
            assignment = assignment.with_insert(vertex, name);
        }
        SumManifold::new(Pattern::Tree { shape: TreeShape::Ray, assignment }, catalog).unwrap()
    }

    fn suspension6() -> FamilyTemplate {
        FamilyTemplate::Suspension { dim: 6, exponent: 1, k: 2 }
    }

    fn all_assumptions() -> Vec<Assumption> {
        ALL.iter().map(|g| Assumption::family("F", *g)).collect()
    }

    #[test]
    fn six_dimensional_family_certifies_everything() {
        let w = family_ray(suspension6(), None);
        let a = check_theorem_a(&w, 16).unwrap();
        assert_eq!(a.status, Status::Certified, "{a:#?}");
        assert_eq!(a.conclusion.as_deref(), Some(CONCLUSION));
        let c = check_theorem_c(&w, w.catalog(), 16).unwrap();
        assert_eq!(c.status, Status::Certified, "{c:#?}");
        assert_eq!(c.assumptions, all_assumptions());
        assert!(c.model_limitations.iter().any(|l| l.contains("torsion-duality")));
        for mode in [Mode::Homotopy, Mode::Homology] {
            assert_eq!(check_theorem_b(&w, 2, mode, 16).unwrap().status, Status::Certified);
        }
    }

    #[test]
    fn five_dimensional_family() {
        let w = family_ray(FamilyTemplate::Smale { exponent: 1 }, None);
        let b = check_theorem_b(&w, 2, Mode::Homotopy, 16).unwrap();
        assert_eq!(b.status, Status::Certified, "{b:#?}");
        assert_eq!(b.assumptions, all_assumptions());
        assert!(!b.model_limitations.iter().any(|l| l.contains("torsion-duality")));
    }

    #[test]
    fn even_torsion_block_flips_both() {
        for label in [FactorLabel::FiniteCyclic(2), FactorLabel::InfiniteCyclic] {
            let bad = Block::new("X", 6, FreeProductClass::single(label.clone()), BTreeMap::new()).unwrap();
            let w = family_ray(suspension6(), Some((bad, 5)));
            let a = check_theorem_a(&w, 16).unwrap();
            assert_eq!(a.status, Status::Refuted);
            assert_eq!(a.decided_by.as_deref(), Some("odd-torsion"));
            assert_eq!(
                a.hypotheses[1].verdict.witnesses,
                vec![Witness::OddTorsionObstruction { block: "X".into(), label: label.clone() }]
            );
            let c = check_theorem_c(&w, w.catalog(), 16).unwrap();
            assert_eq!(c.status, Status::Refuted);
            assert_eq!(c.decided_by.as_deref(), Some("odd-torsion"));
        }
    }

    #[test]
    fn finite_patterns_are_refuted_on_the_tree_hypothesis() {
        let catalog = Catalog::from_blocks([lens_block(3, 1).unwrap().renamed("L")]).unwrap();
        let w =
            SumManifold::new(Pattern::Finite(FiniteGraph::path(vec![BlockId::named("L")]).unwrap()), catalog).unwrap();
        let a = check_theorem_a(&w, 4).unwrap();
        assert_eq!(a.status, Status::Refuted);
        assert_eq!(a.decided_by.as_deref(), Some("infinite-tree"));
        assert_eq!(a.conclusion, None);
    }

    #[test]
    fn all_omega_usage_leaves_terminal_set_empty() {
        let m = smale_block(&FgAbelianGroup::cyclic(3)).unwrap().renamed("M");
        let catalog = Catalog::from_blocks([m]).unwrap().with_usage("M", ExtendedCount::Omega);
        let w =
            SumManifold::new(Pattern::Tree { shape: TreeShape::Ray, assignment: Assignment::constant("M") }, catalog)
                .unwrap();
        let c = check_theorem_c(&w, w.catalog(), 4).unwrap();
        assert_eq!(c.status, Status::Refuted);
        assert_eq!(c.decided_by.as_deref(), Some("finitely-used-blocks-infinite"));
        let b = check_theorem_b(&w, 2, Mode::Homotopy, 4).unwrap();
        assert_eq!(b.status, Status::Refuted);
        assert_eq!(b.hypotheses.len(), 1);
    }

    #[test]
    fn violating_catalog_refutes_theorem_c() {
        let clash = suspension_like(5);
        let w = family_ray(suspension6(), Some((clash, 2)));
        let c = check_theorem_c(&w, w.catalog(), 16).unwrap();
        assert_eq!(c.status, Status::Refuted);
        assert_eq!(c.decided_by.as_deref(), Some("non-repeating"));
    }

    fn suspension_like(p: u64) -> Block {
        crate::blocks::suspension_block(6, PrimePower::new(p, 1).unwrap(), 2).unwrap().renamed("Dup")
    }

    #[test]
    fn missing_guarantees_are_undecidable() {
        let family = Family::new("F", suspension6(), 3, [Guarantee::AllOdd]).unwrap();
        let catalog = Catalog::new().with_family(family).unwrap();
        let w =
            SumManifold::new(Pattern::Tree { shape: TreeShape::Ray, assignment: Assignment::triangular() }, catalog)
                .unwrap();
        let a = check_theorem_a(&w, 8).unwrap();
        assert_eq!(a.status, Status::UndecidableAtDepth);
        assert_eq!(a.decided_by.as_deref(), Some("infinitely-many-blocks-repeat-finitely"));
    }

    #[test]
    fn lens_tree_certifies_theorem_a() {
        let family = Family::new("L", FamilyTemplate::Lens, 3, ALL).unwrap();
        let catalog = Catalog::new().with_family(family).unwrap();
        let w = SumManifold::new(
            Pattern::Tree { shape: TreeShape::BinaryTree, assignment: Assignment::triangular() },
            catalog,
        )
        .unwrap();
        let a = check_theorem_a(&w, 16).unwrap();
        assert_eq!(a.status, Status::Certified, "{a:#?}");
        let c = check_theorem_c(&w, w.catalog(), 16).unwrap();
        assert_eq!(c.status, Status::Certified, "{c:#?}");
    }
}

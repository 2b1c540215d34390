//! Brute-force checks of the invariant calculus on finite instances.
//!
//! Every check here takes a path that does not go through the code it checks:
//! cokernels are enumerated rather than eliminated, and finite sums are rebuilt
//! from stacked presentations of primary forms.

mod enumeration;
pub mod random;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

pub use enumeration::cokernel_enumeration;

use crate::abelian::{from_presentation, FgAbelianGroup, IntegerPresentation};
use crate::blocks::Block;
use crate::criteria::{max_disjoint_deleted_blocks_bound, CriteriaError};
use crate::groups::ExtendedCount;
use crate::pattern::{BlockId, Pattern, PatternError, SumManifold, SymbolicAbelianGroup};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("presentation is {rows}x{cols}; enumeration needs a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("determinant is zero, so the cokernel is infinite")]
    Singular,
    #[error("enumeration reached {size} elements, over the cap of {cap}")]
    TooLarge { size: u64, cap: u64 },
    #[error("matrix entry or determinant out of range for enumeration")]
    EntryTooLarge,
    #[error("enumeration is inconsistent: {0}")]
    Inconsistent(String),
    #[error("{0} needs a finite pattern")]
    NeedsFinite(&'static str),
    #[error("truncation checks need an infinite tree")]
    NeedsInfinite,
    #[error("depths must be nonempty, positive and strictly increasing")]
    BadDepths,
    #[error("generator is nondeterministic at vertex {vertex}: {first} versus {second}")]
    Nondeterministic { vertex: u64, first: BlockId, second: BlockId },
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
}

/// Size limits for brute-force work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OracleCaps {
    /// Elements enumerated per primary component of a cokernel.
    pub enumeration: u64,
    pub tree_vertices: usize,
    pub matrix_dim: usize,
    pub matrix_entry: i64,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps { enumeration: 10_000, tree_vertices: 12, matrix_dim: 6, matrix_entry: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub check: String,
    pub instance: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
    pub seed: Option<u64>,
}

impl OracleReport {
    fn new(check: &str, instance: String, expected: String, computed: String, pass: bool) -> Self {
        OracleReport { check: check.to_string(), instance, expected, computed, pass, seed: None }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} [{}]", if self.pass { "PASS" } else { "FAIL" }, self.check, self.instance)?;
        if let Some(seed) = self.seed {
            write!(f, " seed={seed}")?;
        }
        write!(f, ": expected {}, computed {}", self.expected, self.computed)
    }
}

/// Compares SNF against enumeration on one matrix. Matrices with an infinite
/// cokernel, or one over the enumeration cap, only get the divisibility chain checked.
pub fn snf_check(m: &IntegerPresentation, cap: u64) -> OracleReport {
    let rows: Vec<String> =
        m.rows().iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")).collect();
    let instance = format!("[{}]", rows.join("; "));
    let factors = crate::abelian::smith_normal_form(m);
    let chain = factors.windows(2).all(|w| w[1].is_zero() || (!w[0].is_zero() && (&w[1] % &w[0]).is_zero()));
    let snf = from_presentation(m);
    match cokernel_enumeration(m, cap) {
        Ok(g) => {
            // enumeration already matched |G| against |det|
            let product: BigUint = factors.iter().product();
            let pass = chain && g == snf && g.order() == Some(product);
            OracleReport::new("snf-vs-enumeration", instance, g.to_string(), snf.to_string(), pass)
        }
        Err(e @ (OracleError::NotSquare { .. } | OracleError::Singular | OracleError::TooLarge { .. })) => {
            let factors: Vec<String> = factors.iter().map(|f| f.to_string()).collect();
            OracleReport::new(
                "snf-divisibility",
                instance,
                format!("divisibility chain; not enumerated: {e}"),
                format!("[{}]", factors.join(", ")),
                chain,
            )
        }
        Err(e) => OracleReport::new("snf-vs-enumeration", instance, "enumerable cokernel".into(), e.to_string(), false),
    }
}

fn as_finite_group(h: &SymbolicAbelianGroup) -> Option<FgAbelianGroup> {
    if h.tail().is_some() {
        return None;
    }
    let torsion: Option<Vec<_>> = h.head().iter().map(|(q, c)| c.finite().map(|c| (*q, c))).collect();
    Some(FgAbelianGroup::from_parts(h.rank().finite()?, torsion?))
}

/// Random unimodular row and column operations; the cokernel is unchanged.
fn scramble(m: &mut IntegerPresentation, rng: &mut ChaCha8Rng) {
    let (rows, cols) = (m.relations(), m.generators());
    let ops = 2 * (rows + cols);
    let rows_mut = m.rows_mut();
    for _ in 0..ops {
        let c = BigInt::from(rng.gen_range(-2i64..=2));
        if rng.gen_bool(0.5) && rows > 1 {
            let (i, j) = (rng.gen_range(0..rows), rng.gen_range(0..rows));
            if i == j {
                continue;
            }
            let src = rows_mut[j].clone();
            for (x, y) in rows_mut[i].iter_mut().zip(&src) {
                *x += &c * y;
            }
        } else if cols > 1 {
            let (a, b) = (rng.gen_range(0..cols), rng.gen_range(0..cols));
            if a == b {
                continue;
            }
            for row in rows_mut.iter_mut() {
                let add = &c * &row[b];
                row[a] += add;
            }
        }
    }
}

/// `H_r` of a finite sum from the block-diagonal stack of the blocks' canonical
/// presentations, plus one free generator per cycle in degree `d - 1`.
///
/// With `scramble_seed`, the stack is first mixed by seeded unimodular operations.
pub fn stacked_presentation_check(
    w: &SumManifold,
    r: u32,
    scramble_seed: Option<u64>,
) -> Result<OracleReport, OracleError> {
    let Pattern::Finite(graph) = w.pattern() else {
        return Err(OracleError::NeedsFinite("stacked_presentation_check"));
    };
    let computed = w.homology(r)?;
    let mut stack = IntegerPresentation::free(0);
    for id in graph.vertices() {
        let block = w.catalog().resolve(id)?;
        let g = block.homology(r).expect("degree checked by homology");
        stack = stack.stack(&IntegerPresentation::canonical(g));
    }
    if r == w.dim() - 1 {
        stack = stack.stack(&IntegerPresentation::free(w.cycle_rank() as usize));
    }
    if let Some(seed) = scramble_seed {
        scramble(&mut stack, &mut ChaCha8Rng::seed_from_u64(seed));
    }
    let expected = from_presentation(&stack);
    let pass = as_finite_group(&computed).as_ref() == Some(&expected);
    let report = OracleReport::new(
        "stacked-presentation",
        format!("H_{r} of {}", w.describe()),
        expected.to_string(),
        computed.to_string(),
        pass,
    );
    Ok(match scramble_seed {
        Some(seed) => report.with_seed(seed),
        None => report,
    })
}

/// Each vertex carrying `b` yields a deleted copy of `b`, so their number cannot
/// exceed the counting bound.
pub fn counting_consistency(w: &SumManifold, b: &Block) -> Result<OracleReport, OracleError> {
    let Pattern::Finite(graph) = w.pattern() else {
        return Err(OracleError::NeedsFinite("counting_consistency"));
    };
    let lower = graph.vertices().iter().filter(|id| id.to_string() == b.name()).count() as u64;
    let bound = max_disjoint_deleted_blocks_bound(w, b)?;
    Ok(OracleReport::new(
        "counting-consistency",
        format!("{} in {}", b.name(), w.describe()),
        format!("{lower} vertices"),
        format!("bound {}", bound.value),
        ExtendedCount::Finite(lower) <= bound.value,
    ))
}

/// Vertex count after which the count of `id` no longer changes, if it ever settles.
fn settles_at(w: &SumManifold, id: &BlockId) -> Option<u64> {
    let Pattern::Tree { assignment, .. } = w.pattern() else {
        return Some(0);
    };
    match id {
        BlockId::Named(name) => assignment.named_settles_at(name),
        BlockId::Member { prime, .. } => Some(assignment.family_settles_at(w.catalog().family()?, *prime)),
    }
}

/// Block counts on the first `depths[i]` vertices, checked against the symbolic usage.
///
/// Counts must be nondecreasing, stay within a finite usage, equal it once the
/// generator has placed every copy, and grow between the first and last depth for
/// usage ω. A mismatch between sequential and direct generation is an error.
pub fn truncation_convergence(w: &SumManifold, depths: &[u64]) -> Result<OracleReport, OracleError> {
    if !w.is_infinite_tree() {
        return Err(OracleError::NeedsInfinite);
    }
    if depths.is_empty() || depths[0] == 0 || depths.windows(2).any(|d| d[0] >= d[1]) {
        return Err(OracleError::BadDepths);
    }
    let max = *depths.last().expect("nonempty");
    let first = w.vertex_blocks(max);
    let second = w.vertex_blocks(max);
    for (v, (a, b)) in first.iter().zip(&second).enumerate() {
        let direct = w.block_at(v as u64).expect("infinite pattern");
        for other in [b, &direct] {
            if a != other {
                return Err(OracleError::Nondeterministic {
                    vertex: v as u64,
                    first: a.clone(),
                    second: other.clone(),
                });
            }
        }
    }

    // occurrence vertices per block
    let mut occurrences: BTreeMap<&BlockId, Vec<u64>> = BTreeMap::new();
    for (v, id) in first.iter().enumerate() {
        occurrences.entry(id).or_default().push(v as u64);
    }
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for (id, at) in &occurrences {
        let counts: Vec<u64> = depths.iter().map(|&d| at.iter().filter(|&&v| v < d).count() as u64).collect();
        let usage = w.usage_count(id)?;
        if counts.windows(2).any(|c| c[0] > c[1]) {
            failures.push(format!("{id} decreases: {counts:?}"));
        }
        match usage {
            ExtendedCount::Finite(u) => {
                if let Some(&v) = at.get(u as usize) {
                    failures.push(format!("{id} declared {u} times, occurrence {} at vertex {v}", u + 1));
                }
                if let Some(settle) = settles_at(w, id) {
                    for (&d, &c) in depths.iter().zip(&counts) {
                        if d >= settle && c != u {
                            failures.push(format!("{id} declared {u} times, {c} among the first {d} vertices"));
                        }
                    }
                }
            }
            ExtendedCount::Omega => {
                if settles_at(w, id).is_some() {
                    failures.push(format!("{id} declared ω but the generator stops placing it"));
                } else if depths.len() > 1 && counts[0] >= counts[counts.len() - 1] {
                    failures.push(format!("{id} declared ω but its count stays at {}", counts[0]));
                }
            }
        }
        if summary.len() < 8 {
            summary.push(format!("{id}:{usage}:{counts:?}"));
        }
    }
    let instance = format!("{} at depths {depths:?}", w.describe());
    let expected = "monotone counts consistent with declared usage".to_string();
    let computed = if failures.is_empty() {
        format!("{} blocks tracked, {}", occurrences.len(), summary.join(" "))
    } else {
        failures.join("; ")
    };
    Ok(OracleReport::new("truncation-convergence", instance, expected, computed, failures.is_empty()))
}

/// Instance counts for [`random_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SuiteSizes {
    pub matrices: usize,
    pub trees: usize,
    pub graphs: usize,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        SuiteSizes { matrices: 20, trees: 10, graphs: 10 }
    }
}

/// Seeded random instances of every finite check. Instance `i` of each kind uses
/// seed `seed + i`, recorded in its report.
pub fn random_suite(seed: u64, caps: &OracleCaps, sizes: &SuiteSizes) -> Result<Vec<OracleReport>, OracleError> {
    let mut out = Vec::new();
    for i in 0..sizes.matrices as u64 {
        let s = seed.wrapping_add(i);
        let m = random::random_matrix(&mut ChaCha8Rng::seed_from_u64(s), caps);
        out.push(snf_check(&m, caps.enumeration).with_seed(s));
    }
    let catalog = random::standard_catalog();
    for i in 0..sizes.trees as u64 {
        let s = seed.wrapping_add(i);
        let w = random::random_tree(&mut ChaCha8Rng::seed_from_u64(s), &catalog, caps.tree_vertices);
        for r in 2..w.dim() {
            out.push(stacked_presentation_check(&w, r, Some(s))?);
        }
    }
    for i in 0..sizes.graphs as u64 {
        let s = seed.wrapping_add(i);
        let w = random::random_graph(&mut ChaCha8Rng::seed_from_u64(s), &catalog, caps.tree_vertices);
        for b in catalog.blocks().values() {
            out.push(counting_consistency(&w, b)?.with_seed(s));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::PrimePower;
    use crate::blocks::{lens_block, suspension_block, Block};
    use crate::groups::FreeProductClass;
    use crate::pattern::{Assignment, Catalog, Family, FamilyTemplate, FiniteGraph, Guarantee, TreeShape};

    fn susp(p: u64, name: &str) -> Block {
        suspension_block(6, PrimePower::new(p, 1).unwrap(), 2).unwrap().renamed(name)
    }

    fn path(catalog: Catalog, names: &[&str]) -> SumManifold {
        let graph = FiniteGraph::path(names.iter().map(|n| BlockId::named(*n)).collect()).unwrap();
        SumManifold::new(Pattern::Finite(graph), catalog).unwrap()
    }

    #[test]
    fn stacked_path_of_two() {
        let w = path(Catalog::from_blocks([susp(3, "A"), susp(5, "B")]).unwrap(), &["A", "B"]);
        for seed in [None, Some(7)] {
            let report = stacked_presentation_check(&w, 2, seed).unwrap();
            assert!(report.pass, "{report}");
            assert_eq!(report.expected, "Z_3 + Z_5");
        }
    }

    #[test]
    fn stacked_cycle_handle() {
        let catalog = Catalog::from_blocks([susp(3, "A")]).unwrap();
        let graph = FiniteGraph::new(vec![BlockId::named("A"); 3], vec![(0, 1), (1, 2), (2, 0)]).unwrap();
        let w = SumManifold::new(Pattern::Finite(graph), catalog).unwrap();
        let report = stacked_presentation_check(&w, 5, Some(1)).unwrap();
        assert!(report.pass, "{report}");
    }

    #[test]
    fn counting_examples() {
        let l = lens_block(3, 1).unwrap().renamed("L");
        let w = path(Catalog::from_blocks([l.clone()]).unwrap(), &["L", "L", "L"]);
        let report = counting_consistency(&w, &l).unwrap();
        assert!(report.pass);
        assert_eq!((report.expected.as_str(), report.computed.as_str()), ("3 vertices", "bound 3"));

        let free = |name: &str, rank| {
            Block::new(name, 4, FreeProductClass::trivial(), BTreeMap::from([(2, FgAbelianGroup::free(rank))])).unwrap()
        };
        let (p, q) = (free("P", 1), free("Q", 2));
        let w = path(Catalog::from_blocks([p.clone(), q.clone()]).unwrap(), &["Q", "P", "P"]);
        let report = counting_consistency(&w, &q).unwrap();
        assert!(report.pass);
        assert_eq!((report.expected.as_str(), report.computed.as_str()), ("1 vertices", "bound 2"));

        let w = path(Catalog::from_blocks([susp(3, "A"), susp(5, "B")]).unwrap(), &["A"]);
        let report = counting_consistency(&w, &susp(5, "B")).unwrap();
        assert!(report.pass);
        assert_eq!(report.computed, "bound 0");
    }

    fn prop_ray() -> SumManifold {
        let family = Family::new(
            "F",
            FamilyTemplate::Suspension { dim: 6, exponent: 1, k: 2 },
            3,
            [Guarantee::AllOdd, Guarantee::Distinct, Guarantee::FiniteNonzero],
        )
        .unwrap();
        let catalog = Catalog::new().with_family(family).unwrap();
        SumManifold::new(Pattern::Tree { shape: TreeShape::Ray, assignment: Assignment::triangular() }, catalog)
            .unwrap()
    }

    #[test]
    fn triangular_ray_converges() {
        let report = truncation_convergence(&prop_ray(), &[10, 100, 1000]).unwrap();
        assert!(report.pass, "{report}");
    }

    #[test]
    fn constant_ray_grows() {
        let catalog = Catalog::from_blocks([susp(3, "M")]).unwrap().with_usage("M", ExtendedCount::Omega);
        let w =
            SumManifold::new(Pattern::Tree { shape: TreeShape::Ray, assignment: Assignment::constant("M") }, catalog)
                .unwrap();
        let report = truncation_convergence(&w, &[10, 100]).unwrap();
        assert!(report.pass, "{report}");
        assert!(report.computed.contains("M:ω:[10, 100]"), "{}", report.computed);
    }

    #[test]
    fn injected_usage_fault() {
        // four inserts of X against a declared usage of 3
        let mut assignment = Assignment::triangular();
        for v in [0, 5, 7, 9] {
            assignment = assignment.with_insert(v, "X");
        }
        let family = Family::new("F", FamilyTemplate::Suspension { dim: 6, exponent: 1, k: 2 }, 3, []).unwrap();
        let catalog = Catalog::from_blocks([susp(1009, "X")])
            .unwrap()
            .with_family(family)
            .unwrap()
            .with_usage("X", ExtendedCount::Finite(3));
        let w = SumManifold::new(Pattern::Tree { shape: TreeShape::Ray, assignment }, catalog).unwrap();
        let report = truncation_convergence(&w, &[10, 100]).unwrap();
        assert!(!report.pass);
        assert!(report.computed.contains("occurrence 4 at vertex 9"), "{}", report.computed);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(truncation_convergence(&prop_ray(), &[10, 10]), Err(OracleError::BadDepths));
        let w = path(Catalog::from_blocks([susp(3, "A")]).unwrap(), &["A"]);
        assert_eq!(truncation_convergence(&w, &[1]), Err(OracleError::NeedsInfinite));
        assert!(matches!(stacked_presentation_check(&prop_ray(), 2, None), Err(OracleError::NeedsFinite(_))));
    }

    #[test]
    fn suite_is_reproducible() {
        let a = random_suite(11, &OracleCaps::default(), &SuiteSizes::default()).unwrap();
        assert!(a.iter().all(|r| r.pass), "{:?}", a.iter().find(|r| !r.pass));
        assert_eq!(a, random_suite(11, &OracleCaps::default(), &SuiteSizes::default()).unwrap());
    }

    #[test]
    fn snf_check_shapes() {
        assert!(snf_check(&IntegerPresentation::from_rows(&[vec![2, 4], vec![-2, 6]]), 10_000).pass);
        let r = snf_check(&IntegerPresentation::from_rows(&[vec![2, 4, 1]]), 10_000);
        assert!(r.pass);
        assert_eq!(r.check, "snf-divisibility");
    }
}

//! Seeded random instances for the oracle checks.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use super::OracleCaps;
use crate::abelian::{FgAbelianGroup, IntegerPresentation, PrimePower};
use crate::blocks::{connected_sum, suspension_block, Block};
use crate::criteria::Witness;
use crate::groups::{ExtendedCount, FactorLabel, FreeProductClass};
use crate::pattern::{BlockId, Catalog, FiniteGraph, Pattern, SumManifold};

/// A matrix of at most `caps.matrix_dim` rows and columns; square half the time.
pub fn random_matrix<R: Rng>(rng: &mut R, caps: &OracleCaps) -> IntegerPresentation {
    let rows = rng.gen_range(1..=caps.matrix_dim);
    let cols = if rng.gen_bool(0.5) { rows } else { rng.gen_range(1..=caps.matrix_dim) };
    let e = caps.matrix_entry;
    let entries: Vec<Vec<i64>> = (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(-e..=e)).collect()).collect();
    IntegerPresentation::from_rows(&entries)
}

fn pp(p: u64, j: u32) -> PrimePower {
    PrimePower::new(p, j).expect("prime")
}

/// Six dimension-6 blocks: four suspension blocks, one with free `H₂` and `H₄`, and
/// one with `π₁ = Z_3 * Z`.
pub fn standard_catalog() -> Catalog {
    let susp = |q, name: &str| suspension_block(6, q, 2).expect("valid suspension").renamed(name);
    let free = Block::new(
        "Q",
        6,
        FreeProductClass::trivial(),
        BTreeMap::from([(2, FgAbelianGroup::free(2)), (4, FgAbelianGroup::free(2))]),
    )
    .expect("valid block")
    .with_orientable(true);
    let pi1 = FreeProductClass::from_factors([
        (FactorLabel::FiniteCyclic(3), ExtendedCount::ONE),
        (FactorLabel::InfiniteCyclic, ExtendedCount::ONE),
    ]);
    let nsc = Block::new("G", 6, pi1, BTreeMap::from([(2, FgAbelianGroup::cyclic(5))])).expect("valid block");
    Catalog::from_blocks([
        susp(pp(3, 1), "A"),
        susp(pp(5, 1), "B"),
        susp(pp(3, 2), "C"),
        susp(pp(7, 1), "D"),
        free,
        nsc,
    ])
    .expect("distinct names")
}

fn random_vertices<R: Rng>(rng: &mut R, catalog: &Catalog, n: usize) -> Vec<BlockId> {
    let names: Vec<&String> = catalog.blocks().keys().collect();
    (0..n).map(|_| BlockId::named(names.choose(rng).expect("nonempty catalog").as_str())).collect()
}

/// A random tree on `1..=max_vertices` vertices; vertex `v > 0` hangs off a uniform
/// earlier vertex.
pub fn random_tree<R: Rng>(rng: &mut R, catalog: &Catalog, max_vertices: usize) -> SumManifold {
    let n = rng.gen_range(1..=max_vertices);
    let vertices = random_vertices(rng, catalog, n);
    let edges = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    let graph = FiniteGraph::new(vertices, edges).expect("trees are connected");
    SumManifold::new(Pattern::Finite(graph), catalog.clone()).expect("uniform dimension")
}

/// A random tree with up to three extra edges, so cycles occur.
pub fn random_graph<R: Rng>(rng: &mut R, catalog: &Catalog, max_vertices: usize) -> SumManifold {
    let n = rng.gen_range(1..=max_vertices);
    let vertices = random_vertices(rng, catalog, n);
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    if n > 2 {
        for _ in 0..rng.gen_range(0..=3) {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a != b {
                edges.push((a.min(b), a.max(b)));
            }
        }
    }
    let graph = FiniteGraph::new(vertices, edges).expect("spanning tree keeps it connected");
    SumManifold::new(Pattern::Finite(graph), catalog.clone()).expect("uniform dimension")
}

/// Connected sum of `c` blocks drawn from the catalog, with `c` in `1..=max_parts`.
pub fn random_assembly<R: Rng>(rng: &mut R, catalog: &Catalog, max_parts: usize) -> (Block, Vec<Block>) {
    let blocks: Vec<&Block> = catalog.blocks().values().collect();
    let c = rng.gen_range(1..=max_parts);
    let parts: Vec<Block> = (0..c).map(|_| (*blocks.choose(rng).expect("nonempty")).clone()).collect();
    let sum = parts[1..].iter().fold(parts[0].clone(), |acc, b| connected_sum(&acc, b).expect("same dimension"));
    (sum, parts)
}

const ODD_PRIMES: [u64; 10] = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31];

/// A non-repeating catalog of suspension blocks with one planted violation, and the
/// exact refutation witnesses it must produce.
///
/// The violation is either a `Z_3` free factor shared by two blocks, or a block whose
/// homology contains every `Z_{p^j}` summand of an existing block, degree by degree.
pub fn planted_violation<R: Rng>(rng: &mut R) -> (Catalog, Vec<Witness>) {
    let mut primes = ODD_PRIMES[1..].to_vec();
    primes.shuffle(rng);
    let count = rng.gen_range(2..=5);
    let blocks: Vec<Block> = primes[..count]
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let q = pp(p, rng.gen_range(1..=2));
            suspension_block(6, q, 2).expect("valid suspension").renamed(format!("S{i}"))
        })
        .collect();
    let mut catalog = Catalog::from_blocks(blocks.clone()).expect("distinct names");
    let mut expected = BTreeSet::new();
    if rng.gen_bool(0.5) {
        let z3 = FactorLabel::FiniteCyclic(3);
        let other = FactorLabel::FiniteCyclic(primes[count]);
        let left = Block::new("P0", 6, FreeProductClass::single(z3.clone()), BTreeMap::new()).expect("valid");
        let right_pi1 = FreeProductClass::from_factors([(z3.clone(), ExtendedCount::ONE), (other, ExtendedCount::ONE)]);
        let right = Block::new("P1", 6, right_pi1, BTreeMap::new()).expect("valid");
        catalog.add_block(left).expect("fresh name");
        catalog.add_block(right).expect("fresh name");
        expected.insert(Witness::SharedFactor { left: "P0".into(), right: "P1".into(), label: z3 });
    } else {
        let victim = blocks.choose(rng).expect("nonempty");
        let exact_copy = rng.gen_bool(0.5);
        let extra = FgAbelianGroup::from_prime_powers([pp(primes[count], 1)]);
        let homology = victim
            .homology_groups()
            .map(|(r, g)| (r, if exact_copy { g.clone() } else { g.direct_sum(&extra) }))
            .collect();
        let planted = Block::new("T", 6, FreeProductClass::trivial(), homology).expect("valid");
        catalog.add_block(planted).expect("fresh name");
        expected.insert(Witness::NoDistinguishingSummand { block: victim.name().to_string() });
        if exact_copy {
            expected.insert(Witness::NoDistinguishingSummand { block: "T".into() });
        }
    }
    (catalog, expected.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_seeded() {
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_matrix(&mut rng, &OracleCaps::default());
            let w = random_tree(&mut rng, &standard_catalog(), 12);
            (m, w)
        };
        assert_eq!(run(5), run(5));
    }

    #[test]
    fn catalog_shape() {
        let c = standard_catalog();
        assert_eq!(c.blocks().len(), 6);
        assert!(c.blocks().values().all(|b| b.dim() == 6 && b.check_duality().is_ok()));
    }
}

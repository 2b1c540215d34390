//! Closed manifolds modeled by invariants, the preset block catalog, and connected sum.
//!
//! A [`Block`] records the dimension, the fundamental group as a free-product class
//! and the homology groups `H_r` for `2 <= r <= d-1`. Connected sum acts on the
//! record by free product on `π₁` and direct sum on each `H_r`.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abelian::{FgAbelianGroup, PrimePower};
use crate::groups::{FactorLabel, FreeProductClass};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlockError {
    #[error("block dimension must be at least 3, got {0}")]
    DimensionTooSmall(u32),
    #[error("lens space order must be at least 2, got {0}")]
    LensOrder(u64),
    #[error("lens space parameters {p} and {q} are not coprime")]
    NotCoprime { p: u64, q: i64 },
    #[error("5-dimensional preset needs a finite group, got rank {0}")]
    InfiniteGroup(u64),
    #[error("suspension preset needs k >= 2 and d >= k + 4, got d = {d}, k = {k}")]
    SuspensionRange { d: u32, k: u32 },
    #[error("homology degree {r} is outside [2, {max}]")]
    DegreeOutOfRange { r: u32, max: u32 },
    #[error("block fundamental group must have finite multiplicities")]
    InfiniteMultiplicity,
    #[error("connected sum of blocks of dimensions {0} and {1}")]
    DimensionMismatch(u32, u32),
    #[error("block {block}: torsion of H_{r} is {left} but torsion of H_{dual} is {right}")]
    Duality { block: String, r: u32, dual: u32, left: FgAbelianGroup, right: FgAbelianGroup },
}

/// A closed connected `d`-manifold, `d >= 3`, recorded by its invariants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Block {
    name: String,
    dim: u32,
    pi1: FreeProductClass,
    /// `homology[i]` is `H_{i+2}`.
    homology: Vec<FgAbelianGroup>,
    orientable: Option<bool>,
    prime_asserted: Option<bool>,
    /// Some homology was filled in by the torsion-duality convention rather than given.
    duality_filled: bool,
}

impl Block {
    /// A block from explicit invariants. Degrees missing from `homology` are zero.
    pub fn new(
        name: impl Into<String>,
        dim: u32,
        pi1: FreeProductClass,
        homology: BTreeMap<u32, FgAbelianGroup>,
    ) -> Result<Block, BlockError> {
        if dim < 3 {
            return Err(BlockError::DimensionTooSmall(dim));
        }
        if !pi1.has_finite_multiplicities() {
            return Err(BlockError::InfiniteMultiplicity);
        }
        let mut groups = vec![FgAbelianGroup::trivial(); (dim - 2) as usize];
        for (r, g) in homology {
            if r < 2 || r > dim - 1 {
                return Err(BlockError::DegreeOutOfRange { r, max: dim - 1 });
            }
            groups[(r - 2) as usize] = g;
        }
        Ok(Block {
            name: name.into(),
            dim,
            pi1,
            homology: groups,
            orientable: None,
            prime_asserted: None,
            duality_filled: false,
        })
    }

    /// The `d`-sphere model.
    pub fn sphere(dim: u32) -> Result<Block, BlockError> {
        Ok(Block::new(format!("S^{dim}"), dim, FreeProductClass::trivial(), BTreeMap::new())?.with_orientable(true))
    }

    pub fn with_orientable(mut self, orientable: bool) -> Block {
        self.orientable = Some(orientable);
        self
    }

    pub fn with_prime_asserted(mut self, prime: bool) -> Block {
        self.prime_asserted = Some(prime);
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Block {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn pi1(&self) -> &FreeProductClass {
        &self.pi1
    }

    pub fn orientable(&self) -> Option<bool> {
        self.orientable
    }

    pub fn prime_asserted(&self) -> Option<bool> {
        self.prime_asserted
    }

    pub fn duality_filled(&self) -> bool {
        self.duality_filled
    }

    /// `H_r` for `2 <= r <= d-1`; `None` outside that range.
    pub fn homology(&self, r: u32) -> Option<&FgAbelianGroup> {
        if r < 2 || r >= self.dim {
            return None;
        }
        self.homology.get((r - 2) as usize)
    }

    /// `(r, H_r)` for every `r` in `[2, d-1]`.
    pub fn homology_groups(&self) -> impl Iterator<Item = (u32, &FgAbelianGroup)> {
        self.homology.iter().enumerate().map(|(i, g)| (i as u32 + 2, g))
    }

    pub fn is_simply_connected(&self) -> bool {
        self.pi1.is_trivial()
    }

    /// The sphere model: trivial `π₁` and vanishing middle homology.
    pub fn is_trivial(&self) -> bool {
        self.is_simply_connected() && self.homology.iter().all(FgAbelianGroup::is_trivial)
    }

    /// `π₂`, identified with `H₂` by Hurewicz when the block is simply connected.
    pub fn pi2(&self) -> Option<&FgAbelianGroup> {
        if self.is_simply_connected() {
            self.homology(2)
        } else {
            None
        }
    }

    /// `(k-1)`-connected: simply connected with `H_r = 0` for `2 <= r < k`.
    pub fn is_highly_connected(&self, k: u32) -> bool {
        self.is_simply_connected() && (2..k).all(|r| self.homology(r).is_none_or(FgAbelianGroup::is_trivial))
    }

    /// Upper bound `m + n` on the number of non-trivial summands in any connected-sum
    /// decomposition: `m` Grushko factors of `π₁` plus `n` cyclic summands of `⊕ H_r`.
    pub fn prime_count_bound(&self) -> u64 {
        let m = self.pi1.grushko_factor_count().finite().expect("block multiplicities are finite");
        let n: u64 = self.homology.iter().map(FgAbelianGroup::cyclic_summand_total).sum();
        m + n
    }

    /// Canonical encoding of `(dim, π₁, H_2, ..., H_{d-1})`.
    pub fn signature(&self) -> Signature {
        let mut s = format!("d={};pi1={}", self.dim, self.pi1);
        for (r, g) in self.homology_groups() {
            s.push_str(&format!(";H{r}={g}"));
        }
        Signature(s)
    }

    /// Abelianization of `π₁`, when no factor is opaque.
    pub fn first_homology(&self) -> Option<FgAbelianGroup> {
        let mut h1 = FgAbelianGroup::trivial();
        for (label, count) in self.pi1.factors() {
            let n = count.finite().expect("block multiplicities are finite");
            let g = match label {
                FactorLabel::InfiniteCyclic => FgAbelianGroup::free(1),
                FactorLabel::FiniteCyclic(order) => FgAbelianGroup::cyclic(*order),
                FactorLabel::Opaque { .. } => return None,
            };
            h1 = h1.direct_sum(&g.repeated(n));
        }
        Some(h1)
    }

    fn torsion_in_degree(&self, r: u32) -> Option<FgAbelianGroup> {
        match r {
            0 => Some(FgAbelianGroup::trivial()),
            1 => self.first_homology().map(|g| g.torsion_subgroup()),
            _ => self.homology(r).map(FgAbelianGroup::torsion_subgroup),
        }
    }

    /// For orientable blocks, torsion of `H_r` must match torsion of `H_{d-r-1}`.
    ///
    /// Blocks not declared orientable pass trivially; pairs involving an opaque
    /// `π₁` abelianization are skipped.
    pub fn check_duality(&self) -> Result<(), BlockError> {
        if self.orientable != Some(true) {
            return Ok(());
        }
        for r in 2..self.dim {
            let dual = self.dim - r - 1;
            let (Some(left), Some(right)) = (self.torsion_in_degree(r), self.torsion_in_degree(dual)) else {
                continue;
            };
            if left != right {
                return Err(BlockError::Duality { block: self.name.clone(), r, dual, left, right });
            }
        }
        Ok(())
    }
}

/// The invariant record of a block as a comparable string.
///
/// Blocks with equal signatures are indistinguishable in this model even when the
/// underlying manifolds differ.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Signature(String);

impl Signature {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Lens space `L(p, q)`: `π₁ = Z_p`, `H₂ = 0`, prime and orientable.
pub fn lens_block(p: u64, q: i64) -> Result<Block, BlockError> {
    if p < 2 {
        return Err(BlockError::LensOrder(p));
    }
    if (q.unsigned_abs()).gcd(&p) != 1 {
        return Err(BlockError::NotCoprime { p, q });
    }
    let pi1 = FreeProductClass::single(FactorLabel::FiniteCyclic(p));
    Ok(Block::new(format!("L({p},{q})"), 3, pi1, BTreeMap::new())?.with_orientable(true).with_prime_asserted(true))
}

/// Simply connected 5-manifold with `H₂ = G ⊕ G` for a finite group `G`.
pub fn smale_block(g: &FgAbelianGroup) -> Result<Block, BlockError> {
    if g.rank() > 0 {
        return Err(BlockError::InfiniteGroup(g.rank()));
    }
    let h2 = g.direct_sum(g);
    let name = if g.is_trivial() { "S^5".to_string() } else { format!("M5({g})") };
    Ok(Block::new(name, 5, FreeProductClass::trivial(), BTreeMap::from([(2, h2)]))?.with_orientable(true))
}

/// `(k-1)`-connected `d`-manifold, the double of a neighborhood of an iterated
/// suspension of a Moore space: `H_k = Z_q`, and by the torsion-duality convention
/// also `H_{d-k-1} = Z_q`. Needs `k >= 2` and `d >= k + 4`.
pub fn suspension_block(d: u32, q: PrimePower, k: u32) -> Result<Block, BlockError> {
    if k < 2 || d < k + 4 {
        return Err(BlockError::SuspensionRange { d, k });
    }
    let zq = FgAbelianGroup::from_prime_powers([q]);
    let mut homology = BTreeMap::from([(k, zq.clone())]);
    homology.insert(d - k - 1, zq);
    let mut block =
        Block::new(format!("Susp(d={d},q={q},k={k})"), d, FreeProductClass::trivial(), homology)?.with_orientable(true);
    block.duality_filled = true;
    Ok(block)
}

/// Connected sum at the level of invariants.
pub fn connected_sum(a: &Block, b: &Block) -> Result<Block, BlockError> {
    if a.dim != b.dim {
        return Err(BlockError::DimensionMismatch(a.dim, b.dim));
    }
    let prime_asserted = if a.is_trivial() {
        b.prime_asserted
    } else if b.is_trivial() {
        a.prime_asserted
    } else {
        Some(false)
    };
    Ok(Block {
        name: format!("{}#{}", a.name, b.name),
        dim: a.dim,
        pi1: a.pi1.free_product(&b.pi1),
        homology: a.homology.iter().zip(&b.homology).map(|(x, y)| x.direct_sum(y)).collect(),
        orientable: match (a.orientable, b.orientable) {
            (Some(x), Some(y)) => Some(x && y),
            _ => None,
        },
        prime_asserted,
        duality_filled: a.duality_filled || b.duality_filled,
    })
}

//! Sum-manifolds: blocks arranged along a finite graph or an infinite rooted tree,
//! one connected sum per edge, and the invariants of the result.

mod assignment;
mod catalog;
mod symbolic;
mod tree;

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::abelian::PrimePower;
use crate::blocks::Block;
use crate::groups::{ExtendedCount, FactorLabel, FreeProductClass};

pub use assignment::{Assignment, BaseRule, ListEntry, PrimeSequence};
pub use catalog::{BlockId, Catalog, Family, FamilyTemplate, Guarantee};
pub use symbolic::{FamilyTail, SymbolicAbelianGroup, SymbolicFreeProduct};
pub use tree::TreeShape;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("unknown block {0}")]
    UnknownBlock(String),
    #[error("block name {0} is used twice")]
    DuplicateName(String),
    #[error("invalid block name {0:?}")]
    InvalidName(String),
    #[error("family: {0}")]
    Family(String),
    #[error("{prime} is not a prime of family {family}")]
    NotAMember { family: String, prime: u64 },
    #[error("invalid tree: {0}")]
    InvalidShape(String),
    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),
    #[error("graph pattern has no vertices")]
    EmptyGraph,
    #[error("edge ({0}, {1}) refers to a missing vertex")]
    EdgeOutOfRange(usize, usize),
    #[error("graph pattern is disconnected")]
    Disconnected,
    #[error("block {block} has dimension {dim}, expected {expected}")]
    MixedDimension { block: String, dim: u32, expected: u32 },
    #[error("not symbolically computable: usage of {0} is not declared")]
    UsageNotDeclared(String),
    #[error("declared usage {declared} of {block} disagrees with the pattern, which uses it {counted} times")]
    UsageMismatch { block: String, declared: ExtendedCount, counted: ExtendedCount },
    #[error("degree {r} is outside [2, {max}]")]
    DegreeOutOfRange { r: u32, max: u32 },
    #[error("homotopy needs a tree pattern")]
    NotATree,
    #[error("homotopy in degree {k} needs (k-1)-connected blocks; {block} is not")]
    NotHighlyConnected { block: String, k: u32 },
    #[error("truncation depth must be positive")]
    EmptyTruncation,
}

/// Explicit finite graph; loops and parallel edges are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGraph {
    vertices: Vec<BlockId>,
    edges: Vec<(usize, usize)>,
}

impl FiniteGraph {
    pub fn new(vertices: Vec<BlockId>, edges: Vec<(usize, usize)>) -> Result<Self, PatternError> {
        if vertices.is_empty() {
            return Err(PatternError::EmptyGraph);
        }
        if let Some(&(a, b)) = edges.iter().find(|(a, b)| *a >= vertices.len() || *b >= vertices.len()) {
            return Err(PatternError::EdgeOutOfRange(a, b));
        }
        let graph = FiniteGraph { vertices, edges };
        if graph.bfs_order().len() != graph.vertices.len() {
            return Err(PatternError::Disconnected);
        }
        Ok(graph)
    }

    /// A path through the given blocks.
    pub fn path(vertices: Vec<BlockId>) -> Result<Self, PatternError> {
        let edges = (1..vertices.len()).map(|i| (i - 1, i)).collect();
        Self::new(vertices, edges)
    }

    pub fn vertices(&self) -> &[BlockId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `|E| - |V| + 1`.
    pub fn cycle_rank(&self) -> u64 {
        (self.edges.len() + 1 - self.vertices.len()) as u64
    }

    fn bfs_order(&self) -> Vec<usize> {
        let mut adjacent = vec![Vec::new(); self.vertices.len()];
        for &(a, b) in &self.edges {
            adjacent[a].push(b);
            adjacent[b].push(a);
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut order = Vec::with_capacity(self.vertices.len());
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &adjacent[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        order
    }

    /// Induced subgraph on the first `n` vertices in breadth-first order from vertex 0.
    fn prefix(&self, n: usize) -> FiniteGraph {
        let kept = &self.bfs_order()[..n];
        let index: BTreeMap<usize, usize> = kept.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let vertices = kept.iter().map(|&v| self.vertices[v].clone()).collect();
        let edges = self.edges.iter().filter_map(|(a, b)| Some((*index.get(a)?, *index.get(b)?))).collect();
        FiniteGraph { vertices, edges }
    }
}

/// Named blocks with their usage, plus the family tail if the pattern has one.
type Decomposition<'a> = (Vec<(Cow<'a, Block>, ExtendedCount)>, Option<FamilyTail>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    Finite(FiniteGraph),
    Tree { shape: TreeShape, assignment: Assignment },
}

/// A sum-manifold: every vertex replaced by its block, one connected sum per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumManifold {
    pattern: Pattern,
    catalog: Catalog,
    dim: u32,
}

impl SumManifold {
    pub fn new(pattern: Pattern, catalog: Catalog) -> Result<Self, PatternError> {
        let mut dims: Vec<(String, u32)> = Vec::new();
        match &pattern {
            Pattern::Finite(graph) => {
                for id in graph.vertices() {
                    dims.push((id.to_string(), catalog.resolve(id)?.dim()));
                }
            }
            Pattern::Tree { shape, assignment } => {
                shape.validate().map_err(PatternError::InvalidShape)?;
                assignment.validate(catalog.family()).map_err(PatternError::InvalidAssignment)?;
                for name in assignment.named_blocks() {
                    let block = catalog.block(&name).ok_or_else(|| PatternError::UnknownBlock(name.clone()))?;
                    dims.push((name, block.dim()));
                }
                if let (true, Some(f)) = (assignment.uses_family(), catalog.family()) {
                    dims.push((f.name().to_string(), f.dim()));
                }
            }
        }
        let expected = dims[0].1;
        if let Some((block, dim)) = dims.iter().find(|(_, d)| *d != expected) {
            return Err(PatternError::MixedDimension { block: block.clone(), dim: *dim, expected });
        }
        let manifold = SumManifold { pattern, catalog, dim: expected };
        for (name, &declared) in manifold.catalog.declared_usages() {
            if manifold.catalog.block(name).is_none() {
                return Err(PatternError::UnknownBlock(name.clone()));
            }
            let counted = match &manifold.pattern {
                Pattern::Finite(_) => manifold.vertex_count(&BlockId::named(name.as_str())),
                Pattern::Tree { assignment, .. } if !assignment.named_blocks().contains(name) => ExtendedCount::ZERO,
                Pattern::Tree { .. } => continue,
            };
            if counted != declared {
                return Err(PatternError::UsageMismatch { block: name.clone(), declared, counted });
            }
        }
        Ok(manifold)
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn is_infinite_tree(&self) -> bool {
        matches!(self.pattern, Pattern::Tree { .. })
    }

    pub fn is_tree(&self) -> bool {
        self.cycle_rank() == 0
    }

    pub fn cycle_rank(&self) -> u64 {
        match &self.pattern {
            Pattern::Finite(g) => g.cycle_rank(),
            Pattern::Tree { .. } => 0,
        }
    }

    pub fn describe(&self) -> String {
        match &self.pattern {
            Pattern::Finite(g) => {
                format!("finite graph, {} vertices, {} edges, dimension {}", g.vertices.len(), g.edges.len(), self.dim)
            }
            Pattern::Tree { shape, .. } => format!("infinite {}, dimension {}", shape.name(), self.dim),
        }
    }

    fn vertex_count(&self, id: &BlockId) -> ExtendedCount {
        match &self.pattern {
            Pattern::Finite(g) => ExtendedCount::Finite(g.vertices.iter().filter(|v| *v == id).count() as u64),
            Pattern::Tree { .. } => unreachable!("finite patterns only"),
        }
    }

    /// Blocks of the first `n` vertices; all of them for a smaller finite graph.
    pub fn vertex_blocks(&self, n: u64) -> Vec<BlockId> {
        match &self.pattern {
            Pattern::Finite(g) => g.bfs_order().into_iter().take(n as usize).map(|v| g.vertices[v].clone()).collect(),
            Pattern::Tree { assignment, .. } => assignment.iter(self.catalog.family()).take(n as usize).collect(),
        }
    }

    /// Block of vertex `n` by direct lookup.
    pub fn block_at(&self, n: u64) -> Option<BlockId> {
        match &self.pattern {
            Pattern::Finite(g) => g.bfs_order().get(n as usize).map(|&v| g.vertices[v].clone()),
            Pattern::Tree { assignment, .. } => Some(assignment.block_at(n, self.catalog.family())),
        }
    }

    /// Number of vertices carrying `id`.
    pub fn usage_count(&self, id: &BlockId) -> Result<ExtendedCount, PatternError> {
        self.catalog.resolve(id)?;
        match (&self.pattern, id) {
            (Pattern::Finite(_), _) => Ok(self.vertex_count(id)),
            (Pattern::Tree { assignment, .. }, BlockId::Named(name)) => {
                if !assignment.named_blocks().contains(name) {
                    return Ok(ExtendedCount::ZERO);
                }
                self.catalog.declared_usage(name).ok_or_else(|| PatternError::UsageNotDeclared(name.clone()))
            }
            (Pattern::Tree { assignment, .. }, BlockId::Member { prime, .. }) => {
                let family = self.catalog.family().expect("resolved member");
                Ok(if assignment.uses_family() { assignment.family_usage(family, *prime) } else { ExtendedCount::ZERO })
            }
        }
    }

    /// Finitely many used blocks with their usage, and the family tail if infinitely
    /// many members occur.
    fn decompose(&self) -> Result<Decomposition<'_>, PatternError> {
        let mut used = Vec::new();
        for id in self.finite_ids() {
            let usage = self.usage_count(&id)?;
            if !usage.is_zero() {
                used.push((self.catalog.resolve(&id)?, usage));
            }
        }
        Ok((used, self.family_tail()))
    }

    /// Every block identifier that may occur, apart from an infinite family tail.
    fn finite_ids(&self) -> BTreeSet<BlockId> {
        let mut ids = BTreeSet::new();
        match &self.pattern {
            Pattern::Finite(g) => ids.extend(g.vertices.iter().cloned()),
            Pattern::Tree { assignment, .. } => {
                ids.extend(assignment.named_blocks().into_iter().map(BlockId::Named));
                if let Some(family) = self.catalog.family() {
                    if !assignment.family_support_is_infinite() {
                        ids.extend(assignment.listed_primes().into_iter().map(|p| family.id(p)));
                    }
                }
            }
        }
        ids
    }

    /// Blocks used a nonzero number of times, excluding an infinite family tail.
    pub fn used_blocks(&self) -> Result<Vec<(Block, ExtendedCount)>, PatternError> {
        Ok(self.used_ids()?.into_iter().map(|(_, b, u)| (b, u)).collect())
    }

    /// [`Self::used_blocks`] together with the identifiers the pattern uses for them.
    pub fn used_ids(&self) -> Result<Vec<(BlockId, Block, ExtendedCount)>, PatternError> {
        let mut out = Vec::new();
        for id in self.finite_ids() {
            let usage = self.usage_count(&id)?;
            if !usage.is_zero() {
                let block = self.catalog.resolve(&id)?.into_owned();
                out.push((id, block, usage));
            }
        }
        Ok(out)
    }

    /// The family tail, when infinitely many members occur.
    pub fn family_tail(&self) -> Option<FamilyTail> {
        match (&self.pattern, self.catalog.family()) {
            (Pattern::Tree { assignment, .. }, Some(f)) if assignment.family_support_is_infinite() => {
                Some(FamilyTail::new(f.clone(), assignment.clone()))
            }
            _ => None,
        }
    }

    /// Free product of the blocks' `π₁`, and one `Z` per independent cycle.
    pub fn fundamental_group(&self) -> Result<SymbolicFreeProduct, PatternError> {
        let (used, tail) = self.decompose()?;
        let mut head =
            used.iter().fold(FreeProductClass::trivial(), |acc, (b, u)| acc.free_product(&b.pi1().repeated(*u)));
        if self.cycle_rank() > 0 {
            head = head.free_product(&FreeProductClass::with(FactorLabel::InfiniteCyclic, self.cycle_rank()));
        }
        Ok(SymbolicFreeProduct::new(head, tail))
    }

    /// Direct sum of the blocks' `H_r`. Each independent cycle of a graph pattern is
    /// an `S¹ × S^{d-1}` summand and adds one `Z` in degree `d - 1`.
    pub fn homology(&self, r: u32) -> Result<SymbolicAbelianGroup, PatternError> {
        if r < 2 || r >= self.dim {
            return Err(PatternError::DegreeOutOfRange { r, max: self.dim - 1 });
        }
        let (used, tail) = self.decompose()?;
        let mut rank = ExtendedCount::ZERO;
        let mut head: BTreeMap<PrimePower, ExtendedCount> = BTreeMap::new();
        for (block, usage) in &used {
            let g = block.homology(r).expect("degree in range");
            rank += ExtendedCount::Finite(g.rank()) * *usage;
            for (q, &c) in g.torsion() {
                *head.entry(*q).or_default() += ExtendedCount::Finite(c) * *usage;
            }
        }
        if r == self.dim - 1 {
            rank += ExtendedCount::Finite(self.cycle_rank());
        }
        Ok(SymbolicAbelianGroup::new(r, rank, head, tail))
    }

    /// `π_k`, equal to `H_k` by Hurewicz when every block is `(k-1)`-connected and the
    /// pattern is a tree.
    pub fn homotopy(&self, k: u32) -> Result<SymbolicAbelianGroup, PatternError> {
        if !self.is_tree() {
            return Err(PatternError::NotATree);
        }
        let (used, tail) = self.decompose()?;
        if let Some((block, _)) = used.iter().find(|(b, _)| !b.is_highly_connected(k)) {
            return Err(PatternError::NotHighlyConnected { block: block.name().to_string(), k });
        }
        if let Some(family) = tail.as_ref().map(FamilyTail::family) {
            // members differ only in the prime, so the first one speaks for all
            if !family.member(family.first_prime())?.is_highly_connected(k) {
                return Err(PatternError::NotHighlyConnected { block: family.name().to_string(), k });
            }
        }
        self.homology(k)
    }

    pub fn pi2(&self) -> Result<SymbolicAbelianGroup, PatternError> {
        self.homotopy(2)
    }

    /// The sub-sum-manifold on the first `n` vertices. Declared usage is dropped; the
    /// result is finite and its usage is counted.
    pub fn truncate(&self, n: u64) -> Result<SumManifold, PatternError> {
        if n == 0 {
            return Err(PatternError::EmptyTruncation);
        }
        let graph = match &self.pattern {
            Pattern::Finite(g) if n as usize >= g.vertices.len() => return Ok(self.clone()),
            Pattern::Finite(g) => g.prefix(n as usize),
            Pattern::Tree { shape, .. } => {
                let vertices = self.vertex_blocks(n);
                let edges = (1..n).map(|v| (shape.parent(v).expect("non-root") as usize, v as usize)).collect();
                FiniteGraph { vertices, edges }
            }
        };
        let mut catalog = self.catalog.clone();
        catalog.clear_usage();
        Ok(SumManifold { pattern: Pattern::Finite(graph), catalog, dim: self.dim })
    }
}

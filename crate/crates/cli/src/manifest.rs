//! Manifest ingestion: syntax, schema, typed decoding, then model construction.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use jsonschema::JSONSchema;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use sumleaf::abelian::{FgAbelianGroup, PrimePower};
use sumleaf::blocks::{connected_sum, lens_block, smale_block, suspension_block, Block};
use sumleaf::groups::{ExtendedCount, FreeProductClass};
use sumleaf::oracle::{OracleCaps, SuiteSizes};
use sumleaf::pattern::{
    Assignment, BlockId, Catalog, Family, FamilyTemplate, FiniteGraph, Guarantee, Pattern, SumManifold, TreeShape,
};

pub const MANIFEST_SCHEMA: &str = include_str!("../schemas/manifest.schema.json");

/// Why a manifest was rejected. Every variant maps to exit status 3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ManifestError {
    Io {
        path: String,
        message: String,
    },
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    /// One entry per schema violation: JSON pointer and message.
    Schema(Vec<(String, String)>),
    Field {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    Invalid(String),
}

impl fmt::Display for ManifestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifestError::Io { path, message } => write!(f, "cannot read {path}: {message}"),
            ManifestError::Syntax { line, column, message } => {
                write!(f, "malformed JSON at line {line}, column {column}: {message}")
            }
            ManifestError::Schema(errors) => {
                write!(f, "manifest does not match the schema:")?;
                for (path, message) in errors {
                    let path = if path.is_empty() { "/" } else { path };
                    write!(f, "\n  at {path}: {message}")?;
                }
                Ok(())
            }
            ManifestError::Field { path, line, column, message } => {
                write!(f, "invalid field {path} at line {line}, column {column}: {message}")
            }
            ManifestError::Invalid(message) => write!(f, "invalid manifest: {message}"),
        }
    }
}

impl std::error::Error for ManifestError {}

fn invalid(e: impl fmt::Display) -> ManifestError {
    ManifestError::Invalid(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub catalog: CatalogSpec,
    pub pattern: PatternSpec,
    #[serde(default)]
    pub options: Options,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogSpec {
    #[serde(default)]
    pub blocks: Vec<BlockSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
}

fn one_i64() -> i64 {
    1
}

fn two() -> u32 {
    2
}

fn three() -> u64 {
    3
}

/// Homology keyed by degree. Keys arrive as strings because tagged enums buffer
/// their content before the map is decoded.
fn degree_keys<'de, D: serde::Deserializer<'de>>(d: D) -> Result<BTreeMap<u32, FgAbelianGroup>, D::Error> {
    BTreeMap::<String, FgAbelianGroup>::deserialize(d)?
        .into_iter()
        .map(|(k, g)| k.parse().map(|r| (r, g)).map_err(|_| serde::de::Error::custom(format!("invalid degree {k:?}"))))
        .collect()
}

/// A catalog entry. `connected_sum` refers to blocks declared earlier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum BlockSpec {
    Lens {
        name: String,
        p: u64,
        #[serde(default = "one_i64")]
        q: i64,
    },
    Smale {
        name: String,
        group: FgAbelianGroup,
    },
    Suspension {
        name: String,
        dim: u32,
        prime_power: PrimePower,
        #[serde(default = "two")]
        k: u32,
    },
    Sphere {
        name: String,
        dim: u32,
    },
    Custom {
        name: String,
        dim: u32,
        #[serde(default)]
        pi1: FreeProductClass,
        #[serde(default, deserialize_with = "degree_keys")]
        homology: BTreeMap<u32, FgAbelianGroup>,
        #[serde(default)]
        orientable: Option<bool>,
        #[serde(default)]
        prime: Option<bool>,
    },
    ConnectedSum {
        name: String,
        of: Vec<String>,
    },
}

impl BlockSpec {
    pub fn name(&self) -> &str {
        match self {
            BlockSpec::Lens { name, .. }
            | BlockSpec::Smale { name, .. }
            | BlockSpec::Suspension { name, .. }
            | BlockSpec::Sphere { name, .. }
            | BlockSpec::Custom { name, .. }
            | BlockSpec::ConnectedSum { name, .. } => name,
        }
    }

    fn build(&self, earlier: &Catalog) -> Result<Block, ManifestError> {
        let block = match self {
            BlockSpec::Lens { p, q, .. } => lens_block(*p, *q).map_err(invalid)?,
            BlockSpec::Smale { group, .. } => smale_block(group).map_err(invalid)?,
            BlockSpec::Suspension { dim, prime_power, k, .. } => {
                suspension_block(*dim, *prime_power, *k).map_err(invalid)?
            }
            BlockSpec::Sphere { dim, .. } => Block::sphere(*dim).map_err(invalid)?,
            BlockSpec::Custom { dim, pi1, homology, orientable, prime, .. } => {
                let mut b = Block::new("", *dim, pi1.clone(), homology.clone()).map_err(invalid)?;
                if let Some(o) = orientable {
                    b = b.with_orientable(*o);
                }
                if let Some(p) = prime {
                    b = b.with_prime_asserted(*p);
                }
                b
            }
            BlockSpec::ConnectedSum { of, .. } => {
                let parts: Vec<&Block> = of
                    .iter()
                    .map(|n| {
                        earlier.block(n).ok_or_else(|| invalid(format!("connected_sum refers to undeclared block {n}")))
                    })
                    .collect::<Result<_, _>>()?;
                let mut sum = parts[0].clone();
                for part in &parts[1..] {
                    sum = connected_sum(&sum, part).map_err(invalid)?;
                }
                sum
            }
        };
        Ok(block.renamed(self.name()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub name: String,
    pub template: FamilyTemplate,
    #[serde(default = "three")]
    pub primes_from: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    Ray,
    BinaryTree,
    Comb,
    ParentTable,
    Finite,
}

/// Tree kinds take an assignment; `finite` takes vertices and edges. Guarantees
/// are declared for the family tail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternSpec {
    pub kind: PatternKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parents: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<Assignment>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub usage: BTreeMap<String, ExtendedCount>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub guarantees: Vec<Guarantee>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleOptions {
    pub enumeration_cap: u64,
    pub tree_vertices: usize,
    pub matrix_dim: usize,
    pub matrix_entry: i64,
    pub matrices: usize,
    pub trees: usize,
    pub graphs: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        let caps = OracleCaps::default();
        let sizes = SuiteSizes::default();
        OracleOptions {
            enumeration_cap: caps.enumeration,
            tree_vertices: caps.tree_vertices,
            matrix_dim: caps.matrix_dim,
            matrix_entry: caps.matrix_entry,
            matrices: sizes.matrices,
            trees: sizes.trees,
            graphs: sizes.graphs,
        }
    }
}

impl OracleOptions {
    pub fn caps(&self) -> OracleCaps {
        OracleCaps {
            enumeration: self.enumeration_cap,
            tree_vertices: self.tree_vertices,
            matrix_dim: self.matrix_dim,
            matrix_entry: self.matrix_entry,
        }
    }

    pub fn sizes(&self) -> SuiteSizes {
        SuiteSizes { matrices: self.matrices, trees: self.trees, graphs: self.graphs }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    pub duality_validation: bool,
    pub seed: u64,
    pub truncation_depths: Vec<u64>,
    pub oracle: OracleOptions,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            depth: None,
            duality_validation: true,
            seed: 0,
            truncation_depths: vec![10, 100, 1000],
            oracle: OracleOptions::default(),
        }
    }
}

fn schema() -> &'static JSONSchema {
    static SCHEMA: OnceLock<JSONSchema> = OnceLock::new();
    SCHEMA.get_or_init(|| {
        let value: Value = serde_json::from_str(MANIFEST_SCHEMA).expect("shipped schema is JSON");
        JSONSchema::compile(&value).expect("shipped schema compiles")
    })
}

/// `F[7]` names member 7 of family `F`; anything else is a catalog name.
pub fn parse_block_id(s: &str) -> Result<BlockId, ManifestError> {
    let Some((family, rest)) = s.split_once('[') else {
        return Ok(BlockId::named(s));
    };
    let prime = rest
        .strip_suffix(']')
        .and_then(|p| p.parse().ok())
        .ok_or_else(|| invalid(format!("vertex {s:?} is neither a block name nor a member like F[7]")))?;
    Ok(BlockId::Member { family: family.to_string(), prime })
}

/// A parsed manifest with its model and the digest of its exact bytes.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub manifest: Manifest,
    pub manifold: SumManifold,
    pub digest: String,
}

impl Manifest {
    /// Parses and schema-checks manifest text; the model is not built yet.
    pub fn parse(text: &str) -> Result<Manifest, ManifestError> {
        let value: Value = serde_json::from_str(text).map_err(|e| ManifestError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if let Err(errors) = schema().validate(&value) {
            let mut list: Vec<(String, String)> =
                errors.map(|e| (e.instance_path.to_string(), e.to_string())).collect();
            list.sort();
            list.dedup();
            return Err(ManifestError::Schema(list));
        }
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            ManifestError::Field { path, line: inner.line(), column: inner.column(), message: inner.to_string() }
        })
    }

    pub fn catalog(&self) -> Result<Catalog, ManifestError> {
        let mut catalog = Catalog::new();
        for entry in &self.catalog.blocks {
            let block = entry.build(&catalog)?;
            if self.options.duality_validation {
                block.check_duality().map_err(invalid)?;
            }
            catalog.add_block(block).map_err(invalid)?;
        }
        if let Some(f) = &self.catalog.family {
            let family =
                Family::new(&f.name, f.template.clone(), f.primes_from, self.pattern.guarantees.iter().copied())
                    .map_err(invalid)?;
            if self.options.duality_validation {
                family.member(family.first_prime()).map_err(invalid)?.check_duality().map_err(invalid)?;
            }
            catalog.set_family(family).map_err(invalid)?;
        } else if !self.pattern.guarantees.is_empty() {
            return Err(invalid("guarantees are declared but the catalog has no family"));
        }
        for (name, &count) in &self.pattern.usage {
            catalog.declare_usage(name.clone(), count);
        }
        Ok(catalog)
    }

    pub fn pattern(&self) -> Result<Pattern, ManifestError> {
        let p = &self.pattern;
        let shape = match p.kind {
            PatternKind::Finite => {
                let vertices = p.vertices.as_ref().ok_or_else(|| invalid("finite pattern needs vertices"))?;
                let ids = vertices.iter().map(|v| parse_block_id(v)).collect::<Result<_, _>>()?;
                let edges = p.edges.iter().flatten().map(|&[a, b]| (a, b)).collect();
                return Ok(Pattern::Finite(FiniteGraph::new(ids, edges).map_err(invalid)?));
            }
            PatternKind::Ray => TreeShape::Ray,
            PatternKind::BinaryTree => TreeShape::BinaryTree,
            PatternKind::Comb => TreeShape::Comb,
            PatternKind::ParentTable => TreeShape::ParentTable {
                parents: p.parents.clone().ok_or_else(|| invalid("parent_table needs parents"))?,
                stride: p.stride.ok_or_else(|| invalid("parent_table needs stride"))?,
            },
        };
        let assignment = p.assignment.clone().ok_or_else(|| invalid("tree patterns need an assignment"))?;
        Ok(Pattern::Tree { shape, assignment })
    }

    pub fn build(&self) -> Result<SumManifold, ManifestError> {
        if self.version != 1 {
            return Err(invalid(format!("unsupported manifest version {}", self.version)));
        }
        SumManifold::new(self.pattern()?, self.catalog()?).map_err(invalid)
    }
}

pub fn digest(text: &str) -> String {
    let hash = Sha256::digest(text.as_bytes());
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

pub fn load_str(text: &str) -> Result<Loaded, ManifestError> {
    let manifest = Manifest::parse(text)?;
    let manifold = manifest.build()?;
    Ok(Loaded { manifest, manifold, digest: digest(text) })
}

pub fn load(path: &str) -> Result<Loaded, ManifestError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ManifestError::Io { path: path.to_string(), message: e.to_string() })?;
    load_str(&text)
}

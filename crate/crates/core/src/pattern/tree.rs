use serde::{Deserialize, Serialize};

/// Shape of a locally finite infinite rooted tree on vertices `0, 1, 2, ...`.
///
/// Vertex `0` is the root and every other vertex `n` has a parent `< n`, so each
/// prefix `0..n` spans a connected subtree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TreeShape {
    Ray,
    BinaryTree,
    /// A ray `0, 2, 4, ...` with one leaf `2i + 1` hanging off each ray vertex `2i`.
    Comb,
    /// `parents[i]` is the parent of vertex `i + 1`; past the table, vertex `n` hangs
    /// off `n - stride`.
    ParentTable {
        parents: Vec<u64>,
        stride: u64,
    },
}

impl TreeShape {
    pub fn validate(&self) -> Result<(), String> {
        if let TreeShape::ParentTable { parents, stride } = self {
            for (i, &p) in parents.iter().enumerate() {
                if p > i as u64 {
                    return Err(format!("parent of vertex {} is {p}, which is not smaller", i + 1));
                }
            }
            if *stride == 0 || *stride > parents.len() as u64 + 1 {
                return Err(format!("stride must lie in [1, {}], got {stride}", parents.len() + 1));
            }
        }
        Ok(())
    }

    pub fn parent(&self, n: u64) -> Option<u64> {
        if n == 0 {
            return None;
        }
        Some(match self {
            TreeShape::Ray => n - 1,
            TreeShape::BinaryTree => (n - 1) / 2,
            TreeShape::Comb if n.is_multiple_of(2) => n - 2,
            TreeShape::Comb => n - 1,
            TreeShape::ParentTable { parents, stride } => match parents.get((n - 1) as usize) {
                Some(&p) => p,
                None => n - stride,
            },
        })
    }

    /// No vertex beyond this index is a child of `v`.
    pub fn child_bound(&self, v: u64) -> u64 {
        match self {
            TreeShape::Ray => v + 1,
            TreeShape::BinaryTree => 2 * v + 2,
            TreeShape::Comb if v.is_multiple_of(2) => v + 2,
            TreeShape::Comb => v,
            TreeShape::ParentTable { parents, stride } => (parents.len() as u64).max(v + stride),
        }
    }

    pub fn children(&self, v: u64) -> Vec<u64> {
        (v + 1..=self.child_bound(v)).filter(|&c| self.parent(c) == Some(v)).collect()
    }

    pub fn name(&self) -> &'static str {
        match self {
            TreeShape::Ray => "ray",
            TreeShape::BinaryTree => "binary tree",
            TreeShape::Comb => "comb",
            TreeShape::ParentTable { .. } => "parent table",
        }
    }
}

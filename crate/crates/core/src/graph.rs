//! Labeled undirected graphs on a fixed vertex set, the node and edge
//! distances between them, and exhaustive enumeration of small universes.
//!
//! Graphs are stored as a bitmask over the C(n,2) vertex pairs in
//! lexicographic order, so the mask value doubles as the canonical
//! position of a graph in the enumeration order.

use thiserror::Error;

/// Largest vertex count accepted by [`enumerate_graphs`].
pub const ENUMERATION_CAP: usize = 6;

/// Largest vertex count accepted by [`node_distance`]; the minimum
/// vertex cover search is exhaustive over all 2^n vertex subsets.
pub const NODE_DISTANCE_CAP: usize = 8;

/// Largest vertex count representable by the pair bitmask (C(11,2) = 55 bits).
const MASK_CAP: usize = 11;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graphs have different vertex counts ({left} vs {right})")]
    SizeMismatch { left: usize, right: usize },
    #[error("vertex count {n} exceeds the cap of {cap} for this operation")]
    TooLarge { n: usize, cap: usize },
    #[error("edge ({u},{v}) is invalid for {n} vertices (need u < v < n)")]
    InvalidEdge { u: usize, v: usize, n: usize },
    #[error("duplicate edge ({u},{v})")]
    DuplicateEdge { u: usize, v: usize },
}

/// An undirected graph on vertices `0..n` with no self-loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabeledGraph {
    n: usize,
    edges: u64,
}

/// Position of the pair (u,v), u < v, in lexicographic pair order.
fn pair_index(n: usize, u: usize, v: usize) -> usize {
    debug_assert!(u < v && v < n);
    // pairs (0,1)..(0,n-1) come first, then (1,2)..(1,n-1), ...
    u * n - u * (u + 1) / 2 + (v - u - 1)
}

/// Number of vertex pairs on `n` vertices.
pub fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

impl LabeledGraph {
    /// The empty graph on `n` vertices.
    pub fn empty(n: usize) -> Result<Self, GraphError> {
        if n > MASK_CAP {
            return Err(GraphError::TooLarge { n, cap: MASK_CAP });
        }
        Ok(Self { n, edges: 0 })
    }

    /// The complete graph on `n` vertices.
    pub fn complete(n: usize) -> Result<Self, GraphError> {
        let mut g = Self::empty(n)?;
        g.edges = if pair_count(n) == 64 {
            u64::MAX
        } else {
            (1u64 << pair_count(n)) - 1
        };
        Ok(g)
    }

    /// Builds a graph from an edge list; edges must satisfy u < v < n.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self::empty(n)?;
        for &(u, v) in edges {
            if u >= v || v >= n {
                return Err(GraphError::InvalidEdge { u, v, n });
            }
            let bit = 1u64 << pair_index(n, u, v);
            if g.edges & bit != 0 {
                return Err(GraphError::DuplicateEdge { u, v });
            }
            g.edges |= bit;
        }
        Ok(g)
    }

    /// Builds a graph from its pair bitmask (bit k = k-th pair in
    /// lexicographic order).
    pub fn from_mask(n: usize, mask: u64) -> Result<Self, GraphError> {
        if n > MASK_CAP {
            return Err(GraphError::TooLarge { n, cap: MASK_CAP });
        }
        let bits = pair_count(n);
        if bits < 64 && mask >> bits != 0 {
            return Err(GraphError::InvalidEdge { u: 0, v: 0, n });
        }
        Ok(Self { n, edges: mask })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> u64 {
        self.edges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        a != b && self.edges & (1u64 << pair_index(self.n, a, b)) != 0
    }

    pub fn edge_count(&self) -> usize {
        self.edges.count_ones() as usize
    }

    /// Edges as (u,v) pairs with u < v, in lexicographic order.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if self.edges & (1u64 << pair_index(self.n, u, v)) != 0 {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        (self.edges & incident_mask(self.n, v)).count_ones() as usize
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Canonical label used in metric space JSON: "g" + decimal mask.
    pub fn canonical_label(&self) -> String {
        format!("g{}", self.edges)
    }
}

/// Bitmask of the pairs incident to vertex `v`.
fn incident_mask(n: usize, v: usize) -> u64 {
    let mut mask = 0u64;
    for u in 0..n {
        if u < v {
            mask |= 1u64 << pair_index(n, u, v);
        } else if u > v {
            mask |= 1u64 << pair_index(n, v, u);
        }
    }
    mask
}

/// Number of vertex pairs whose adjacency differs between the two graphs.
pub fn edge_distance(g1: &LabeledGraph, g2: &LabeledGraph) -> Result<usize, GraphError> {
    if g1.n != g2.n {
        return Err(GraphError::SizeMismatch {
            left: g1.n,
            right: g2.n,
        });
    }
    Ok((g1.edges ^ g2.edges).count_ones() as usize)
}

/// Minimum number of vertices whose incident edge sets must be rewritten
/// to turn `g1` into `g2`: the minimum vertex cover of the symmetric
/// difference graph, found by exhaustive subset search in increasing
/// cardinality.
pub fn node_distance(g1: &LabeledGraph, g2: &LabeledGraph) -> Result<usize, GraphError> {
    if g1.n != g2.n {
        return Err(GraphError::SizeMismatch {
            left: g1.n,
            right: g2.n,
        });
    }
    let n = g1.n;
    if n > NODE_DISTANCE_CAP {
        return Err(GraphError::TooLarge {
            n,
            cap: NODE_DISTANCE_CAP,
        });
    }
    let diff = g1.edges ^ g2.edges;
    if diff == 0 {
        return Ok(0);
    }
    let incident: Vec<u64> = (0..n).map(|v| incident_mask(n, v)).collect();
    for size in 1..=n {
        for subset in 0u32..(1u32 << n) {
            if subset.count_ones() as usize != size {
                continue;
            }
            let mut covered = 0u64;
            for (v, inc) in incident.iter().enumerate() {
                if subset & (1 << v) != 0 {
                    covered |= inc;
                }
            }
            if diff & !covered == 0 {
                return Ok(size);
            }
        }
    }
    unreachable!("the full vertex set covers every edge");
}

/// All graphs on `n` vertices in ascending bitmask order, optionally
/// filtered to maximum degree at most `max_degree`.
pub fn enumerate_graphs(
    n: usize,
    max_degree: Option<usize>,
) -> Result<Vec<LabeledGraph>, GraphError> {
    if n > ENUMERATION_CAP {
        return Err(GraphError::TooLarge {
            n,
            cap: ENUMERATION_CAP,
        });
    }
    let bits = pair_count(n);
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << bits) {
        let g = LabeledGraph { n, edges: mask };
        if let Some(bound) = max_degree {
            if g.max_degree() > bound {
                continue;
            }
        }
        out.push(g);
    }
    Ok(out)
}

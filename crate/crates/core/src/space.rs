//! Finite metric spaces over dataset universes.
//!
//! A space is an ordered list of dataset labels plus a total pairwise
//! distance. Distances come from an explicit matrix, from Hamming
//! distance on fixed-length symbol vectors, or from the node distance
//! on a universe of labeled graphs. Explicit and Hamming variants hold
//! all pairwise inputs; the graph variant evaluates node distance on
//! demand so that large universes never materialize an n-squared table.

use std::collections::HashSet;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::graph::{self, LabeledGraph};

/// Graph universes up to this many datasets memoize the full pairwise
/// node-distance table on first use; larger ones evaluate per call.
const GRAPH_CACHE_CAP: usize = 2048;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("space has no datasets")]
    Empty,
    #[error("distance matrix is not square or does not match the label count")]
    ShapeMismatch,
    #[error("diagonal entry at index {i} is nonzero")]
    NonzeroDiagonal { i: usize },
    #[error("negative distance at ({i},{j})")]
    NegativeDistance { i: usize, j: usize },
    #[error("asymmetric distance at ({i},{j})")]
    NonSymmetric { i: usize, j: usize },
    #[error("zero distance between distinct datasets {i} and {j} (duplicate inputs)")]
    DuplicatePoint { i: usize, j: usize },
    #[error("triangle inequality violated at ({i},{j},{k})")]
    TriangleViolation { i: usize, j: usize, k: usize },
    #[error("vector {index} has length {got}, expected {expected}")]
    LengthMismatch {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("duplicate label {label:?}")]
    DuplicateLabel { label: String },
    #[error("hypothesis set is empty")]
    EmptyHypothesis,
    #[error("hypothesis index {index} is out of range for {len} datasets")]
    HypothesisOutOfRange { index: usize, len: usize },
    #[error("hypothesis index {index} appears more than once")]
    HypothesisDuplicate { index: usize },
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
}

#[derive(Debug, Clone)]
enum MetricKind {
    /// Row-major n-by-n table.
    Explicit(Vec<f64>),
    /// Hamming distance between equal-length symbol vectors.
    Hamming(Vec<Vec<u8>>),
    /// Node distance between graphs on a shared vertex set.
    GraphNode {
        graphs: Vec<LabeledGraph>,
        cache: OnceLock<Vec<f64>>,
    },
}

/// A finite metric space: ordered dataset labels plus a pairwise distance.
#[derive(Debug, Clone)]
pub struct MetricSpace {
    labels: Vec<String>,
    metric: MetricKind,
}

impl MetricSpace {
    /// Builds a space from an explicit distance matrix. Only the shape is
    /// checked here; call [`MetricSpace::validate`] for the metric axioms.
    pub fn from_matrix(labels: Vec<String>, matrix: Vec<Vec<f64>>) -> Result<Self, SpaceError> {
        if labels.is_empty() {
            return Err(SpaceError::Empty);
        }
        let n = labels.len();
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(SpaceError::ShapeMismatch);
        }
        let mut flat = Vec::with_capacity(n * n);
        for row in &matrix {
            flat.extend_from_slice(row);
        }
        Ok(Self {
            labels,
            metric: MetricKind::Explicit(flat),
        })
    }

    /// Builds the Hamming space of the given symbol vectors. Labels are the
    /// vectors themselves rendered as strings; distances count differing
    /// positions. Duplicate vectors yield zero distances and are rejected
    /// by [`MetricSpace::validate`], not here.
    pub fn hamming(vectors: &[String]) -> Result<Self, SpaceError> {
        if vectors.is_empty() {
            return Err(SpaceError::Empty);
        }
        let expected = vectors[0].len();
        for (index, v) in vectors.iter().enumerate() {
            if v.len() != expected {
                return Err(SpaceError::LengthMismatch {
                    index,
                    got: v.len(),
                    expected,
                });
            }
        }
        Ok(Self {
            labels: vectors.to_vec(),
            metric: MetricKind::Hamming(vectors.iter().map(|v| v.as_bytes().to_vec()).collect()),
        })
    }

    /// The universe of all graphs on `n` vertices under node distance, in
    /// canonical (ascending bitmask) order.
    pub fn graph_node_universe(n: usize) -> Result<Self, SpaceError> {
        let graphs = graph::enumerate_graphs(n, None)?;
        Ok(Self::from_graphs(graphs))
    }

    /// A space over an explicit list of graphs under node distance.
    pub fn from_graphs(graphs: Vec<LabeledGraph>) -> Self {
        let labels = graphs.iter().map(|g| g.canonical_label()).collect();
        Self {
            labels,
            metric: MetricKind::GraphNode {
                graphs,
                cache: OnceLock::new(),
            },
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// The graphs behind a node-distance space, if this is one.
    pub fn graphs(&self) -> Option<&[LabeledGraph]> {
        match &self.metric {
            MetricKind::GraphNode { graphs, .. } => Some(graphs),
            _ => None,
        }
    }

    /// The symbol vectors behind a Hamming space, if this is one.
    pub fn hamming_vectors(&self) -> Option<&[Vec<u8>]> {
        match &self.metric {
            MetricKind::Hamming(v) => Some(v),
            _ => None,
        }
    }

    /// Distance between datasets `i` and `j`.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.metric {
            MetricKind::Explicit(flat) => flat[i * self.labels.len() + j],
            MetricKind::Hamming(vs) => {
                let (a, b) = (&vs[i], &vs[j]);
                a.iter().zip(b).filter(|(x, y)| x != y).count() as f64
            }
            MetricKind::GraphNode { graphs, cache } => {
                // same vertex count and capped n by construction
                let m = graphs.len();
                if m <= GRAPH_CACHE_CAP {
                    let table = cache.get_or_init(|| {
                        let mut t = vec![0.0; m * m];
                        for a in 0..m {
                            for b in (a + 1)..m {
                                let d = graph::node_distance(&graphs[a], &graphs[b])
                                    .expect("graph space invariant")
                                    as f64;
                                t[a * m + b] = d;
                                t[b * m + a] = d;
                            }
                        }
                        t
                    });
                    table[i * m + j]
                } else {
                    graph::node_distance(&graphs[i], &graphs[j]).expect("graph space invariant")
                        as f64
                }
            }
        }
    }

    /// Checks every metric axiom exhaustively and reports the first
    /// violation with its witness indices. Distinct datasets at distance
    /// zero are rejected as duplicates.
    pub fn validate(&self) -> Result<(), SpaceError> {
        let n = self.len();
        if n == 0 {
            return Err(SpaceError::Empty);
        }
        let mut seen = HashSet::new();
        for label in &self.labels {
            if !seen.insert(label) {
                return Err(SpaceError::DuplicateLabel {
                    label: label.clone(),
                });
            }
        }
        for i in 0..n {
            if self.dist(i, i) != 0.0 {
                return Err(SpaceError::NonzeroDiagonal { i });
            }
        }
        for i in 0..n {
            for j in 0..n {
                let d = self.dist(i, j);
                if d < 0.0 || d.is_nan() {
                    return Err(SpaceError::NegativeDistance { i, j });
                }
                if i < j {
                    if d != self.dist(j, i) {
                        return Err(SpaceError::NonSymmetric { i, j });
                    }
                    if d == 0.0 {
                        return Err(SpaceError::DuplicatePoint { i, j });
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.dist(i, k) > self.dist(i, j) + self.dist(j, k) {
                        return Err(SpaceError::TriangleViolation { i, j, k });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Nonempty ordered subset of a space's dataset indices; the first member
/// in canonical (ascending) order is the base point used by extensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypothesisSet {
    members: Vec<usize>,
}

impl HypothesisSet {
    /// Validates against the space size, sorts members ascending, and
    /// rejects duplicates.
    pub fn new(mut members: Vec<usize>, space_len: usize) -> Result<Self, SpaceError> {
        if members.is_empty() {
            return Err(SpaceError::EmptyHypothesis);
        }
        members.sort_unstable();
        for pair in members.windows(2) {
            if pair[0] == pair[1] {
                return Err(SpaceError::HypothesisDuplicate { index: pair[0] });
            }
        }
        if let Some(&last) = members.last() {
            if last >= space_len {
                return Err(SpaceError::HypothesisOutOfRange {
                    index: last,
                    len: space_len,
                });
            }
        }
        Ok(Self { members })
    }

    /// The whole space as a hypothesis set.
    pub fn full(space_len: usize) -> Result<Self, SpaceError> {
        Self::new((0..space_len).collect(), space_len)
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Base point: first member in canonical order.
    pub fn base(&self) -> usize {
        self.members[0]
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.binary_search(&index).is_ok()
    }

    /// Position of a dataset index inside the member list.
    pub fn position(&self, index: usize) -> Option<usize> {
        self.members.binary_search(&index).ok()
    }
}

/// Convenience alias used throughout: spaces are shared, never mutated.
pub type SharedSpace = Arc<MetricSpace>;

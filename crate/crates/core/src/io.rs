//! JSON wire formats for spaces, mechanisms, extension results, graphs,
//! and experiment configs.
//!
//! Serialization is deterministic: row and normalizer maps are ordered by
//! label, floats render in shortest round-trip form, and output is pretty
//! JSON with a trailing newline. Loading validates everything the types
//! require: metric axioms for explicit and Hamming spaces (graph spaces
//! are metric by construction), row sums, and hypothesis membership.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::edge_density::GraphExperimentConfig;
use crate::extension::ExtensionResult;
use crate::graph::{pair_count, GraphError, LabeledGraph, NODE_DISTANCE_CAP};
use crate::mechanism::{FiniteMechanism, MechanismError, PartialMechanism};
use crate::space::{HypothesisSet, MetricSpace, SpaceError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("unknown row label {label:?}")]
    UnknownRowLabel { label: String },
    #[error("missing row for dataset {label:?}")]
    MissingRow { label: String },
    #[error("unknown hypothesis label {label:?}")]
    UnknownHypothesisLabel { label: String },
    #[error(
        "rows must cover either every dataset or exactly the hypothesis set \
         ({got} rows for {datasets} datasets, hypothesis {hypothesis:?})"
    )]
    RowCoverage {
        got: usize,
        datasets: usize,
        hypothesis: Option<usize>,
    },
    #[error("graph label {label:?} is not of the form g<mask> with a valid mask")]
    BadGraphLabel { label: String },
    #[error("graph spaces support at most {cap} vertices, got {n}")]
    GraphSpaceTooLarge { n: usize, cap: usize },
    #[error("hamming space labels must equal the vectors")]
    HammingLabelMismatch,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type")]
enum MetricJson {
    #[serde(rename = "explicit")]
    Explicit { matrix: Vec<Vec<f64>> },
    #[serde(rename = "hamming")]
    Hamming { vectors: Vec<String> },
    #[serde(rename = "graph_node")]
    GraphNode { n: usize },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceJson {
    labels: Vec<String>,
    metric: MetricJson,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MechanismJson {
    space: SpaceJson,
    outputs: Vec<String>,
    rows: BTreeMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hypothesis: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExtensionJson {
    mechanism: MechanismJson,
    normalizers: BTreeMap<String, f64>,
    eps_in: f64,
    base: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphJson {
    n: usize,
    edges: Vec<(usize, usize)>,
}

/// A loaded mechanism file: full table, or partial when a hypothesis set
/// is declared. A file carrying full rows plus a hypothesis defines the
/// restriction of those rows to the hypothesis set.
#[derive(Debug)]
pub enum LoadedMechanism {
    Full(FiniteMechanism),
    Partial(PartialMechanism),
}

fn space_from_json(json: SpaceJson) -> Result<Arc<MetricSpace>, IoError> {
    let space = match json.metric {
        MetricJson::Explicit { matrix } => {
            let s = MetricSpace::from_matrix(json.labels, matrix)?;
            s.validate()?;
            s
        }
        MetricJson::Hamming { vectors } => {
            let s = MetricSpace::hamming(&vectors)?;
            s.validate()?;
            if s.labels() != json.labels {
                return Err(IoError::HammingLabelMismatch);
            }
            s
        }
        MetricJson::GraphNode { n } => {
            if n > NODE_DISTANCE_CAP {
                return Err(IoError::GraphSpaceTooLarge {
                    n,
                    cap: NODE_DISTANCE_CAP,
                });
            }
            let bits = pair_count(n);
            let mut graphs = Vec::with_capacity(json.labels.len());
            for label in &json.labels {
                let mask: u64 = label
                    .strip_prefix('g')
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| IoError::BadGraphLabel {
                        label: label.clone(),
                    })?;
                if bits < 64 && mask >> bits != 0 {
                    return Err(IoError::BadGraphLabel {
                        label: label.clone(),
                    });
                }
                graphs.push(LabeledGraph::from_mask(n, mask)?);
            }
            // distinct labels imply distinct masks, hence positive distances
            let mut seen = std::collections::HashSet::new();
            for label in &json.labels {
                if !seen.insert(label) {
                    return Err(IoError::Space(SpaceError::DuplicateLabel {
                        label: label.clone(),
                    }));
                }
            }
            MetricSpace::from_graphs(graphs)
        }
    };
    Ok(Arc::new(space))
}

fn space_to_json(space: &MetricSpace) -> SpaceJson {
    let labels = space.labels().to_vec();
    let metric = if let Some(graphs) = space.graphs() {
        MetricJson::GraphNode {
            n: graphs.first().map(|g| g.vertex_count()).unwrap_or(0),
        }
    } else if let Some(vectors) = space.hamming_vectors() {
        MetricJson::Hamming {
            vectors: vectors
                .iter()
                .map(|v| String::from_utf8_lossy(v).into_owned())
                .collect(),
        }
    } else {
        let n = space.len();
        MetricJson::Explicit {
            matrix: (0..n)
                .map(|i| (0..n).map(|j| space.dist(i, j)).collect())
                .collect(),
        }
    };
    SpaceJson { labels, metric }
}

/// Parses and validates a mechanism file.
pub fn load_mechanism(text: &str) -> Result<LoadedMechanism, IoError> {
    let json: MechanismJson = serde_json::from_str(text)?;
    let space = space_from_json(json.space)?;
    for label in json.rows.keys() {
        if space.index_of(label).is_none() {
            return Err(IoError::UnknownRowLabel {
                label: label.clone(),
            });
        }
    }

    let hypothesis = match &json.hypothesis {
        Some(labels) => {
            let mut members = Vec::with_capacity(labels.len());
            for label in labels {
                members.push(space.index_of(label).ok_or_else(|| {
                    IoError::UnknownHypothesisLabel {
                        label: label.clone(),
                    }
                })?);
            }
            Some(HypothesisSet::new(members, space.len())?)
        }
        None => None,
    };

    let full_rows = json.rows.len() == space.len();
    let row_for = |label: &str| -> Result<Vec<f64>, IoError> {
        json.rows
            .get(label)
            .cloned()
            .ok_or_else(|| IoError::MissingRow {
                label: label.to_string(),
            })
    };

    match hypothesis {
        None => {
            if !full_rows {
                return Err(IoError::RowCoverage {
                    got: json.rows.len(),
                    datasets: space.len(),
                    hypothesis: None,
                });
            }
            let table = space
                .labels()
                .iter()
                .map(|l| row_for(l))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(LoadedMechanism::Full(FiniteMechanism::new(
                space,
                json.outputs,
                table,
            )?))
        }
        Some(h) => {
            if !full_rows && json.rows.len() != h.len() {
                return Err(IoError::RowCoverage {
                    got: json.rows.len(),
                    datasets: space.len(),
                    hypothesis: Some(h.len()),
                });
            }
            let table = h
                .members()
                .iter()
                .map(|&i| row_for(space.label(i)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(LoadedMechanism::Partial(PartialMechanism::new(
                space,
                json.outputs,
                h,
                table,
            )?))
        }
    }
}

fn mechanism_json(m: &FiniteMechanism, hypothesis: Option<&HypothesisSet>) -> MechanismJson {
    let rows = m
        .space()
        .labels()
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), m.row(i).to_vec()))
        .collect();
    MechanismJson {
        space: space_to_json(m.space()),
        outputs: m.outputs().to_vec(),
        rows,
        hypothesis: hypothesis
            .map(|h| h.members().iter().map(|&i| m.space().label(i).to_string()).collect()),
    }
}

fn pretty(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Serializes a full mechanism, optionally noting a hypothesis set.
pub fn mechanism_to_json(m: &FiniteMechanism, hypothesis: Option<&HypothesisSet>) -> String {
    pretty(&mechanism_json(m, hypothesis))
}

/// Serializes a partial mechanism (rows only for the hypothesis set).
pub fn partial_mechanism_to_json(m: &PartialMechanism) -> String {
    let rows = m
        .hypothesis()
        .members()
        .iter()
        .enumerate()
        .map(|(pos, &i)| (m.space().label(i).to_string(), m.row_at(pos).to_vec()))
        .collect();
    pretty(&MechanismJson {
        space: space_to_json(m.space()),
        outputs: m.outputs().to_vec(),
        rows,
        hypothesis: Some(
            m.hypothesis()
                .members()
                .iter()
                .map(|&i| m.space().label(i).to_string())
                .collect(),
        ),
    })
}

/// Serializes an extension result, echoing the source hypothesis set
/// inside the embedded mechanism.
pub fn extension_to_json(r: &ExtensionResult, hypothesis: &HypothesisSet) -> String {
    let normalizers = r
        .mechanism()
        .space()
        .labels()
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), r.normalizers()[i]))
        .collect();
    pretty(&ExtensionJson {
        mechanism: mechanism_json(r.mechanism(), Some(hypothesis)),
        normalizers,
        eps_in: r.eps_in(),
        base: r
            .mechanism()
            .space()
            .label(r.base_index())
            .to_string(),
    })
}

/// Parses a graph file: 0-based vertices, edges as [u,v] with u < v.
pub fn load_graph(text: &str) -> Result<LabeledGraph, IoError> {
    let json: GraphJson = serde_json::from_str(text)?;
    Ok(LabeledGraph::from_edges(json.n, &json.edges)?)
}

pub fn graph_to_json(g: &LabeledGraph) -> String {
    pretty(&GraphJson {
        n: g.vertex_count(),
        edges: g.edge_list(),
    })
}

/// Parses an experiment config file.
pub fn load_config(text: &str) -> Result<GraphExperimentConfig, IoError> {
    Ok(serde_json::from_str(text)?)
}

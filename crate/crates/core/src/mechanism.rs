//! Finite randomized mechanisms as row-stochastic probability tables,
//! their density views relative to a base row, and the stock mechanisms
//! used as inputs to the extension.
//!
//! Privacy is measured exactly: the Lipschitz constant of the map from
//! datasets to output distributions under the max-divergence metric,
//! computed by scanning every ordered dataset pair and every output.
//! All divergence arithmetic stays in the log domain so that large
//! distances never overflow.

use std::sync::Arc;

use thiserror::Error;

use crate::space::{HypothesisSet, MetricSpace, SharedSpace, SpaceError};

/// Row sums must match 1 to this absolute tolerance.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Default relative tolerance on epsilon for verification verdicts.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MechanismError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("mechanism has no outputs")]
    NoOutputs,
    #[error("row {label:?} has {got} entries, expected {expected}")]
    RowShape {
        label: String,
        got: usize,
        expected: usize,
    },
    #[error("row count {got} does not match {expected} datasets")]
    RowCount { got: usize, expected: usize },
    #[error("row {label:?} has a negative or non-finite entry at output {output}")]
    BadEntry { label: String, output: usize },
    #[error("row {label:?} sums to {sum} (must be 1 within {tol})")]
    RowSum { label: String, sum: f64, tol: f64 },
    #[error(
        "absolute continuity violated: dataset {dataset:?} has positive probability \
         on output {output:?} where the base row is zero"
    )]
    AbsoluteContinuityViolation { dataset: String, output: String },
    #[error("dataset index {index} is not in the hypothesis set")]
    NotInHypothesis { index: usize },
    #[error("unknown dataset index {index}")]
    UnknownDataset { index: usize },
    #[error("invalid space for this mechanism: {0}")]
    InvalidSpace(String),
    #[error("bad parameters: {0}")]
    BadParameters(String),
}

fn check_rows(
    labels: &[String],
    outputs_len: usize,
    rows: &[Vec<f64>],
) -> Result<(), MechanismError> {
    if outputs_len == 0 {
        return Err(MechanismError::NoOutputs);
    }
    if rows.len() != labels.len() {
        return Err(MechanismError::RowCount {
            got: rows.len(),
            expected: labels.len(),
        });
    }
    for (label, row) in labels.iter().zip(rows) {
        if row.len() != outputs_len {
            return Err(MechanismError::RowShape {
                label: label.clone(),
                got: row.len(),
                expected: outputs_len,
            });
        }
        for (output, &p) in row.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(MechanismError::BadEntry {
                    label: label.clone(),
                    output,
                });
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(MechanismError::RowSum {
                label: label.clone(),
                sum,
                tol: ROW_SUM_TOLERANCE,
            });
        }
    }
    Ok(())
}

/// A randomized mechanism on every dataset of a space: one probability
/// row per dataset, columns indexed by the output labels.
#[derive(Debug, Clone)]
pub struct FiniteMechanism {
    space: SharedSpace,
    outputs: Vec<String>,
    table: Vec<Vec<f64>>,
}

impl FiniteMechanism {
    pub fn new(
        space: SharedSpace,
        outputs: Vec<String>,
        table: Vec<Vec<f64>>,
    ) -> Result<Self, MechanismError> {
        check_rows(space.labels(), outputs.len(), &table)?;
        Ok(Self {
            space,
            outputs,
            table,
        })
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn shared_space(&self) -> SharedSpace {
        Arc::clone(&self.space)
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn row(&self, dataset: usize) -> &[f64] {
        &self.table[dataset]
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }

    /// Keeps only the rows in the hypothesis set.
    pub fn restrict(&self, hypothesis: HypothesisSet) -> PartialMechanism {
        let table = hypothesis
            .members()
            .iter()
            .map(|&i| self.table[i].clone())
            .collect();
        PartialMechanism {
            space: Arc::clone(&self.space),
            outputs: self.outputs.clone(),
            hypothesis,
            table,
        }
    }

    /// Exact Lipschitz constant of the mechanism in the max-divergence
    /// metric, over every ordered dataset pair.
    pub fn measured_epsilon(&self) -> PrivacyReport {
        let indices: Vec<usize> = (0..self.space.len()).collect();
        measure(&self.space, &indices, &self.table)
    }

    pub fn verify_epsilon(&self, claimed: f64, rel_tol: f64) -> PrivacyReport {
        self.measured_epsilon().against(claimed, rel_tol)
    }
}

/// A mechanism defined only on a hypothesis subset of the space.
#[derive(Debug, Clone)]
pub struct PartialMechanism {
    space: SharedSpace,
    outputs: Vec<String>,
    hypothesis: HypothesisSet,
    table: Vec<Vec<f64>>,
}

impl PartialMechanism {
    /// `table` rows follow the hypothesis member order (ascending index).
    pub fn new(
        space: SharedSpace,
        outputs: Vec<String>,
        hypothesis: HypothesisSet,
        table: Vec<Vec<f64>>,
    ) -> Result<Self, MechanismError> {
        let labels: Vec<String> = hypothesis
            .members()
            .iter()
            .map(|&i| space.label(i).to_string())
            .collect();
        check_rows(&labels, outputs.len(), &table)?;
        Ok(Self {
            space,
            outputs,
            hypothesis,
            table,
        })
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn shared_space(&self) -> SharedSpace {
        Arc::clone(&self.space)
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn hypothesis(&self) -> &HypothesisSet {
        &self.hypothesis
    }

    /// Row for a dataset index of the underlying space.
    pub fn row_for(&self, dataset: usize) -> Result<&[f64], MechanismError> {
        let pos = self
            .hypothesis
            .position(dataset)
            .ok_or(MechanismError::NotInHypothesis { index: dataset })?;
        Ok(&self.table[pos])
    }

    /// Row by position in the hypothesis member order.
    pub fn row_at(&self, pos: usize) -> &[f64] {
        &self.table[pos]
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }

    /// Lipschitz constant over pairs in the hypothesis set only.
    pub fn measured_epsilon(&self) -> PrivacyReport {
        measure(&self.space, self.hypothesis.members(), &self.table)
    }

    pub fn verify_epsilon(&self, claimed: f64, rel_tol: f64) -> PrivacyReport {
        self.measured_epsilon().against(claimed, rel_tol)
    }

    /// Re-expresses the table as densities relative to the row of `base`,
    /// which must lie in the hypothesis set. Fails if any row carries
    /// probability outside the support of the base row: such an input is
    /// not private on the hypothesis set for any epsilon.
    pub fn density_view(&self, base: usize) -> Result<DensityView, MechanismError> {
        let base_pos = self
            .hypothesis
            .position(base)
            .ok_or(MechanismError::NotInHypothesis { index: base })?;
        let mu = self.table[base_pos].clone();
        let support: Vec<usize> = (0..mu.len()).filter(|&w| mu[w] > 0.0).collect();
        for (pos, &d) in self.hypothesis.members().iter().enumerate() {
            for (w, &p) in self.table[pos].iter().enumerate() {
                if p > 0.0 && mu[w] == 0.0 {
                    return Err(MechanismError::AbsoluteContinuityViolation {
                        dataset: self.space.label(d).to_string(),
                        output: self.outputs[w].clone(),
                    });
                }
            }
        }
        let densities = self
            .table
            .iter()
            .map(|row| support.iter().map(|&w| row[w] / mu[w]).collect())
            .collect();
        Ok(DensityView {
            base_index: base,
            mu,
            support,
            densities,
        })
    }
}

/// A partial mechanism's table expressed as densities relative to the
/// base row `mu`, restricted to the support of `mu`.
#[derive(Debug, Clone)]
pub struct DensityView {
    base_index: usize,
    mu: Vec<f64>,
    support: Vec<usize>,
    densities: Vec<Vec<f64>>,
}

impl DensityView {
    pub fn base_index(&self) -> usize {
        self.base_index
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Output indices where the base row is positive, ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Density of the row at hypothesis position `pos`, over the support.
    pub fn density_at(&self, pos: usize) -> &[f64] {
        &self.densities[pos]
    }

    /// Rebuilds the probability row at hypothesis position `pos`.
    pub fn reconstruct_row(&self, pos: usize, outputs_len: usize) -> Vec<f64> {
        let mut row = vec![0.0; outputs_len];
        for (s, &w) in self.support.iter().enumerate() {
            row[w] = self.densities[pos][s] * self.mu[w];
        }
        row
    }
}

/// Measured privacy level: finite, or unbounded when some pair puts
/// positive mass where the other row has none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measured {
    Finite(f64),
    NonPrivate,
}

impl Measured {
    pub fn is_finite(&self) -> bool {
        matches!(self, Measured::Finite(_))
    }

    pub fn value(&self) -> f64 {
        match *self {
            Measured::Finite(v) => v,
            Measured::NonPrivate => f64::INFINITY,
        }
    }
}

/// Witness of the worst-case divergence ratio: ordered dataset pair and
/// the output where the supremum is attained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpsWitness {
    pub dataset_1: usize,
    pub dataset_2: usize,
    pub output: usize,
}

/// Result of measuring or verifying a mechanism's privacy level.
#[derive(Debug, Clone)]
pub struct PrivacyReport {
    pub measured: Measured,
    pub witness: Option<EpsWitness>,
    pub claimed: Option<f64>,
    pub rel_tol: f64,
    pub passed: Option<bool>,
}

impl PrivacyReport {
    /// Fills in the verdict against a claimed epsilon.
    pub fn against(mut self, claimed: f64, rel_tol: f64) -> PrivacyReport {
        let pass = match self.measured {
            Measured::Finite(v) => v <= claimed * (1.0 + rel_tol),
            Measured::NonPrivate => false,
        };
        self.claimed = Some(claimed);
        self.rel_tol = rel_tol;
        self.passed = Some(pass);
        self
    }
}

/// Max over ordered pairs and outputs of ln(p1/p2)/d, with 0/0 ignored
/// and positive/0 treated as unbounded. Ties keep the earliest witness
/// in (pair, output) scan order.
fn measure(space: &MetricSpace, datasets: &[usize], rows: &[Vec<f64>]) -> PrivacyReport {
    let mut best = f64::NEG_INFINITY;
    let mut witness = None;
    for (p1, &d1) in datasets.iter().enumerate() {
        for (p2, &d2) in datasets.iter().enumerate() {
            if p1 == p2 {
                continue;
            }
            let d = space.dist(d1, d2);
            for (w, (&a, &b)) in rows[p1].iter().zip(&rows[p2]).enumerate() {
                if a == 0.0 && b == 0.0 {
                    continue;
                }
                if b == 0.0 {
                    return PrivacyReport {
                        measured: Measured::NonPrivate,
                        witness: Some(EpsWitness {
                            dataset_1: d1,
                            dataset_2: d2,
                            output: w,
                        }),
                        claimed: None,
                        rel_tol: DEFAULT_REL_TOL,
                        passed: None,
                    };
                }
                let ratio = (a.ln() - b.ln()) / d;
                if ratio > best {
                    best = ratio;
                    witness = Some(EpsWitness {
                        dataset_1: d1,
                        dataset_2: d2,
                        output: w,
                    });
                }
            }
        }
    }
    let measured = if best == f64::NEG_INFINITY {
        Measured::Finite(0.0) // fewer than two datasets
    } else {
        Measured::Finite(best.max(0.0))
    };
    PrivacyReport {
        measured,
        witness,
        claimed: None,
        rel_tol: DEFAULT_REL_TOL,
        passed: None,
    }
}

/// Randomized response over the bit vectors of a Hamming space: each bit
/// flips independently with probability 1/(1+e^eps), which makes the
/// mechanism exactly eps-private per unit Hamming distance. Outputs are
/// all bit strings of the input length.
pub fn randomized_response(
    space: &SharedSpace,
    eps: f64,
) -> Result<FiniteMechanism, MechanismError> {
    let vectors = space
        .hamming_vectors()
        .ok_or_else(|| MechanismError::InvalidSpace("not a Hamming space".into()))?;
    if vectors
        .iter()
        .any(|v| v.iter().any(|&s| s != b'0' && s != b'1'))
    {
        return Err(MechanismError::InvalidSpace(
            "vectors must be over symbols 0 and 1".into(),
        ));
    }
    if !eps.is_finite() || eps <= 0.0 {
        return Err(MechanismError::BadParameters(format!(
            "eps must be positive and finite, got {eps}"
        )));
    }
    let len = vectors[0].len();
    if len >= 20 {
        return Err(MechanismError::InvalidSpace(format!(
            "output space 2^{len} is too large"
        )));
    }
    let flip = 1.0 / (1.0 + eps.exp());
    let keep = 1.0 - flip;
    let outputs: Vec<String> = (0..1u32 << len)
        .map(|bits| {
            (0..len)
                .map(|i| {
                    if bits >> (len - 1 - i) & 1 == 1 {
                        '1'
                    } else {
                        '0'
                    }
                })
                .collect()
        })
        .collect();
    let table = vectors
        .iter()
        .map(|input| {
            outputs
                .iter()
                .map(|out| {
                    let h = input
                        .iter()
                        .zip(out.as_bytes())
                        .filter(|(a, b)| a != b)
                        .count();
                    keep.powi((len - h) as i32) * flip.powi(h as i32)
                })
                .collect()
        })
        .collect();
    FiniteMechanism::new(Arc::clone(space), outputs, table)
}

/// Geometric distribution exp(-alpha*|k - center|) on 0..=max_output with
/// the mass beyond each boundary collapsed onto that boundary. Clamping is
/// post-processing of the untruncated mechanism, so privacy per unit of
/// center shift is exactly alpha; renormalizing instead would change the
/// ratios.
pub fn truncated_geometric(
    max_output: usize,
    center: usize,
    alpha: f64,
) -> Result<Vec<f64>, MechanismError> {
    if center > max_output {
        return Err(MechanismError::BadParameters(format!(
            "center {center} exceeds max output {max_output}"
        )));
    }
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(MechanismError::BadParameters(format!(
            "alpha must be positive and finite, got {alpha}"
        )));
    }
    if max_output == 0 {
        return Ok(vec![1.0]);
    }
    let q = (-alpha).exp();
    // full-line normalizer: sum over all integers of q^|j - center|
    let z = (1.0 + q) / (1.0 - q);
    let c = center as f64;
    let mut probs = Vec::with_capacity(max_output + 1);
    for k in 0..=max_output {
        let k = k as f64;
        let p = if k == 0.0 {
            // mass of every point at or below 0
            (-alpha * c).exp() / ((1.0 - q) * z)
        } else if k == max_output as f64 {
            // mass of every point at or above the max
            (-alpha * (max_output as f64 - c)).exp() / ((1.0 - q) * z)
        } else {
            (-alpha * (k - c).abs()).exp() / z
        };
        probs.push(p);
    }
    Ok(probs)
}

//! Extension of a mechanism defined on a hypothesis subset to the whole
//! space, at twice the privacy cost and with exact agreement on the
//! subset.
//!
//! Given a partial mechanism that is eps-private on its hypothesis set H,
//! every dataset D gets the output distribution whose density relative to
//! the base row mu is proportional to
//!
//! ```text
//! g_D(w) = min over D' in H of exp(eps * d(D, D')) * f_D'(w)
//! ```
//!
//! where f_D' is the density of row D' relative to mu. The normalizer
//! Z_D is the integral of g_D against mu; it equals 1 on H, so the
//! extension reproduces the input rows there, and the whole table is
//! 2*eps-private.

use thiserror::Error;

use crate::mechanism::{
    DensityView, FiniteMechanism, MechanismError, PartialMechanism, PrivacyReport,
    DEFAULT_REL_TOL,
};
use crate::space::{HypothesisSet, MetricSpace};

/// Per-entry tolerance for agreement between the extension and the input
/// rows on the hypothesis set.
pub const AGREEMENT_TOL: f64 = 1e-12;

/// Absolute tolerance for the normalizer identity Z = 1 on the hypothesis
/// set, and for row sums.
pub const Z_ONE_TOL: f64 = 1e-9;

/// Relative tolerance for the normalizer bounds Z_D <= exp(eps * dist(D,H))
/// and Z_D1 <= exp(eps * d(D1,D2)) * Z_D2.
pub const Z_BOUND_REL_TOL: f64 = 1e-9;

/// Per-entry tolerance when comparing extensions built from different
/// base points.
pub const BASE_INVARIANCE_TOL: f64 = 1e-10;

/// Per-entry tolerance between the density-domain extension and the
/// probability-domain oracle.
pub const ORACLE_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum ExtendError {
    #[error("input mechanism is not eps-private on its hypothesis set (eps = {eps})")]
    NotPrivateOnH { eps: f64, report: PrivacyReport },
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("unknown dataset index {index}")]
    UnknownDataset { index: usize },
    #[error("normalizer for dataset {dataset} is not finite and positive")]
    Overflow { dataset: usize },
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
}

/// First violation of the normalizer ratio bound, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct ZRatioViolation {
    pub dataset_1: usize,
    pub dataset_2: usize,
    pub z1: f64,
    pub z2: f64,
    pub bound: f64,
}

/// The extended mechanism together with the per-dataset normalizers and
/// the construction parameters.
#[derive(Debug, Clone)]
pub struct ExtensionResult {
    mechanism: FiniteMechanism,
    normalizers: Vec<f64>,
    eps_in: f64,
    base_index: usize,
    scaling_ops: u64,
}

impl ExtensionResult {
    pub fn mechanism(&self) -> &FiniteMechanism {
        &self.mechanism
    }

    pub fn normalizers(&self) -> &[f64] {
        &self.normalizers
    }

    pub fn eps_in(&self) -> f64 {
        self.eps_in
    }

    pub fn base_index(&self) -> usize {
        self.base_index
    }

    /// Number of density-scaling operations the construction performed:
    /// exactly |datasets| * |hypothesis| * |support of mu|.
    pub fn scaling_ops(&self) -> u64 {
        self.scaling_ops
    }
}

/// Smallest distance from a dataset to the hypothesis set.
pub fn dist_to_hypothesis(space: &MetricSpace, h: &HypothesisSet, dataset: usize) -> f64 {
    h.members()
        .iter()
        .map(|&m| space.dist(dataset, m))
        .fold(f64::INFINITY, f64::min)
}

fn check_eps(eps: f64) -> Result<(), ExtendError> {
    if !eps.is_finite() || eps < 0.0 {
        return Err(ExtendError::BadParameters(format!(
            "eps must be finite and nonnegative, got {eps}"
        )));
    }
    Ok(())
}

fn check_private(m: &PartialMechanism, eps: f64) -> Result<(), ExtendError> {
    let report = m.verify_epsilon(eps, DEFAULT_REL_TOL);
    if report.passed != Some(true) {
        return Err(ExtendError::NotPrivateOnH { eps, report });
    }
    Ok(())
}

/// One extended row: scaled-minimum density against the view, integrated
/// left-to-right over the support. Returns (row, normalizer, ops).
fn extended_row(
    view: &DensityView,
    scales: &[f64],
    outputs_len: usize,
) -> (Vec<f64>, f64, u64) {
    let support = view.support();
    let mu = view.mu();
    let mut terms = Vec::with_capacity(support.len());
    let mut ops = 0u64;
    for (s, &w) in support.iter().enumerate() {
        let mut g = f64::INFINITY;
        for (j, &scale) in scales.iter().enumerate() {
            let scaled = scale * view.density_at(j)[s];
            ops += 1;
            if scaled < g {
                g = scaled;
            }
        }
        terms.push(g * mu[w]);
    }
    let mut z = 0.0;
    for &t in &terms {
        z += t;
    }
    let mut row = vec![0.0; outputs_len];
    for (s, &w) in support.iter().enumerate() {
        row[w] = terms[s] / z;
    }
    (row, z, ops)
}

/// Extends the mechanism to every dataset of its space, using the first
/// hypothesis member in canonical order as the base point. The input must
/// already be eps-private on the hypothesis set; this is checked and
/// fails closed.
pub fn extend(m: &PartialMechanism, eps: f64) -> Result<ExtensionResult, ExtendError> {
    extend_with_base(m, eps, m.hypothesis().base())
}

/// Same construction with an explicit base point in the hypothesis set.
/// The resulting table does not depend on the choice beyond rounding.
pub fn extend_with_base(
    m: &PartialMechanism,
    eps: f64,
    base: usize,
) -> Result<ExtensionResult, ExtendError> {
    check_eps(eps)?;
    check_private(m, eps)?;
    let view = m.density_view(base)?;
    let space = m.space();
    let members = m.hypothesis().members();
    let mut table = Vec::with_capacity(space.len());
    let mut normalizers = Vec::with_capacity(space.len());
    let mut total_ops = 0u64;
    let mut scales = vec![0.0; members.len()];
    for dataset in 0..space.len() {
        for (j, &member) in members.iter().enumerate() {
            scales[j] = (eps * space.dist(dataset, member)).exp();
        }
        let (row, z, ops) = extended_row(&view, &scales, m.outputs().len());
        if !z.is_finite() || z <= 0.0 {
            return Err(ExtendError::Overflow { dataset });
        }
        table.push(row);
        normalizers.push(z);
        total_ops += ops;
    }
    let mechanism = FiniteMechanism::new(m.shared_space(), m.outputs().to_vec(), table)?;
    Ok(ExtensionResult {
        mechanism,
        normalizers,
        eps_in: eps,
        base_index: base,
        scaling_ops: total_ops,
    })
}

/// Computes a single row of the extension without building the full
/// table. Bit-identical to the corresponding row of [`extend`]: the
/// scaling and summation order is the same.
pub fn extend_row(
    m: &PartialMechanism,
    eps: f64,
    dataset: usize,
) -> Result<(Vec<f64>, f64), ExtendError> {
    check_eps(eps)?;
    if dataset >= m.space().len() {
        return Err(ExtendError::UnknownDataset { index: dataset });
    }
    check_private(m, eps)?;
    let view = m.density_view(m.hypothesis().base())?;
    let scales: Vec<f64> = m
        .hypothesis()
        .members()
        .iter()
        .map(|&member| (eps * m.space().dist(dataset, member)).exp())
        .collect();
    let (row, z, _) = extended_row(&view, &scales, m.outputs().len());
    if !z.is_finite() || z <= 0.0 {
        return Err(ExtendError::Overflow { dataset });
    }
    Ok((row, z))
}

/// Asserts the derived bound Z_D1 <= exp(eps * d(D1,D2)) * Z_D2 for every
/// ordered pair, with relative tolerance [`Z_BOUND_REL_TOL`]. A returned
/// witness indicates an implementation bug, not bad input.
pub fn normalizer_ratio_check(r: &ExtensionResult) -> Result<(), ZRatioViolation> {
    let space = r.mechanism.space();
    let n = space.len();
    for d1 in 0..n {
        for d2 in 0..n {
            if d1 == d2 {
                continue;
            }
            let bound = (r.eps_in * space.dist(d1, d2)).exp() * r.normalizers[d2];
            if r.normalizers[d1] > bound * (1.0 + Z_BOUND_REL_TOL) {
                return Err(ZRatioViolation {
                    dataset_1: d1,
                    dataset_2: d2,
                    z1: r.normalizers[d1],
                    z2: r.normalizers[d2],
                    bound,
                });
            }
        }
    }
    Ok(())
}

//! Independent brute-force oracles that re-derive every guarantee of the
//! extension from first principles.
//!
//! The oracle here works entirely in the probability domain and never
//! forms densities, so it shares no arithmetic with the extension module
//! beyond the distance calls; agreement between the two is a meaningful
//! cross-check. The set-level audit enumerates every output subset and
//! compares the verdict with the pointwise (singleton) check, which must
//! agree by the density condition.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::extension::{
    self, dist_to_hypothesis, extend, extend_with_base, ExtendError, AGREEMENT_TOL,
    BASE_INVARIANCE_TOL, ORACLE_TOL, Z_BOUND_REL_TOL, Z_ONE_TOL,
};
use crate::mechanism::{FiniteMechanism, PartialMechanism, DEFAULT_REL_TOL};
use thiserror::Error;

/// Subset enumeration refuses more outputs than this (2^20 subsets).
pub const MAX_SET_LEVEL_OUTPUTS: usize = 20;

/// Cap on datasets * 2^outputs when precomputing subset sums.
const MAX_SUBSET_TABLE: u64 = 1 << 24;

#[derive(Debug, Error)]
pub enum VerifierError {
    #[error("set-level audit supports at most {cap} outputs, got {got}")]
    TooManyOutputs { got: usize, cap: usize },
    #[error("set-level audit table would exceed {cap} entries")]
    TooLarge { cap: u64 },
}

/// One named check with its verdict. The witness is present exactly when
/// the check fails; `measured` is omitted for unbounded ratios.
#[derive(Debug, Clone, Serialize)]
pub struct AuditCheck {
    pub name: String,
    pub passed: bool,
    pub measured: Option<f64>,
    pub witness: Option<String>,
}

impl AuditCheck {
    fn pass(name: &str, measured: Option<f64>) -> Self {
        Self {
            name: name.to_string(),
            passed: true,
            measured,
            witness: None,
        }
    }

    fn fail(name: &str, measured: Option<f64>, witness: String) -> Self {
        Self {
            name: name.to_string(),
            passed: false,
            measured,
            witness: Some(witness),
        }
    }
}

/// Full audit outcome: every check listed, overall conjunction.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
    pub overall: bool,
}

impl AuditReport {
    fn from_checks(checks: Vec<AuditCheck>) -> Self {
        let overall = checks.iter().all(|c| c.passed);
        Self { checks, overall }
    }

    /// Appends another report's checks; the conjunction is recomputed.
    pub fn merge(mut self, other: AuditReport) -> AuditReport {
        self.checks.extend(other.checks);
        AuditReport::from_checks(self.checks)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Fixed-width text table, one line per check plus the overall verdict.
    pub fn to_table(&self) -> String {
        let width = self
            .checks
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(0)
            .max(7);
        let mut out = String::new();
        for c in &self.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            let measured = match c.measured {
                Some(v) => format!(" measured={v}"),
                None => String::new(),
            };
            let witness = match &c.witness {
                Some(w) => format!(" witness: {w}"),
                None => String::new(),
            };
            out.push_str(&format!("{verdict}  {:width$}{measured}{witness}\n", c.name));
        }
        let overall = if self.overall { "PASS" } else { "FAIL" };
        out.push_str(&format!("{overall}  {:width$}\n", "overall"));
        out
    }
}

/// How the pairwise privacy check of an audit walks the dataset pairs.
#[derive(Debug, Clone, Copy)]
pub enum PairCheck {
    /// Every ordered pair.
    Exhaustive,
    /// Every pair at distance exactly 1, plus this many random ordered
    /// pairs drawn from a seeded generator.
    Sampled { random_pairs: usize, seed: u64 },
}

/// Re-implementation of the extension working directly on probabilities:
/// g_D(w) = min over D' in H of exp(eps*d(D,D')) * P(row D' = w), then
/// normalize by the plain sum over outputs. The base measure cancels, so
/// this must match the density-domain construction.
pub fn oracle_extend(m: &PartialMechanism, eps: f64) -> Result<FiniteMechanism, ExtendError> {
    if !eps.is_finite() || eps < 0.0 {
        return Err(ExtendError::BadParameters(format!(
            "eps must be finite and nonnegative, got {eps}"
        )));
    }
    let report = m.verify_epsilon(eps, DEFAULT_REL_TOL);
    if report.passed != Some(true) {
        return Err(ExtendError::NotPrivateOnH { eps, report });
    }
    let space = m.space();
    let members = m.hypothesis().members();
    let k = m.outputs().len();
    let mut table = Vec::with_capacity(space.len());
    for dataset in 0..space.len() {
        let scales: Vec<f64> = members
            .iter()
            .map(|&member| (eps * space.dist(dataset, member)).exp())
            .collect();
        let mut g = vec![0.0; k];
        for (w, slot) in g.iter_mut().enumerate() {
            let mut best = f64::INFINITY;
            for (j, &scale) in scales.iter().enumerate() {
                let p = m.row_at(j)[w];
                // a zero probability wins the minimum outright and avoids
                // inf * 0 when the scale has overflowed
                let scaled = if p == 0.0 { 0.0 } else { scale * p };
                if scaled < best {
                    best = scaled;
                }
            }
            *slot = best;
        }
        let mut z = 0.0;
        for &v in &g {
            z += v;
        }
        if !z.is_finite() || z <= 0.0 {
            return Err(ExtendError::Overflow { dataset });
        }
        for v in &mut g {
            *v /= z;
        }
        table.push(g);
    }
    Ok(FiniteMechanism::new(
        m.shared_space(),
        m.outputs().to_vec(),
        table,
    )?)
}

/// Max over outputs of ln(p1/p2); +inf when p1 puts mass where p2 has none.
fn max_log_ratio(row1: &[f64], row2: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for (&a, &b) in row1.iter().zip(row2) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return f64::INFINITY;
        }
        let r = a.ln() - b.ln();
        if r > best {
            best = r;
        }
    }
    best
}

/// Worst pairwise epsilon of a full mechanism over a chosen pair walk.
/// Returns (measured, witness string if any pair was scanned).
fn pairwise_epsilon(m: &FiniteMechanism, pairs: &[(usize, usize)]) -> (f64, Option<String>) {
    let space = m.space();
    let mut best = 0.0f64;
    let mut witness = None;
    for &(d1, d2) in pairs {
        let d = space.dist(d1, d2);
        let r = max_log_ratio(m.row(d1), m.row(d2)) / d;
        if r > best {
            best = r;
            witness = Some(format!(
                "D1={} D2={} d={}",
                space.label(d1),
                space.label(d2),
                d
            ));
        }
    }
    (best, witness)
}

fn collect_pairs(m: &FiniteMechanism, check: PairCheck) -> Vec<(usize, usize)> {
    let n = m.space().len();
    match check {
        PairCheck::Exhaustive => {
            let mut pairs = Vec::with_capacity(n * (n - 1));
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        pairs.push((i, j));
                    }
                }
            }
            pairs
        }
        PairCheck::Sampled { random_pairs, seed } => {
            let mut pairs = Vec::new();
            if n < 2 {
                return pairs;
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    if m.space().dist(i, j) == 1.0 {
                        pairs.push((i, j));
                        pairs.push((j, i));
                    }
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..random_pairs {
                let i = rng.gen_range(0..n);
                let mut j = rng.gen_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                pairs.push((i, j));
            }
            pairs
        }
    }
}

/// Runs the extension and re-derives every guarantee: agreement on the
/// hypothesis set, the doubled privacy bound, the normalizer identities,
/// base-point invariance, and equality with the probability-domain
/// oracle. Construction failures (including a non-private input)
/// propagate as errors; everything after that is a reported check.
pub fn audit_extension(
    m: &PartialMechanism,
    eps: f64,
    pair_check: PairCheck,
) -> Result<AuditReport, ExtendError> {
    let r = extend(m, eps)?;
    let ext = r.mechanism();
    let space = m.space();
    let members = m.hypothesis().members();
    let mut checks = Vec::new();

    // agreement on H
    {
        let mut worst = 0.0f64;
        let mut at = (0usize, 0usize);
        for (pos, &d) in members.iter().enumerate() {
            for (w, (&a, &b)) in m.row_at(pos).iter().zip(ext.row(d)).enumerate() {
                let dev = (a - b).abs();
                if dev > worst {
                    worst = dev;
                    at = (d, w);
                }
            }
        }
        checks.push(if worst <= AGREEMENT_TOL {
            AuditCheck::pass("agreement_on_h", Some(worst))
        } else {
            AuditCheck::fail(
                "agreement_on_h",
                Some(worst),
                format!("D={} output={}", space.label(at.0), m.outputs()[at.1]),
            )
        });
    }

    // measured epsilon of the extension vs the doubled budget
    {
        let pairs = collect_pairs(ext, pair_check);
        let (measured, witness) = pairwise_epsilon(ext, &pairs);
        let bound = 2.0 * eps * (1.0 + DEFAULT_REL_TOL);
        checks.push(if measured <= bound {
            AuditCheck::pass("privacy_amplification", Some(measured))
        } else {
            AuditCheck::fail(
                "privacy_amplification",
                if measured.is_finite() {
                    Some(measured)
                } else {
                    None
                },
                witness.unwrap_or_default(),
            )
        });
    }

    // Z = 1 on H
    {
        let mut worst = 0.0f64;
        let mut at = 0usize;
        for &d in members {
            let dev = (r.normalizers()[d] - 1.0).abs();
            if dev > worst {
                worst = dev;
                at = d;
            }
        }
        checks.push(if worst <= Z_ONE_TOL {
            AuditCheck::pass("z_one_on_h", Some(worst))
        } else {
            AuditCheck::fail(
                "z_one_on_h",
                Some(worst),
                format!("D={}", space.label(at)),
            )
        });
    }

    // Z_D <= exp(eps * dist(D, H))
    {
        let mut ok = true;
        let mut worst_excess = 0.0f64;
        let mut witness = String::new();
        for d in 0..space.len() {
            let bound = (eps * dist_to_hypothesis(space, m.hypothesis(), d)).exp();
            let excess = r.normalizers()[d] / bound - 1.0;
            if excess > worst_excess {
                worst_excess = excess;
            }
            if r.normalizers()[d] > bound * (1.0 + Z_BOUND_REL_TOL) && ok {
                ok = false;
                witness = format!(
                    "D={} Z={} bound={}",
                    space.label(d),
                    r.normalizers()[d],
                    bound
                );
            }
        }
        checks.push(if ok {
            AuditCheck::pass("z_dist_bound", Some(worst_excess))
        } else {
            AuditCheck::fail("z_dist_bound", Some(worst_excess), witness)
        });
    }

    // Z ratio bound over all ordered pairs
    {
        match extension::normalizer_ratio_check(&r) {
            Ok(()) => checks.push(AuditCheck::pass("z_ratio_bound", None)),
            Err(v) => checks.push(AuditCheck::fail(
                "z_ratio_bound",
                Some(v.z1),
                format!(
                    "D1={} D2={} Z1={} bound={}",
                    space.label(v.dataset_1),
                    space.label(v.dataset_2),
                    v.z1,
                    v.bound
                ),
            )),
        }
    }

    // base-point invariance across every base in H
    {
        let mut worst = 0.0f64;
        let mut at = (0usize, 0usize);
        for &base in members {
            let other = extend_with_base(m, eps, base)?;
            for d in 0..space.len() {
                for (w, (&a, &b)) in ext.row(d).iter().zip(other.mechanism().row(d)).enumerate()
                {
                    let dev = (a - b).abs();
                    if dev > worst {
                        worst = dev;
                        at = (d, w);
                    }
                }
            }
        }
        checks.push(if worst <= BASE_INVARIANCE_TOL {
            AuditCheck::pass("base_point_invariance", Some(worst))
        } else {
            AuditCheck::fail(
                "base_point_invariance",
                Some(worst),
                format!("D={} output={}", space.label(at.0), m.outputs()[at.1]),
            )
        });
    }

    // equality with the probability-domain oracle
    {
        let oracle = oracle_extend(m, eps)?;
        let mut worst = 0.0f64;
        let mut at = (0usize, 0usize);
        for d in 0..space.len() {
            for (w, (&a, &b)) in ext.row(d).iter().zip(oracle.row(d)).enumerate() {
                let dev = (a - b).abs();
                if dev > worst {
                    worst = dev;
                    at = (d, w);
                }
            }
        }
        checks.push(if worst <= ORACLE_TOL {
            AuditCheck::pass("oracle_agreement", Some(worst))
        } else {
            AuditCheck::fail(
                "oracle_agreement",
                Some(worst),
                format!("D={} output={}", space.label(at.0), m.outputs()[at.1]),
            )
        });
    }

    // rows of the extension sum to 1
    {
        let mut worst = 0.0f64;
        let mut at = 0usize;
        for d in 0..space.len() {
            let sum: f64 = ext.row(d).iter().sum();
            let dev = (sum - 1.0).abs();
            if dev > worst {
                worst = dev;
                at = d;
            }
        }
        checks.push(if worst <= Z_ONE_TOL {
            AuditCheck::pass("row_normalization", Some(worst))
        } else {
            AuditCheck::fail(
                "row_normalization",
                Some(worst),
                format!("D={}", space.label(at)),
            )
        });
    }

    Ok(AuditReport::from_checks(checks))
}

/// Checks the defining privacy inequality over every nonempty proper
/// output subset and every ordered dataset pair, and asserts the verdict
/// matches the singleton-only check. Subsets are enumerated by bitmask
/// ascending; the first failing subset is the witness.
pub fn audit_set_level(m: &FiniteMechanism, eps: f64) -> Result<AuditReport, VerifierError> {
    let k = m.outputs().len();
    if k > MAX_SET_LEVEL_OUTPUTS {
        return Err(VerifierError::TooManyOutputs {
            got: k,
            cap: MAX_SET_LEVEL_OUTPUTS,
        });
    }
    let n = m.space().len();
    let masks: u64 = 1u64 << k;
    if n as u64 * masks > MAX_SUBSET_TABLE {
        return Err(VerifierError::TooLarge {
            cap: MAX_SUBSET_TABLE,
        });
    }

    // subset sums per dataset: sums[mask] = total probability of the
    // outputs in mask, built by peeling the lowest bit
    let tables: Vec<Vec<f64>> = (0..n)
        .map(|d| {
            let row = m.row(d);
            let mut sums = vec![0.0; masks as usize];
            for mask in 1..masks as usize {
                let low = mask.trailing_zeros() as usize;
                sums[mask] = sums[mask & (mask - 1)] + row[low];
            }
            sums
        })
        .collect();

    let tol_factor = 1.0 + DEFAULT_REL_TOL;
    let mut set_eps = 0.0f64;
    let mut set_unbounded = false;
    let mut point_eps = 0.0f64;
    let mut point_unbounded = false;
    let mut set_witness: Option<String> = None;
    let mut point_witness: Option<String> = None;

    let describe_set = |mask: u64| -> String {
        let names: Vec<&str> = (0..k)
            .filter(|&w| mask >> w & 1 == 1)
            .map(|w| m.outputs()[w].as_str())
            .collect();
        format!("{{{}}}", names.join(","))
    };

    for d1 in 0..n {
        for d2 in 0..n {
            if d1 == d2 {
                continue;
            }
            let d = m.space().dist(d1, d2);
            // proper nonempty subsets only: 1 .. full-1
            for mask in 1..masks - 1 {
                let s1 = tables[d1][mask as usize];
                let s2 = tables[d2][mask as usize];
                if s1 == 0.0 {
                    continue;
                }
                let singleton = mask & (mask - 1) == 0;
                if s2 == 0.0 {
                    set_unbounded = true;
                    if singleton {
                        point_unbounded = true;
                    }
                    if set_witness.is_none() {
                        set_witness = Some(format!(
                            "D1={} D2={} S={} unbounded",
                            m.space().label(d1),
                            m.space().label(d2),
                            describe_set(mask)
                        ));
                    }
                    if singleton && point_witness.is_none() {
                        point_witness = set_witness.clone();
                    }
                    continue;
                }
                let ratio = s1 / s2;
                let log_eps = if d > 0.0 { (ratio.ln() / d).max(0.0) } else { 0.0 };
                if log_eps > set_eps {
                    set_eps = log_eps;
                }
                if singleton && log_eps > point_eps {
                    point_eps = log_eps;
                }
                // witness decision uses the exact comparison of the final
                // verdict so that a witness exists iff the check fails
                if log_eps > eps * tol_factor {
                    if set_witness.is_none() {
                        set_witness = Some(format!(
                            "D1={} D2={} S={} ratio={}",
                            m.space().label(d1),
                            m.space().label(d2),
                            describe_set(mask),
                            ratio
                        ));
                    }
                    if singleton && point_witness.is_none() {
                        point_witness = Some(format!(
                            "D1={} D2={} S={} ratio={}",
                            m.space().label(d1),
                            m.space().label(d2),
                            describe_set(mask),
                            ratio
                        ));
                    }
                }
            }
        }
    }

    let set_pass = !set_unbounded && set_eps <= eps * tol_factor;
    let point_pass = !point_unbounded && point_eps <= eps * tol_factor;
    let mut checks = Vec::new();
    checks.push(if set_pass {
        AuditCheck::pass("set_level_dp", Some(set_eps))
    } else {
        AuditCheck::fail(
            "set_level_dp",
            if set_unbounded { None } else { Some(set_eps) },
            set_witness.clone().unwrap_or_default(),
        )
    });
    checks.push(if point_pass {
        AuditCheck::pass("pointwise_dp", Some(point_eps))
    } else {
        AuditCheck::fail(
            "pointwise_dp",
            if point_unbounded { None } else { Some(point_eps) },
            point_witness.unwrap_or_default(),
        )
    });
    checks.push(if set_pass == point_pass {
        AuditCheck::pass("verdict_agreement", None)
    } else {
        AuditCheck::fail(
            "verdict_agreement",
            None,
            format!("set-level verdict {set_pass}, pointwise verdict {point_pass}"),
        )
    });
    Ok(AuditReport::from_checks(checks))
}

//! Acceptance suite: one test per release criterion, each pinned to its
//! stated tolerance and time budget and printing a summary line. Run with
//! `cargo test -p privext --test acceptance -- --nocapture` to see the
//! measured values.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use privext::edge_density::{
    bounded_degree_mechanism, run_rate_experiment, GraphExperimentConfig,
};
use privext::extension::{
    dist_to_hypothesis, extend, extend_with_base, normalizer_ratio_check,
};
use privext::graph::{enumerate_graphs, node_distance};
use privext::mechanism::{PartialMechanism, DEFAULT_REL_TOL};
use privext::space::{HypothesisSet, MetricSpace};
use privext::verifier::{audit_extension, audit_set_level, oracle_extend, PairCheck};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn worked_instance() -> (PartialMechanism, f64) {
    let labels: Vec<String> = (0..3).map(|i| i.to_string()).collect();
    let matrix: Vec<Vec<f64>> = (0..3)
        .map(|i| (0..3).map(|j| (i as f64 - j as f64).abs()).collect())
        .collect();
    let space = Arc::new(MetricSpace::from_matrix(labels, matrix).unwrap());
    let h = HypothesisSet::new(vec![0, 1], 3).unwrap();
    let m = PartialMechanism::new(
        space,
        vec!["a".into(), "b".into()],
        h,
        vec![vec![0.6, 0.4], vec![0.52, 0.48]],
    )
    .unwrap();
    (m, 1.2f64.ln())
}

#[test]
fn criterion_1_worked_fixture() {
    let (m, eps) = worked_instance();
    // warm pass, then the timed one
    let _ = extend(&m, eps).unwrap();
    let start = Instant::now();
    let r = extend(&m, eps).unwrap();
    let elapsed = start.elapsed();

    let row = r.mechanism().row(2);
    assert!((row[0] - 0.52).abs() <= 1e-12, "row[0] = {}", row[0]);
    assert!((row[1] - 0.48).abs() <= 1e-12, "row[1] = {}", row[1]);
    assert!(
        (r.normalizers()[2] - 1.2).abs() <= 1e-12,
        "Z_2 = {}",
        r.normalizers()[2]
    );
    // the probability-domain oracle reproduces the same row
    let oracle = oracle_extend(&m, eps).unwrap();
    assert!((oracle.row(2)[0] - 0.52).abs() <= 1e-12);
    assert!((oracle.row(2)[1] - 0.48).abs() <= 1e-12);
    assert!(
        elapsed < Duration::from_millis(1),
        "extension took {elapsed:?}"
    );
    println!(
        "criterion 1 (worked fixture): PASS  A(2)=({}, {}), Z_2={}, {elapsed:?}",
        row[0],
        row[1],
        r.normalizers()[2]
    );
}

#[test]
fn criterion_2_randomized_extension_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x20260810);
    let instances = 500;
    let mut cost_witnesses = 0usize;
    for case in 0..instances {
        let (m, eps) = common::random_partial_instance(&mut rng, 10, 8);
        let r = extend(&m, eps).unwrap_or_else(|e| panic!("case {case}: {e}"));
        let ext = r.mechanism();
        let space = m.space();
        let members = m.hypothesis().members();

        let support = m
            .density_view(m.hypothesis().base())
            .unwrap()
            .support()
            .len();
        assert_eq!(
            r.scaling_ops(),
            (space.len() * members.len() * support) as u64,
            "case {case}: op count"
        );

        for (pos, &d) in members.iter().enumerate() {
            for (a, b) in m.row_at(pos).iter().zip(ext.row(d)) {
                assert!((a - b).abs() <= 1e-12, "case {case}: agreement on H");
            }
            assert!(
                (r.normalizers()[d] - 1.0).abs() <= 1e-9,
                "case {case}: Z on H"
            );
        }

        let measured = ext.measured_epsilon().measured.value();
        assert!(
            measured <= 2.0 * eps * (1.0 + 1e-9),
            "case {case}: measured {measured} > 2*{eps}"
        );
        if measured > eps * (1.0 + 1e-6) {
            cost_witnesses += 1;
        }

        for d in 0..space.len() {
            let bound = (eps * dist_to_hypothesis(space, m.hypothesis(), d)).exp();
            assert!(
                r.normalizers()[d] <= bound * (1.0 + 1e-9),
                "case {case}: Z dist bound"
            );
            assert!(r.normalizers()[d] > 0.0);
        }
        assert!(
            normalizer_ratio_check(&r).is_ok(),
            "case {case}: Z ratio bound"
        );

        for &base in members {
            let other = extend_with_base(&m, eps, base).unwrap();
            for d in 0..space.len() {
                for (a, b) in ext.row(d).iter().zip(other.mechanism().row(d)) {
                    assert!((a - b).abs() <= 1e-10, "case {case}: base invariance");
                }
            }
        }

        let oracle = oracle_extend(&m, eps).unwrap();
        for d in 0..space.len() {
            for (a, b) in ext.row(d).iter().zip(oracle.row(d)) {
                assert!((a - b).abs() <= 1e-10, "case {case}: oracle equality");
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60), "suite took {elapsed:?}");
    println!(
        "criterion 2 (randomized extension suite): PASS  {instances} instances, \
         {cost_witnesses} with measured eps' > eps, {elapsed:?}"
    );
}

#[test]
fn criterion_3_extension_cost_is_real() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xc057);
    let mut witnesses = 0usize;
    let mut worst_excess = 0.0f64;
    for _ in 0..100 {
        let (m, eps) = common::random_partial_instance(&mut rng, 10, 8);
        let r = extend(&m, eps).unwrap();
        let measured = r.mechanism().measured_epsilon().measured.value();
        assert!(measured <= 2.0 * eps * (1.0 + 1e-9));
        if measured > eps * (1.0 + 1e-6) {
            witnesses += 1;
            if eps > 0.0 {
                worst_excess = worst_excess.max(measured / eps);
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(
        witnesses >= 1,
        "no instance with measured eps' above eps found"
    );
    assert!(elapsed < Duration::from_secs(60));
    println!(
        "criterion 3 (cost is real): PASS  {witnesses}/100 instances exceed eps, \
         worst ratio eps'/eps = {worst_excess:.4}, {elapsed:?}"
    );
}

#[test]
fn criterion_4_set_level_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e44a);
    let instances = 100;
    for case in 0..instances {
        let m = common::random_full_mechanism(&mut rng, 5, 12);
        let star = m.measured_epsilon().measured.value();
        for factor in [0.9, 1.0, 1.1] {
            let report = audit_set_level(&m, factor * star).unwrap();
            let set = &report.checks[0];
            let point = &report.checks[1];
            assert_eq!(
                set.passed,
                point.passed,
                "case {case} factor {factor}:\n{}",
                report.to_table()
            );
            assert!(report.checks[2].passed);
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    println!(
        "criterion 4 (set-level equivalence): PASS  {instances} mechanisms x 3 eps grid points, \
         {elapsed:?}"
    );
}

fn graph_application_checks(n: usize, pair_check: PairCheck) {
    for degree_bound in [1usize, 2] {
        let graphs = enumerate_graphs(n, Some(degree_bound)).unwrap();
        for g1 in &graphs {
            for g2 in &graphs {
                let delta = g1.edge_count().abs_diff(g2.edge_count());
                let d = node_distance(g1, g2).unwrap();
                assert!(
                    delta <= degree_bound * d,
                    "sensitivity violated: n={n} bound={degree_bound}"
                );
            }
        }
        for eps in [0.5, 1.0] {
            let m = bounded_degree_mechanism(n, degree_bound, eps).unwrap();
            let verify = m.verify_epsilon(eps, DEFAULT_REL_TOL);
            assert_eq!(
                verify.passed,
                Some(true),
                "verify failed: n={n} bound={degree_bound} eps={eps}"
            );
            let report = audit_extension(&m, eps, pair_check).unwrap();
            assert!(
                report.overall,
                "audit failed: n={n} bound={degree_bound} eps={eps}\n{}",
                report.to_table()
            );
        }
    }
}

#[test]
fn criterion_5a_graph_application_exhaustive_n4() {
    let start = Instant::now();
    graph_application_checks(4, PairCheck::Exhaustive);
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!("criterion 5a (graph application, n=4 exhaustive): PASS  {elapsed:?}");
}

#[test]
fn criterion_5b_graph_application_sampled_n5() {
    let start = Instant::now();
    graph_application_checks(
        5,
        PairCheck::Sampled {
            random_pairs: 100_000,
            seed: 5,
        },
    );
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(600), "took {elapsed:?}");
    println!("criterion 5b (graph application, n=5 sampled pairs): PASS  {elapsed:?}");
}

#[test]
fn criterion_6_no_privacy_limit() {
    let start = Instant::now();
    // degree bound n-1 bounds nothing, so the hypothesis set is the whole
    // universe and the extension must reduce to the noisy count itself
    let cfg = GraphExperimentConfig {
        n: 5,
        degree_bound: 4,
        eps: 100.0,
        p_values: vec![0.3, 0.5],
        trials: 20_000,
        seed: 61,
    };
    let report = run_rate_experiment(&cfg).unwrap();
    for row in &report.rows {
        let target = row.p * (1.0 - row.p) / 10.0;
        assert!(
            (row.mse - target).abs() <= 2.0 * row.stderr,
            "{} at p={}: mse={} target={} stderr={}",
            row.estimator,
            row.p,
            row.mse,
            target,
            row.stderr
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    println!(
        "criterion 6 (no-privacy limit): PASS  {} rows within 2 stderr of p(1-p)/10, {elapsed:?}",
        report.rows.len()
    );
}

#[test]
fn criterion_7_mse_monotone_in_eps() {
    let start = Instant::now();
    let grid = [0.25, 0.5, 1.0, 2.0, 4.0];
    let mut series: Vec<Vec<(f64, f64)>> = vec![Vec::new(), Vec::new()];
    for &eps in &grid {
        let cfg = GraphExperimentConfig {
            n: 5,
            degree_bound: 3,
            eps,
            p_values: vec![0.5],
            trials: 20_000,
            seed: 71,
        };
        let report = run_rate_experiment(&cfg).unwrap();
        series[0].push((report.rows[0].mse, report.rows[0].stderr));
        series[1].push((report.rows[1].mse, report.rows[1].stderr));
    }
    for (slot, name) in ["baseline", "extended"].iter().enumerate() {
        for step in 1..grid.len() {
            let (prev_mse, prev_se) = series[slot][step - 1];
            let (next_mse, next_se) = series[slot][step];
            let slack = 2.0 * (prev_se * prev_se + next_se * next_se).sqrt();
            assert!(
                next_mse <= prev_mse + slack,
                "{name}: mse rose from {prev_mse} (eps={}) to {next_mse} (eps={})",
                grid[step - 1],
                grid[step]
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    println!(
        "criterion 7 (MSE monotonicity): PASS  baseline {:?} / extended {:?}, {elapsed:?}",
        series[0].iter().map(|r| r.0).collect::<Vec<_>>(),
        series[1].iter().map(|r| r.0).collect::<Vec<_>>()
    );
}

//! Shared generators for the randomized suites: metrics built by
//! shortest-path closure of random weights, and mechanisms with strictly
//! positive rows so that every instance is private at its measured level.

use std::sync::Arc;

use privext::mechanism::{FiniteMechanism, PartialMechanism};
use privext::space::{HypothesisSet, MetricSpace};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Random metric on `n` points: symmetric weights repaired into a metric
/// by Floyd-Warshall closure. Weights are multiples of 1/8 so every path
/// sum is exact in f64 and the closed table satisfies the triangle
/// inequality exactly, not just up to rounding.
pub fn random_metric(rng: &mut ChaCha8Rng, n: usize) -> Arc<MetricSpace> {
    let mut w = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = rng.gen_range(1..=16) as f64 / 8.0;
            w[i][j] = d;
            w[j][i] = d;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = w[i][k] + w[k][j];
                if via < w[i][j] {
                    w[i][j] = via;
                }
            }
        }
    }
    let labels = (0..n).map(|i| format!("D{i}")).collect();
    let space = MetricSpace::from_matrix(labels, w).unwrap();
    space.validate().unwrap();
    Arc::new(space)
}

fn random_row(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let sum: f64 = row.iter().sum();
    for v in &mut row {
        *v /= sum;
    }
    row
}

fn output_labels(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("o{i}")).collect()
}

/// Random fully-supported mechanism on a random metric.
pub fn random_full_mechanism(
    rng: &mut ChaCha8Rng,
    max_datasets: usize,
    max_outputs: usize,
) -> FiniteMechanism {
    let n = rng.gen_range(2..=max_datasets);
    let k = rng.gen_range(2..=max_outputs);
    let space = random_metric(rng, n);
    let table = (0..n).map(|_| random_row(rng, k)).collect();
    FiniteMechanism::new(space, output_labels(k), table).unwrap()
}

/// Random partial mechanism on a random hypothesis set, together with its
/// measured privacy level (it is exactly that private on the set).
pub fn random_partial_instance(
    rng: &mut ChaCha8Rng,
    max_datasets: usize,
    max_outputs: usize,
) -> (PartialMechanism, f64) {
    let n = rng.gen_range(2..=max_datasets);
    let k = rng.gen_range(2..=max_outputs);
    let space = random_metric(rng, n);
    let h_size = rng.gen_range(1..=n);
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(rng);
    indices.truncate(h_size);
    let hypothesis = HypothesisSet::new(indices, n).unwrap();
    let table = (0..hypothesis.len()).map(|_| random_row(rng, k)).collect();
    let m = PartialMechanism::new(space, output_labels(k), hypothesis, table).unwrap();
    let eps = m.measured_epsilon().measured.value();
    (m, eps)
}

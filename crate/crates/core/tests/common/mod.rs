#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Row-major random rotation of R^n from the QR factor of a Gaussian-ish matrix.
pub fn random_rotation(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let mut q = raw.qr().q();
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    (0..n * n).map(|k| q[(k / n, k % n)]).collect()
}

pub fn apply(r: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n).map(|i| (0..n).map(|j| r[i * n + j] * x[j]).sum()).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sumrate::channel::DerivedMatrices;
use sumrate::io::{generate_instance, GenParams};
use sumrate::linalg::Matrix;
use sumrate::spectral::NonnegMatrix;

pub const E1: &str = include_str!("../data/e1.json");

/// Seeded single-tone (or multi-tone) instance from the generator.
pub fn instance(users: usize, tones: usize, seed: u64) -> DerivedMatrices<f64> {
    generate_instance(users, tones, seed, &GenParams::default())
        .unwrap()
        .derive()
        .unwrap()
}

/// Power with each slot on its cap with probability `on_cap`, otherwise
/// drawn from `[lo, hi]` times the cap.
pub fn random_power(rng: &mut ChaCha8Rng, dm: &DerivedMatrices<f64>, on_cap: f64, lo: f64, hi: f64) -> Vec<f64> {
    dm.slot_caps()
        .iter()
        .map(|&c| {
            if rng.random_bool(on_cap) {
                c
            } else {
                c * rng.random_range(lo..hi)
            }
        })
        .collect()
}

/// Random SIR vector strictly inside the achievable region, at `t` times
/// the boundary along its ray.
pub fn random_sir(rng: &mut ChaCha8Rng, dm: &DerivedMatrices<f64>, t: f64) -> Vec<f64> {
    let u: Vec<f64> = (0..dm.dim()).map(|_| rng.random_range(0.1..1.0)).collect();
    let r = sumrate::spectral::spectral_radius(&dm.f.scale_rows(&u).unwrap()).unwrap();
    u.iter().map(|x| x * t / r).collect()
}

/// Nonnegative matrix with a positive Hamiltonian cycle, so irreducible.
pub fn random_irreducible(rng: &mut ChaCha8Rng, n: usize, zero_diag: bool) -> NonnegMatrix<f64> {
    let mut m = Matrix::from_fn(n, n, |i, j| {
        if (i == j && zero_diag) || rng.random_bool(0.3) {
            0.0
        } else {
            rng.random_range(0.05..1.0)
        }
    });
    for i in 0..n {
        let j = (i + 1) % n;
        if m[(i, j)] == 0.0 && i != j {
            m[(i, j)] = rng.random_range(0.05..1.0);
        }
    }
    NonnegMatrix::new(m).unwrap()
}

pub fn norm_inf_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

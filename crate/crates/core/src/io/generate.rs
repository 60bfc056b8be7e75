//! Seeded random scenarios.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scenario::{Gains, Noise, ScenarioFile, SolverSettings, SCENARIO_VERSION};
use crate::error::{Error, Result};

/// Ranges the generator draws from, all linear.
#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    pub cross_gain: (f64, f64),
    /// Each direct gain is this many times the largest cross gain into the
    /// same receiver, times a draw from `[1, 2)`.
    pub dominance: f64,
    pub noise: (f64, f64),
    pub caps: (f64, f64),
    /// Draw random weights instead of uniform ones.
    pub random_weights: bool,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            cross_gain: (0.01, 0.5),
            dominance: 2.0,
            noise: (0.01, 0.2),
            caps: (0.5, 2.0),
            random_weights: true,
        }
    }
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// A random `users`-user scenario over `tones` tones; the same seed always
/// gives the same scenario.
pub fn generate_instance(users: usize, tones: usize, seed: u64, params: &GenParams) -> Result<ScenarioFile> {
    if users < 2 {
        return Err(Error::InputDomain("at least two users are required".into()));
    }
    if tones == 0 {
        return Err(Error::InputDomain("at least one tone is required".into()));
    }
    let positive = |(lo, hi): (f64, f64)| lo > 0.0 && hi >= lo && hi.is_finite();
    if !positive(params.cross_gain) || !positive(params.noise) || !positive(params.caps) || !(params.dominance > 0.0) {
        return Err(Error::InputDomain("generator ranges must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gains = Vec::with_capacity(tones);
    for _ in 0..tones {
        let mut g = vec![vec![0.0; users]; users];
        for (i, row) in g.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                if i != j {
                    *x = draw(&mut rng, params.cross_gain);
                }
            }
            let worst = row.iter().copied().fold(0.0, f64::max);
            row[i] = params.dominance * worst * rng.random_range(1.0..2.0);
        }
        gains.push(g);
    }
    let noise: Vec<Vec<f64>> = (0..tones)
        .map(|_| (0..users).map(|_| draw(&mut rng, params.noise)).collect())
        .collect();
    let caps: Vec<f64> = (0..users).map(|_| draw(&mut rng, params.caps)).collect();
    let weights = if params.random_weights {
        let raw: Vec<f64> = (0..users).map(|_| rng.random_range(0.1..1.0)).collect();
        let s: f64 = raw.iter().sum();
        raw.iter().map(|x| x / s).collect()
    } else {
        vec![1.0 / users as f64; users]
    };
    let single = tones == 1;
    let scenario = ScenarioFile {
        version: SCENARIO_VERSION.to_string(),
        users,
        tones: (!single).then_some(tones),
        gains: if single {
            Gains::Single(gains.remove(0))
        } else {
            Gains::Tones(gains)
        },
        gain_unit: Default::default(),
        noise: if single {
            Noise::Single(noise[0].clone())
        } else {
            Noise::Tones(noise)
        },
        noise_unit: Default::default(),
        caps,
        weights: Some(weights),
        snr_gap: 1.0,
        coupling: None,
        solver: SolverSettings {
            seed,
            ..Default::default()
        },
    };
    scenario.normalize()
}

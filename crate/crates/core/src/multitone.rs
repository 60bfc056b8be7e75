//! Multi-tone (DMT) channels stacked into one power-control problem.
//!
//! Slots are ordered user-major: slot `l*K + k` carries user `l` on tone
//! `k`, so for two users and two tones the power vector reads
//! `(p¹₁, p²₁, p¹₂, p²₂)` with the superscript naming the tone. Each user
//! gets one budget spanning its `K` slots.

use serde::{Deserialize, Serialize};

use crate::channel::{check_positive, check_weights, Budget, ChannelInstance, DerivedMatrices};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::real::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiToneInstance<T> {
    /// One `L×L` gain matrix per tone.
    pub gains: Vec<Matrix<T>>,
    /// One noise vector of length `L` per tone.
    pub noise: Vec<Vec<T>>,
    /// Per-user total power budget across tones.
    pub budgets: Vec<T>,
    /// Per-user weights; each tone slot receives `w_l / K`.
    pub weights: Vec<T>,
    pub snr_gap: T,
    /// Explicit `KL×KL` interference matrix in slot order, replacing the
    /// block structure for asynchronous transmission.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<Matrix<T>>,
}

impl<T: Real> MultiToneInstance<T> {
    pub fn users(&self) -> usize {
        self.weights.len()
    }

    pub fn tones(&self) -> usize {
        self.gains.len()
    }

    /// Slot index of user `l` on tone `k`.
    pub fn slot(&self, user: usize, tone: usize) -> usize {
        user * self.tones() + tone
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.tones();
        let l = self.users();
        if k == 0 {
            return Err(Error::InputDomain("at least one tone is required".into()));
        }
        if l < 2 {
            return Err(Error::InputDomain("at least two users are needed".into()));
        }
        if self.noise.len() != k {
            return Err(Error::InputDomain(format!(
                "noise given for {} tones, expected {k}",
                self.noise.len()
            )));
        }
        for (t, g) in self.gains.iter().enumerate() {
            if g.rows() != l || g.cols() != l {
                return Err(Error::InputDomain(format!(
                    "tone {t} gain matrix is {}x{}, expected {l}x{l}",
                    g.rows(),
                    g.cols()
                )));
            }
            if g.as_slice().iter().any(|x| !(*x > T::zero()) || !x.is_finite()) {
                return Err(Error::InputDomain(format!("tone {t} gains must be positive")));
            }
            check_positive(&self.noise[t], l, "noise")?;
        }
        check_positive(&self.budgets, l, "budgets")?;
        check_weights(&self.weights, l)?;
        if !(self.snr_gap >= T::one()) {
            return Err(Error::InputDomain(format!("snr gap {} must be >= 1", self.snr_gap)));
        }
        if let Some(c) = &self.coupling {
            let n = k * l;
            if c.rows() != n || c.cols() != n {
                return Err(Error::InputDomain(format!("coupling matrix must be {n}x{n}")));
            }
        }
        Ok(())
    }

    /// The single-tone instance this reduces to when `K = 1`.
    pub fn as_single_tone(&self) -> Option<ChannelInstance<T>> {
        if self.tones() != 1 || self.coupling.is_some() {
            return None;
        }
        Some(ChannelInstance {
            gains: self.gains[0].clone(),
            noise: self.noise[0].clone(),
            caps: self.budgets.clone(),
            weights: self.weights.clone(),
            snr_gap: self.snr_gap,
        })
    }
}

/// Builds the `KL`-dimensional problem: interference matrix, noise vector,
/// per-user budgets and tone weights.
pub fn stack_multitone<T: Real>(mt: &MultiToneInstance<T>) -> Result<DerivedMatrices<T>> {
    mt.validate()?;
    let (l, k) = (mt.users(), mt.tones());
    let n = l * k;
    let direct = |user: usize, tone: usize| mt.gains[tone][(user, user)] / mt.snr_gap;
    let f = match &mt.coupling {
        Some(c) => {
            if c.as_slice().iter().any(|x| !(*x >= T::zero()) || !x.is_finite()) {
                return Err(Error::InputDomain("coupling entries must be nonnegative".into()));
            }
            c.clone()
        }
        None => {
            let mut f = Matrix::zeros(n, n);
            for tone in 0..k {
                for i in 0..l {
                    for j in 0..l {
                        if i != j {
                            f[(mt.slot(i, tone), mt.slot(j, tone))] = mt.gains[tone][(i, j)] / direct(i, tone);
                        }
                    }
                }
            }
            f
        }
    };
    let mut v = vec![T::zero(); n];
    for tone in 0..k {
        for i in 0..l {
            v[mt.slot(i, tone)] = mt.noise[tone][i] / direct(i, tone);
        }
    }
    let budgets = (0..l)
        .map(|i| Budget {
            slots: (0..k).map(|tone| mt.slot(i, tone)).collect(),
            cap: mt.budgets[i],
        })
        .collect();
    let kt = T::lit(k as f64);
    let mut weights = vec![T::zero(); n];
    for i in 0..l {
        for tone in 0..k {
            weights[mt.slot(i, tone)] = mt.weights[i] / kt;
        }
    }
    DerivedMatrices::assemble(f, v, budgets, weights)
}

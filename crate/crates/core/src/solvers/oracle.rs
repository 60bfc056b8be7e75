//! Exhaustive grid search over the feasible powers, for small instances.

use serde::{Deserialize, Serialize};

use crate::channel::{objective, DerivedMatrices};
use crate::error::{Error, Result};
use crate::real::Real;

/// Largest slot count the oracle accepts.
pub const ORACLE_MAX_DIM: usize = 4;
/// Largest number of grid evaluations per pass.
pub const ORACLE_MAX_POINTS: u128 = 200_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleObjective {
    /// `Σ w log(1 + γ)`.
    #[default]
    Rate,
    /// `Σ w log γ`; points with a zero SIR are skipped.
    LogSir,
}

#[derive(Clone, Debug)]
pub struct OracleOptions {
    /// Points per axis, endpoints included (at least 11).
    pub resolution: usize,
    /// Re-search the neighbourhood of the best point ten times finer.
    pub refine: bool,
    pub objective: OracleObjective,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            resolution: 201,
            refine: true,
            objective: OracleObjective::Rate,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult<T> {
    pub best_power: Vec<T>,
    pub best_value: T,
    pub grid_resolution: usize,
    pub refined: bool,
    pub objective: OracleObjective,
    pub evaluations: u64,
}

fn eval<T: Real>(dm: &DerivedMatrices<T>, p: &[T], which: OracleObjective) -> Option<T> {
    let gamma = dm.sir_unchecked(p);
    match which {
        OracleObjective::Rate => Some(objective(&dm.weights, &gamma)),
        OracleObjective::LogSir => {
            if gamma.iter().any(|&g| !(g > T::zero())) {
                None
            } else {
                Some(dm.weights.iter().zip(&gamma).map(|(&w, &g)| w * g.ln()).sum())
            }
        }
    }
}

/// Scans `axes[0] × axes[1] × …` in lexicographic order, keeping the first
/// strict maximum among feasible points.
fn scan<T: Real>(
    dm: &DerivedMatrices<T>,
    axes: &[Vec<T>],
    which: OracleObjective,
    best: &mut Option<(T, Vec<T>)>,
) -> u64 {
    let n = axes.len();
    let mut idx = vec![0usize; n];
    let mut p: Vec<T> = axes.iter().map(|a| a[0]).collect();
    let mut count = 0;
    loop {
        if dm.is_feasible_power(&p, T::zero()) {
            count += 1;
            if let Some(v) = eval(dm, &p, which) {
                let better = match best {
                    Some((bv, bp)) => v > *bv || (v == *bv && p < *bp),
                    None => true,
                };
                if better {
                    *best = Some((v, p.clone()));
                }
            }
        }
        let mut i = n;
        loop {
            if i == 0 {
                return count;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < axes[i].len() {
                p[i] = axes[i][idx[i]];
                break;
            }
            idx[i] = 0;
            p[i] = axes[i][0];
        }
    }
}

/// Best objective over the uniform grid `j/(N−1)·cap` in every slot,
/// keeping only points within the budgets.
pub fn oracle_grid<T: Real>(dm: &DerivedMatrices<T>, opts: &OracleOptions) -> Result<OracleResult<T>> {
    let n = dm.dim();
    if n > ORACLE_MAX_DIM {
        return Err(Error::CostGuard(format!(
            "{n} power slots exceed the oracle limit of {ORACLE_MAX_DIM}"
        )));
    }
    let res = opts.resolution;
    if res < 11 {
        return Err(Error::InputDomain(format!("oracle resolution {res} is below 11")));
    }
    if (res as u128).pow(n as u32) > ORACLE_MAX_POINTS {
        return Err(Error::CostGuard(format!(
            "{res}^{n} grid points exceed {ORACLE_MAX_POINTS}"
        )));
    }
    let caps = dm.slot_caps();
    let step = |i: usize| caps[i] / T::lit((res - 1) as f64);
    let axes: Vec<Vec<T>> = (0..n)
        .map(|i| {
            (0..res)
                .map(|j| {
                    if j + 1 == res {
                        caps[i]
                    } else {
                        step(i) * T::lit(j as f64)
                    }
                })
                .collect()
        })
        .collect();
    let mut best = None;
    let mut evaluations = scan(dm, &axes, opts.objective, &mut best);
    if opts.refine {
        if let Some((_, centre)) = best.clone() {
            let fine: Vec<Vec<T>> = (0..n)
                .map(|i| {
                    let h = step(i) / T::lit(10.0);
                    let mut axis: Vec<T> = (-10i32..=10)
                        .map(|k| centre[i] + h * T::lit(k as f64))
                        .filter(|&x| x >= T::zero() && x <= caps[i])
                        .collect();
                    if let Some(last) = axis.last_mut() {
                        if (*last - caps[i]).abs() <= h * T::lit(1e-6) {
                            *last = caps[i];
                        }
                    }
                    axis
                })
                .collect();
            evaluations += scan(dm, &fine, opts.objective, &mut best);
        }
    }
    let (best_value, best_power) =
        best.ok_or_else(|| Error::Degenerate("no grid point has a finite objective".into()))?;
    Ok(OracleResult {
        best_power,
        best_value,
        grid_resolution: res,
        refined: opts.refine,
        objective: opts.objective,
        evaluations,
    })
}

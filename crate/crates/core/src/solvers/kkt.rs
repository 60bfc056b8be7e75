use serde::{Deserialize, Serialize};

use crate::channel::DerivedMatrices;
use crate::error::Result;
use crate::real::Real;

/// Default tolerance on gradient sign conditions.
pub const KKT_TOL: f64 = 1e-7;
/// A slot within this fraction of its budget counts as sitting on it.
pub const BOUND_TOL: f64 = 1e-9;

/// Partition of the slots by where the power sits.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveSets {
    /// Slots with positive power in a budget that is spent in full.
    pub s_max: Vec<usize>,
    /// Slots with positive power in a budget with room left.
    pub s_in: Vec<usize>,
    /// Slots with zero power.
    pub s_0: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KktCheck<T> {
    pub sets: ActiveSets,
    pub satisfied: bool,
    /// Largest violation of the sign conditions.
    pub residual: T,
    pub gradient: Vec<T>,
}

/// First-order conditions for a maximizer over the feasible powers.
///
/// In the box case these read: gradient `>= -τ` on `S_max`, `|gradient| <= τ`
/// on `S_in`, `<= τ` on `S_0`. A budget shared by several slots replaces the
/// first condition by "all positive slots share one multiplier `λ >= 0` and
/// zero slots stay below it".
pub fn kkt_classify<T: Real>(dm: &DerivedMatrices<T>, p: &[T], tau: T) -> Result<KktCheck<T>> {
    let gradient = dm.objective_gradient_p(p)?;
    let usage = dm.budget_usage(p);
    let mut sets = ActiveSets::default();
    let mut residual = T::zero();
    let pos = |x: T| if x > T::zero() { x } else { T::zero() };
    for (b, &u) in dm.budgets.iter().zip(&usage) {
        let active = u >= b.cap * (T::one() - T::lit(BOUND_TOL));
        let lambda = if active {
            b.slots
                .iter()
                .filter(|&&s| p[s] > T::zero())
                .map(|&s| gradient[s])
                .fold(T::neg_infinity(), T::max)
        } else {
            T::zero()
        };
        if active {
            residual = residual.max(pos(-lambda));
        }
        for &s in &b.slots {
            let a = gradient[s];
            if p[s] <= T::zero() {
                sets.s_0.push(s);
                residual = residual.max(pos(a - lambda));
            } else if active {
                sets.s_max.push(s);
                residual = residual.max((a - lambda).abs());
            } else {
                sets.s_in.push(s);
                residual = residual.max(a.abs());
            }
        }
    }
    sets.s_max.sort_unstable();
    sets.s_in.sort_unstable();
    sets.s_0.sort_unstable();
    Ok(KktCheck {
        sets,
        satisfied: residual <= tau,
        residual,
        gradient,
    })
}

//! Power-allocation solvers and the brute-force oracle.

mod gradient;
mod kkt;
mod linearized;
mod lp_relax;
mod oracle;
mod polytope;
mod simplex;

pub use gradient::{merge_best, solve_gradient, solve_gradient_multistart, start_points, GradientOptions};
pub use kkt::{kkt_classify, ActiveSets, KktCheck, BOUND_TOL, KKT_TOL};
pub use linearized::{solve_linearized, solve_linearized_multistart, start_objectives, LinearizedOptions};
pub use lp_relax::solve_lp_relax;
pub use oracle::{oracle_grid, OracleObjective, OracleOptions, OracleResult};
pub use polytope::{build_polytope, Polytope, PolytopeOptions};
pub use simplex::{lp_solve, lp_solve_from, LpSolution};

use serde::{Deserialize, Serialize};

use crate::channel::{objective, DerivedMatrices};
use crate::error::Result;
use crate::real::Real;
use crate::relax::{objective_bounds, BoundsReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    KktSatisfied,
    MaxIters,
    /// The linear program returned its own starting vertex.
    LpOptimal,
    /// The power recovered from the linear program had to be projected.
    Projected,
    /// No ascent step above the minimum step length.
    Stalled,
    /// A vertex was revisited.
    Cycle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport<T> {
    pub power: Vec<T>,
    pub sir: Vec<T>,
    /// `Φ_w(γ(power))`, recomputed at the reported power.
    pub objective_value: T,
    pub kkt_residual: T,
    pub kkt_satisfied: bool,
    pub active_sets: ActiveSets,
    pub iterations: usize,
    pub termination: Termination,
    pub bounds: BoundsReport<T>,
    /// `w·ξ` at the LP optimum, for the LP relaxation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lp_value: Option<T>,
    /// `Φ_w(e^ξ)` at the terminal polytope vertex.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polytope_value: Option<T>,
    /// `polytope_value − objective_value`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_bound_gap: Option<T>,
    /// Objective value after each accepted step.
    #[serde(skip)]
    pub trace: Vec<T>,
}

impl<T: Real> SolverReport<T> {
    /// Fills in every derived field from a feasible power vector.
    pub(crate) fn at_power(
        dm: &DerivedMatrices<T>,
        power: Vec<T>,
        kkt_tol: T,
        iterations: usize,
        termination: Termination,
    ) -> Result<Self> {
        let sir = dm.sir_of_power(&power)?;
        let kkt = kkt_classify(dm, &power, kkt_tol)?;
        Ok(Self {
            objective_value: objective(&dm.weights, &sir),
            sir,
            power,
            kkt_residual: kkt.residual,
            kkt_satisfied: kkt.satisfied,
            active_sets: kkt.sets,
            iterations,
            termination,
            bounds: objective_bounds(dm)?,
            lp_value: None,
            polytope_value: None,
            upper_bound_gap: None,
            trace: Vec::new(),
        })
    }
}

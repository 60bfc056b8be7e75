use super::kkt::KKT_TOL;
use super::linearized::{recover_power, uniform_power};
use super::polytope::Polytope;
use super::simplex::lp_solve;
use super::{SolverReport, Termination};
use crate::channel::DerivedMatrices;
use crate::error::{Error, Result};
use crate::real::Real;

/// Maximizes `w·ξ` over the polytope and maps the vertex back to powers.
///
/// When `P(e^ξ)` overshoots a budget it is projected back onto the feasible
/// set; when `e^ξ` lies beyond the region where `P` exists, the SIR vector
/// is first pulled radially onto the boundary. The best of these and the
/// uniform-SIR power behind the simple lower bound is reported.
pub fn solve_lp_relax<T: Real>(dm: &DerivedMatrices<T>, polytope: &Polytope<T>) -> Result<SolverReport<T>> {
    if polytope.dim() != dm.dim() {
        return Err(Error::InputDomain(
            "polytope dimension does not match the instance".into(),
        ));
    }
    let sol = lp_solve(&dm.weights, polytope)?;
    let (power, moved) = recover_power(dm, &sol.vertex, -polytope.k, &uniform_power(dm)?)?;
    let termination = if moved {
        Termination::Projected
    } else {
        Termination::LpOptimal
    };
    let mut report = SolverReport::at_power(dm, power, T::tol(KKT_TOL, 1024.0), sol.pivots, termination)?;
    report.lp_value = Some(sol.value);
    Ok(report)
}

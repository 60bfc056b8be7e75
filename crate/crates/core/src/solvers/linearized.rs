//! Successive linearization over the supporting-hyperplane polytope.

use super::gradient::merge_best;
use super::kkt::KKT_TOL;
use super::polytope::{max_constraint_radius, Polytope};
use super::simplex::{lp_solve_from, LpSolution};
use super::{SolverReport, Termination};
use crate::channel::{objective, DerivedMatrices};
use crate::error::{Error, Result};
use crate::real::{dot, max_abs_diff, Real};

#[derive(Clone, Debug)]
pub struct LinearizedOptions<T> {
    pub max_iter: usize,
    /// Budget of cutting planes added while refining LP vertices.
    pub max_cuts: usize,
    /// An LP vertex whose constraint radius is within `1 + cut_tol` is
    /// accepted without further cuts.
    pub cut_tol: T,
    pub kkt_tol: T,
    /// Starting vertex. Without one the run starts from the maximizer of
    /// `start_objective·ξ`, by default `w·ξ`.
    pub start: Option<Vec<T>>,
    pub start_objective: Option<Vec<T>>,
}

impl<T: Real> Default for LinearizedOptions<T> {
    fn default() -> Self {
        Self {
            max_iter: 200,
            max_cuts: 2_000,
            cut_tol: T::tol(1e-9, 1024.0),
            kkt_tol: T::tol(KKT_TOL, 1024.0),
            start: None,
            start_objective: None,
        }
    }
}

/// Power at the uniform SIR `(1/R) 1`, which attains the simple lower bound.
pub(crate) fn uniform_power<T: Real>(dm: &DerivedMatrices<T>) -> Result<Vec<T>> {
    let r = max_constraint_radius(dm)?;
    let p = dm.power_of_sir(&vec![T::one() / r; dm.dim()])?;
    Ok(dm.project_power(&p))
}

/// Best feasible power recovered from a log-SIR point, and whether it had
/// to come from anything other than `P(e^ξ)` itself. The candidates are
/// `P(e^ξ)` projected onto the budgets, `P` of the SIR vector pulled
/// radially onto the boundary, and the `fallback` power.
pub(crate) fn recover_power<T: Real>(
    dm: &DerivedMatrices<T>,
    xi: &[T],
    floor: T,
    fallback: &[T],
) -> Result<(Vec<T>, bool)> {
    let gamma: Vec<T> = xi.iter().map(|x| x.exp()).collect();
    let off = |p: &mut Vec<T>| {
        // coordinates pinned to the box floor stand for zero power
        for (x, &z) in p.iter_mut().zip(xi) {
            if z <= floor + T::tol(1e-9, 64.0) {
                *x = T::zero();
            }
        }
    };
    let mut candidates: Vec<(Vec<T>, bool)> = Vec::new();
    candidates.push((fallback.to_vec(), true));
    if let Ok(mut p) = dm.power_of_sir(&gamma) {
        off(&mut p);
        let exact = dm.is_feasible_power(&p, T::tol(1e-9, 64.0));
        candidates.push((dm.project_power(&p), !exact));
    }
    let r = dm.constraint_radii(&gamma)?.into_iter().fold(T::zero(), T::max);
    if r > T::one() {
        let shrunk: Vec<T> = gamma.iter().map(|&g| g / r).collect();
        let mut p = dm.power_of_sir(&shrunk)?;
        off(&mut p);
        candidates.push((dm.project_power(&p), true));
    }
    candidates
        .into_iter()
        .map(|(p, moved)| {
            let v = objective(&dm.weights, &dm.sir_unchecked(&p));
            (v, p, moved)
        })
        .reduce(|a, b| if b.0 >= a.0 { b } else { a })
        .map(|(_, p, moved)| (p, moved))
        .ok_or_else(|| Error::Degenerate("no feasible power recovered from the LP vertex".into()))
}

/// Solves the LP for `c`, adding cuts at the retraction of each vertex that
/// falls outside the feasible set until one lands within `cut_tol`.
fn refined_lp<T: Real>(
    dm: &DerivedMatrices<T>,
    poly: &mut Polytope<T>,
    c: &[T],
    warm: &mut Vec<usize>,
    cuts_left: &mut usize,
    cut_tol: T,
) -> Result<LpSolution<T>> {
    let mut last: Option<Vec<T>> = None;
    loop {
        let sol = lp_solve_from(c, poly, warm)?;
        warm.clone_from(&sol.working_set);
        let stuck = last
            .as_ref()
            .is_some_and(|z| max_abs_diff(z, &sol.vertex) <= T::tol(1e-15, 4.0));
        if *cuts_left == 0 || stuck {
            return Ok(sol);
        }
        let (_, added) = poly.cut_if_outside(dm, &sol.vertex, cut_tol)?;
        if added == 0 {
            return Ok(sol);
        }
        *cuts_left = cuts_left.saturating_sub(added);
        last = Some(sol.vertex);
    }
}

fn linearization<T: Real>(w: &[T], xi: &[T]) -> Vec<T> {
    w.iter()
        .zip(xi)
        .map(|(&wl, &x)| {
            let e = x.exp();
            wl * e / (T::one() + e)
        })
        .collect()
}

/// Moves between polytope vertices, each time maximizing the first-order
/// expansion of `Φ_w(e^ξ)` at the current vertex. LP vertices outside the
/// feasible set are cut off on the fly, so iterates track the true boundary.
/// The reported power is the best feasible power recovered along the way.
pub fn solve_linearized<T: Real>(
    dm: &DerivedMatrices<T>,
    polytope: &Polytope<T>,
    opts: &LinearizedOptions<T>,
) -> Result<SolverReport<T>> {
    let n = dm.dim();
    if polytope.dim() != n {
        return Err(Error::InputDomain(
            "polytope dimension does not match the instance".into(),
        ));
    }
    let mut poly = polytope.clone();
    run_linearized(dm, &mut poly, &mut Vec::new(), opts)
}

/// One linearized run on `poly`, which keeps the cuts it adds.
fn run_linearized<T: Real>(
    dm: &DerivedMatrices<T>,
    poly: &mut Polytope<T>,
    warm: &mut Vec<usize>,
    opts: &LinearizedOptions<T>,
) -> Result<SolverReport<T>> {
    let n = dm.dim();
    let mut cuts_left = opts.max_cuts;
    let mut xi = match &opts.start {
        Some(x0) => {
            if x0.len() != n || !poly.contains(x0, T::tol(1e-9, 1024.0)) {
                return Err(Error::InputDomain("starting point must lie in the polytope".into()));
            }
            x0.clone()
        }
        None => {
            let c = opts.start_objective.as_ref().unwrap_or(&dm.weights);
            if c.len() != n {
                return Err(Error::InputDomain("start objective has the wrong length".into()));
            }
            refined_lp(dm, poly, c, warm, &mut cuts_left, opts.cut_tol)?.vertex
        }
    };
    let floor = -poly.k;
    let fallback = uniform_power(dm)?;
    let (mut best_p, mut best_moved) = recover_power(dm, &xi, floor, &fallback)?;
    let mut best_v = objective(&dm.weights, &dm.sir_unchecked(&best_p));
    let mut trace = vec![best_v];
    let mut visited = vec![xi.clone()];
    let mut termination = Termination::MaxIters;
    let mut iterations = opts.max_iter;
    for it in 0..opts.max_iter {
        let c = linearization(&dm.weights, &xi);
        let sol = refined_lp(dm, poly, &c, warm, &mut cuts_left, opts.cut_tol)?;
        let gain = dot(&c, &sol.vertex) - dot(&c, &xi);
        let scale = T::one() + dot(&c, &xi).abs();
        if !(gain > T::tol(1e-12, 64.0) * scale) {
            termination = Termination::LpOptimal;
            iterations = it;
            break;
        }
        let next = sol.vertex;
        let (p, moved) = recover_power(dm, &next, floor, &fallback)?;
        let v = objective(&dm.weights, &dm.sir_unchecked(&p));
        if v > best_v {
            best_v = v;
            best_p = p;
            best_moved = moved;
        }
        trace.push(best_v);
        if visited.iter().any(|z| max_abs_diff(z, &next) <= T::tol(1e-12, 64.0)) {
            termination = Termination::Cycle;
            iterations = it + 1;
            xi = next;
            break;
        }
        visited.push(next.clone());
        xi = next;
        if !best_moved && super::kkt_classify(dm, &best_p, opts.kkt_tol)?.satisfied {
            termination = Termination::KktSatisfied;
            iterations = it + 1;
            break;
        }
    }
    let gamma: Vec<T> = xi.iter().map(|x| x.exp()).collect();
    let polytope_value = objective(&dm.weights, &gamma);
    let mut report = SolverReport::at_power(dm, best_p, opts.kkt_tol, iterations, termination)?;
    report.polytope_value = Some(polytope_value);
    report.upper_bound_gap = Some(polytope_value - report.objective_value);
    report.trace = trace;
    Ok(report)
}

/// LP objectives whose maximizers seed [`solve_linearized_multistart`]: the
/// weights, the indicator of each group, and for three or more groups each
/// all-but-one set. Groups are the budgets when some budget holds several
/// slots, otherwise the single slots.
pub fn start_objectives<T: Real>(dm: &DerivedMatrices<T>) -> Vec<Vec<T>> {
    let n = dm.dim();
    let groups: Vec<Vec<usize>> = if dm.budgets.len() < n {
        dm.budgets.iter().map(|b| b.slots.clone()).collect()
    } else {
        (0..n).map(|i| vec![i]).collect()
    };
    let indicator = |g: &[usize], inside: T, outside: T| -> Vec<T> {
        (0..n).map(|j| if g.contains(&j) { inside } else { outside }).collect()
    };
    let mut out = vec![dm.weights.clone()];
    out.extend(groups.iter().map(|g| indicator(g, T::one(), T::zero())));
    if groups.len() >= 3 {
        out.extend(groups.iter().map(|g| indicator(g, T::zero(), T::one())));
    }
    out
}

/// Runs [`solve_linearized`] from the vertices picked by
/// [`start_objectives`] and keeps the best report.
pub fn solve_linearized_multistart<T: Real>(
    dm: &DerivedMatrices<T>,
    polytope: &Polytope<T>,
    opts: &LinearizedOptions<T>,
) -> Result<SolverReport<T>> {
    let reports = start_objectives(dm)
        .into_iter()
        .map(|c| {
            let o = LinearizedOptions {
                start: None,
                start_objective: Some(c),
                ..opts.clone()
            };
            solve_linearized(dm, polytope, &o)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merge_best(reports).expect("at least one start"))
}

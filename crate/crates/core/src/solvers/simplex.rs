//! Vertex-following simplex for `max cᵀx  s.t.  Ax <= b`.
//!
//! The iterate is always a vertex given by a working set of `n` tight rows
//! with independent normals. Each pivot releases the tight row with the
//! most-negative-index negative multiplier and walks along the edge until the
//! first blocking row, lowest index on ties (Bland's rule on both choices).

use serde::{Deserialize, Serialize};

use super::polytope::Polytope;
use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::real::{dot, norm_inf as norm, Real};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution<T> {
    pub vertex: Vec<T>,
    pub value: T,
    /// Indices of the tight rows defining the vertex.
    pub working_set: Vec<usize>,
    pub pivots: usize,
    /// `max(Ax − b)` at the returned vertex.
    pub residual: T,
}

/// Maximizes `objective·ξ` over the polytope, starting from the `−K·1` corner.
pub fn lp_solve<T: Real>(objective: &[T], polytope: &Polytope<T>) -> Result<LpSolution<T>> {
    let (a, b) = polytope.inequalities();
    let n = polytope.dim();
    if objective.len() != n {
        return Err(Error::InputDomain(format!(
            "objective has length {}, expected {n}",
            objective.len()
        )));
    }
    simplex(objective, &a, &b, (0..n).collect())
}

/// Like [`lp_solve`] but starting from the working set of an earlier
/// solution over the same or a smaller row set. A start made infeasible by
/// rows added since is repaired with dual pivots when its multipliers are
/// still nonnegative; anything else falls back to the `−K·1` corner.
pub fn lp_solve_from<T: Real>(objective: &[T], polytope: &Polytope<T>, start: &[usize]) -> Result<LpSolution<T>> {
    let (a, b) = polytope.inequalities();
    let n = polytope.dim();
    if objective.len() != n {
        return Err(Error::InputDomain(format!(
            "objective has length {}, expected {n}",
            objective.len()
        )));
    }
    let warm = if start.len() == n && start.iter().all(|&r| r < a.rows()) {
        dual_repair(objective, &a, &b, start.to_vec()).and_then(|w| simplex(objective, &a, &b, w))
    } else {
        Err(Error::InputDomain("unusable working set".into()))
    };
    match warm {
        Ok(sol) => Ok(sol),
        Err(_) => simplex(objective, &a, &b, (0..n).collect()),
    }
}

/// Dual simplex pivots from a dual-feasible working set until its vertex
/// satisfies every row. The most violated row enters, lowest index on ties,
/// and leaves by the ratio test on the multipliers.
fn dual_repair<T: Real>(c: &[T], a: &Matrix<T>, b: &[T], mut work: Vec<usize>) -> Result<Vec<usize>> {
    let n = a.cols();
    let m = a.rows();
    let scale_c = c.iter().map(|x| x.abs()).fold(T::zero(), T::max).max(T::one());
    let eps = T::tol(1e-12, 64.0);
    // cuts near convergence are shallow, so violations count from rounding level
    let feas_tol = T::tol(1e-14, 16.0);
    for _ in 0..(10 * m + 100) {
        let aw = Matrix::from_fn(n, n, |i, j| a[(work[i], j)]);
        let lu = Lu::factor(&aw)?;
        let bw: Vec<T> = work.iter().map(|&r| b[r]).collect();
        let x = lu.solve(&bw)?;
        let mut worst: Option<(T, usize)> = None;
        for (j, &bj) in b.iter().enumerate().take(m) {
            let v = dot(a.row(j), &x) - bj;
            if v > feas_tol * (T::one() + bj.abs()) && worst.is_none_or(|(wv, _)| v > wv) {
                worst = Some((v, j));
            }
        }
        let Some((_, j)) = worst else {
            return Ok(work);
        };
        let lambda = lu.solve_transpose(c)?;
        if lambda.iter().any(|&l| l < -eps * scale_c) {
            return Err(Error::Degenerate("start is not dual feasible".into()));
        }
        let mu = lu.solve_transpose(a.row(j))?;
        let mut leave: Option<(T, usize)> = None;
        for k in 0..n {
            if mu[k] > eps {
                let t = lambda[k].max(T::zero()) / mu[k];
                let better = match leave {
                    None => true,
                    Some((tb, kb)) => {
                        t < tb - eps * (T::one() + tb) || (t <= tb + eps * (T::one() + tb) && work[k] < work[kb])
                    }
                };
                if better {
                    leave = Some((t, k));
                }
            }
        }
        let Some((_, k)) = leave else {
            return Err(Error::LpInfeasible("dual ratio test found no leaving row".into()));
        };
        work[k] = j;
    }
    Err(Error::Convergence {
        what: "dual simplex",
        iterations: 10 * m + 100,
        residual: f64::NAN,
    })
}

/// Simplex from a given vertex working set.
pub(crate) fn simplex<T: Real>(c: &[T], a: &Matrix<T>, b: &[T], mut work: Vec<usize>) -> Result<LpSolution<T>> {
    let n = a.cols();
    let m = a.rows();
    let scale_c = c.iter().map(|x| x.abs()).fold(T::zero(), T::max).max(T::one());
    let eps = T::tol(1e-12, 64.0);
    let mut x = vertex_of(a, b, &work)?;
    let feas_tol = T::tol(1e-9, 1024.0);
    if violation(a, b, &x) > feas_tol * (T::one() + norm(b)) {
        return Err(Error::LpInfeasible("starting vertex violates a constraint".into()));
    }
    let row_norm: Vec<T> = (0..m).map(|j| norm(a.row(j))).collect();
    let max_pivots = 50 * m + 1000;
    let mut pivots = 0;
    loop {
        let aw = Matrix::from_fn(n, n, |i, j| a[(work[i], j)]);
        let lu = Lu::factor(&aw)?;
        let lambda = lu.solve_transpose(c)?;
        // Bland: release the lowest-index row with a negative multiplier.
        let leave = (0..n).filter(|&k| lambda[k] < -eps * scale_c).min_by_key(|&k| work[k]);
        let Some(k) = leave else {
            break;
        };
        if pivots >= max_pivots {
            return Err(Error::Convergence {
                what: "simplex",
                iterations: pivots,
                residual: lambda[k].as_f64(),
            });
        }
        let mut e = vec![T::zero(); n];
        e[k] = -T::one();
        let d = lu.solve(&e)?;
        let dn = norm(&d);
        let mut best: Option<(T, usize)> = None;
        for j in 0..m {
            if work.contains(&j) {
                continue;
            }
            let row = a.row(j);
            let ad = dot(row, &d);
            if ad <= eps * row_norm[j] * dn {
                continue;
            }
            let slack = (b[j] - dot(row, &x)).max(T::zero());
            let t = slack / ad;
            // rows arrive in increasing index, so a tie keeps the earlier one
            best = match best {
                Some((tb, jb)) if t >= tb - eps * (T::one() + tb) => Some((tb.min(t), jb)),
                _ => Some((t, j)),
            };
        }
        let Some((t, j)) = best else {
            return Err(Error::Degenerate("linear program is unbounded".into()));
        };
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += t * *di;
        }
        work[k] = j;
        pivots += 1;
        // re-anchor on the exact vertex to keep drift out
        x = vertex_of(a, b, &work)?;
    }
    let residual = violation(a, b, &x);
    Ok(LpSolution {
        value: dot(c, &x),
        vertex: x,
        working_set: work,
        pivots,
        residual,
    })
}

fn vertex_of<T: Real>(a: &Matrix<T>, b: &[T], work: &[usize]) -> Result<Vec<T>> {
    let n = a.cols();
    let aw = Matrix::from_fn(n, n, |i, j| a[(work[i], j)]);
    let bw: Vec<T> = work.iter().map(|&r| b[r]).collect();
    aw.solve(&bw)
}

fn violation<T: Real>(a: &Matrix<T>, b: &[T], x: &[T]) -> T {
    (0..a.rows())
        .map(|j| dot(a.row(j), x) - b[j])
        .fold(T::neg_infinity(), T::max)
}

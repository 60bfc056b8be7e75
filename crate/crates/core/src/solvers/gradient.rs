//! Projected gradient ascent in the power variable.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::kkt::{kkt_classify, KKT_TOL};
use super::{SolverReport, Termination};
use crate::channel::{objective, DerivedMatrices};
use crate::error::{Error, Result};
use crate::real::{dot, Real};
use crate::spectral::spectral_radius;

#[derive(Clone, Debug)]
pub struct GradientOptions<T> {
    pub max_iter: usize,
    pub kkt_tol: T,
    /// Sufficient-increase constant of the backtracking search.
    pub armijo: T,
    pub shrink: T,
    pub t_min: T,
    /// Starting points for the multi-start driver, the first being full power.
    pub starts: usize,
    pub seed: u64,
}

impl<T: Real> Default for GradientOptions<T> {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            kkt_tol: T::tol(KKT_TOL, 1024.0),
            armijo: T::lit(1e-4),
            shrink: T::lit(0.5),
            t_min: T::lit(1e-12),
            starts: 16,
            seed: 0,
        }
    }
}

/// Relative distance to a bound below which a coordinate is put on it.
const SNAP: f64 = 1e-10;

fn value_at<T: Real>(dm: &DerivedMatrices<T>, p: &[T]) -> T {
    objective(&dm.weights, &dm.sir_unchecked(p))
}

fn snap<T: Real>(p: &mut [T], caps: &[T]) {
    let s = T::lit(SNAP);
    for (x, &c) in p.iter_mut().zip(caps) {
        if *x <= c * s {
            *x = T::zero();
        } else if *x >= c * (T::one() - s) {
            *x = c;
        }
    }
}

/// Gradient ascent from `p0`. Box problems follow the coordinate rule of
/// freezing slots that sit on a bound with the gradient pointing out;
/// shared budgets use a backtracking search along the projection arc.
pub fn solve_gradient<T: Real>(
    dm: &DerivedMatrices<T>,
    p0: &[T],
    opts: &GradientOptions<T>,
) -> Result<SolverReport<T>> {
    if !dm.is_feasible_power(p0, T::tol(1e-9, 64.0)) {
        return Err(Error::InputDomain("starting power must be feasible".into()));
    }
    let caps = dm.slot_caps();
    let mut p = dm.project_power(p0);
    if dm.is_box() {
        snap(&mut p, &caps);
    }
    let mut value = value_at(dm, &p);
    let mut trace = vec![value];
    let mut termination = Termination::MaxIters;
    let mut iterations = opts.max_iter;
    for it in 0..opts.max_iter {
        let kkt = kkt_classify(dm, &p, opts.kkt_tol)?;
        if kkt.satisfied {
            termination = Termination::KktSatisfied;
            iterations = it;
            break;
        }
        let step = if dm.is_box() {
            box_step(dm, &p, &kkt.gradient, &caps, value, opts)
        } else {
            arc_step(dm, &p, &kkt.gradient, value, opts)
        };
        match step {
            Some((q, v)) => {
                p = q;
                value = v;
                trace.push(v);
            }
            None => {
                termination = Termination::Stalled;
                iterations = it;
                log::debug!(
                    "gradient ascent stalled at iteration {it}, kkt residual {}",
                    kkt.residual
                );
                break;
            }
        }
    }
    let mut report = SolverReport::at_power(dm, p, opts.kkt_tol, iterations, termination)?;
    report.trace = trace;
    Ok(report)
}

fn box_step<T: Real>(
    dm: &DerivedMatrices<T>,
    p: &[T],
    a: &[T],
    caps: &[T],
    value: T,
    opts: &GradientOptions<T>,
) -> Option<(Vec<T>, T)> {
    let n = p.len();
    let b: Vec<T> = (0..n)
        .map(|i| {
            let outward = (p[i] <= T::zero() && a[i] < T::zero()) || (p[i] >= caps[i] && a[i] > T::zero());
            if outward {
                T::zero()
            } else {
                a[i]
            }
        })
        .collect();
    let slope = dot(a, &b);
    if !(slope > T::zero()) {
        return None;
    }
    let mut t_max = T::infinity();
    for i in 0..n {
        let room = if b[i] > T::zero() {
            (caps[i] - p[i]) / b[i]
        } else if b[i] < T::zero() {
            p[i] / -b[i]
        } else {
            continue;
        };
        t_max = t_max.min(room);
    }
    if !t_max.is_finite() || !(t_max > T::zero()) {
        return None;
    }
    let mut t = t_max;
    while t >= opts.t_min {
        let mut q: Vec<T> = (0..n).map(|i| (p[i] + t * b[i]).max(T::zero()).min(caps[i])).collect();
        if t == t_max {
            // land exactly on the blocking bounds
            for i in 0..n {
                if b[i] > T::zero() && (caps[i] - p[i]) / b[i] <= t_max {
                    q[i] = caps[i];
                } else if b[i] < T::zero() && p[i] / -b[i] <= t_max {
                    q[i] = T::zero();
                }
            }
        }
        snap(&mut q, caps);
        let v = value_at(dm, &q);
        if v > value && v >= value + opts.armijo * t * slope {
            return Some((q, v));
        }
        t *= opts.shrink;
    }
    None
}

fn arc_step<T: Real>(
    dm: &DerivedMatrices<T>,
    p: &[T],
    a: &[T],
    value: T,
    opts: &GradientOptions<T>,
) -> Option<(Vec<T>, T)> {
    let cap_max = dm.budgets.iter().map(|b| b.cap).fold(T::zero(), T::max);
    let amax = a.iter().map(|x| x.abs()).fold(T::zero(), T::max);
    if !(amax > T::zero()) {
        return None;
    }
    let mut t = cap_max / amax;
    while t >= opts.t_min {
        let trial: Vec<T> = p.iter().zip(a).map(|(&x, &g)| x + t * g).collect();
        let q = dm.project_power(&trial);
        let d: Vec<T> = q.iter().zip(p).map(|(&x, &y)| x - y).collect();
        let v = value_at(dm, &q);
        if v > value && v >= value + opts.armijo * dot(a, &d) {
            return Some((q, v));
        }
        t *= opts.shrink;
    }
    None
}

/// Full power, then the power attaining the lower bound of
/// [`objective_bounds`](crate::relax::objective_bounds) (so a multistart
/// never ends below it), then seeded random feasible points; `n` in total.
pub fn start_points<T: Real>(dm: &DerivedMatrices<T>, n: usize, seed: u64) -> Vec<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut full = vec![T::zero(); dm.dim()];
    for b in &dm.budgets {
        let share = b.cap / T::lit(b.slots.len() as f64);
        for &s in &b.slots {
            full[s] = share;
        }
    }
    let caps = dm.slot_caps();
    let mut out = vec![full];
    if n >= 2 {
        if let Some(p) = lower_bound_power(dm) {
            out.push(p);
        }
    }
    while out.len() < n {
        let raw: Vec<T> = caps.iter().map(|&c| c * T::lit(rng.random::<f64>())).collect();
        out.push(dm.project_power(&raw));
    }
    out.truncate(n.max(1));
    out
}

/// `P((1/R) 1)` with `R = max_g ρ(B_g)`, clipped onto the budgets.
fn lower_bound_power<T: Real>(dm: &DerivedMatrices<T>) -> Option<Vec<T>> {
    let r = dm
        .constraints
        .iter()
        .map(|b| spectral_radius(b).ok())
        .try_fold(T::zero(), |acc, x| x.map(|x| acc.max(x)))?;
    if !(r > T::zero()) {
        return None;
    }
    let p = dm.power_of_sir(&vec![T::one() / r; dm.dim()]).ok()?;
    Some(dm.project_power(&p))
}

/// Picks the report with the largest objective, breaking exact ties by the
/// lexicographically smallest power vector.
pub fn merge_best<T: Real>(reports: Vec<SolverReport<T>>) -> Option<SolverReport<T>> {
    reports
        .into_iter()
        .reduce(|best, r| match r.objective_value.partial_cmp(&best.objective_value) {
            Some(Ordering::Greater) => r,
            Some(Ordering::Equal) if lex_less(&r.power, &best.power) => r,
            _ => best,
        })
}

fn lex_less<T: Real>(a: &[T], b: &[T]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Less) => return true,
            Some(Ordering::Greater) => return false,
            _ => {}
        }
    }
    false
}

/// Runs [`solve_gradient`] from [`start_points`] and keeps the best result.
pub fn solve_gradient_multistart<T: Real>(
    dm: &DerivedMatrices<T>,
    opts: &GradientOptions<T>,
) -> Result<SolverReport<T>> {
    let reports = start_points(dm, opts.starts.max(1), opts.seed)
        .iter()
        .map(|p0| solve_gradient(dm, p0, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(merge_best(reports).expect("at least one start"))
}

//! Outer polyhedral approximation of the log-SIR feasible set.

use serde::{Deserialize, Serialize};

use crate::channel::DerivedMatrices;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::real::Real;
use crate::spectral::{spectral_radius, supporting_hyperplane, Hyperplane};

#[derive(Clone, Debug)]
pub struct PolytopeOptions<T> {
    /// Box floor depth; defaults to `log R + 10`.
    pub k: Option<T>,
    /// Grid points per slot (at least 2), endpoints included. A single entry
    /// applies to every slot.
    pub grid: Vec<usize>,
    /// Larger grids are coarsened to fit; when even two points per axis
    /// are too many, only the corner anchors are used.
    pub max_grid_points: usize,
}

impl<T> Default for PolytopeOptions<T> {
    fn default() -> Self {
        Self {
            k: None,
            grid: vec![4],
            max_grid_points: 4_096,
        }
    }
}

/// Box `[−K, log γ̄]` cut by supporting hyperplanes `H(ξ) <= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polytope<T> {
    pub hyperplanes: Vec<Hyperplane<T>>,
    /// `(anchor index, budget index)` for each hyperplane.
    pub sources: Vec<(usize, usize)>,
    pub anchors: Vec<Vec<T>>,
    pub box_low: Vec<T>,
    pub box_high: Vec<T>,
    pub k: T,
}

impl<T: Real> Polytope<T> {
    pub fn dim(&self) -> usize {
        self.box_low.len()
    }

    /// Rows of `A ξ <= b`: lower box rows, upper box rows, then hyperplanes.
    pub fn inequalities(&self) -> (Matrix<T>, Vec<T>) {
        let n = self.dim();
        let m = 2 * n + self.hyperplanes.len();
        let mut a = Matrix::zeros(m, n);
        let mut b = Vec::with_capacity(m);
        for i in 0..n {
            a[(i, i)] = -T::one();
            b.push(-self.box_low[i]);
        }
        for i in 0..n {
            a[(n + i, i)] = T::one();
            b.push(self.box_high[i]);
        }
        for (h, plane) in self.hyperplanes.iter().enumerate() {
            for j in 0..n {
                a[(2 * n + h, j)] = plane.normal[j];
            }
            b.push(plane.offset());
        }
        (a, b)
    }

    /// Largest constraint violation at `xi` (negative when strictly inside).
    pub fn violation(&self, xi: &[T]) -> T {
        let mut v = T::neg_infinity();
        for ((&x, &lo), &hi) in xi.iter().zip(&self.box_low).zip(&self.box_high) {
            v = v.max(lo - x).max(x - hi);
        }
        for h in &self.hyperplanes {
            v = v.max(h.evaluate(xi));
        }
        v
    }

    pub fn contains(&self, xi: &[T], tol: T) -> bool {
        self.violation(xi) <= tol
    }

    fn push_anchor(&mut self, dm: &DerivedMatrices<T>, zeta: Vec<T>, active: &[usize]) -> Result<usize> {
        let idx = self.anchors.len();
        let mut added = 0;
        for &g in active {
            let h = supporting_hyperplane(&dm.constraints[g], &zeta)?;
            self.hyperplanes.push(h);
            self.sources.push((idx, g));
            added += 1;
        }
        if added > 0 {
            self.anchors.push(zeta);
        }
        Ok(added)
    }

    /// Adds the supporting hyperplanes at the radial retraction of `xi` onto
    /// the boundary, which cut `xi` off whenever it lies outside the
    /// feasible set. Returns the retraction radius and the number of cuts.
    pub fn add_cut(&mut self, dm: &DerivedMatrices<T>, xi: &[T]) -> Result<(T, usize)> {
        self.cut_if_outside(dm, xi, T::neg_infinity())
    }

    /// [`Polytope::add_cut`], skipped when the retraction radius is within
    /// `1 + tol`.
    pub(crate) fn cut_if_outside(&mut self, dm: &DerivedMatrices<T>, xi: &[T], tol: T) -> Result<(T, usize)> {
        let gamma: Vec<T> = xi.iter().map(|x| x.exp()).collect();
        let radii = dm.constraint_radii(&gamma)?;
        let r = radii.iter().copied().fold(T::zero(), T::max);
        if r <= T::one() + tol {
            return Ok((r, 0));
        }
        if !(r > T::zero()) {
            return Err(Error::Degenerate("zero constraint radius".into()));
        }
        let shift = r.ln();
        let zeta: Vec<T> = xi.iter().map(|&x| x - shift).collect();
        let active: Vec<usize> = radii
            .iter()
            .enumerate()
            .filter(|(_, &rg)| rg >= r * (T::one() - T::lit(1e-8)))
            .map(|(g, _)| g)
            .collect();
        let added = self.push_anchor(dm, zeta, &active)?;
        Ok((r, added))
    }
}

/// `max_g ρ(B_g)`.
pub(crate) fn max_constraint_radius<T: Real>(dm: &DerivedMatrices<T>) -> Result<T> {
    dm.constraints
        .iter()
        .map(spectral_radius)
        .try_fold(T::zero(), |acc, r| r.map(|r| acc.max(r)))
}

/// Builds the polytope from anchors on a grid of powers between
/// `p_low = (e^K I − F)⁻¹ v` and the budgets.
///
/// Box problems keep the grid points with some coordinate on its cap. With
/// shared budgets every grid point is scaled down until its most loaded
/// budget is spent in full.
pub fn build_polytope<T: Real>(dm: &DerivedMatrices<T>, opts: &PolytopeOptions<T>) -> Result<Polytope<T>> {
    let n = dm.dim();
    let log_r = max_constraint_radius(dm)?.ln();
    let k = match opts.k {
        Some(k) if !(k > log_r) => {
            return Err(Error::Precondition(format!("K = {k} must exceed log R = {log_r}")));
        }
        Some(k) => k,
        None => log_r + T::lit(10.0),
    };
    let mut grid: Vec<usize> = match opts.grid.len() {
        0 => vec![4; n],
        1 => vec![opts.grid[0]; n],
        len if len == n => opts.grid.clone(),
        len => {
            return Err(Error::InputDomain(format!("grid has {len} entries, expected 1 or {n}")));
        }
    };
    if grid.iter().any(|&m| m < 2) {
        return Err(Error::InputDomain("grid needs at least 2 points per axis".into()));
    }
    let count = |g: &[usize]| g.iter().try_fold(1usize, |acc, &m| acc.checked_mul(m));
    if count(&grid).is_none_or(|t| t > opts.max_grid_points) {
        // coarsen every axis to the largest uniform size that fits
        let mut m = grid.iter().copied().max().unwrap_or(2);
        while m > 2 && count(&vec![m; n]).is_none_or(|t| t > opts.max_grid_points) {
            m -= 1;
        }
        grid.iter_mut().for_each(|g| *g = (*g).min(m));
    }
    let ek = k.exp();
    let system = Matrix::from_fn(n, n, |i, j| if i == j { ek } else { T::zero() } - dm.f.matrix()[(i, j)]);
    let p_low = system.solve(&dm.v)?;
    let caps = dm.slot_caps();
    let level = |i: usize, j: usize| {
        if j + 1 == grid[i] {
            caps[i]
        } else {
            p_low[i] + (caps[i] - p_low[i]) * T::lit(j as f64) / T::lit((grid[i] - 1) as f64)
        }
    };

    let mut poly = Polytope {
        hyperplanes: Vec::new(),
        sources: Vec::new(),
        anchors: Vec::new(),
        box_low: vec![-k; n],
        box_high: dm.gamma_bar.iter().map(|g| g.ln()).collect(),
        k,
    };
    let total = count(&grid);
    let mut points: Vec<Vec<T>> = Vec::new();
    match total {
        Some(total) if total <= opts.max_grid_points => {
            let mut idx = vec![0usize; n];
            for _ in 0..total {
                let on_cap = idx.iter().zip(&grid).any(|(&j, &m)| j + 1 == m);
                if on_cap || !dm.is_box() {
                    points.push((0..n).map(|i| level(i, idx[i])).collect());
                }
                for i in (0..n).rev() {
                    idx[i] += 1;
                    if idx[i] < grid[i] {
                        break;
                    }
                    idx[i] = 0;
                }
            }
        }
        _ => {
            log::info!("polytope grid too large; using {} corner anchors", n + 1);
            points.push(caps.clone());
            for i in 0..n {
                let mut p = p_low.clone();
                p[i] = caps[i];
                points.push(p);
            }
        }
    }
    let floor = (-k).exp();
    for p in points {
        let p = if dm.is_box() {
            lift_to_floor(dm, p, floor, &caps)
        } else {
            scale_to_boundary(dm, p)
        };
        let usage = dm.budget_usage(&p);
        let active: Vec<usize> = dm
            .budgets
            .iter()
            .zip(&usage)
            .enumerate()
            .filter(|(_, (b, &u))| u >= b.cap * (T::one() - T::lit(1e-12)))
            .map(|(g, _)| g)
            .collect();
        let zeta: Vec<T> = dm.sir_unchecked(&p).iter().map(|g| g.ln()).collect();
        poly.push_anchor(dm, zeta, &active)?;
    }
    Ok(poly)
}

/// Raises the uncapped slots of a box grid point until every SIR is at
/// least `floor`, so the anchor sits inside the box `ξ >= −K`. Raising one
/// slot lowers the SIR of the others, so sweeps repeat until nothing moves.
fn lift_to_floor<T: Real>(dm: &DerivedMatrices<T>, mut p: Vec<T>, floor: T, caps: &[T]) -> Vec<T> {
    for _ in 0..100 {
        let fp = dm.f.matrix().mul_vec(&p);
        let mut moved = false;
        for i in 0..p.len() {
            if p[i] >= caps[i] {
                continue;
            }
            let need = (floor * (fp[i] + dm.v[i])).min(caps[i]);
            if need > p[i] {
                p[i] = need;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    p
}

/// Scales `p` so that its most loaded budget is exactly spent, setting the
/// binding slots exactly on the cap in the box case.
fn scale_to_boundary<T: Real>(dm: &DerivedMatrices<T>, mut p: Vec<T>) -> Vec<T> {
    if dm.is_box() {
        return p;
    }
    let usage = dm.budget_usage(&p);
    let s = dm
        .budgets
        .iter()
        .zip(&usage)
        .map(|(b, &u)| u / b.cap)
        .fold(T::zero(), T::max);
    if s > T::zero() {
        p.iter_mut().for_each(|x| *x /= s);
    }
    p
}

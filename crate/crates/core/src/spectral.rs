//! Nonnegative-matrix spectral primitives.
//!
//! Spectral radius and Perron vectors come from a shifted power iteration:
//! for irreducible `A` and any `s > 0`, `A + sI` is primitive, so the
//! iteration converges even for periodic patterns such as `[[0,1],[1,0]]`.
//! The shift tracks the running eigenvalue estimate, and iteration stops when
//! the Collatz–Wielandt bracket `min (Ax)_i/x_i <= rho <= max (Ax)_i/x_i`
//! closes to the requested relative width.
//!
//! Reducible inputs are split into strongly connected components; the
//! spectral radius of a reducible matrix is the largest radius over its
//! diagonal blocks. Deleting identically zero rows (the reduction used when
//! some scaling entries vanish) is a special case of that split.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::real::{dot, Real};

/// A square matrix with nonnegative entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NonnegMatrix<T>(Matrix<T>);

impl<T: Real> NonnegMatrix<T> {
    pub fn new(m: Matrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InputDomain(format!(
                "matrix is {}x{}, expected square",
                m.rows(),
                m.cols()
            )));
        }
        if m.rows() == 0 {
            return Err(Error::InputDomain("matrix order must be at least 1".into()));
        }
        if let Some(x) = m.as_slice().iter().find(|x| !(**x >= T::zero()) || !x.is_finite()) {
            return Err(Error::InputDomain(format!(
                "matrix entry {x} is negative or not finite"
            )));
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn order(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.0
    }

    pub fn into_inner(self) -> Matrix<T> {
        self.0
    }

    /// `diag(d) A`; `d` must be nonnegative.
    pub fn scale_rows(&self, d: &[T]) -> Result<Self> {
        check_len(d.len(), self.order(), "row scaling")?;
        Self::new(self.0.scale_rows(d))
    }

    /// Strongly connected components of the support graph, each sorted, in
    /// order of their smallest index.
    pub fn components(&self) -> Vec<Vec<usize>> {
        strong_components(&self.0)
    }

    pub fn is_irreducible(&self) -> bool {
        self.order() == 1 || self.components().len() == 1
    }
}

pub(crate) fn strong_components<T: Real>(m: &Matrix<T>) -> Vec<Vec<usize>> {
    let n = m.rows();
    let mut g = DiGraph::<(), ()>::with_capacity(n, n * n);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if i != j && m[(i, j)] > T::zero() {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|ix| ix.index()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    comps.sort_by_key(|c| c[0]);
    comps
}

fn check_len(got: usize, want: usize, what: &str) -> Result<()> {
    if got != want {
        return Err(Error::InputDomain(format!("{what} has length {got}, expected {want}")));
    }
    Ok(())
}

/// Power-iteration controls.
#[derive(Clone, Copy, Debug)]
pub struct PowerOptions<T> {
    /// Relative width of the Collatz–Wielandt bracket at which to stop.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for PowerOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::tol(1e-12, 256.0),
            max_iter: 100_000,
        }
    }
}

/// Shifted power steps taken before switching to the inverse iteration.
const POWER_STEPS: usize = 500;
/// Inverse steps after which a bracket within `sqrt(tol)` is accepted as the
/// rounding floor.
const INVERSE_STEPS: usize = 50;

/// Dominant eigenpair of an irreducible block (order >= 2), on `A` or `Aᵀ`.
///
/// Small spectral gaps (nearly decoupled blocks) stall the power iteration,
/// so after [`POWER_STEPS`] it switches to solving `(σI − A) y = x` with `σ`
/// the upper Collatz–Wielandt bound, followed by one product with `A`.
/// `σ > ρ` keeps the inverse positive.
fn dominant<T: Real>(a: &Matrix<T>, transpose: bool, opts: &PowerOptions<T>) -> Result<(T, Vec<T>)> {
    let n = a.rows();
    let apply = |x: &[T]| if transpose { a.tmul_vec(x) } else { a.mul_vec(x) };
    let inv_n = T::one() / T::lit(n as f64);
    let mut x = vec![inv_n; n];
    let mut shift = {
        let y = apply(&x);
        y.iter().copied().sum::<T>() / x.iter().copied().sum::<T>()
    };
    let mut spread = T::infinity();
    for it in 0..opts.max_iter {
        let y = apply(&x);
        let (mut lo, mut hi) = (T::infinity(), T::zero());
        for (&yi, &xi) in y.iter().zip(&x) {
            let r = yi / xi;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let est = y.iter().copied().sum::<T>() / x.iter().copied().sum::<T>();
        spread = hi - lo;
        if spread <= opts.tol * hi.max(T::min_positive_value()) {
            return Ok((est, x));
        }
        if est > T::zero() {
            shift = est;
        }
        if it >= POWER_STEPS + INVERSE_STEPS && spread <= opts.tol.sqrt() * hi {
            log::debug!(
                "power iteration stalled at relative spread {:e}",
                (spread / hi).as_f64()
            );
            return Ok((est, x));
        }
        if it >= POWER_STEPS {
            if let Some(z) = inverse_step(a, transpose, hi, &x) {
                // One plain product restores the relative accuracy of tiny
                // entries, which the solve only resolves absolutely.
                let mut az = apply(&z);
                let s: T = az.iter().copied().sum();
                if s > T::zero() && s.is_finite() && az.iter().all(|&v| v > T::zero()) {
                    az.iter_mut().for_each(|v| *v /= s);
                    x = az;
                    continue;
                }
            }
        }
        let mut next: Vec<T> = y.iter().zip(&x).map(|(&yi, &xi)| yi + shift * xi).collect();
        let s: T = next.iter().copied().sum();
        if !(s > T::zero()) || !s.is_finite() {
            return Err(Error::Convergence {
                what: "power iteration",
                iterations: 0,
                residual: f64::NAN,
            });
        }
        next.iter_mut().for_each(|v| *v /= s);
        x = next;
    }
    Err(Error::Convergence {
        what: "power iteration",
        iterations: opts.max_iter,
        residual: spread.as_f64(),
    })
}

/// `(σI − A)⁻¹ x` (or with `Aᵀ`) normalized to sum one, if it is positive.
fn inverse_step<T: Real>(a: &Matrix<T>, transpose: bool, sigma: T, x: &[T]) -> Option<Vec<T>> {
    let n = a.rows();
    let m = Matrix::from_fn(n, n, |i, j| if i == j { sigma - a[(i, j)] } else { -a[(i, j)] });
    let lu = Lu::factor(&m).ok()?;
    let mut y = if transpose { lu.solve_transpose(x) } else { lu.solve(x) }.ok()?;
    let s: T = y.iter().copied().sum();
    if !(s > T::zero()) || !s.is_finite() {
        return None;
    }
    y.iter_mut().for_each(|v| *v /= s);
    y.iter().all(|&v| v > T::zero()).then_some(y)
}

/// Spectral radius of a nonnegative matrix.
pub fn spectral_radius<T: Real>(a: &NonnegMatrix<T>) -> Result<T> {
    spectral_radius_with(a, &PowerOptions::default())
}

pub fn spectral_radius_with<T: Real>(a: &NonnegMatrix<T>, opts: &PowerOptions<T>) -> Result<T> {
    let m = a.matrix();
    let mut rho = T::zero();
    for comp in strong_components(m) {
        let r = if comp.len() == 1 {
            m[(comp[0], comp[0])]
        } else {
            dominant(&m.principal_submatrix(&comp), false, opts)?.0
        };
        rho = rho.max(r);
    }
    Ok(rho)
}

/// Perron root with right and left Perron vectors, normalized so that
/// `right ∘ left` is a probability vector and `right` sums to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerronPair<T> {
    pub rho: T,
    pub right: Vec<T>,
    pub left: Vec<T>,
}

impl<T: Real> PerronPair<T> {
    /// `x ∘ y`, the Perron product vector.
    pub fn weights(&self) -> Vec<T> {
        self.right.iter().zip(&self.left).map(|(&x, &y)| x * y).collect()
    }

    /// `(‖Ax − ρx‖∞, ‖yᵀA − ρyᵀ‖∞)` against `a`.
    pub fn residuals(&self, a: &Matrix<T>) -> (T, T) {
        let ax = a.mul_vec(&self.right);
        let ya = a.tmul_vec(&self.left);
        let r = ax
            .iter()
            .zip(&self.right)
            .map(|(&v, &x)| (v - self.rho * x).abs())
            .fold(T::zero(), T::max);
        let l = ya
            .iter()
            .zip(&self.left)
            .map(|(&v, &y)| (v - self.rho * y).abs())
            .fold(T::zero(), T::max);
        (r, l)
    }
}

/// Perron pair of an irreducible nonnegative matrix.
pub fn perron_pair<T: Real>(a: &NonnegMatrix<T>) -> Result<PerronPair<T>> {
    perron_pair_with(a, &PowerOptions::default())
}

pub fn perron_pair_with<T: Real>(a: &NonnegMatrix<T>, opts: &PowerOptions<T>) -> Result<PerronPair<T>> {
    let m = a.matrix();
    if m.rows() == 1 {
        let rho = m[(0, 0)];
        if rho == T::zero() {
            return Err(Error::Degenerate("1x1 zero matrix has no positive Perron root".into()));
        }
        return Ok(PerronPair {
            rho,
            right: vec![T::one()],
            left: vec![T::one()],
        });
    }
    let comps = strong_components(m);
    if comps.len() > 1 {
        return Err(Error::Reducible {
            components: comps.len(),
        });
    }
    let (rho, right) = dominant(m, false, opts)?;
    let (_, mut left) = dominant(m, true, opts)?;
    let s = dot(&right, &left);
    left.iter_mut().for_each(|y| *y /= s);
    Ok(PerronPair { rho, right, left })
}

/// `ρ(A) Π γ_l^{(x∘y)_l}`, a lower bound on `ρ(diag(γ) A)`.
pub fn fk_scaling_lower_bound<T: Real>(a: &NonnegMatrix<T>, gamma: &[T]) -> Result<T> {
    check_len(gamma.len(), a.order(), "gamma")?;
    if let Some(g) = gamma.iter().find(|g| !(**g >= T::zero())) {
        return Err(Error::InputDomain(format!("gamma entry {g} is negative")));
    }
    let pair = perron_pair(a)?;
    let w = pair.weights();
    if gamma.iter().zip(&w).any(|(&g, &wl)| g == T::zero() && wl > T::zero()) {
        return Ok(T::zero());
    }
    let log_prod: T = gamma.iter().zip(&w).map(|(&g, &wl)| wl * g.ln()).sum();
    Ok(pair.rho * log_prod.exp())
}

/// Result of the z-form upper bound on the Perron root.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZBound<T> {
    /// `Π ((Az)_l / z_l)^{(x∘y)_l}`; `+∞` when some `(Az)_l` vanishes.
    pub value: T,
    pub rho: T,
    /// Bound attained within relative tolerance `1e-8`.
    pub equality: bool,
}

/// `Π ((Az)_l / z_l)^{(x∘y)_l} >= ρ(A)` for positive `z`.
pub fn fk_z_upper_bound<T: Real>(a: &NonnegMatrix<T>, z: &[T]) -> Result<ZBound<T>> {
    check_len(z.len(), a.order(), "z")?;
    if let Some(v) = z.iter().find(|v| !(**v > T::zero())) {
        return Err(Error::InputDomain(format!("z entry {v} is not positive")));
    }
    let pair = perron_pair(a)?;
    let w = pair.weights();
    let az = a.matrix().mul_vec(z);
    let value = if az.iter().any(|&v| v == T::zero()) {
        T::infinity()
    } else {
        let s: T = az.iter().zip(z).zip(&w).map(|((&n, &d), &wl)| wl * (n / d).ln()).sum();
        s.exp()
    };
    let equality = (value - pair.rho).abs() <= T::tol(1e-8, 64.0) * pair.rho;
    Ok(ZBound {
        value,
        rho: pair.rho,
        equality,
    })
}

/// `H(ξ) = Σ normal_l (ξ_l − anchor_l)`; the half-space `H <= 0` supports
/// `{ξ : log ρ(diag(e^ξ) B) <= 0}` at the anchor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane<T> {
    pub normal: Vec<T>,
    pub anchor: Vec<T>,
}

impl<T: Real> Hyperplane<T> {
    pub fn evaluate(&self, xi: &[T]) -> T {
        self.normal
            .iter()
            .zip(xi.iter().zip(&self.anchor))
            .map(|(&n, (&x, &e))| n * (x - e))
            .sum()
    }

    /// Right-hand side of `normal · ξ <= offset`.
    pub fn offset(&self) -> T {
        dot(&self.normal, &self.anchor)
    }
}

/// Anchor tolerance for [`supporting_hyperplane`].
pub const ANCHOR_TOL: f64 = 1e-8;

/// The supporting hyperplane of `log ρ(diag(e^ξ) B) <= 0` at `eta`.
pub fn supporting_hyperplane<T: Real>(b: &NonnegMatrix<T>, eta: &[T]) -> Result<Hyperplane<T>> {
    check_len(eta.len(), b.order(), "anchor")?;
    let scale: Vec<T> = eta.iter().map(|e| e.exp()).collect();
    let a = b.scale_rows(&scale)?;
    let pair = perron_pair(&a)?;
    if (pair.rho - T::one()).abs() > T::tol(ANCHOR_TOL, 64.0) {
        return Err(Error::OffLevelSet {
            radius: pair.rho.as_f64(),
        });
    }
    let mut normal = pair.weights();
    let s: T = normal.iter().copied().sum();
    normal.iter_mut().for_each(|n| *n /= s);
    Ok(Hyperplane {
        normal,
        anchor: eta.to_vec(),
    })
}

/// Diagonals of `D1`, `D2` with `D1 A D2 u = u` and `vᵀ D1 A D2 = vᵀ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPair<T> {
    pub d1: Vec<T>,
    pub d2: Vec<T>,
}

impl<T: Real> ScalingPair<T> {
    /// `(‖D1AD2u − u‖∞, ‖vᵀD1AD2 − vᵀ‖∞)`.
    pub fn residuals(&self, a: &Matrix<T>, u: &[T], v: &[T]) -> (T, T) {
        let c = a.scale_rows(&self.d1).scale_cols(&self.d2);
        let cu = c.mul_vec(u);
        let vc = c.tmul_vec(v);
        (crate::real::max_abs_diff(&cu, u), crate::real::max_abs_diff(&vc, v))
    }
}

/// Alternating-scaling controls.
#[derive(Clone, Debug)]
pub struct ScalingOptions<T> {
    /// Stop when both defining equations hold to this ∞-norm residual.
    pub tol: T,
    pub max_sweeps: usize,
    /// Starting column scaling (defaults to all ones).
    pub initial: Option<Vec<T>>,
}

impl<T: Real> Default for ScalingOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::tol(1e-10, 256.0),
            max_sweeps: 10_000,
            initial: None,
        }
    }
}

/// Slack used when testing the majorization condition at zero-diagonal rows.
pub const MAJORIZATION_SLACK: f64 = 1e-12;

/// Checks that a scaling with prescribed products `w` can exist for `a`.
///
/// Positive-diagonal irreducible matrices always admit one. A zero diagonal
/// entry at `l` requires positive off-diagonal entries and
/// `Σ_{j≠l} w_j > w_l`; exact ties are let through with a warning since
/// the two-user zero-diagonal case with equal weights is solvable.
pub fn check_scalable<T: Real>(a: &NonnegMatrix<T>, w: &[T]) -> Result<()> {
    scalable_boundary(a, w).map(|_| ())
}

/// [`check_scalable`], also returning a zero-diagonal index where the
/// condition holds only with equality.
fn scalable_boundary<T: Real>(a: &NonnegMatrix<T>, w: &[T]) -> Result<Option<(usize, T)>> {
    let m = a.matrix();
    let n = a.order();
    if !a.is_irreducible() {
        return Err(Error::Reducible {
            components: a.components().len(),
        });
    }
    let zero_diag: Vec<usize> = (0..n).filter(|&l| m[(l, l)] == T::zero()).collect();
    if zero_diag.is_empty() {
        return Ok(None);
    }
    let off_positive = (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] > T::zero()));
    if !off_positive {
        return Err(Error::InputDomain(
            "zero diagonal entries require positive off-diagonal entries".into(),
        ));
    }
    let total: T = w.iter().copied().sum();
    let slack = T::tol(MAJORIZATION_SLACK, 16.0);
    let mut boundary = None;
    for &l in &zero_diag {
        let wl = w[l] / total;
        let rest = T::one() - wl;
        if wl > rest + slack {
            return Err(Error::Majorization {
                index: l,
                weight: wl.as_f64(),
                rest: rest.as_f64(),
            });
        }
        if wl >= rest - slack {
            log::warn!("majorization holds only with equality at index {l} (w = {wl}); scaling may not converge");
            boundary.get_or_insert((l, wl));
        }
    }
    Ok(boundary)
}

pub fn diagonal_scaling<T: Real>(a: &NonnegMatrix<T>, u: &[T], v: &[T]) -> Result<ScalingPair<T>> {
    diagonal_scaling_with(a, u, v, &ScalingOptions::default())
}

/// Finds positive diagonals `d1`, `d2` such that `D1 A D2 u = u` and
/// `vᵀ D1 A D2 = vᵀ` by alternating row and column rescaling. The
/// `(t d1, d2 / t)` freedom is fixed by `max(d1) = max(d2)`.
pub fn diagonal_scaling_with<T: Real>(
    a: &NonnegMatrix<T>,
    u: &[T],
    v: &[T],
    opts: &ScalingOptions<T>,
) -> Result<ScalingPair<T>> {
    let n = a.order();
    check_len(u.len(), n, "u")?;
    check_len(v.len(), n, "v")?;
    for (name, vec) in [("u", u), ("v", v)] {
        if let Some(x) = vec.iter().find(|x| !(**x > T::zero()) || !x.is_finite()) {
            return Err(Error::InputDomain(format!("{name} entry {x} is not positive")));
        }
    }
    let w: Vec<T> = u.iter().zip(v).map(|(&a, &b)| a * b).collect();
    let boundary = scalable_boundary(a, &w)?;

    let m = a.matrix();
    let mut g = match &opts.initial {
        Some(g0) => {
            check_len(g0.len(), n, "initial scaling")?;
            if g0.iter().any(|x| !(*x > T::zero())) {
                return Err(Error::InputDomain("initial scaling must be positive".into()));
            }
            g0.clone()
        }
        None => vec![T::one(); n],
    };
    let mut f = vec![T::one(); n];
    let mut residual = T::infinity();
    let mut converged = false;
    for _ in 0..opts.max_sweeps {
        let gu: Vec<T> = g.iter().zip(u).map(|(&x, &y)| x * y).collect();
        let agu = m.mul_vec(&gu);
        for i in 0..n {
            f[i] = u[i] / agu[i];
        }
        let vf: Vec<T> = v.iter().zip(&f).map(|(&x, &y)| x * y).collect();
        let atvf = m.tmul_vec(&vf);
        for j in 0..n {
            g[j] = v[j] / atvf[j];
        }
        let gu: Vec<T> = g.iter().zip(u).map(|(&x, &y)| x * y).collect();
        let agu = m.mul_vec(&gu);
        residual = (0..n).map(|i| (f[i] * agu[i] - u[i]).abs()).fold(T::zero(), T::max);
        if !residual.is_finite() || f.iter().chain(&g).any(|x| !x.is_finite() || *x <= T::zero()) {
            break;
        }
        if residual <= opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        if let Some((index, weight)) = boundary {
            return Err(Error::MajorizationBoundary {
                index,
                weight: weight.as_f64(),
            });
        }
        return Err(Error::Convergence {
            what: "diagonal scaling",
            iterations: opts.max_sweeps,
            residual: residual.as_f64(),
        });
    }
    let fmax = f.iter().copied().fold(T::zero(), T::max);
    let gmax = g.iter().copied().fold(T::zero(), T::max);
    let t = (gmax / fmax).sqrt();
    f.iter_mut().for_each(|x| *x *= t);
    g.iter_mut().for_each(|x| *x /= t);
    Ok(ScalingPair { d1: f, d2: g })
}

pub fn inverse_weight<T: Real>(b: &NonnegMatrix<T>, w: &[T]) -> Result<Vec<T>> {
    inverse_weight_with(b, w, &ScalingOptions::default())
}

/// Solves for `η` with `x(A) ∘ y(A) = w` and `ρ(A) = 1`, where
/// `A = diag(e^η) B`.
pub fn inverse_weight_with<T: Real>(b: &NonnegMatrix<T>, w: &[T], opts: &ScalingOptions<T>) -> Result<Vec<T>> {
    let n = b.order();
    check_len(w.len(), n, "weights")?;
    if w.iter().any(|x| !(*x > T::zero())) {
        return Err(Error::InputDomain("weights must be positive".into()));
    }
    let total: T = w.iter().copied().sum();
    if (total - T::one()).abs() > T::tol(1e-9, 64.0) {
        return Err(Error::InputDomain(format!("weights sum to {total}, expected 1")));
    }
    let ones = vec![T::one(); n];
    // D1 B D2 has right fixed vector 1 and left fixed vector w, so
    // D2 D1 B = D2 (D1 B D2) D2⁻¹ has Perron products w and radius 1.
    let pair = diagonal_scaling_with(b, &ones, w, opts)?;
    let mut eta: Vec<T> = pair.d1.iter().zip(&pair.d2).map(|(&f, &g)| (f * g).ln()).collect();
    let scale: Vec<T> = eta.iter().map(|e| e.exp()).collect();
    let rho = spectral_radius(&b.scale_rows(&scale)?)?;
    let shift = rho.ln();
    eta.iter_mut().for_each(|e| *e -= shift);
    Ok(eta)
}

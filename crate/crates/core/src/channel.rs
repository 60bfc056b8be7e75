//! Channel instances and the maps between powers and SIRs.
//!
//! A [`DerivedMatrices`] value is the normalized problem every solver works
//! on: the interference matrix `F`, the effective noise `v`, objective
//! weights, and a list of power budgets. Each budget caps the total power
//! of a group of slots. A single-tone channel has one singleton group per
//! user, which turns the feasible set into the box `[0, p̄]`; the multi-tone
//! stacking in [`crate::multitone`] groups one user's tones together.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::real::Real;
use crate::spectral::{spectral_radius, NonnegMatrix};

/// Radius at or below `1 + REGION_TOL` counts as inside the achievable region.
pub const REGION_TOL: f64 = 1e-9;
/// Radius within `ACTIVE_TOL` of one marks a budget as active.
pub const ACTIVE_TOL: f64 = 1e-8;

/// A single-tone Gaussian interference channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelInstance<T> {
    /// `gains[(l, j)]`: linear power gain from transmitter `j` to receiver `l`.
    pub gains: Matrix<T>,
    pub noise: Vec<T>,
    pub caps: Vec<T>,
    pub weights: Vec<T>,
    /// SNR gap to capacity (>= 1), folded into the direct gains.
    pub snr_gap: T,
}

impl<T: Real> ChannelInstance<T> {
    pub fn new(gains: Matrix<T>, noise: Vec<T>, caps: Vec<T>, weights: Vec<T>, snr_gap: T) -> Result<Self> {
        let inst = Self {
            gains,
            noise,
            caps,
            weights,
            snr_gap,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Instance with uniform weights and no SNR gap.
    pub fn uniform(gains: Matrix<T>, noise: Vec<T>, caps: Vec<T>) -> Result<Self> {
        let n = gains.rows();
        let w = vec![T::one() / T::lit(n.max(1) as f64); n];
        Self::new(gains, noise, caps, w, T::one())
    }

    pub fn users(&self) -> usize {
        self.gains.rows()
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.gains.rows();
        if !self.gains.is_square() {
            return Err(Error::InputDomain("gain matrix must be square".into()));
        }
        if l < 2 {
            return Err(Error::InputDomain(
                "at least two users are needed for an interference channel".into(),
            ));
        }
        if self
            .gains
            .as_slice()
            .iter()
            .any(|g| !(*g > T::zero()) || !g.is_finite())
        {
            return Err(Error::InputDomain("gains must be positive and finite".into()));
        }
        check_positive(&self.noise, l, "noise")?;
        check_positive(&self.caps, l, "caps")?;
        check_weights(&self.weights, l)?;
        if !(self.snr_gap >= T::one()) {
            return Err(Error::InputDomain(format!("snr gap {} must be >= 1", self.snr_gap)));
        }
        Ok(())
    }

    pub fn derive(&self) -> Result<DerivedMatrices<T>> {
        self.validate()?;
        let l = self.users();
        let direct: Vec<T> = (0..l).map(|i| self.gains[(i, i)] / self.snr_gap).collect();
        let f = Matrix::from_fn(l, l, |i, j| {
            if i == j {
                T::zero()
            } else {
                self.gains[(i, j)] / direct[i]
            }
        });
        let v: Vec<T> = (0..l).map(|i| self.noise[i] / direct[i]).collect();
        let budgets = (0..l)
            .map(|i| Budget {
                slots: vec![i],
                cap: self.caps[i],
            })
            .collect();
        DerivedMatrices::assemble(f, v, budgets, self.weights.clone())
    }
}

pub(crate) fn check_positive<T: Real>(x: &[T], n: usize, name: &str) -> Result<()> {
    if x.len() != n {
        return Err(Error::InputDomain(format!(
            "{name} has length {}, expected {n}",
            x.len()
        )));
    }
    if let Some(v) = x.iter().find(|v| !(**v > T::zero()) || !v.is_finite()) {
        return Err(Error::InputDomain(format!("{name} entry {v} must be positive")));
    }
    Ok(())
}

pub(crate) fn check_weights<T: Real>(w: &[T], n: usize) -> Result<()> {
    if w.len() != n {
        return Err(Error::InputDomain(format!(
            "weights have length {}, expected {n}",
            w.len()
        )));
    }
    if w.iter().any(|x| !(*x >= T::zero()) || !x.is_finite()) {
        return Err(Error::InputDomain("weights must be nonnegative".into()));
    }
    let s: T = w.iter().copied().sum();
    if (s - T::one()).abs() > T::tol(1e-9, 64.0) {
        return Err(Error::InputDomain(format!("weights sum to {s}, expected 1")));
    }
    Ok(())
}

/// A cap on the total power of a group of slots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget<T> {
    pub slots: Vec<usize>,
    pub cap: T,
}

/// Matrices derived from an instance, with the SNR gap already absorbed.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedMatrices<T> {
    /// Zero-diagonal normalized cross gains.
    pub f: NonnegMatrix<T>,
    /// Noise over direct gain.
    pub v: Vec<T>,
    /// `F` plus `v_l / cap_l` on the diagonal.
    pub f_tilde: NonnegMatrix<T>,
    /// One constraint matrix per budget: `F + (1/cap) v 1_Sᵀ`.
    pub constraints: Vec<NonnegMatrix<T>>,
    /// Per-slot SIR ceiling `cap / v`.
    pub gamma_bar: Vec<T>,
    pub budgets: Vec<Budget<T>>,
    pub weights: Vec<T>,
    slot_budget: Vec<usize>,
}

/// Membership of an SIR vector in the achievable region.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionCheck<T> {
    pub inside: bool,
    /// Budgets whose radius equals one (those spent in full).
    pub active: Vec<usize>,
    /// `ρ(diag(γ) B_g)` per budget.
    pub radii: Vec<T>,
}

impl<T: Real> DerivedMatrices<T> {
    pub(crate) fn assemble(f: Matrix<T>, v: Vec<T>, budgets: Vec<Budget<T>>, weights: Vec<T>) -> Result<Self> {
        let n = f.rows();
        if !f.is_square() || v.len() != n {
            return Err(Error::InputDomain("dimension mismatch between F and v".into()));
        }
        if f.diagonal().iter().any(|d| *d != T::zero()) {
            return Err(Error::InputDomain(
                "interference matrix must have a zero diagonal".into(),
            ));
        }
        check_positive(&v, n, "v")?;
        check_weights(&weights, n)?;
        let mut slot_budget = vec![usize::MAX; n];
        for (g, b) in budgets.iter().enumerate() {
            if !(b.cap > T::zero()) || !b.cap.is_finite() {
                return Err(Error::InputDomain(format!("budget {g} must be positive")));
            }
            for &s in &b.slots {
                if s >= n || slot_budget[s] != usize::MAX {
                    return Err(Error::InputDomain(format!(
                        "slot {s} is out of range or in two budgets"
                    )));
                }
                slot_budget[s] = g;
            }
        }
        if slot_budget.contains(&usize::MAX) {
            return Err(Error::InputDomain("every slot needs a budget".into()));
        }
        let f = NonnegMatrix::new(f)?;
        let caps: Vec<T> = slot_budget.iter().map(|&g| budgets[g].cap).collect();
        let mut ft = f.matrix().clone();
        for i in 0..n {
            ft[(i, i)] = v[i] / caps[i];
        }
        let constraints = budgets
            .iter()
            .map(|b| {
                let mut m = f.matrix().clone();
                for i in 0..n {
                    for &j in &b.slots {
                        m[(i, j)] += v[i] / b.cap;
                    }
                }
                NonnegMatrix::new(m)
            })
            .collect::<Result<Vec<_>>>()?;
        let gamma_bar = caps.iter().zip(&v).map(|(&c, &vi)| c / vi).collect();
        Ok(Self {
            f,
            v,
            f_tilde: NonnegMatrix::new(ft)?,
            constraints,
            gamma_bar,
            budgets,
            weights,
            slot_budget,
        })
    }

    /// Number of power slots (users times tones).
    pub fn dim(&self) -> usize {
        self.v.len()
    }

    /// True when every budget covers a single slot, i.e. the feasible set is a box.
    pub fn is_box(&self) -> bool {
        self.budgets.iter().all(|b| b.slots.len() == 1)
    }

    pub fn budget_of(&self, slot: usize) -> usize {
        self.slot_budget[slot]
    }

    /// Per-slot upper bound (the budget of the slot's group).
    pub fn slot_caps(&self) -> Vec<T> {
        self.slot_budget.iter().map(|&g| self.budgets[g].cap).collect()
    }

    /// Copy of these matrices with different objective weights.
    pub fn with_weights(&self, weights: Vec<T>) -> Result<Self> {
        check_weights(&weights, self.dim())?;
        Ok(Self {
            weights,
            ..self.clone()
        })
    }

    fn check_power(&self, p: &[T]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::InputDomain(format!(
                "power vector has length {}, expected {}",
                p.len(),
                self.dim()
            )));
        }
        if let Some(x) = p.iter().find(|x| !(**x >= T::zero()) || !x.is_finite()) {
            return Err(Error::InputDomain(format!("power entry {x} must be nonnegative")));
        }
        Ok(())
    }

    /// `γ(p) = p ∘ (Fp + v)⁻¹`.
    pub fn sir_of_power(&self, p: &[T]) -> Result<Vec<T>> {
        self.check_power(p)?;
        Ok(self.sir_unchecked(p))
    }

    pub(crate) fn sir_unchecked(&self, p: &[T]) -> Vec<T> {
        let fp = self.f.matrix().mul_vec(p);
        p.iter()
            .zip(fp.iter().zip(&self.v))
            .map(|(&pi, (&x, &vi))| pi / (x + vi))
            .collect()
    }

    /// `P(γ) = (I − diag(γ)F)⁻¹ diag(γ) v`, defined when `ρ(diag(γ)F) < 1`.
    pub fn power_of_sir(&self, gamma: &[T]) -> Result<Vec<T>> {
        let n = self.dim();
        if gamma.len() != n {
            return Err(Error::InputDomain(format!(
                "SIR vector has length {}, expected {n}",
                gamma.len()
            )));
        }
        if let Some(g) = gamma.iter().find(|g| !(**g >= T::zero()) || !g.is_finite()) {
            return Err(Error::InputDomain(format!("SIR entry {g} must be nonnegative")));
        }
        let gf = self.f.matrix().scale_rows(gamma);
        let system = Matrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() } - gf[(i, j)]);
        let rhs: Vec<T> = gamma.iter().zip(&self.v).map(|(&g, &vi)| g * vi).collect();
        // I − A is a nonsingular M-matrix exactly when ρ(A) < 1, and then the
        // solution is positive wherever the right-hand side is.
        let solved = Lu::factor(&system).and_then(|lu| lu.solve(&rhs));
        let ok = match &solved {
            Ok(p) => p
                .iter()
                .zip(gamma)
                .all(|(&pi, &g)| pi.is_finite() && (g == T::zero() || pi > T::zero())),
            Err(_) => false,
        };
        if !ok {
            let radius = spectral_radius(&NonnegMatrix::new(gf)?)?;
            if radius >= T::one() {
                return Err(Error::InfeasibleSir {
                    radius: radius.as_f64(),
                });
            }
            return Err(Error::Degenerate(format!(
                "ill-conditioned inverse map at radius {radius}"
            )));
        }
        let mut p = solved?;
        for (pi, &g) in p.iter_mut().zip(gamma) {
            if g == T::zero() {
                *pi = T::zero();
            }
        }
        Ok(p)
    }

    /// `ρ(diag(γ) B_g)` for every budget `g`.
    pub fn constraint_radii(&self, gamma: &[T]) -> Result<Vec<T>> {
        self.constraints
            .iter()
            .map(|b| spectral_radius(&b.scale_rows(gamma)?))
            .collect()
    }

    /// Whether `γ` is the SIR image of a feasible power vector.
    pub fn in_achievable_region(&self, gamma: &[T]) -> Result<RegionCheck<T>> {
        if gamma.len() != self.dim() || gamma.iter().any(|g| !(*g >= T::zero())) {
            return Err(Error::InputDomain(
                "SIR vector must be nonnegative with matching length".into(),
            ));
        }
        let radii = self.constraint_radii(gamma)?;
        let inside = radii.iter().all(|&r| r <= T::one() + T::tol(REGION_TOL, 64.0));
        let active = radii
            .iter()
            .enumerate()
            .filter(|(_, &r)| (r - T::one()).abs() <= T::tol(ACTIVE_TOL, 64.0))
            .map(|(g, _)| g)
            .collect();
        Ok(RegionCheck { inside, active, radii })
    }

    /// Noiseless SIR `β_l = p_l / (Fp)_l`.
    pub fn noiseless_sir(&self, p: &[T]) -> Result<Vec<T>> {
        self.check_power(p)?;
        if p.iter().all(|&x| x == T::zero()) {
            return Err(Error::Degenerate("noiseless SIR of the zero vector".into()));
        }
        let fp = self.f.matrix().mul_vec(p);
        if fp.iter().any(|&x| x == T::zero()) {
            return Err(Error::Degenerate(
                "empty interference sum; at least two interfering slots must carry power".into(),
            ));
        }
        Ok(p.iter().zip(&fp).map(|(&pi, &x)| pi / x).collect())
    }

    /// Weighted sum rate at power `p`.
    pub fn rate(&self, p: &[T]) -> Result<T> {
        Ok(objective(&self.weights, &self.sir_of_power(p)?))
    }

    /// Gradient of `Φ_w(γ(p))` with respect to `p`: `H(p)ᵀ (w ∘ (1+γ)⁻¹)`
    /// with `H(p) = diag((Fp+v)⁻¹)(I − diag(γ)F)`.
    pub fn objective_gradient_p(&self, p: &[T]) -> Result<Vec<T>> {
        self.check_power(p)?;
        Ok(self.gradient_unchecked(p))
    }

    pub(crate) fn gradient_unchecked(&self, p: &[T]) -> Vec<T> {
        let f = self.f.matrix();
        let fp = f.mul_vec(p);
        let d: Vec<T> = fp.iter().zip(&self.v).map(|(&x, &vi)| x + vi).collect();
        let gamma: Vec<T> = p.iter().zip(&d).map(|(&pi, &di)| pi / di).collect();
        let grad_phi: Vec<T> = self
            .weights
            .iter()
            .zip(&gamma)
            .map(|(&w, &g)| w / (T::one() + g))
            .collect();
        // (Hᵀ g)_j = g_j / d_j − Σ_i γ_i F_ij g_i / d_i
        let coupling: Vec<T> = (0..self.dim()).map(|i| gamma[i] * grad_phi[i] / d[i]).collect();
        let cross = f.tmul_vec(&coupling);
        (0..self.dim()).map(|j| grad_phi[j] / d[j] - cross[j]).collect()
    }

    /// Total power per budget.
    pub fn budget_usage(&self, p: &[T]) -> Vec<T> {
        self.budgets
            .iter()
            .map(|b| b.slots.iter().map(|&s| p[s]).sum())
            .collect()
    }

    /// Whether `p` is nonnegative and within every budget, up to relative `tol`.
    pub fn is_feasible_power(&self, p: &[T], tol: T) -> bool {
        p.len() == self.dim()
            && p.iter().all(|&x| x >= T::zero() && x.is_finite())
            && self
                .budget_usage(p)
                .iter()
                .zip(&self.budgets)
                .all(|(&u, b)| u <= b.cap * (T::one() + tol))
    }

    /// Euclidean projection onto the feasible power set. For box problems
    /// this is the componentwise clamp to `[0, p̄]`.
    pub fn project_power(&self, p: &[T]) -> Vec<T> {
        let mut out: Vec<T> = p.iter().map(|&x| if x > T::zero() { x } else { T::zero() }).collect();
        for b in &self.budgets {
            let vals: Vec<T> = b.slots.iter().map(|&s| out[s]).collect();
            let proj = project_capped_simplex(&vals, b.cap);
            for (&s, x) in b.slots.iter().zip(proj) {
                out[s] = x;
            }
        }
        out
    }
}

/// Projection of a nonnegative vector onto `{x >= 0, Σx <= cap}`.
fn project_capped_simplex<T: Real>(y: &[T], cap: T) -> Vec<T> {
    let total: T = y.iter().copied().sum();
    if total <= cap {
        return y.to_vec();
    }
    if y.len() == 1 {
        return vec![cap];
    }
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut acc = T::zero();
    let mut theta = T::zero();
    for (k, &s) in sorted.iter().enumerate() {
        acc += s;
        let t = (acc - cap) / T::lit((k + 1) as f64);
        if s - t > T::zero() {
            theta = t;
        }
    }
    y.iter()
        .map(|&x| if x > theta { x - theta } else { T::zero() })
        .collect()
}

/// `Φ_w(γ) = Σ w_l log(1 + γ_l)`, in nats.
pub fn objective<T: Real>(w: &[T], gamma: &[T]) -> T {
    w.iter().zip(gamma).map(|(&wl, &g)| wl * g.ln_1p()).sum()
}

/// `Σ w_l log γ_l`, defined for positive `γ`.
pub fn objective_log<T: Real>(w: &[T], gamma: &[T]) -> Result<T> {
    if let Some(g) = gamma.iter().find(|g| !(**g > T::zero())) {
        return Err(Error::InputDomain(format!(
            "log-SIR objective needs positive SIR, got {g}"
        )));
    }
    Ok(w.iter().zip(gamma).map(|(&wl, &g)| wl * g.ln()).sum())
}

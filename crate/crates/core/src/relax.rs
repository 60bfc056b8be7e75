//! Analytic bounds and the closed-form log-SIR relaxations.

use serde::{Deserialize, Serialize};

use crate::channel::{objective, objective_log, DerivedMatrices};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::spectral::{inverse_weight, perron_pair, spectral_radius, NonnegMatrix, PerronPair};

/// Tolerance on `|ρ(A*) − 1|` for a relaxation certificate.
pub const CERT_RADIUS_TOL: f64 = 1e-8;
/// Tolerance on `‖x∘y − w‖∞` for a relaxation certificate.
pub const CERT_WEIGHT_TOL: f64 = 1e-7;
/// Relative slack allowed when deciding that a lifted power fits its budgets.
pub const LIFT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport<T> {
    /// `max_g ρ(B_g)`.
    pub r: T,
    /// `Φ_w((1/R) 1)`, attained at a feasible SIR vector.
    pub lower: T,
    /// `Φ_w(γ̄)`.
    pub upper: T,
    /// Budget whose constraint matrix attains `R`.
    pub argmax: usize,
    /// `t x(B_argmax)` scaled down to fit every budget. Diagnostic only.
    pub candidate: Option<Vec<T>>,
}

/// Simple bracket on the optimal weighted sum rate.
pub fn objective_bounds<T: Real>(dm: &DerivedMatrices<T>) -> Result<BoundsReport<T>> {
    let radii = dm.constraints.iter().map(spectral_radius).collect::<Result<Vec<_>>>()?;
    let (argmax, r) = radii
        .iter()
        .copied()
        .enumerate()
        .fold((0, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
    if !(r > T::zero()) {
        return Err(Error::Degenerate("all constraint matrices have zero radius".into()));
    }
    let uniform = vec![T::one() / r; dm.dim()];
    let candidate = perron_pair(&dm.constraints[argmax]).ok().map(|pair| {
        let usage = dm.budget_usage(&pair.right);
        let t = dm
            .budgets
            .iter()
            .zip(&usage)
            .filter(|(_, &u)| u > T::zero())
            .map(|(b, &u)| b.cap / u)
            .fold(T::infinity(), T::min);
        pair.right.iter().map(|&x| x * t).collect()
    });
    Ok(BoundsReport {
        r,
        lower: objective(&dm.weights, &uniform),
        upper: objective(&dm.weights, &dm.gamma_bar),
        argmax,
        candidate,
    })
}

/// Which matrix bounds the relaxed SIR region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelaxMatrix {
    /// `F̃ = F + diag(v / p̄)`.
    Tilde,
    /// The zero-diagonal interference matrix `F`.
    Noiseless,
    /// The constraint matrix `B_g` of budget `g`.
    Cap(usize),
}

/// Perron pair of one irreducible diagonal block of `diag(γ*) M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockCertificate<T> {
    pub slots: Vec<usize>,
    pub pair: PerronPair<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxedSolution<T> {
    pub matrix: RelaxMatrix,
    pub gamma_star: Vec<T>,
    /// One certificate per strongly connected block of the relaxation
    /// matrix; a single entry for irreducible matrices.
    pub certificates: Vec<BlockCertificate<T>>,
    /// `Σ w log γ*`.
    pub relaxed_value: T,
    pub radius_residual: T,
    pub weight_residual: T,
    /// `P(γ*)` when it exists and fits every budget.
    pub lifted_power: Option<Vec<T>>,
    /// `Φ_w` at the lifted power.
    pub lifted_value: Option<T>,
}

impl<T: Real> RelaxedSolution<T> {
    pub fn certified(&self) -> bool {
        self.lifted_power.is_some()
    }
}

fn relaxation_matrix<T: Real>(dm: &DerivedMatrices<T>, which: RelaxMatrix) -> Result<&NonnegMatrix<T>> {
    match which {
        RelaxMatrix::Tilde => Ok(&dm.f_tilde),
        RelaxMatrix::Noiseless => Ok(&dm.f),
        RelaxMatrix::Cap(g) => dm
            .constraints
            .get(g)
            .ok_or_else(|| Error::InputDomain(format!("cap index {g} out of range (0..{})", dm.constraints.len()))),
    }
}

/// Maximizes `Σ w log γ` subject to `ρ(diag(γ) M) ≤ 1`.
///
/// The radius of a reducible `M` is the largest radius of its diagonal
/// blocks, so the problem splits into one inverse-weight problem per block
/// with the block's share of the weights.
pub fn relaxed_max<T: Real>(dm: &DerivedMatrices<T>, which: RelaxMatrix) -> Result<RelaxedSolution<T>> {
    let w = &dm.weights;
    if let Some(i) = w.iter().position(|x| !(*x > T::zero())) {
        return Err(Error::InputDomain(format!(
            "relaxations need positive weights; w[{i}] = {}",
            w[i]
        )));
    }
    let m = relaxation_matrix(dm, which)?;
    let n = dm.dim();
    let mut eta = vec![T::zero(); n];
    for comp in m.components() {
        if comp.len() == 1 {
            let i = comp[0];
            let d = m.matrix()[(i, i)];
            if d == T::zero() {
                return Err(Error::Degenerate(format!(
                    "slot {i} is unconstrained by the relaxation matrix"
                )));
            }
            eta[i] = -d.ln();
            continue;
        }
        let sub = NonnegMatrix::new(m.matrix().principal_submatrix(&comp))?;
        let share: T = comp.iter().map(|&i| w[i]).sum();
        let wc: Vec<T> = comp.iter().map(|&i| w[i] / share).collect();
        let block = inverse_weight(&sub, &wc).map_err(|e| match e {
            Error::Majorization { index, weight, rest } => Error::Majorization {
                index: comp[index],
                weight,
                rest,
            },
            other => other,
        })?;
        for (&i, e) in comp.iter().zip(block) {
            eta[i] = e;
        }
    }
    let gamma_star: Vec<T> = eta.iter().map(|e| e.exp()).collect();
    let (certificates, radius_residual, weight_residual) = certify(m, &gamma_star, w)?;
    if radius_residual > T::tol(CERT_RADIUS_TOL, 64.0) || weight_residual > T::tol(CERT_WEIGHT_TOL, 64.0) {
        return Err(Error::Convergence {
            what: "relaxation certificate",
            iterations: 0,
            residual: radius_residual.max(weight_residual).as_f64(),
        });
    }
    let relaxed_value = objective_log(w, &gamma_star)?;
    let (lifted_power, lifted_value) = match which {
        RelaxMatrix::Noiseless => (None, None),
        _ => lift(dm, &gamma_star),
    };
    Ok(RelaxedSolution {
        matrix: which,
        gamma_star,
        certificates,
        relaxed_value,
        radius_residual,
        weight_residual,
        lifted_power,
        lifted_value,
    })
}

/// Recomputes Perron pairs of every block of `diag(γ) M` and measures the
/// distance to radius one and to the prescribed block weights.
pub fn certify<T: Real>(m: &NonnegMatrix<T>, gamma: &[T], w: &[T]) -> Result<(Vec<BlockCertificate<T>>, T, T)> {
    let a = m.scale_rows(gamma)?;
    let mut certs = Vec::new();
    let (mut rr, mut wr) = (T::zero(), T::zero());
    for comp in a.components() {
        let sub = NonnegMatrix::new(a.matrix().principal_submatrix(&comp))?;
        let pair = perron_pair(&sub)?;
        let share: T = comp.iter().map(|&i| w[i]).sum();
        rr = rr.max((pair.rho - T::one()).abs());
        for (k, p) in pair.weights().into_iter().enumerate() {
            wr = wr.max((p - w[comp[k]] / share).abs());
        }
        certs.push(BlockCertificate { slots: comp, pair });
    }
    Ok((certs, rr, wr))
}

fn lift<T: Real>(dm: &DerivedMatrices<T>, gamma: &[T]) -> (Option<Vec<T>>, Option<T>) {
    let Ok(p) = dm.power_of_sir(gamma) else {
        return (None, None);
    };
    if !dm.is_feasible_power(&p, T::tol(LIFT_TOL, 64.0)) {
        return (None, None);
    }
    let p = dm.project_power(&p);
    let value = objective(&dm.weights, &dm.sir_unchecked(&p));
    (Some(p), Some(value))
}

/// Relaxation over `F̃`; its lift, when it fits the budgets, is a certified
/// maximizer of the log-SIR objective over the feasible powers.
pub fn relaxed_max_tilde<T: Real>(dm: &DerivedMatrices<T>) -> Result<RelaxedSolution<T>> {
    relaxed_max(dm, RelaxMatrix::Tilde)
}

/// Variant of the noiseless relaxation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiselessVariant {
    /// Zero-diagonal `F`; needs the majorization condition on the weights.
    Interference,
    /// `B_g` for a nominated budget `g`.
    Cap(usize),
    /// `B_g` for the budget with the largest constraint radius.
    CapAuto,
}

pub fn relaxed_max_noiseless<T: Real>(
    dm: &DerivedMatrices<T>,
    variant: NoiselessVariant,
) -> Result<RelaxedSolution<T>> {
    let which = match variant {
        NoiselessVariant::Interference => RelaxMatrix::Noiseless,
        NoiselessVariant::Cap(g) => RelaxMatrix::Cap(g),
        NoiselessVariant::CapAuto => RelaxMatrix::Cap(objective_bounds(dm)?.argmax),
    };
    relaxed_max(dm, which)
}

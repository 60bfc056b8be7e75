//! Report files written by every command.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::scenario::Algorithm;
use crate::channel::{objective, DerivedMatrices};
use crate::error::{Error, Result};
use crate::relax::{BoundsReport, RelaxedSolution};
use crate::solvers::{OracleObjective, OracleResult, SolverReport};

pub const REPORT_VERSION: &str = "sumrate-report/1";

/// Tolerance for [`ReportFile::verify`].
pub const VERIFY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Solve,
    Bounds,
    Relax,
    Oracle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub version: String,
    pub command: Command,
    /// SHA-256 of the canonical scenario.
    pub scenario_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<Algorithm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverReport<f64>>,
    pub bounds: BoundsReport<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relaxation: Option<RelaxedSolution<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleResult<f64>>,
    /// Oracle value minus the solver's value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_gap: Option<f64>,
    /// `ρ(diag(γ(p)) B_g)` per budget at the solver's power.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint_radii: Option<Vec<f64>>,
}

impl ReportFile {
    pub fn new(command: Command, scenario_hash: String, bounds: BoundsReport<f64>) -> Self {
        Self {
            version: REPORT_VERSION.to_string(),
            command,
            scenario_hash,
            algorithm: None,
            solver: None,
            bounds,
            relaxation: None,
            oracle: None,
            oracle_gap: None,
            constraint_radii: None,
        }
    }

    /// Recomputes every stored value that follows from a stored power and
    /// checks it to [`VERIFY_TOL`].
    pub fn verify(&self, dm: &DerivedMatrices<f64>) -> Result<()> {
        let close = |what: &str, stored: f64, fresh: f64| {
            if (stored - fresh).abs() <= VERIFY_TOL * (1.0 + fresh.abs()) {
                Ok(())
            } else {
                Err(Error::Precondition(format!(
                    "report {what} is {stored}, recomputed {fresh}"
                )))
            }
        };
        if let Some(s) = &self.solver {
            let sir = dm.sir_of_power(&s.power)?;
            close("objective", s.objective_value, objective(&dm.weights, &sir))?;
            if let Some(radii) = &self.constraint_radii {
                let fresh = dm.constraint_radii(&sir)?;
                if radii.len() != fresh.len() {
                    return Err(Error::Precondition("report has the wrong number of radii".into()));
                }
                for (r, f) in radii.iter().zip(fresh) {
                    close("constraint radius", *r, f)?;
                }
            }
        }
        if let Some(o) = &self.oracle {
            let sir = dm.sir_of_power(&o.best_power)?;
            let fresh = match o.objective {
                OracleObjective::Rate => objective(&dm.weights, &sir),
                OracleObjective::LogSir => dm.weights.iter().zip(&sir).map(|(w, g)| w * g.ln()).sum(),
            };
            close("oracle value", o.best_value, fresh)?;
        }
        if let Some(r) = &self.relaxation {
            if let (Some(p), Some(v)) = (&r.lifted_power, r.lifted_value) {
                close("lifted value", v, objective(&dm.weights, &dm.sir_of_power(p)?))?;
            }
        }
        Ok(())
    }
}

pub fn report_to_string(r: &ReportFile) -> Result<String> {
    let mut out = serde_json::to_string_pretty(r)?;
    out.push('\n');
    Ok(out)
}

pub fn save_report(r: &ReportFile, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, report_to_string(r)?)?;
    Ok(())
}

pub fn load_report(path: impl AsRef<Path>) -> Result<ReportFile> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

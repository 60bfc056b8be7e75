//! One function per command-line command.

use std::str::FromStr;

use super::report::{Command, ReportFile};
use super::scenario::{Algorithm, ScenarioFile};
use crate::error::{Error, Result};
use crate::relax::{objective_bounds, relaxed_max, relaxed_max_tilde, RelaxMatrix};
use crate::solvers::{
    build_polytope, oracle_grid, solve_gradient_multistart, solve_linearized_multistart, solve_lp_relax,
    GradientOptions, LinearizedOptions, OracleOptions, PolytopeOptions,
};

/// Slot count above which the cutting-plane solver gets slow.
const LINEARIZED_SLOTS: usize = 32;

impl FromStr for RelaxMatrix {
    type Err = Error;

    /// `tilde`, `noiseless` or `cap:<g>` with a zero-based budget index.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tilde" => Ok(Self::Tilde),
            "noiseless" => Ok(Self::Noiseless),
            _ => s
                .strip_prefix("cap:")
                .and_then(|g| g.parse().ok())
                .map(Self::Cap)
                .ok_or_else(|| {
                    Error::InputDomain(format!(
                        "unknown variant `{s}`; expected one of tilde, noiseless, cap:<index>"
                    ))
                }),
        }
    }
}

/// Runs a solver; `algorithm` overrides the scenario's choice.
pub fn run_solve(
    scenario: &ScenarioFile,
    algorithm: Option<Algorithm>,
    oracle: Option<&OracleOptions>,
) -> Result<ReportFile> {
    let sc = scenario.normalize()?;
    let dm = sc.derive()?;
    let set = &sc.solver;
    let algorithm = algorithm.unwrap_or(set.algorithm);
    let report = match algorithm {
        Algorithm::Gradient => {
            let mut opts = GradientOptions {
                kkt_tol: set.kkt_tol,
                starts: set.starts,
                seed: set.seed,
                ..Default::default()
            };
            if let Some(m) = set.max_iter {
                opts.max_iter = m;
            }
            solve_gradient_multistart(&dm, &opts)?
        }
        Algorithm::Linearized | Algorithm::Lp => {
            let poly = build_polytope(
                &dm,
                &PolytopeOptions {
                    k: set.k,
                    grid: set.grid.clone(),
                    ..Default::default()
                },
            )?;
            if algorithm == Algorithm::Lp {
                solve_lp_relax(&dm, &poly)?
            } else {
                let mut opts = LinearizedOptions {
                    kkt_tol: set.kkt_tol,
                    ..Default::default()
                };
                if let Some(m) = set.max_iter {
                    opts.max_iter = m;
                }
                if dm.dim() > LINEARIZED_SLOTS {
                    log::warn!(
                        "linearized solver on {} power slots; expect minutes per start, gradient is faster here",
                        dm.dim()
                    );
                }
                solve_linearized_multistart(&dm, &poly, &opts)?
            }
        }
    };
    let mut out = ReportFile::new(Command::Solve, sc.hash()?, report.bounds.clone());
    out.algorithm = Some(algorithm);
    out.constraint_radii = Some(dm.constraint_radii(&report.sir)?);
    // the certificate needs positive weights; leave it out otherwise
    out.relaxation = relaxed_max_tilde(&dm).ok();
    if let Some(o) = oracle {
        let res = oracle_grid(&dm, o)?;
        out.oracle_gap = Some(res.best_value - report.objective_value);
        out.oracle = Some(res);
    }
    out.solver = Some(report);
    Ok(out)
}

pub fn run_bounds(scenario: &ScenarioFile) -> Result<ReportFile> {
    let dm = scenario.derive()?;
    Ok(ReportFile::new(
        Command::Bounds,
        scenario.hash()?,
        objective_bounds(&dm)?,
    ))
}

pub fn run_relax(scenario: &ScenarioFile, which: RelaxMatrix) -> Result<ReportFile> {
    let dm = scenario.derive()?;
    let mut out = ReportFile::new(Command::Relax, scenario.hash()?, objective_bounds(&dm)?);
    out.relaxation = Some(relaxed_max(&dm, which)?);
    Ok(out)
}

pub fn run_oracle(scenario: &ScenarioFile, opts: &OracleOptions) -> Result<ReportFile> {
    let dm = scenario.derive()?;
    let mut out = ReportFile::new(Command::Oracle, scenario.hash()?, objective_bounds(&dm)?);
    out.oracle = Some(oracle_grid(&dm, opts)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::scenario::parse_scenario;

    fn e1() -> ScenarioFile {
        parse_scenario(
            r#"{"version": "sumrate-scenario/1", "users": 2, "gains": [[1, 0.1], [0.1, 1]],
                "noise": [0.1, 0.1], "caps": [1, 1]}"#,
        )
        .unwrap()
    }

    #[test]
    fn solve_all_algorithms_on_e1() {
        let sc = e1();
        let dm = sc.derive().unwrap();
        for a in [Algorithm::Gradient, Algorithm::Linearized, Algorithm::Lp] {
            let r = run_solve(&sc, Some(a), None).unwrap();
            let s = r.solver.as_ref().unwrap();
            assert!(s.objective_value >= r.bounds.lower - 1e-9, "{a}");
            r.verify(&dm).unwrap();
        }
        let r = run_solve(&sc, None, Some(&OracleOptions::default())).unwrap();
        assert!((r.solver.unwrap().objective_value - 6f64.ln()).abs() < 1e-9);
        assert!(r.oracle_gap.unwrap().abs() < 1e-12);
    }

    #[test]
    fn relax_variants_parse() {
        assert_eq!("cap:1".parse::<RelaxMatrix>().unwrap(), RelaxMatrix::Cap(1));
        assert!("cap:x".parse::<RelaxMatrix>().is_err());
        assert!("both"
            .parse::<RelaxMatrix>()
            .unwrap_err()
            .to_string()
            .contains("tilde, noiseless"));
    }

    #[test]
    fn tampered_report_fails_verification() {
        let sc = e1();
        let mut r = run_solve(&sc, None, None).unwrap();
        r.solver.as_mut().unwrap().objective_value += 1e-6;
        assert!(r.verify(&sc.derive().unwrap()).is_err());
    }
}

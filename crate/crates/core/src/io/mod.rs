//! Scenario and report files, the instance generator, and command drivers.

mod driver;
mod generate;
mod report;
mod scenario;

pub use driver::{run_bounds, run_oracle, run_relax, run_solve};
pub use generate::{generate_instance, GenParams};
pub use report::{load_report, report_to_string, save_report, Command, ReportFile, REPORT_VERSION, VERIFY_TOL};
pub use scenario::{
    load_scenario, parse_scenario, save_scenario, scenario_to_string, Algorithm, GainUnit, Gains, Model, Noise,
    NoiseUnit, ScenarioFile, SolverSettings, SCENARIO_VERSION,
};

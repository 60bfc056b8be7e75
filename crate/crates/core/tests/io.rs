mod common;

use approx::assert_abs_diff_eq;

use common::E1;
use sumrate::io::{
    generate_instance, load_report, load_scenario, parse_scenario, run_bounds, run_oracle, run_relax, run_solve,
    save_report, save_scenario, scenario_to_string, Algorithm, Command, Gains, GenParams, ScenarioFile,
};
use sumrate::solvers::OracleOptions;
use sumrate::{Error, RelaxMatrix};

fn e1() -> ScenarioFile {
    parse_scenario(E1).unwrap()
}

#[test]
fn e1_solves_to_full_power() {
    for alg in [Algorithm::Gradient, Algorithm::Linearized, Algorithm::Lp] {
        let r = run_solve(&e1(), Some(alg), None).unwrap();
        assert_eq!(r.command, Command::Solve);
        assert_eq!(r.algorithm, Some(alg));
        let s = r.solver.as_ref().unwrap();
        assert_abs_diff_eq!(s.objective_value, 6f64.ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(s.power[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.power[1], 1.0, epsilon = 1e-9);
        r.verify(&e1().derive().unwrap()).unwrap();
    }
}

#[test]
fn oracle_check_reports_gap() {
    let r = run_solve(&e1(), None, Some(&OracleOptions::default())).unwrap();
    assert!(r.oracle.is_some());
    assert!(r.oracle_gap.unwrap().abs() <= 1e-9);
    let radii = r.constraint_radii.unwrap();
    assert!(radii.iter().all(|&x| (x - 1.0).abs() <= 1e-9));
}

#[test]
fn bounds_relax_and_oracle_on_e1() {
    let b = run_bounds(&e1()).unwrap();
    assert_abs_diff_eq!(b.bounds.lower, 6f64.ln(), epsilon = 1e-12);
    assert_abs_diff_eq!(b.bounds.upper, 11f64.ln(), epsilon = 1e-12);
    let r = run_relax(&e1(), RelaxMatrix::Tilde).unwrap();
    assert_abs_diff_eq!(r.relaxation.unwrap().lifted_value.unwrap(), 6f64.ln(), epsilon = 1e-9);
    let o = run_oracle(&e1(), &OracleOptions::default()).unwrap();
    assert_abs_diff_eq!(o.oracle.unwrap().best_value, 6f64.ln(), epsilon = 1e-12);
}

#[test]
fn noiseless_relaxation_rejects_dominant_weight() {
    let sc = parse_scenario(include_str!("data/e1_skewed.json")).unwrap();
    let err = run_relax(&sc, RelaxMatrix::Noiseless).unwrap_err();
    assert!(err.is_infeasibility(), "{err}");
}

#[test]
fn report_survives_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let mut r = run_solve(&e1(), None, None).unwrap();
    save_report(&r, &path).unwrap();
    let back = load_report(&path).unwrap();
    // the step trace is not written out
    r.solver.as_mut().unwrap().trace.clear();
    assert_eq!(back, r);
    back.verify(&e1().derive().unwrap()).unwrap();
}

#[test]
fn tampered_report_fails_verification() {
    let mut r = run_solve(&e1(), None, None).unwrap();
    r.solver.as_mut().unwrap().objective_value += 1e-6;
    assert!(matches!(r.verify(&e1().derive().unwrap()), Err(Error::Precondition(_))));
}

#[test]
fn saved_scenario_is_normalized_and_stable() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let sc = e1();
    save_scenario(&sc, &path).unwrap();
    let once = load_scenario(&path).unwrap();
    assert_eq!(once.weights.as_deref(), Some(&[0.5, 0.5][..]));
    assert_eq!(once.hash().unwrap(), sc.hash().unwrap());
    save_scenario(&once, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, scenario_to_string(&once).unwrap());
    assert_eq!(load_scenario(&path).unwrap(), once);
}

#[test]
fn decibel_units_match_linear() {
    let db = parse_scenario(
        r#"{
          "version": "sumrate-scenario/1",
          "users": 2,
          "gains": [[0, -10], [-10, 0]],
          "gain_unit": "db",
          "noise": [20, 20],
          "noise_unit": "dbm",
          "caps": [1, 1]
        }"#,
    )
    .unwrap();
    let a = db.derive().unwrap();
    let b = e1().derive().unwrap();
    for (x, y) in a.v.iter().zip(&b.v) {
        assert_abs_diff_eq!(x, y, epsilon = 1e-12);
    }
    assert_abs_diff_eq!(a.f.matrix()[(0, 1)], 0.1, epsilon = 1e-12);
    let r = run_solve(&db, None, None).unwrap();
    assert_abs_diff_eq!(r.solver.unwrap().objective_value, 6f64.ln(), epsilon = 1e-9);
}

#[test]
fn hash_tracks_content_not_layout() {
    let sc = e1();
    let mut weighted = sc.clone();
    weighted.weights = Some(vec![0.5, 0.5]);
    assert_eq!(weighted.hash().unwrap(), sc.hash().unwrap());
    let mut reordered = sc.clone();
    reordered.tones = Some(1);
    if let Gains::Single(g) = &sc.gains {
        reordered.gains = Gains::Tones(vec![g.clone()]);
    }
    assert_eq!(reordered.hash().unwrap(), sc.hash().unwrap());
    let mut changed = sc.clone();
    changed.caps[0] = 2.0;
    assert_ne!(changed.hash().unwrap(), sc.hash().unwrap());
}

#[test]
fn multitone_scenario_round_trips() {
    let sc = generate_instance(3, 4, 9, &GenParams::default()).unwrap();
    let text = scenario_to_string(&sc).unwrap();
    let back = parse_scenario(&text).unwrap();
    assert_eq!(back, sc);
    assert_eq!(back.derive().unwrap().dim(), 12);
    let r = run_solve(&back, Some(Algorithm::Lp), None).unwrap();
    r.verify(&back.derive().unwrap()).unwrap();
}

#[test]
fn schema_errors_name_fields() {
    let bad = E1.replace("\"caps\": [1.0, 1.0]", "\"caps\": [1.0, -1.0]");
    let err = parse_scenario(&bad).and_then(|s| s.normalize()).unwrap_err();
    assert!(err.to_string().contains("caps[1]"), "{err}");
    let unknown = E1.replace("\"users\": 2,", "\"users\": 2, \"colour\": 1,");
    assert!(parse_scenario(&unknown).is_err());
    let dir = tempfile::tempdir().unwrap();
    assert!(load_scenario(dir.path().join("missing.json")).is_err());
}

//! Residual minimization on solvable systems, where a true solution lies in
//! the ansatz span.

mod common;

use common::scalars;
use fermat_pdde::search::CONTROL_THRESHOLD;
use fermat_pdde::{minimize, nonexistence_probe, AnsatzSpec, ProbeOptions, SearchError, SystemSpec};

#[test]
fn exponential_case_is_rediscovered() {
    let spec = SystemSpec::new(2, (1, 1, 1, 1), scalars(&["i*pi", "0"]));
    let report = minimize(&spec, &AnsatzSpec::new(2, 1, 1), 12, 0).unwrap();
    assert!(report.best_residual < 1e-6, "{}", report.best_residual);
}

#[test]
fn sine_case_is_rediscovered() {
    let spec = SystemSpec::new(2, (2, 2, 2, 2), scalars(&["2*pi", "0"]));
    let report = minimize(&spec, &AnsatzSpec::new(2, 1, 1), 12, 0).unwrap();
    assert!(report.best_residual < 1e-6, "{}", report.best_residual);
}

#[test]
fn enlarging_the_ansatz_keeps_solvable_cases_solved() {
    let spec = SystemSpec::new(2, (2, 2, 2, 2), scalars(&["2*pi", "0"]));
    let mut previous = f64::INFINITY;
    for (degree, bound) in [(1, 1), (2, 1), (2, 2)] {
        let r = minimize(&spec, &AnsatzSpec::new(2, degree, bound), 8, 3).unwrap().best_residual;
        // values below the control threshold are solver noise around zero
        assert!(r <= previous.max(CONTROL_THRESHOLD), "({degree}, {bound}): {r} after {previous}");
        previous = r;
    }
}

#[test]
fn probe_refuses_solvable_quadruples() {
    let err = nonexistence_probe([2, 2, 2, 2], &scalars(&["2*pi", "0"]), &ProbeOptions::default()).unwrap_err();
    assert!(matches!(err, SearchError::ClassifierMismatch(_)));
}

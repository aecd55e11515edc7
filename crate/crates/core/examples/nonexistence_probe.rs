//! A reduced non-existence probe for (2,2,2,1) at c = (2 pi, 0): each ladder
//! rung runs the probe and its (2,2,2,2) control. Evidence, not proof.

use fermat_pdde::{nonexistence_probe, parse_scalar, ProbeOptions, ShiftVector};

fn main() {
    let c = ShiftVector::new(vec![parse_scalar("2*pi").unwrap(), parse_scalar("0").unwrap()]);
    let opts = ProbeOptions {
        restarts: 12,
        seed: 0,
        ladder: vec![(1, 1), (2, 1)],
    };
    let report = nonexistence_probe([2, 2, 2, 1], &c, &opts).expect("(2,2,2,1) is a non-existence case");
    for rung in &report.rungs {
        println!(
            "degree {} bound {}: control {:.3e}, probe {:.3e}",
            rung.probe.ansatz.max_poly_degree, rung.probe.ansatz.freq_bound, rung.control.best_residual, rung.probe.best_residual
        );
    }
    println!(
        "probe floor {:.3e} (needs > {:.0e}), worst control {:.3e} (needs < {:.0e}): consistent = {}",
        report.residual_floor, report.evidence_threshold, report.control_worst, report.control_threshold, report.consistent
    );
}

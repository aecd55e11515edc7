//! Rediscover a sine pair for (2,2,2,2) at c = (2 pi, 0) by residual
//! minimization, and score a hand-written parameter vector directly.

use fermat_pdde::search::{sample_grid, Ansatz};
use fermat_pdde::{minimize, parse_scalar, residual_objective, AnsatzSpec, ShiftVector, SystemSpec};
use num_complex::Complex64;

fn main() {
    let c = ShiftVector::new(vec![parse_scalar("2*pi").unwrap(), parse_scalar("0").unwrap()]);
    let spec = SystemSpec::new(2, (2, 2, 2, 2), c);
    let ansatz_spec = AnsatzSpec::new(2, 1, 1);

    let report = minimize(&spec, &ansatz_spec, 12, 5).expect("valid shapes");
    println!(
        "best residual {:.3e} at restart {} with frequency {:?} in {:?}",
        report.best_residual, report.best_restart, report.best_frequency, report.wall_time
    );

    // f1 = f2 = sin(z1 + z2): coefficients -i/2 on exp(l.z) and i/2 on exp(-l.z)
    let ansatz = Ansatz::new(ansatz_spec.clone(), vec![Complex64::i(), Complex64::i()]);
    let n = ansatz_spec.coeffs_per_function();
    let first_exp = ansatz_spec.monomials().len();
    let mut params = vec![0.0; ansatz_spec.param_len()];
    for k in 0..2 {
        params[2 * (k * n + first_exp) + 1] = -0.5;
        params[2 * (k * n + first_exp + 1 + ansatz_spec.m) + 1] = 0.5;
    }
    let value = residual_objective(&spec, &ansatz, &params, &sample_grid(2)).unwrap();
    println!("objective at sin(z1 + z2): {value:.3e}");
}

//! Check the C^2 sine pair exactly, a perturbed pair with a witness, and the
//! quadratic pair numerically through a model of its opaque symbol.

use std::sync::Arc;

use fermat_pdde::{parse_expr, parse_scalar, Expr, NumericOptions, ShiftVector, SymbolRegistry, SystemSpec, Verifier};

fn main() {
    let registry = SymbolRegistry::new();
    let c = ShiftVector::new(vec![parse_scalar("2*pi").unwrap(), parse_scalar("0").unwrap()]);
    let spec = SystemSpec::new(2, (2, 2, 2, 2), c);
    let f1 = parse_expr("sin(z1 + z2 + z2^2)", 2, &registry).unwrap();
    let f2 = parse_expr("sin(z1 + z2 + z2^2 + pi)", 2, &registry).unwrap();
    let report = Verifier::default().verify_system(&spec, &f1, &f2).unwrap();
    println!("exact pair:\n{}", report.to_json());

    let bent = parse_expr("sin(z1 + z2 + z2^3 + pi)", 2, &registry).unwrap();
    let report = Verifier::default().verify_system(&spec, &f1, &bent).unwrap();
    println!("perturbed pair:\n{}", report.to_json());

    // sin(g) puts the symbol inside a transcendental function, which sends
    // the check to seeded sampling with g modeled as sin(z2 + z3); the radius
    // is kept small because sin(z1 + g) grows like exp(|Im g|) and the
    // tolerance is absolute
    let mut registry = SymbolRegistry::new();
    registry.declare("g", [2, 3]).unwrap();
    let shift = ["0", "pi", "pi"].map(|s| parse_scalar(s).unwrap()).to_vec();
    registry.add_rule("g", shift.clone(), parse_scalar("0").unwrap()).unwrap();
    registry.set_model("g", Arc::new(|z| (z[1] + z[2]).sin()));
    let spec = SystemSpec::new(3, (2, 2, 2, 2), ShiftVector::new(shift));
    let f = parse_expr("sin(z1 + g)", 3, &registry).unwrap();
    let minus = Expr::neg(f.clone());
    let options = NumericOptions {
        radius: 0.5,
        ..NumericOptions::default()
    };
    let report = Verifier::new(registry).with_options(options).verify_system(&spec, &f, &minus).unwrap();
    println!("numeric fallback:\n{}", report.to_json());
}

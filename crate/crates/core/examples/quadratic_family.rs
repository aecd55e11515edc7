//! The (2,1,2,1) pair with an opaque g, and what goes wrong when its shift
//! rule disagrees with the required increment.

use fermat_pdde::{
    build_quadratic_pair, parse_scalar, print_expr, validate_quadratic, QuadraticFamilySpec, ShiftVector, SymbolRegistry,
    Verifier,
};

fn spec_with_rule(adds: &str) -> (QuadraticFamilySpec, SymbolRegistry) {
    let s = |t: &str| parse_scalar(t).unwrap();
    let c = vec![s("1"), s("pi"), s("pi")];
    let mut registry = SymbolRegistry::new();
    registry.declare("g", [2, 3]).unwrap();
    registry.add_rule("g", c.clone(), s(adds)).unwrap();
    let spec = QuadraticFamilySpec {
        m: 3,
        k1: s("-1"),
        k2: s("-1"),
        g: registry.get("g").unwrap().clone(),
        c: ShiftVector::new(c),
    };
    (spec, registry)
}

fn main() {
    // with c1 = 1 and K1 = -1 the rule must add -K1 c1 / 2 = 1/2
    for adds in ["1/2", "0"] {
        let (spec, registry) = spec_with_rule(adds);
        println!("rule adds {adds}:");
        for check in validate_quadratic(&spec) {
            println!("  {check}");
        }
        if let Ok((f1, f2)) = build_quadratic_pair(&spec) {
            println!("  f1 = {}\n  f2 = {}", print_expr(&f1), print_expr(&f2));
            let report = Verifier::new(registry).verify_system(&spec.system(), &f1, &f2).unwrap();
            println!("  verdict: {:?}", report.verdict);
        }
    }
}

//! Validate and build sine pairs, listing admissible sign pairs first.

use fermat_pdde::{
    build_sine_pair, parse_expr, parse_scalar, print_expr, solve_admissible_ab, validate_sine, verify_system, ShiftVector,
    SineFamilySpec, SineVariant, SymbolRegistry,
};

fn main() {
    let s = |t: &str| parse_scalar(t).unwrap();
    let p = |t: &str| parse_expr(t, 3, &SymbolRegistry::new()).unwrap().to_poly().unwrap();
    let c = ShiftVector::new(vec![s("0"), s("1/2*pi"), s("1/2*pi")]);
    let coeffs = vec![s("1"), s("1")];
    for variant in [SineVariant::I, SineVariant::II] {
        println!("{variant:?}: admissible (A, B) = {:?}", solve_admissible_ab(3, &coeffs, &coeffs, &c, variant));
    }

    let spec = SineFamilySpec {
        m: 3,
        a: s("1"),
        b: s("1"),
        a_coeffs: coeffs.clone(),
        b_coeffs: coeffs,
        q1: p("(z2 - z3)^2"),
        q2: p("(z2 - z3)^2 + pi"),
        c,
        variant: SineVariant::I,
    };
    for check in validate_sine(&spec) {
        println!("  {check}");
    }
    let (f1, f2) = build_sine_pair(&spec).expect("constraints hold");
    println!("f1 = {}\nf2 = {}", print_expr(&f1), print_expr(&f2));
    println!("verdict: {:?}", verify_system(&spec.system(), &f1, &f2).unwrap().verdict);
}

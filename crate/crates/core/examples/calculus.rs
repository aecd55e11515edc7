//! Partial derivatives and shifts, including an opaque symbol with a rule.

use fermat_pdde::{parse_expr, parse_scalar, partial, print_expr, shift, ShiftVector, SymbolRegistry};

fn main() {
    let mut registry = SymbolRegistry::new();
    registry.declare("g", [2, 3]).expect("g does not depend on z1");
    let shift_pi = ["0", "pi", "pi"].map(|s| parse_scalar(s).expect("constant"));
    registry
        .add_rule("g", shift_pi.to_vec(), parse_scalar("0").expect("constant"))
        .expect("first rule");

    let f = parse_expr("1 - 1/4*z1^2 + z1*g - g^2", 3, &registry).expect("valid expression");
    let c = ShiftVector::new(shift_pi.to_vec());
    println!("f          = {}", print_expr(&f));
    println!("d f / d z1 = {}", print_expr(&partial(&f, 1).expect("z1 derivative exists")));
    println!("f(z + c)   = {}", print_expr(&shift(&f, &c).expect("the rule covers c")));
    match partial(&f, 2) {
        Ok(d) => println!("d f / d z2 = {}", print_expr(&d)),
        Err(e) => println!("d f / d z2: {e}"),
    }
}

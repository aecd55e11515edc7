//! Exponential-polynomial normal forms decide identities exactly.

use fermat_pdde::{parse_expr, to_nf, SymbolRegistry};

fn main() {
    let registry = SymbolRegistry::new();
    for text in [
        "sin(z1 + z2^2)^2 + cos(z1 + z2^2)^2 - 1",
        "sin(z1 + 2*pi) - sin(z1)",
        "exp(z1 + i*pi) + exp(z1)",
        "sin(2*z1) - 2*sin(z1)*cos(z1)",
        "sin(z1)^2 - 1/2",
    ] {
        let e = parse_expr(text, 2, &registry).expect("valid expression");
        let nf = to_nf(&e).expect("symbol-free expressions have a normal form");
        let verdict = if nf.is_zero() { "identically zero" } else { "non-zero" };
        println!("{text:45} {verdict:16} {} term(s)", nf.len());
    }
}

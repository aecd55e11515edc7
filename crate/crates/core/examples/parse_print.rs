//! Parse an expression, print its canonical form and parse that again.

use fermat_pdde::{parse_expr, print_expr, SymbolRegistry};

fn main() {
    let registry = SymbolRegistry::new();
    let source = "sin(z1 + z2 + z2^2) * 1/2*pi - exp(i*z1)^2";
    let e = parse_expr(source, 2, &registry).expect("valid expression");
    let printed = print_expr(&e);
    let again = parse_expr(&printed, 2, &registry).expect("canonical text reparses");
    println!("source    {source}");
    println!("canonical {printed}");
    println!("stable    {}", again == e);

    let bad = "sin(z1 + ) * 2";
    if let Err(err) = parse_expr(bad, 2, &registry) {
        println!("{}", err.render(bad));
    }
}

//! Helpers shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::sync::Arc;

use fermat_pdde::gen::{random_expr, ExprShape};
use fermat_pdde::{parse_scalar, Expr, OpaqueSymbol, ShiftVector, SymbolRegistry};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A point with every coordinate uniform in the disk of the given radius.
pub fn disk_point<R: Rng>(rng: &mut R, m: usize, radius: f64) -> Vec<Complex64> {
    (0..m)
        .map(|_| Complex64::from_polar(radius * rng.random::<f64>().sqrt(), rng.random_range(0.0..TAU)))
        .collect()
}

pub fn scalars(texts: &[&str]) -> ShiftVector {
    ShiftVector::new(texts.iter().map(|t| parse_scalar(t).unwrap()).collect())
}

/// The shift used by the symbolic property tests and a registry holding a
/// symbol `g(z2)` that adds 3 under it.
pub fn shift_with_symbol() -> (ShiftVector, SymbolRegistry) {
    let c = scalars(&["1/2*i*pi", "pi"]);
    let mut registry = SymbolRegistry::new();
    registry.declare("g", [2]).unwrap();
    registry.add_rule("g", c.components().to_vec(), parse_scalar("3").unwrap()).unwrap();
    (c, registry)
}

pub fn symbol_g() -> Arc<OpaqueSymbol> {
    shift_with_symbol().1.get("g").unwrap().clone()
}

/// A random expression in two variables; with `symbolic` the symbol from
/// [`shift_with_symbol`] may appear as a leaf.
pub fn expr(rng: &mut ChaCha8Rng, depth: u32, symbolic: bool) -> Expr {
    let mut shape = ExprShape::new(2, depth);
    if symbolic {
        shape.symbols.push(symbol_g());
    }
    random_expr(rng, &shape)
}

/// Numeric evaluation with every symbol set to `value`.
pub fn eval(e: &Expr, z: &[Complex64], value: Complex64) -> Complex64 {
    let values: BTreeMap<String, Complex64> = e.symbols().into_keys().map(|k| (k, value)).collect();
    e.eval(z, &values).unwrap()
}

/// `|a - b| <= tol * max(1, |a|)`: absolute near the origin of value space,
/// relative once values grow past one.
pub fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(1.0)
}

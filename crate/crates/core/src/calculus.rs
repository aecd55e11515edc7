//! Partial derivatives, the shift operator `f(z) -> f(z + c)`, and the
//! residuals of the two-equation system.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CalculusError, ExprError};
use crate::expr::{poly_to_expr, Expr, Func, Node};
use crate::poly::{Poly, Var};
use crate::scalar::Scalar;
use crate::symbol::{fmt_vec, OpaqueSymbol};

/// The shift `c = (c1, ..., cm)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ShiftVector(Vec<Scalar>);

impl ShiftVector {
    pub fn new(components: Vec<Scalar>) -> Self {
        ShiftVector(components)
    }

    pub fn zero(m: usize) -> Self {
        ShiftVector(vec![Scalar::zero(); m])
    }

    pub fn components(&self) -> &[Scalar] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Scalar::is_zero)
    }

    /// `k * c`, componentwise.
    pub fn scaled(&self, k: i64) -> ShiftVector {
        let k = Scalar::from_int(k);
        ShiftVector(self.0.iter().map(|x| &k * x).collect())
    }

    pub fn is_exact(&self) -> bool {
        self.0.iter().all(Scalar::is_exact)
    }

    pub fn to_complex(&self) -> Vec<num_complex::Complex64> {
        self.0.iter().map(Scalar::to_complex).collect()
    }
}

impl fmt::Display for ShiftVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_vec(&self.0))
    }
}

impl Serialize for ShiftVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let texts: Vec<String> = self.0.iter().map(Scalar::to_string).collect();
        texts.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ShiftVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .map(|t| crate::parser::parse_scalar(t).map_err(serde::de::Error::custom))
            .collect::<Result<Vec<_>, _>>()
            .map(ShiftVector)
    }
}

/// `(m, n1, m1, n2, m2, c)`: the system
/// `(d f1/d z1)^n1 + f2(z+c)^m1 = 1`, `(d f2/d z1)^n2 + f1(z+c)^m2 = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub m: usize,
    pub n1: u32,
    pub m1: u32,
    pub n2: u32,
    pub m2: u32,
    pub c: ShiftVector,
}

impl SystemSpec {
    /// Exponents in the order `(n1, m1, n2, m2)`.
    pub fn new(m: usize, exps: (u32, u32, u32, u32), c: ShiftVector) -> Self {
        SystemSpec {
            m,
            n1: exps.0,
            m1: exps.1,
            n2: exps.2,
            m2: exps.3,
            c,
        }
    }

    pub fn exponents(&self) -> (u32, u32, u32, u32) {
        (self.n1, self.m1, self.n2, self.m2)
    }
}

/// `d e / d z_i`.
pub fn partial(e: &Expr, i: usize) -> Result<Expr, CalculusError> {
    Ok(partial_opt(e, i)?.unwrap_or_else(Expr::zero))
}

/// The derivative, with `None` standing for an identically zero result.
fn partial_opt(e: &Expr, i: usize) -> Result<Option<Expr>, CalculusError> {
    if let Some(sym) = e.symbols().values().find(|s| s.depends_on().contains(&i)) {
        return Err(CalculusError::OpaqueDerivative {
            symbol: sym.name().to_string(),
            var: i,
        });
    }
    if e.is_polynomial() {
        let d = e.to_poly()?.derivative(&Var::Z(i));
        return Ok((!d.is_zero()).then(|| poly_to_expr(&d, &e.symbols())));
    }
    Ok(match e.node() {
        Node::Add(cs) => {
            let mut terms = Vec::new();
            for c in cs {
                if let Some(d) = partial_opt(c, i)? {
                    terms.push(d);
                }
            }
            (!terms.is_empty()).then(|| Expr::add(terms))
        }
        Node::Mul(cs) => {
            let mut terms = Vec::new();
            for (k, c) in cs.iter().enumerate() {
                if let Some(d) = partial_opt(c, i)? {
                    let mut factors = cs.clone();
                    factors[k] = d;
                    terms.push(Expr::mul(factors));
                }
            }
            (!terms.is_empty()).then(|| Expr::add(terms))
        }
        Node::Pow(b, n) => match (n, partial_opt(b, i)?) {
            (0, _) | (_, None) => None,
            (1, Some(db)) => Some(db),
            (_, Some(db)) => {
                let lower = if *n == 2 { b.clone() } else { Expr::pow(b.clone(), n - 1) };
                Some(Expr::mul(vec![Expr::int(*n as i64), lower, db]))
            }
        },
        Node::Apply(f, arg) => {
            let Some(du) = partial_opt(arg, i)? else {
                return Ok(None);
            };
            let outer = match f {
                Func::Exp => e.clone(),
                Func::Sin => Expr::cos(arg.clone())?,
                Func::Cos => Expr::neg(Expr::sin(arg.clone())?),
            };
            Some(if du.as_const().is_some_and(Scalar::is_one) {
                outer
            } else {
                Expr::mul(vec![outer, du])
            })
        }
        Node::Const(_) | Node::Var(_) | Node::Symbol(_) => unreachable!("polynomial leaves handled above"),
    })
}

/// `e(z + c)`. Polynomial parts are expanded eagerly; each opaque symbol is
/// replaced by `g + s` where `s` comes from its shift rules.
pub fn shift(e: &Expr, c: &ShiftVector) -> Result<Expr, CalculusError> {
    let needed = e.max_var();
    if c.len() < needed {
        return Err(CalculusError::ShiftDimension {
            expected: needed,
            got: c.len(),
        });
    }
    if c.is_zero() {
        return Ok(e.clone());
    }
    let table = e.symbols();
    let mut increments = BTreeMap::new();
    for (name, sym) in &table {
        increments.insert(name.clone(), symbol_increment(sym, c)?);
    }
    shift_rec(e, c, &table, &increments)
}

fn symbol_increment(sym: &OpaqueSymbol, c: &ShiftVector) -> Result<Scalar, CalculusError> {
    sym.shift_increment(c.components())
        .ok_or_else(|| CalculusError::UnknownSymbolShift {
            symbol: sym.name().to_string(),
            shift: c.to_string(),
        })
}

fn shift_poly(p: &Poly, c: &ShiftVector, increments: &BTreeMap<String, Scalar>) -> Poly {
    p.substitute(&|v| match v {
        Var::Z(i) => {
            let ci = &c.components()[i - 1];
            (!ci.is_zero()).then(|| Poly::z(*i).add(&Poly::constant(ci.clone())))
        }
        Var::Sym(name) => {
            let s = &increments[&**name];
            (!s.is_zero()).then(|| Poly::var(v.clone()).add(&Poly::constant(s.clone())))
        }
    })
}

fn shift_rec(
    e: &Expr,
    c: &ShiftVector,
    table: &BTreeMap<String, Arc<OpaqueSymbol>>,
    increments: &BTreeMap<String, Scalar>,
) -> Result<Expr, CalculusError> {
    if e.is_polynomial() {
        return Ok(poly_to_expr(&shift_poly(&e.to_poly()?, c, increments), table));
    }
    Ok(match e.node() {
        Node::Add(cs) => Expr::add(
            cs.iter()
                .map(|x| shift_rec(x, c, table, increments))
                .collect::<Result<_, _>>()?,
        ),
        Node::Mul(cs) => Expr::mul(
            cs.iter()
                .map(|x| shift_rec(x, c, table, increments))
                .collect::<Result<_, _>>()?,
        ),
        Node::Pow(b, n) => Expr::pow(shift_rec(b, c, table, increments)?, *n),
        Node::Apply(f, arg) => Expr::apply(*f, shift_rec(arg, c, table, increments)?)?,
        Node::Const(_) | Node::Var(_) | Node::Symbol(_) => unreachable!("polynomial leaves handled above"),
    })
}

/// `R1 = (d f1/d z1)^n1 + f2(z+c)^m1 - 1` and
/// `R2 = (d f2/d z1)^n2 + f1(z+c)^m2 - 1`.
pub fn residuals(spec: &SystemSpec, f1: &Expr, f2: &Expr) -> Result<(Expr, Expr), CalculusError> {
    for f in [f1, f2] {
        let k = f.max_var();
        if k > spec.m {
            return Err(ExprError::VariableOutOfRange { index: k, m: spec.m }.into());
        }
    }
    if spec.c.len() != spec.m {
        return Err(CalculusError::ShiftDimension {
            expected: spec.m,
            got: spec.c.len(),
        });
    }
    let one_residual = |f: &Expr, g: &Expr, n: u32, k: u32| -> Result<Expr, CalculusError> {
        let d = partial(f, 1)?;
        let s = shift(g, &spec.c)?;
        Ok(Expr::add(vec![Expr::pow(d, n), Expr::pow(s, k), Expr::int(-1)]))
    };
    Ok((
        one_residual(f1, f2, spec.n1, spec.m1)?,
        one_residual(f2, f1, spec.n2, spec.m2)?,
    ))
}

/// Residual of the single equation `(d f/d z1)^n + f(z+c)^m = 1`.
pub fn single_residual(f: &Expr, n: u32, m_exp: u32, c: &ShiftVector) -> Result<Expr, CalculusError> {
    let d = partial(f, 1)?;
    let s = shift(f, c)?;
    Ok(Expr::add(vec![Expr::pow(d, n), Expr::pow(s, m_exp), Expr::int(-1)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expr;
    use crate::symbol::SymbolRegistry;

    fn two_pi() -> Scalar {
        &Scalar::from_int(2) * &Scalar::pi()
    }

    #[test]
    fn chain_rule_on_sine() {
        let r = SymbolRegistry::new();
        let e = parse_expr("sin(z1 + z2 + z2^2)", 2, &r).unwrap();
        let d = partial(&e, 1).unwrap();
        let Node::Apply(Func::Sin, arg) = e.node() else { unreachable!() };
        assert_eq!(d, Expr::cos(arg.clone()).unwrap());
    }

    #[test]
    fn derivative_of_quadratic_family_expression() {
        let mut r = SymbolRegistry::new();
        r.declare("g", [2, 3]).unwrap();
        let e = parse_expr("1 - 1/4*z1^2 + g*z1 - g^2", 3, &r).unwrap();
        let d = partial(&e, 1).unwrap();
        let expected = parse_expr("-1/2*z1 + g", 3, &r).unwrap();
        assert_eq!(d.to_poly().unwrap(), expected.to_poly().unwrap());
    }

    #[test]
    fn derivative_in_an_unused_variable_vanishes() {
        let e = parse_expr("z2^3", 2, &SymbolRegistry::new()).unwrap();
        assert_eq!(partial(&e, 1).unwrap(), Expr::zero());
    }

    #[test]
    fn opaque_symbol_in_own_variable_is_rejected() {
        let mut r = SymbolRegistry::new();
        r.declare("g", [2]).unwrap();
        let e = parse_expr("g*z2", 2, &r).unwrap();
        assert!(matches!(partial(&e, 2), Err(CalculusError::OpaqueDerivative { .. })));
    }

    #[test]
    fn shift_expands_polynomials() {
        let e = parse_expr("z1^2", 2, &SymbolRegistry::new()).unwrap();
        let c = ShiftVector::new(vec![Scalar::from_int(3), Scalar::zero()]);
        let s = shift(&e, &c).unwrap();
        let expected = parse_expr("z1^2 + 6z1 + 9", 2, &SymbolRegistry::new()).unwrap();
        assert_eq!(s.to_poly().unwrap(), expected.to_poly().unwrap());
    }

    #[test]
    fn symbol_shift_uses_rules() {
        let mut r = SymbolRegistry::new();
        r.declare("g", [2, 3]).unwrap();
        r.add_rule("g", vec![Scalar::zero(), two_pi(), two_pi()], Scalar::zero()).unwrap();
        let g = parse_expr("g", 3, &r).unwrap();
        let c = ShiftVector::new(vec![Scalar::zero(), two_pi(), two_pi()]);
        assert_eq!(shift(&g, &c).unwrap(), g);
        let bad = ShiftVector::new(vec![Scalar::zero(), Scalar::pi(), Scalar::zero()]);
        assert!(matches!(shift(&g, &bad), Err(CalculusError::UnknownSymbolShift { .. })));
    }
}

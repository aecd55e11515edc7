//! Immutable expression trees over `C^m`.
//!
//! The admissible class is exponential polynomials extended by opaque symbols:
//! `exp`, `sin` and `cos` only accept arguments that are a polynomial in the
//! `z` variables plus a constant linear combination of opaque symbols. The
//! check runs when the node is built, so every [`Expr`] in existence is
//! admissible.

use std::collections::BTreeMap;
use std::fmt;
use std::ops;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::ExprError;
use crate::poly::{Monomial, Poly, Var};
use crate::scalar::Scalar;
use crate::symbol::OpaqueSymbol;

/// A 1-based variable index; `z1` is the differentiation variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarIndex(usize);

impl VarIndex {
    pub fn new(index: usize) -> Option<VarIndex> {
        (index >= 1).then_some(VarIndex(index))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Const(Scalar),
    Var(VarIndex),
    Symbol(Arc<OpaqueSymbol>),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, u32),
    Apply(Func, Expr),
}

/// Shared, immutable expression node.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: Scalar) -> Expr {
        Expr(Arc::new(Node::Const(c)))
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(Scalar::from_int(n))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    /// `z_index`; panics when `index == 0`.
    pub fn var(index: usize) -> Expr {
        let v = VarIndex::new(index).expect("variable indices start at 1");
        Expr(Arc::new(Node::Var(v)))
    }

    pub fn symbol(sym: Arc<OpaqueSymbol>) -> Expr {
        Expr(Arc::new(Node::Symbol(sym)))
    }

    pub fn as_const(&self) -> Option<&Scalar> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Sum. The empty sum is `0`, a single term is returned as is, and a sum
    /// of constants folds to one constant.
    pub fn add(children: Vec<Expr>) -> Expr {
        match children.len() {
            0 => return Expr::zero(),
            1 => return children.into_iter().next().unwrap(),
            _ => {}
        }
        if children.iter().all(|c| c.as_const().is_some()) {
            let sum = children
                .iter()
                .fold(Scalar::zero(), |acc, c| &acc + c.as_const().unwrap());
            return Expr::constant(sum);
        }
        Expr(Arc::new(Node::Add(children)))
    }

    /// Product, with the same degenerate-case rules as [`Expr::add`].
    pub fn mul(children: Vec<Expr>) -> Expr {
        match children.len() {
            0 => return Expr::one(),
            1 => return children.into_iter().next().unwrap(),
            _ => {}
        }
        if children.iter().all(|c| c.as_const().is_some()) {
            let prod = children
                .iter()
                .fold(Scalar::one(), |acc, c| &acc * c.as_const().unwrap());
            return Expr::constant(prod);
        }
        Expr(Arc::new(Node::Mul(children)))
    }

    pub fn pow(base: Expr, exp: u32) -> Expr {
        if let Some(c) = base.as_const() {
            return Expr::constant(c.pow(exp));
        }
        Expr(Arc::new(Node::Pow(base, exp)))
    }

    // smart constructors beside add and mul, not operator impls
    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Expr {
        match e.as_const() {
            Some(c) => Expr::constant(-c),
            None => Expr::mul(vec![Expr::int(-1), e]),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::add(vec![a, Expr::neg(b)])
    }

    pub fn apply(f: Func, arg: Expr) -> Result<Expr, ExprError> {
        check_admissible_arg(&arg)?;
        Ok(Expr(Arc::new(Node::Apply(f, arg))))
    }

    pub fn exp(arg: Expr) -> Result<Expr, ExprError> {
        Expr::apply(Func::Exp, arg)
    }

    pub fn sin(arg: Expr) -> Result<Expr, ExprError> {
        Expr::apply(Func::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Result<Expr, ExprError> {
        Expr::apply(Func::Cos, arg)
    }

    /// Expression tree for a polynomial: a sum of `coeff * powers` terms in
    /// monomial order, highest first.
    pub fn from_poly(p: &Poly) -> Expr {
        let terms: Vec<Expr> = p
            .terms()
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .map(|(m, c)| monomial_expr(m, c))
            .collect();
        Expr::add(terms)
    }

    /// The expression as an expanded polynomial; fails on transcendental nodes.
    pub fn to_poly(&self) -> Result<Poly, ExprError> {
        match self.node() {
            Node::Const(c) => Ok(Poly::constant(c.clone())),
            Node::Var(v) => Ok(Poly::z(v.get())),
            Node::Symbol(s) => Ok(Poly::var(Var::Sym(s.name_arc()))),
            Node::Add(cs) => cs.iter().try_fold(Poly::zero(), |acc, c| Ok(acc.add(&c.to_poly()?))),
            Node::Mul(cs) => cs
                .iter()
                .try_fold(Poly::constant(Scalar::one()), |acc, c| Ok(acc.mul(&c.to_poly()?))),
            Node::Pow(b, n) => Ok(b.to_poly()?.pow(*n)),
            Node::Apply(..) => Err(ExprError::NonPolynomial),
        }
    }

    pub fn is_polynomial(&self) -> bool {
        match self.node() {
            Node::Const(_) | Node::Var(_) | Node::Symbol(_) => true,
            Node::Add(cs) | Node::Mul(cs) => cs.iter().all(Expr::is_polynomial),
            Node::Pow(b, _) => b.is_polynomial(),
            Node::Apply(..) => false,
        }
    }

    /// Names of the opaque symbols occurring anywhere in the tree.
    pub fn symbols(&self) -> BTreeMap<String, Arc<OpaqueSymbol>> {
        let mut out = BTreeMap::new();
        self.visit(&mut |e| {
            if let Node::Symbol(s) = e.node() {
                out.insert(s.name().to_string(), s.clone());
            }
        });
        out
    }

    /// Largest variable index used, or 0 for a variable-free expression.
    pub fn max_var(&self) -> usize {
        let mut m = 0;
        self.visit(&mut |e| match e.node() {
            Node::Var(v) => m = m.max(v.get()),
            Node::Symbol(s) => m = m.max(s.depends_on().iter().copied().max().unwrap_or(0)),
            _ => {}
        });
        m
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self.node() {
            Node::Add(cs) | Node::Mul(cs) => cs.iter().for_each(|c| c.visit(f)),
            Node::Pow(b, _) => b.visit(f),
            Node::Apply(_, a) => a.visit(f),
            _ => {}
        }
    }

    /// Numeric value at `point`, looking opaque symbols up in `symbol_values`.
    pub fn eval(&self, point: &[Complex64], symbol_values: &BTreeMap<String, Complex64>) -> Result<Complex64, ExprError> {
        self.eval_with(point, &|name| symbol_values.get(name).copied())
    }

    pub fn eval_with(&self, point: &[Complex64], sym: &dyn Fn(&str) -> Option<Complex64>) -> Result<Complex64, ExprError> {
        Ok(match self.node() {
            Node::Const(c) => c.to_complex(),
            Node::Var(v) => *point.get(v.get() - 1).ok_or(ExprError::VariableOutOfRange {
                index: v.get(),
                m: point.len(),
            })?,
            Node::Symbol(s) => sym(s.name()).ok_or_else(|| ExprError::MissingSymbol(s.name().to_string()))?,
            Node::Add(cs) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in cs {
                    acc += c.eval_with(point, sym)?;
                }
                acc
            }
            Node::Mul(cs) => {
                let mut acc = Complex64::new(1.0, 0.0);
                for c in cs {
                    acc *= c.eval_with(point, sym)?;
                }
                acc
            }
            Node::Pow(b, n) => b.eval_with(point, sym)?.powu(*n),
            Node::Apply(f, a) => {
                let x = a.eval_with(point, sym)?;
                match f {
                    Func::Exp => x.exp(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                }
            }
        })
    }
}

fn monomial_expr(m: &Monomial, c: &Scalar) -> Expr {
    let mut factors = Vec::new();
    if !c.is_one() || m.is_one() {
        factors.push(Expr::constant(c.clone()));
    }
    for (v, e) in m.factors() {
        let base = match v {
            Var::Z(i) => Expr::var(*i),
            Var::Sym(s) => Expr(Arc::new(Node::Symbol(Arc::new(
                OpaqueSymbol::new(s, []).expect("symbol names never carry z1"),
            )))),
        };
        factors.push(if *e == 1 { base } else { Expr::pow(base, *e) });
    }
    Expr::mul(factors)
}

/// Checks that `arg` is a polynomial in `z` plus a constant linear
/// combination of opaque symbols.
fn check_admissible_arg(arg: &Expr) -> Result<(), ExprError> {
    let poly = arg.to_poly().map_err(|_| ExprError::InadmissibleArgument {
        arg: crate::parser::print_expr(arg),
        reason: "nested transcendental function".to_string(),
    })?;
    for (m, _) in poly.terms() {
        if m.has_symbol() && !(m.degree() == 1) {
            return Err(ExprError::InadmissibleArgument {
                arg: crate::parser::print_expr(arg),
                reason: "opaque symbols may only enter linearly".to_string(),
            });
        }
    }
    Ok(())
}

/// Substitutes symbols in `e` by the given registry entries, so that symbols
/// rebuilt from polynomial variables carry their full shift rules again.
pub(crate) fn rebind_symbols(e: &Expr, table: &BTreeMap<String, Arc<OpaqueSymbol>>) -> Expr {
    match e.node() {
        Node::Symbol(s) => match table.get(s.name()) {
            Some(full) => Expr::symbol(full.clone()),
            None => e.clone(),
        },
        Node::Const(_) | Node::Var(_) => e.clone(),
        Node::Add(cs) => Expr::add(cs.iter().map(|c| rebind_symbols(c, table)).collect()),
        Node::Mul(cs) => Expr::mul(cs.iter().map(|c| rebind_symbols(c, table)).collect()),
        Node::Pow(b, n) => Expr::pow(rebind_symbols(b, table), *n),
        Node::Apply(f, a) => Expr(Arc::new(Node::Apply(*f, rebind_symbols(a, table)))),
    }
}

/// Polynomial to expression, keeping the symbol objects from `table`.
pub(crate) fn poly_to_expr(p: &Poly, table: &BTreeMap<String, Arc<OpaqueSymbol>>) -> Expr {
    rebind_symbols(&Expr::from_poly(p), table)
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", crate::parser::print_expr(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::print_expr(self))
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(vec![self, rhs])
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(vec![self, rhs])
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl From<Scalar> for Expr {
    fn from(c: Scalar) -> Expr {
        Expr::constant(c)
    }
}

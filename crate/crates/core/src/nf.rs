//! Exponential-polynomial normal form `sum_k p_k(z) e^{q_k(z) + r_k}`.
//!
//! Exponents `q_k` are polynomials without constant term. A constant in an
//! exponent is split as `i*pi*k/2 + r`: the power `i^k` moves into the
//! coefficient and the residual phase `r` stays in the key. Exponentials with
//! distinct exponent polynomials are linearly independent over polynomials,
//! so an expression vanishes identically iff every coefficient does.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::NfError;
use crate::expr::{Expr, Func, Node};
use crate::poly::{Poly, Var};
use crate::scalar::{GaussRat, Scalar};

/// Exponent key: the non-constant exponent polynomial and the residual phase.
pub type ExpKey = (Poly, Scalar);

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ExpPolyNF {
    terms: BTreeMap<ExpKey, Poly>,
}

/// One surviving term of a non-zero normal form.
#[derive(Clone, Debug, PartialEq)]
pub struct NfTerm {
    pub exponent: Poly,
    pub phase: Scalar,
    pub coeff: Poly,
}

impl ExpPolyNF {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_poly(p: Poly) -> Self {
        let mut nf = Self::zero();
        nf.add_term((Poly::zero(), Scalar::zero()), p);
        nf
    }

    pub fn constant(c: Scalar) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    /// `e^u` for a polynomial `u` free of symbols with exact coefficients.
    pub fn exp_of(u: &Poly) -> Result<Self, NfError> {
        if let Some(Var::Sym(s)) = u.vars().into_iter().find(|v| matches!(v, Var::Sym(_))) {
            return Err(NfError::SymbolInTranscendental(s.to_string()));
        }
        let c = u.constant_term();
        let (k, r) = c.exp_split().ok_or_else(|| NfError::InexactScalar(c.to_string()))?;
        let mut nf = Self::zero();
        nf.add_term(
            (u.without_constant(), r),
            Poly::constant(Scalar::gauss(GaussRat::i_pow(k as i64))),
        );
        Ok(nf)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExpKey, &Poly)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, key: ExpKey, p: Poly) {
        if p.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(p);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&p);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, p) in &other.terms {
            out.add_term(k.clone(), p.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        ExpPolyNF {
            terms: self.terms.iter().map(|(k, p)| (k.clone(), p.neg())).collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = Self::zero();
        for (k, p) in &self.terms {
            out.add_term(k.clone(), p.scale(c));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for ((q1, r1), p1) in &self.terms {
            for ((q2, r2), p2) in &other.terms {
                let (k, r) = (r1 + r2).exp_split().expect("phases in the normal form are exact");
                let unit = Scalar::gauss(GaussRat::i_pow(k as i64));
                out.add_term((q1.add(q2), r), p1.mul(p2).scale(&unit));
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(Scalar::one());
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// True iff the normal form has no terms, i.e. the expression is
    /// identically zero.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The first surviving term, as evidence that the expression is non-zero.
    pub fn witness(&self) -> Option<NfTerm> {
        self.terms.iter().next().map(|((q, r), p)| NfTerm {
            exponent: q.clone(),
            phase: r.clone(),
            coeff: p.clone(),
        })
    }

    /// Whether two keys share an exponent polynomial with different residual
    /// phases. Such terms are not independent, so a non-empty normal form is
    /// only a proof of non-vanishing when this is false.
    pub fn has_phase_collision(&self) -> bool {
        let mut prev: Option<&Poly> = None;
        for (q, _) in self.terms.keys() {
            if prev == Some(q) {
                return true;
            }
            prev = Some(q);
        }
        false
    }

    pub fn eval(&self, point: &[Complex64], sym: &dyn Fn(&str) -> Option<Complex64>) -> Option<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for ((q, r), p) in &self.terms {
            let e = (q.eval(point, sym)? + r.to_complex()).exp();
            acc += p.eval(point, sym)? * e;
        }
        Some(acc)
    }

    /// The normal form rebuilt as an expression `sum p_k * exp(q_k + r_k)`.
    pub fn to_expr(&self) -> Expr {
        let table = BTreeMap::new();
        let terms = self
            .terms
            .iter()
            .map(|((q, r), p)| {
                let coeff = crate::expr::poly_to_expr(p, &table);
                if q.is_zero() && r.is_zero() {
                    return coeff;
                }
                let arg = crate::expr::poly_to_expr(&q.add(&Poly::constant(r.clone())), &table);
                let e = Expr::exp(arg).expect("symbol-free polynomial argument");
                Expr::mul(vec![coeff, e])
            })
            .collect();
        Expr::add(terms)
    }
}

/// Normal form of an expression. Fails when an opaque symbol sits inside a
/// transcendental argument or an inexact constant occurs anywhere.
pub fn to_nf(e: &Expr) -> Result<ExpPolyNF, NfError> {
    Ok(match e.node() {
        Node::Const(c) => {
            if !c.is_exact() {
                return Err(NfError::InexactScalar(c.to_string()));
            }
            ExpPolyNF::constant(c.clone())
        }
        Node::Var(_) | Node::Symbol(_) => ExpPolyNF::from_poly(e.to_poly().expect("leaf is polynomial")),
        Node::Add(cs) => {
            let mut acc = ExpPolyNF::zero();
            for c in cs {
                acc = acc.add(&to_nf(c)?);
            }
            acc
        }
        Node::Mul(cs) => {
            let mut acc = ExpPolyNF::constant(Scalar::one());
            for c in cs {
                acc = acc.mul(&to_nf(c)?);
            }
            acc
        }
        Node::Pow(b, n) => to_nf(b)?.pow(*n),
        Node::Apply(f, arg) => {
            let u = arg.to_poly().expect("admissible arguments are polynomial");
            if !u.is_exact() {
                return Err(NfError::InexactScalar(u.to_string()));
            }
            let iu = u.scale(&Scalar::i());
            match f {
                Func::Exp => ExpPolyNF::exp_of(&u)?,
                Func::Sin => {
                    let half_i = Scalar::gauss(GaussRat::new(crate::scalar::rat(0, 1), crate::scalar::rat(1, 2)));
                    ExpPolyNF::exp_of(&iu)?
                        .scale(&-&half_i)
                        .add(&ExpPolyNF::exp_of(&iu.neg())?.scale(&half_i))
                }
                Func::Cos => {
                    let half = Scalar::ratio(1, 2);
                    ExpPolyNF::exp_of(&iu)?.add(&ExpPolyNF::exp_of(&iu.neg())?).scale(&half)
                }
            }
        }
    })
}

/// Product of two normal forms.
pub fn nf_mul(a: &ExpPolyNF, b: &ExpPolyNF) -> ExpPolyNF {
    a.mul(b)
}

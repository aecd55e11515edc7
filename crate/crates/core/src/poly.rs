//! Sparse multivariate polynomials over [`Scalar`].
//!
//! Variables are `z1..zm` followed by opaque symbols (ordered by name).
//! Monomials are kept in graded-lexicographic order, so the term map of a
//! polynomial is a canonical representation: two polynomials are equal as
//! functions iff their term maps are equal.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::scalar::Scalar;

/// A polynomial variable: `Z(i)` is `z_i` (1-based), `Sym` an opaque symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Z(usize),
    Sym(Arc<str>),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Z(i) => write!(f, "z{i}"),
            Var::Sym(s) => f.write_str(s),
        }
    }
}

/// A power product, stored as `(variable, exponent)` pairs sorted by variable
/// with positive exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn var(v: Var, exp: u32) -> Monomial {
        if exp == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(v, exp)])
        }
    }

    pub fn from_pairs(mut pairs: Vec<(Var, u32)>) -> Monomial {
        pairs.retain(|(_, e)| *e > 0);
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Var, u32)> = Vec::with_capacity(pairs.len());
        for (v, e) in pairs {
            match out.last_mut() {
                Some((lv, le)) if *lv == v => *le += e,
                _ => out.push((v, e)),
            }
        }
        Monomial(out)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn exponent(&self, v: &Var) -> u32 {
        self.0
            .iter()
            .find(|(w, _)| w == v)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0.clone(), a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    pub fn has_symbol(&self) -> bool {
        self.0.iter().any(|(v, _)| matches!(v, Var::Sym(_)))
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: total degree first, then exponents compared
    /// variable by variable in the order `z1 < z2 < ... < symbols`.
    fn cmp(&self, other: &Monomial) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let (a, b) = (&self.0, &other.0);
            let (mut i, mut j) = (0, 0);
            loop {
                match (a.get(i), b.get(j)) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Greater,
                    (None, Some(_)) => return Ordering::Less,
                    (Some((va, ea)), Some((vb, eb))) => match va.cmp(vb) {
                        // `a` has a positive exponent where `b` has zero.
                        Ordering::Less => return Ordering::Greater,
                        Ordering::Greater => return Ordering::Less,
                        Ordering::Equal => {
                            if ea != eb {
                                return ea.cmp(eb);
                            }
                            i += 1;
                            j += 1;
                        }
                    },
                }
            }
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Monomial) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial as a map from monomials to non-zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Scalar>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: Scalar) -> Poly {
        let mut p = Poly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(v: Var) -> Poly {
        let mut p = Poly::zero();
        p.add_term(Monomial::var(v, 1), Scalar::one());
        p
    }

    pub fn z(i: usize) -> Poly {
        Poly::var(Var::Z(i))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c * mono`, pruning the term when it cancels.
    pub fn add_term(&mut self, mono: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn constant_term(&self) -> Scalar {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn without_constant(&self) -> Poly {
        let mut p = self.clone();
        p.terms.remove(&Monomial::one());
        p
    }

    /// The polynomial as a scalar, when it has no variables.
    pub fn as_constant(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(Scalar::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_exact(&self) -> bool {
        self.terms.values().all(Scalar::is_exact)
    }

    pub fn has_symbol(&self) -> bool {
        self.terms.keys().any(Monomial::has_symbol)
    }

    /// Variables occurring with a non-zero coefficient.
    pub fn vars(&self) -> Vec<Var> {
        let mut vs: Vec<Var> = self
            .terms
            .keys()
            .flat_map(|m| m.factors().iter().map(|(v, _)| v.clone()))
            .collect();
        vs.sort();
        vs.dedup();
        vs
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        let mut p = Poly::zero();
        for (m, k) in &self.terms {
            p.add_term(m.clone(), k * c);
        }
        p
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut p = self.clone();
        for (m, c) in &other.terms {
            p.add_term(m.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut p = self.clone();
        for (m, c) in &other.terms {
            p.add_term(m.clone(), -c);
        }
        p
    }

    pub fn neg(&self) -> Poly {
        self.scale(&Scalar::from_int(-1))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut p = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                p.add_term(ma.mul(mb), ca * cb);
            }
        }
        p
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::constant(Scalar::one());
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

    /// Substitutes each variable `v` with the polynomial `sub(v)` (or keeps it
    /// when `sub` returns `None`), expanding the result.
    pub fn substitute(&self, sub: &dyn Fn(&Var) -> Option<Poly>) -> Poly {
        let mut cache: BTreeMap<(Var, u32), Poly> = BTreeMap::new();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(c.clone());
            for (v, e) in m.factors() {
                let factor = match sub(v) {
                    Some(replacement) => cache
                        .entry((v.clone(), *e))
                        .or_insert_with(|| replacement.pow(*e))
                        .clone(),
                    None => Poly {
                        terms: BTreeMap::from([(Monomial::var(v.clone(), *e), Scalar::one())]),
                    },
                };
                term = term.mul(&factor);
            }
            out = out.add(&term);
        }
        out
    }

    /// Partial derivative with respect to `v`.
    pub fn derivative(&self, v: &Var) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e == 0 {
                continue;
            }
            let pairs: Vec<(Var, u32)> = m
                .factors()
                .iter()
                .map(|(w, k)| (w.clone(), if w == v { k - 1 } else { *k }))
                .collect();
            p.add_term(Monomial::from_pairs(pairs), c * &Scalar::from_int(e as i64));
        }
        p
    }

    /// Numeric value at `point` (`z_i = point[i-1]`) with symbol values from `sym`.
    pub fn eval(&self, point: &[Complex64], sym: &dyn Fn(&str) -> Option<Complex64>) -> Option<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = c.to_complex();
            for (v, e) in m.factors() {
                let x = match v {
                    Var::Z(i) => *point.get(i - 1)?,
                    Var::Sym(s) => sym(s)?,
                };
                t *= x.powu(*e);
            }
            acc += t;
        }
        Some(acc)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parser::print_expr(&crate::expr::Expr::from_poly(self)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grlex_orders_by_degree_then_z1_first() {
        let z1 = Monomial::var(Var::Z(1), 1);
        let z2 = Monomial::var(Var::Z(2), 1);
        let z2sq = Monomial::var(Var::Z(2), 2);
        let g = Monomial::var(Var::Sym("g".into()), 1);
        assert!(Monomial::one() < z2);
        assert!(z2 < z1);
        assert!(g < z2);
        assert!(z1 < z2sq);
        let z1z2 = z1.mul(&z2);
        assert!(z2sq < z1z2);
    }

    #[test]
    fn binomial_expansion_under_shift() {
        let p = Poly::z(1).pow(2);
        let c = Scalar::from_int(3);
        let shifted = p.substitute(&|v| match v {
            Var::Z(1) => Some(Poly::z(1).add(&Poly::constant(c.clone()))),
            _ => None,
        });
        let mut expected = Poly::z(1).pow(2);
        expected = expected.add(&Poly::z(1).scale(&Scalar::from_int(6)));
        expected = expected.add(&Poly::constant(Scalar::from_int(9)));
        assert_eq!(shifted, expected);
    }

    #[test]
    fn cancellation_prunes_terms() {
        let p = Poly::z(1).add(&Poly::z(2));
        let q = p.sub(&Poly::z(2)).sub(&Poly::z(1));
        assert!(q.is_zero());
    }

    #[test]
    fn derivative_of_product() {
        let p = Poly::z(1).pow(3).mul(&Poly::z(2));
        let d = p.derivative(&Var::Z(1));
        assert_eq!(d, Poly::z(1).pow(2).mul(&Poly::z(2)).scale(&Scalar::from_int(3)));
    }
}

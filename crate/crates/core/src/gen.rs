//! Seeded generators: random admissible expressions, random valid family
//! specs and single-constraint perturbations of them.

use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::calculus::ShiftVector;
use crate::expr::Expr;
use crate::families::{QuadraticFamilySpec, SineFamilySpec, SineVariant};
use crate::poly::Poly;
use crate::scalar::Scalar;
use crate::symbol::{OpaqueSymbol, SymbolRegistry};

/// A small Gaussian rational `(a + b i) / d` with `|a|, |b| <= 3`, `d <= 3`;
/// with `allow_pi` an extra `k*pi/2` term may appear.
pub fn small_scalar<R: Rng + ?Sized>(rng: &mut R, allow_pi: bool) -> Scalar {
    let d = rng.random_range(1..=3);
    let re = Scalar::ratio(rng.random_range(-3..=3), d);
    let im = if rng.random_bool(0.3) {
        &Scalar::i() * &Scalar::ratio(rng.random_range(-3..=3), d)
    } else {
        Scalar::zero()
    };
    let mut s = &re + &im;
    if allow_pi && rng.random_bool(0.2) {
        s = &s + &(&Scalar::ratio(rng.random_range(-2..=2), 2) * &Scalar::pi());
    }
    s
}

/// A polynomial in `vars` of total degree at most `degree` with at most
/// `terms` terms.
pub fn random_poly<R: Rng + ?Sized>(rng: &mut R, vars: &[usize], degree: u32, terms: usize) -> Poly {
    let mut p = Poly::zero();
    for _ in 0..rng.random_range(1..=terms) {
        let mut mono = Poly::constant(small_scalar(rng, false));
        if !vars.is_empty() {
            for _ in 0..rng.random_range(0..=degree) {
                mono = mono.mul(&Poly::z(*vars.choose(rng).expect("non-empty")));
            }
        }
        p = p.add(&mono);
    }
    p
}

/// Shape limits for [`random_expr`].
#[derive(Clone, Debug)]
pub struct ExprShape {
    pub m: usize,
    pub depth: u32,
    /// Opaque symbols that may appear as leaves.
    pub symbols: Vec<Arc<OpaqueSymbol>>,
}

impl ExprShape {
    pub fn new(m: usize, depth: u32) -> Self {
        ExprShape {
            m,
            depth,
            symbols: Vec::new(),
        }
    }
}

fn leaf<R: Rng + ?Sized>(rng: &mut R, shape: &ExprShape) -> Expr {
    match rng.random_range(0..10) {
        0..=4 => Expr::var(rng.random_range(1..=shape.m)),
        5 if !shape.symbols.is_empty() => Expr::symbol(shape.symbols.choose(rng).expect("non-empty").clone()),
        _ => Expr::constant(small_scalar(rng, true)),
    }
}

/// An argument for `exp`, `sin` or `cos`: a low-degree polynomial in the
/// variables. Symbols stay out of arguments so the normal form always applies.
fn argument<R: Rng + ?Sized>(rng: &mut R, shape: &ExprShape) -> Expr {
    let vars: Vec<usize> = (1..=shape.m).collect();
    Expr::from_poly(&random_poly(rng, &vars, 2, 2))
}

/// A random admissible expression. Transcendental functions only ever see
/// symbol-free polynomial arguments, so every result has a normal form.
pub fn random_expr<R: Rng + ?Sized>(rng: &mut R, shape: &ExprShape) -> Expr {
    if shape.depth == 0 {
        return leaf(rng, shape);
    }
    let inner = ExprShape {
        depth: shape.depth - 1,
        ..shape.clone()
    };
    match rng.random_range(0..8) {
        0 | 1 => Expr::add((0..rng.random_range(2..=3)).map(|_| random_expr(rng, &inner)).collect()),
        2 | 3 => Expr::mul((0..2).map(|_| random_expr(rng, &inner)).collect()),
        4 => Expr::pow(random_expr(rng, &inner), rng.random_range(2..=3)),
        5 => Expr::exp(argument(rng, shape)).expect("admissible"),
        6 => Expr::sin(argument(rng, shape)).expect("admissible"),
        _ => Expr::cos(argument(rng, shape)).expect("admissible"),
    }
}

fn half_pi(k: i64) -> Scalar {
    &Scalar::ratio(k, 2) * &Scalar::pi()
}

/// A valid sine-family spec, built so that every constraint holds:
/// `B = eA`, `B1j = e A1j` with `e = AB`; `c' = (pi/2) k'`; `Q1 = P + q1`,
/// `Q2 = eP + q2` with `P` a polynomial in linear forms annihilating `k'`;
/// `c1` solves `A c1 + sum A1j cj = phi` with `e^{2 i phi} = e`; and
/// `q2 - e q1` lands in `pi Z` accordingly.
pub fn random_sine_spec<R: Rng + ?Sized>(rng: &mut R) -> SineFamilySpec {
    let m = rng.random_range(2..=3);
    let a = if rng.random_bool(0.5) { 1 } else { -1 };
    let e = if rng.random_bool(0.5) { 1 } else { -1 };
    let a_s = Scalar::from_int(a);
    let e_s = Scalar::from_int(e);
    let a_coeffs: Vec<Scalar> = (0..m - 1).map(|_| small_scalar(rng, false)).collect();
    let b_coeffs: Vec<Scalar> = a_coeffs.iter().map(|x| &e_s * x).collect();
    let k: Vec<i64> = (0..m - 1).map(|_| rng.random_range(-2..=2)).collect();
    let tail: Vec<Scalar> = k.iter().map(|&kj| half_pi(kj)).collect();
    // phi = A c1 + sum A1j cj must be in pi Z (e = 1) or pi/2 + pi Z (e = -1)
    let phi = half_pi(2 * rng.random_range(-2..=2) + if e == 1 { 0 } else { 1 });
    let s = a_coeffs.iter().zip(&tail).fold(Scalar::zero(), |acc, (x, c)| &acc + &(x * c));
    let c1 = &a_s * &(&phi - &s);
    let mut c = vec![c1];
    c.extend(tail);
    // P in the invariants: z_j when k_j = 0, k3 z2 - k2 z3 when m = 3
    let mut invariants: Vec<Poly> = (0..m - 1).filter(|&j| k[j] == 0).map(|j| Poly::z(j + 2)).collect();
    if m == 3 && (k[0] != 0 || k[1] != 0) {
        invariants.push(Poly::z(2).scale(&Scalar::from_int(k[1])).sub(&Poly::z(3).scale(&Scalar::from_int(k[0]))));
    }
    let mut p = Poly::zero();
    for inv in &invariants {
        if rng.random_bool(0.7) {
            p = p.add(&inv.pow(rng.random_range(1..=3)).scale(&small_scalar(rng, false)));
        }
    }
    let q1c = small_scalar(rng, true);
    let n = Scalar::from_int(rng.random_range(-2..=2));
    let q2c = if e == 1 {
        &q1c + &(&n * &Scalar::pi())
    } else {
        &(-&q1c) + &(&half_pi(1) + &(&n * &Scalar::pi()))
    };
    SineFamilySpec {
        m,
        a: a_s.clone(),
        b: &e_s * &a_s,
        a_coeffs,
        b_coeffs,
        q1: p.add(&Poly::constant(q1c)),
        q2: p.scale(&e_s).add(&Poly::constant(q2c)),
        c: ShiftVector::new(c),
        variant: if rng.random_bool(0.5) { SineVariant::I } else { SineVariant::II },
    }
}

/// A valid quadratic-family spec with `K1 = K2 = -1`: `g` depends on a
/// non-empty subset of `z2..zm` where `c'` is non-zero, carrying the rule
/// `g(z'+c') = g(z') + c1/2`, sometimes next to an unrelated extra rule.
pub fn random_quadratic_spec<R: Rng + ?Sized>(rng: &mut R) -> (QuadraticFamilySpec, SymbolRegistry) {
    let m = rng.random_range(2..=3);
    let mut tail: Vec<Scalar> = (0..m - 1)
        .map(|_| if rng.random_bool(0.6) { small_scalar(rng, true) } else { Scalar::zero() })
        .collect();
    let lead = rng.random_range(0..m - 1);
    if tail[lead].is_zero() {
        tail[lead] = half_pi(rng.random_range(1..=4));
    }
    let deps: Vec<usize> = (0..m - 1).filter(|&j| j == lead || rng.random_bool(0.5)).map(|j| j + 2).collect();
    let c1 = if rng.random_bool(0.3) { Scalar::zero() } else { small_scalar(rng, true) };
    let mut c = vec![c1.clone()];
    c.extend(tail);
    let mut registry = SymbolRegistry::new();
    registry.declare("g", deps.clone()).expect("z1 excluded");
    registry
        .add_rule("g", c.clone(), &Scalar::ratio(1, 2) * &c1)
        .expect("first rule is consistent");
    if deps.len() > 1 && rng.random_bool(0.5) {
        // an independent direction, which never combines into the main one
        let mut other = vec![Scalar::zero(); m];
        other[deps[1] - 1] = Scalar::from_int(7);
        let _ = registry.add_rule("g", other, small_scalar(rng, false));
    }
    let minus_one = Scalar::from_int(-1);
    let spec = QuadraticFamilySpec {
        m,
        k1: minus_one.clone(),
        k2: minus_one,
        g: registry.get("g").expect("declared").clone(),
        c: ShiftVector::new(c),
    };
    (spec, registry)
}

/// Which constraint a perturbation breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SinePerturbation {
    /// `Q2 += z2` breaks phase matching (and periodicity when `c2 != 0`).
    Q2Slope,
    /// `c1 += pi/2` flips `e^{2i phi}`.
    ShiftC1,
    /// `A = 2A` breaks `A^2 = 1`.
    LeadSquare,
    /// `B1_2 += 1` breaks the coefficient coupling.
    CouplingB,
    /// `Q2 += pi/2` breaks the constant phase match.
    PhaseQ2,
}

pub const SINE_PERTURBATIONS: [SinePerturbation; 5] = [
    SinePerturbation::Q2Slope,
    SinePerturbation::ShiftC1,
    SinePerturbation::LeadSquare,
    SinePerturbation::CouplingB,
    SinePerturbation::PhaseQ2,
];

pub fn perturb_sine(spec: &SineFamilySpec, kind: SinePerturbation) -> SineFamilySpec {
    let mut out = spec.clone();
    match kind {
        SinePerturbation::Q2Slope => out.q2 = out.q2.add(&Poly::z(2)),
        SinePerturbation::ShiftC1 => {
            let mut c = out.c.components().to_vec();
            c[0] = &c[0] + &half_pi(1);
            out.c = ShiftVector::new(c);
        }
        SinePerturbation::LeadSquare => out.a = &Scalar::from_int(2) * &out.a,
        SinePerturbation::CouplingB => out.b_coeffs[0] = &out.b_coeffs[0] + &Scalar::one(),
        SinePerturbation::PhaseQ2 => out.q2 = out.q2.add(&Poly::constant(half_pi(1))),
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadraticPerturbation {
    /// `K2 = 1`, so `K2^3 = -1` and the coupling fail.
    FlipK2,
    /// The shift rule adds one more than required.
    RuleIncrement,
}

pub const QUADRATIC_PERTURBATIONS: [QuadraticPerturbation; 2] =
    [QuadraticPerturbation::FlipK2, QuadraticPerturbation::RuleIncrement];

pub fn perturb_quadratic(spec: &QuadraticFamilySpec, kind: QuadraticPerturbation) -> QuadraticFamilySpec {
    let mut out = spec.clone();
    match kind {
        QuadraticPerturbation::FlipK2 => out.k2 = Scalar::one(),
        QuadraticPerturbation::RuleIncrement => {
            let mut g = OpaqueSymbol::new(spec.g.name(), spec.g.depends_on().iter().copied()).expect("z1 excluded");
            for (k, r) in spec.g.rules().iter().enumerate() {
                let mut r = r.clone();
                if k == 0 {
                    r.adds = &r.adds + &Scalar::one();
                }
                g.add_rule(r).expect("same structure as before");
            }
            out.g = Arc::new(g);
        }
    }
    out
}

//! Solution families of the system, their constraint validators, and the
//! feasibility classifier over exponent quadruples.

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::calculus::{ShiftVector, SystemSpec};
use crate::error::CalculusError;
use crate::expr::{poly_to_expr, Expr};
use crate::poly::{Poly, Var};
use crate::scalar::{scalar_exp, Scalar};
use crate::symbol::OpaqueSymbol;

/// Tolerance for constraints involving inexact scalars.
pub const CONSTRAINT_TOLERANCE: f64 = 1e-10;

/// Non-existence branch that fired in [`classify`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `m1*m2 > n1*n2`
    I,
    /// `n_i = m_i` and `n_j > m_j`
    II,
    /// `n_i > m_i` and `n1*n2 - n_i > 2` for both `i`
    III,
    /// `n_i > m_i`, `m_j > n_j`, `n_i >= 3`, `m_j > n_i/(n_i - 2)`
    IV,
    /// `1/n_i + 1/m_i < 1` for some `i`: no transcendental entire pair exists.
    ExponentBound,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::I => "2i",
            Branch::II => "2ii",
            Branch::III => "2iii",
            Branch::IV => "2iv",
            Branch::ExponentBound => "exponent-bound",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FeasibilityVerdict {
    /// `n_i + m_i <= 2` for some `i`; outside the classified range.
    ExcludedTrivial,
    SineFamily,
    QuadraticFamily,
    NonExistence(Branch),
    /// Existence is open for this quadruple.
    Unknown,
}

impl FeasibilityVerdict {
    pub fn tag(&self) -> &'static str {
        match self {
            FeasibilityVerdict::ExcludedTrivial => "ExcludedTrivial",
            FeasibilityVerdict::SineFamily => "SineFamily",
            FeasibilityVerdict::QuadraticFamily => "QuadraticFamily",
            FeasibilityVerdict::NonExistence(_) => "NonExistence",
            FeasibilityVerdict::Unknown => "Unknown",
        }
    }

    pub fn branch(&self) -> Option<Branch> {
        match self {
            FeasibilityVerdict::NonExistence(b) => Some(*b),
            _ => None,
        }
    }

    /// Stable key naming the condition that decided the verdict.
    pub fn clause(&self) -> &'static str {
        match self {
            FeasibilityVerdict::ExcludedTrivial => "n_i + m_i <= 2",
            FeasibilityVerdict::SineFamily => "n1 = m1 = n2 = m2 = 2: sine pair",
            FeasibilityVerdict::QuadraticFamily => "n_i = 2, m_i = 1: quadratic pair",
            FeasibilityVerdict::NonExistence(Branch::I) => "m1*m2 > n1*n2",
            FeasibilityVerdict::NonExistence(Branch::II) => "n_i = m_i and n_j > m_j",
            FeasibilityVerdict::NonExistence(Branch::III) => "n_i > m_i and n1*n2 - n_i > 2 for i = 1, 2",
            FeasibilityVerdict::NonExistence(Branch::IV) => "n_i > m_i, m_j > n_j, n_i >= 3, m_j > n_i/(n_i - 2)",
            FeasibilityVerdict::NonExistence(Branch::ExponentBound) => "1/n_i + 1/m_i < 1",
            FeasibilityVerdict::Unknown => "n_i > m_i, m_j > n_j with n_i < 3 or m_j <= n_i/(n_i - 2)",
        }
    }
}

impl fmt::Display for FeasibilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeasibilityVerdict::NonExistence(b) => write!(f, "NonExistence({})", b.label()),
            other => f.write_str(other.tag()),
        }
    }
}

impl Serialize for FeasibilityVerdict {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            branch: Option<&'static str>,
            clause: &'static str,
            tag: &'static str,
        }
        Repr {
            branch: self.branch().map(Branch::label),
            clause: self.clause(),
            tag: self.tag(),
        }
        .serialize(s)
    }
}

/// Classifies `(n1, m1, n2, m2)`. Branches are tried in a fixed order:
/// trivial exclusion, `2i`, `2ii`, `2iii`, `2iv`, the exponent bound, then
/// the two families, and `Unknown` for what remains.
pub fn classify(n1: u32, m1: u32, n2: u32, m2: u32) -> FeasibilityVerdict {
    let (n, m) = ([n1, n2], [m1, m2]);
    if (0..2).any(|i| n[i] + m[i] <= 2) {
        return FeasibilityVerdict::ExcludedTrivial;
    }
    if m1 * m2 > n1 * n2 {
        return FeasibilityVerdict::NonExistence(Branch::I);
    }
    let pairs = [(0, 1), (1, 0)];
    if pairs.iter().any(|&(i, j)| n[i] == m[i] && n[j] > m[j]) {
        return FeasibilityVerdict::NonExistence(Branch::II);
    }
    if (0..2).all(|i| n[i] > m[i] && n1 * n2 - n[i] > 2) {
        return FeasibilityVerdict::NonExistence(Branch::III);
    }
    let fires_iv = |i: usize, j: usize| n[i] > m[i] && m[j] > n[j] && n[i] >= 3 && m[j] * (n[i] - 2) > n[i];
    if pairs.iter().any(|&(i, j)| fires_iv(i, j)) {
        return FeasibilityVerdict::NonExistence(Branch::IV);
    }
    // 1/n + 1/m < 1  <=>  n + m < n*m
    if (0..2).any(|i| n[i] + m[i] < n[i] * m[i]) {
        return FeasibilityVerdict::NonExistence(Branch::ExponentBound);
    }
    if n1 == m1 && n2 == m2 {
        // the exponent bound leaves only n = m = 2 here
        return FeasibilityVerdict::SineFamily;
    }
    if n1 > m1 && n2 > m2 {
        return FeasibilityVerdict::QuadraticFamily;
    }
    FeasibilityVerdict::Unknown
}

/// Result of checking one constraint: the evaluated left-hand side against
/// the required right-hand side.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintCheck {
    pub exact: bool,
    pub lhs: String,
    pub name: String,
    pub passed: bool,
    pub rhs: String,
}

impl fmt::Display for ConstraintCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "pass" } else { "FAIL" };
        let mode = if self.exact { "exact" } else { "numeric" };
        write!(f, "[{status}] {}: {} vs {} ({mode})", self.name, self.lhs, self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum FamilyError {
    #[error("invalid family: {}", failing(.0))]
    InvalidFamily(Vec<ConstraintCheck>),
    #[error("malformed family spec: {0}")]
    Malformed(String),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
}

fn failing(checks: &[ConstraintCheck]) -> String {
    checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub fn all_pass(checks: &[ConstraintCheck]) -> bool {
    checks.iter().all(|c| c.passed)
}

fn ensure(checks: Vec<ConstraintCheck>) -> Result<(), FamilyError> {
    if all_pass(&checks) {
        Ok(())
    } else {
        Err(FamilyError::InvalidFamily(checks))
    }
}

fn close(a: &Scalar, b: &Scalar) -> bool {
    (a.to_complex() - b.to_complex()).norm() <= CONSTRAINT_TOLERANCE * (1.0 + b.to_complex().norm())
}

fn scalar_check(name: &str, lhs: Scalar, rhs: Scalar) -> ConstraintCheck {
    let exact = lhs.is_exact() && rhs.is_exact();
    let passed = if exact { lhs == rhs } else { close(&lhs, &rhs) };
    ConstraintCheck {
        exact,
        lhs: lhs.to_string(),
        name: name.to_string(),
        passed,
        rhs: rhs.to_string(),
    }
}

/// Whether `p` vanishes: exactly, or coefficientwise within tolerance.
fn poly_vanishes(p: &Poly) -> (bool, bool) {
    if p.is_exact() {
        (p.is_zero(), true)
    } else {
        (p.terms().all(|(_, c)| c.to_complex().norm() <= CONSTRAINT_TOLERANCE), false)
    }
}

/// `p(z' + k*c')` where `z'` are the variables `z2..zm`.
fn shift_tail(p: &Poly, c: &ShiftVector, k: i64) -> Poly {
    let c = c.scaled(k);
    p.substitute(&|v| match v {
        Var::Z(j) if *j >= 2 => {
            let cj = c.components().get(j - 1).cloned().unwrap_or_else(Scalar::zero);
            (!cj.is_zero()).then(|| Poly::z(*j).add(&Poly::constant(cj)))
        }
        _ => None,
    })
}

fn periodicity_check(name: &str, q: &Poly, c: &ShiftVector, k: i64) -> ConstraintCheck {
    let diff = shift_tail(q, c, k).sub(q);
    let (passed, exact) = poly_vanishes(&diff);
    ConstraintCheck {
        exact,
        lhs: diff.to_string(),
        name: name.to_string(),
        passed,
        rhs: "0".to_string(),
    }
}

/// Checks that `d` is a constant integer multiple of `pi`.
fn pi_multiple_check(name: &str, d: &Poly) -> ConstraintCheck {
    let lhs = d.to_string();
    let fail = |exact| ConstraintCheck {
        exact,
        lhs: lhs.clone(),
        name: name.to_string(),
        passed: false,
        rhs: "k*pi, k integer".to_string(),
    };
    let Some(value) = d.as_constant().or_else(|| d.is_zero().then(Scalar::zero)) else {
        return fail(d.is_exact());
    };
    let passed = if value.is_exact() {
        value.is_zero()
            || value
                .exact_ratio(&Scalar::pi())
                .is_some_and(|k| k.im == crate::scalar::rat(0, 1) && k.re.is_integer())
    } else {
        let k = value.to_complex() / std::f64::consts::PI;
        (k.re - k.re.round()).abs() <= CONSTRAINT_TOLERANCE && k.im.abs() <= CONSTRAINT_TOLERANCE
    };
    ConstraintCheck {
        passed,
        ..fail(value.is_exact())
    }
}

fn tail_check(name: &str, p: &Poly, m: usize) -> Option<ConstraintCheck> {
    let bad = p.vars().into_iter().find(|v| match v {
        Var::Z(j) => *j == 1 || *j > m,
        Var::Sym(_) => true,
    })?;
    Some(ConstraintCheck {
        exact: true,
        lhs: format!("{p}"),
        name: name.to_string(),
        passed: false,
        rhs: format!("polynomial in z2..z{m} only, found {bad}"),
    })
}

fn dimension_checks(m: usize, c: &ShiftVector, coeffs: &[&[Scalar]]) -> Vec<ConstraintCheck> {
    let mut out = Vec::new();
    if c.len() != m {
        out.push(ConstraintCheck {
            exact: true,
            lhs: c.len().to_string(),
            name: "shift length".into(),
            passed: false,
            rhs: m.to_string(),
        });
    }
    for v in coeffs {
        if v.len() + 1 != m {
            out.push(ConstraintCheck {
                exact: true,
                lhs: v.len().to_string(),
                name: "coefficient count".into(),
                passed: false,
                rhs: (m - 1).to_string(),
            });
        }
    }
    out
}

/// The two exponential conditions on `(A, B)` come in two equivalent forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SineVariant {
    /// `B e^{2i(A c1 + sum A1j cj)} = A` and `A e^{2i(B c1 + sum B1j cj)} = B`
    I,
    /// `AB e^{2i(A c1 + sum A1j cj)} = 1` and `AB e^{2i(B c1 + sum B1j cj)} = 1`
    II,
}

/// `f1 = sin(A z1 + sum_j A1j zj + Q1)`, `f2 = sin(B z1 + sum_j B1j zj + Q2)`
/// for the all-2 system. `a_coeffs[k]` multiplies `z_{k+2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SineFamilySpec {
    pub m: usize,
    pub a: Scalar,
    pub b: Scalar,
    pub a_coeffs: Vec<Scalar>,
    pub b_coeffs: Vec<Scalar>,
    pub q1: Poly,
    pub q2: Poly,
    pub c: ShiftVector,
    pub variant: SineVariant,
}

fn linear_form(lead: &Scalar, coeffs: &[Scalar]) -> Poly {
    let mut p = Poly::z(1).scale(lead);
    for (k, a) in coeffs.iter().enumerate() {
        p = p.add(&Poly::z(k + 2).scale(a));
    }
    p
}

/// `lead*c1 + sum coeffs[k]*c_{k+2}`.
fn phase_at(lead: &Scalar, coeffs: &[Scalar], c: &ShiftVector) -> Scalar {
    let cs = c.components();
    let mut acc = lead * &cs[0];
    for (k, a) in coeffs.iter().enumerate() {
        if let Some(ck) = cs.get(k + 1) {
            acc = &acc + &(a * ck);
        }
    }
    acc
}

fn two_i_exp(phase: &Scalar) -> Scalar {
    scalar_exp(&(&Scalar::gauss(crate::scalar::GaussRat::new(crate::scalar::rat(0, 1), crate::scalar::rat(2, 1))) * phase))
}

fn one_i_exp(phase: &Scalar) -> Scalar {
    scalar_exp(&(&Scalar::i() * phase))
}

/// The variant's two exponential conditions for given `(A, B)`.
fn exponential_checks(
    a: &Scalar,
    b: &Scalar,
    a_coeffs: &[Scalar],
    b_coeffs: &[Scalar],
    c: &ShiftVector,
    variant: SineVariant,
) -> [ConstraintCheck; 2] {
    let ea = two_i_exp(&phase_at(a, a_coeffs, c));
    let eb = two_i_exp(&phase_at(b, b_coeffs, c));
    match variant {
        SineVariant::I => [
            scalar_check("B*exp(2i(A c1 + sum A1j cj)) = A", b * &ea, a.clone()),
            scalar_check("A*exp(2i(B c1 + sum B1j cj)) = B", a * &eb, b.clone()),
        ],
        SineVariant::II => {
            let ab = a * b;
            [
                scalar_check("A*B*exp(2i(A c1 + sum A1j cj)) = 1", &ab * &ea, Scalar::one()),
                scalar_check("A*B*exp(2i(B c1 + sum B1j cj)) = 1", &ab * &eb, Scalar::one()),
            ]
        }
    }
}

/// Checks every constraint of the sine family. Besides `A^2 = B^2 = 1`,
/// `2c`-periodicity of `Q1`, `Q2` and the variant's exponential conditions,
/// the phases of the two sines must match up to a multiple of `pi` after the
/// shift: with `e = AB`,
/// `L2(z+c) + Q2(z'+c') - e(L1(z) + Q1(z'))` and
/// `L1(z+c) + Q1(z'+c') - e(L2(z) + Q2(z'))` must be constants in `pi*Z`.
pub fn validate_sine(spec: &SineFamilySpec) -> Vec<ConstraintCheck> {
    let mut out = dimension_checks(spec.m, &spec.c, &[&spec.a_coeffs, &spec.b_coeffs]);
    if !out.is_empty() {
        return out;
    }
    out.extend(tail_check("Q1 depends on z2..zm only", &spec.q1, spec.m));
    out.extend(tail_check("Q2 depends on z2..zm only", &spec.q2, spec.m));
    if !out.is_empty() {
        return out;
    }
    out.push(scalar_check("A^2 = 1", spec.a.pow(2), Scalar::one()));
    out.push(scalar_check("B^2 = 1", spec.b.pow(2), Scalar::one()));
    out.push(periodicity_check("Q1(z'+2c') = Q1(z')", &spec.q1, &spec.c, 2));
    out.push(periodicity_check("Q2(z'+2c') = Q2(z')", &spec.q2, &spec.c, 2));
    out.extend(exponential_checks(
        &spec.a,
        &spec.b,
        &spec.a_coeffs,
        &spec.b_coeffs,
        &spec.c,
        spec.variant,
    ));
    let eps = &spec.a * &spec.b;
    let x1 = linear_form(&spec.a, &spec.a_coeffs).add(&spec.q1);
    let x2 = linear_form(&spec.b, &spec.b_coeffs).add(&spec.q2);
    let shifted = |x: &Poly| {
        let mut s = shift_tail(x, &spec.c, 1);
        s = s.substitute(&|v| match v {
            Var::Z(1) if !spec.c.components()[0].is_zero() => {
                Some(Poly::z(1).add(&Poly::constant(spec.c.components()[0].clone())))
            }
            _ => None,
        });
        s
    };
    out.push(pi_multiple_check(
        "L2(z+c) + Q2(z'+c') - AB(L1 + Q1) in pi*Z",
        &shifted(&x2).sub(&x1.scale(&eps)),
    ));
    out.push(pi_multiple_check(
        "L1(z+c) + Q1(z'+c') - AB(L2 + Q2) in pi*Z",
        &shifted(&x1).sub(&x2.scale(&eps)),
    ));
    out
}

/// Builds the sine pair after validating the spec.
pub fn build_sine_pair(spec: &SineFamilySpec) -> Result<(Expr, Expr), FamilyError> {
    ensure(validate_sine(spec))?;
    Ok(sine_pair_unchecked(spec))
}

/// The sine pair without validation, for perturbation experiments.
pub fn sine_pair_unchecked(spec: &SineFamilySpec) -> (Expr, Expr) {
    let x1 = linear_form(&spec.a, &spec.a_coeffs).add(&spec.q1);
    let x2 = linear_form(&spec.b, &spec.b_coeffs).add(&spec.q2);
    let sin = |x: &Poly| Expr::sin(Expr::from_poly(x)).expect("polynomial arguments are admissible");
    (sin(&x1), sin(&x2))
}

impl SineFamilySpec {
    pub fn system(&self) -> SystemSpec {
        SystemSpec::new(self.m, (2, 2, 2, 2), self.c.clone())
    }
}

/// The `(A, B) in {1, -1}^2` meeting the variant's exponential conditions.
pub fn solve_admissible_ab(
    m: usize,
    a_coeffs: &[Scalar],
    b_coeffs: &[Scalar],
    c: &ShiftVector,
    variant: SineVariant,
) -> Vec<(i64, i64)> {
    if c.len() != m || a_coeffs.len() + 1 != m || b_coeffs.len() + 1 != m {
        return Vec::new();
    }
    let signs = [1i64, -1];
    signs
        .iter()
        .flat_map(|&a| signs.iter().map(move |&b| (a, b)))
        .filter(|&(a, b)| {
            let checks = exponential_checks(&Scalar::from_int(a), &Scalar::from_int(b), a_coeffs, b_coeffs, c, variant);
            all_pass(&checks)
        })
        .collect()
}

/// `f1 = 1 + K1/4 z1^2 + z1 g - K1^2 g^2`, `f2 = 1 + K2/4 z1^2 + z1 g2 - K2^2 g2^2`
/// with `g2 = -K1 g`, for the `(2,1,2,1)` system.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticFamilySpec {
    pub m: usize,
    pub k1: Scalar,
    pub k2: Scalar,
    /// The opaque function `g1 = g`; its registered rules drive the shift.
    pub g: Arc<OpaqueSymbol>,
    pub c: ShiftVector,
}

impl QuadraticFamilySpec {
    pub fn system(&self) -> SystemSpec {
        SystemSpec::new(self.m, (2, 1, 2, 1), self.c.clone())
    }
}

fn increment_check(name: &str, g: &OpaqueSymbol, shift: &ShiftVector, required: Scalar) -> ConstraintCheck {
    match g.shift_increment(shift.components()) {
        Some(s) => scalar_check(name, s, required),
        None => ConstraintCheck {
            exact: true,
            lhs: format!("no rule for shift {shift}"),
            name: name.to_string(),
            passed: false,
            rhs: required.to_string(),
        },
    }
}

fn symbol_checks(g: &OpaqueSymbol, m: usize) -> Option<ConstraintCheck> {
    let bad = g.depends_on().iter().find(|&&j| j > m)?;
    Some(ConstraintCheck {
        exact: true,
        lhs: format!("{} depends on z{bad}", g.name()),
        name: "symbol variables within z2..zm".into(),
        passed: false,
        rhs: format!("m = {m}"),
    })
}

/// Checks `K1^3 = K2^3 = -1`, the coupling `K2 = -K1^2`, and the shift rule
/// `g(z'+c') - g(z') = -K1 c1 / 2` that the residuals use. The doubled rule
/// `g(z'+2c') - g(z') = -K1 c1` is reported as well.
pub fn validate_quadratic(spec: &QuadraticFamilySpec) -> Vec<ConstraintCheck> {
    let mut out = dimension_checks(spec.m, &spec.c, &[]);
    out.extend(symbol_checks(&spec.g, spec.m));
    if !out.is_empty() {
        return out;
    }
    let minus_one = Scalar::from_int(-1);
    out.push(scalar_check("K1^3 = -1", spec.k1.pow(3), minus_one.clone()));
    out.push(scalar_check("K2^3 = -1", spec.k2.pow(3), minus_one));
    out.push(scalar_check("K2 = -K1^2", spec.k2.clone(), -&spec.k1.pow(2)));
    let c1 = &spec.c.components()[0];
    let half = Scalar::ratio(-1, 2);
    out.push(increment_check(
        "g(z'+c') - g(z') = -K1*c1/2",
        &spec.g,
        &spec.c,
        &(&half * &spec.k1) * c1,
    ));
    out.push(increment_check(
        "g(z'+2c') - g(z') = -K1*c1",
        &spec.g,
        &spec.c.scaled(2),
        -&(&spec.k1 * c1),
    ));
    out
}

fn quadratic_member(k: &Scalar, g: &Poly) -> Poly {
    let z1 = Poly::z(1);
    Poly::constant(Scalar::one())
        .add(&z1.pow(2).scale(&k.div(&Scalar::from_int(4))))
        .add(&z1.mul(g))
        .sub(&g.pow(2).scale(&k.pow(2)))
}

pub fn build_quadratic_pair(spec: &QuadraticFamilySpec) -> Result<(Expr, Expr), FamilyError> {
    ensure(validate_quadratic(spec))?;
    Ok(quadratic_pair_unchecked(spec))
}

pub fn quadratic_pair_unchecked(spec: &QuadraticFamilySpec) -> (Expr, Expr) {
    let g = Poly::var(Var::Sym(spec.g.name().into()));
    let g2 = g.scale(&-&spec.k1);
    let table = [(spec.g.name().to_string(), spec.g.clone())].into_iter().collect();
    (
        poly_to_expr(&quadratic_member(&spec.k1, &g), &table),
        poly_to_expr(&quadratic_member(&spec.k2, &g2), &table),
    )
}

/// `f = sin(A z1 + sum_j Aj zj + P)` for the single equation
/// `(d f/d z1)^2 + f(z+c)^2 = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleSineSpec {
    pub m: usize,
    pub a: Scalar,
    pub coeffs: Vec<Scalar>,
    pub p: Poly,
    pub c: ShiftVector,
}

/// Checks `A^2 = 1`, `A e^{i(A c1 + sum Aj cj)} = 1` and `P(z'+c') = P(z')`.
pub fn validate_single_sine(spec: &SingleSineSpec) -> Vec<ConstraintCheck> {
    let mut out = dimension_checks(spec.m, &spec.c, &[&spec.coeffs]);
    out.extend(tail_check("P depends on z2..zm only", &spec.p, spec.m));
    if !out.is_empty() {
        return out;
    }
    out.push(scalar_check("A^2 = 1", spec.a.pow(2), Scalar::one()));
    let e = one_i_exp(&phase_at(&spec.a, &spec.coeffs, &spec.c));
    out.push(scalar_check("A*exp(i(A c1 + sum Aj cj)) = 1", &spec.a * &e, Scalar::one()));
    out.push(periodicity_check("P(z'+c') = P(z')", &spec.p, &spec.c, 1));
    out
}

pub fn build_single_eq_sine(spec: &SingleSineSpec) -> Result<Expr, FamilyError> {
    ensure(validate_single_sine(spec))?;
    let x = linear_form(&spec.a, &spec.coeffs).add(&spec.p);
    Ok(Expr::sin(Expr::from_poly(&x)).expect("polynomial arguments are admissible"))
}

/// `f = 1 - z1^2/4 + z1 g - g^2` for the single equation
/// `(d f/d z1)^2 + f(z+c) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleQuadraticSpec {
    pub m: usize,
    pub g: Arc<OpaqueSymbol>,
    pub c: ShiftVector,
}

/// Checks `g(z'+c') - g(z') = c1/2`.
pub fn validate_single_quadratic(spec: &SingleQuadraticSpec) -> Vec<ConstraintCheck> {
    let mut out = dimension_checks(spec.m, &spec.c, &[]);
    out.extend(symbol_checks(&spec.g, spec.m));
    if !out.is_empty() {
        return out;
    }
    let required = &Scalar::ratio(1, 2) * &spec.c.components()[0];
    out.push(increment_check("g(z'+c') - g(z') = c1/2", &spec.g, &spec.c, required));
    out
}

pub fn build_single_eq_quadratic(spec: &SingleQuadraticSpec) -> Result<Expr, FamilyError> {
    ensure(validate_single_quadratic(spec))?;
    let g = Poly::var(Var::Sym(spec.g.name().into()));
    let table = [(spec.g.name().to_string(), spec.g.clone())].into_iter().collect();
    Ok(poly_to_expr(&quadratic_member(&Scalar::from_int(-1), &g), &table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expr;
    use crate::symbol::SymbolRegistry;
    use crate::verify::{verify_system, Verdict, Verifier};

    fn pi_times(n: i64, d: i64) -> Scalar {
        &Scalar::ratio(n, d) * &Scalar::pi()
    }

    fn poly(text: &str, m: usize) -> Poly {
        parse_expr(text, m, &SymbolRegistry::new()).unwrap().to_poly().unwrap()
    }

    fn one() -> Scalar {
        Scalar::one()
    }

    fn first_c3() -> SineFamilySpec {
        SineFamilySpec {
            m: 3,
            a: one(),
            b: one(),
            a_coeffs: vec![one(), one()],
            b_coeffs: vec![one(), one()],
            q1: poly("(z2 - z3)^2", 3),
            q2: poly("(z2 - z3)^2 + pi", 3),
            c: ShiftVector::new(vec![Scalar::zero(), pi_times(1, 2), pi_times(1, 2)]),
            variant: SineVariant::I,
        }
    }

    #[test]
    fn classifier_table() {
        use FeasibilityVerdict::*;
        assert_eq!(classify(2, 2, 2, 2), SineFamily);
        assert_eq!(classify(2, 2, 2, 1), NonExistence(Branch::II));
        assert_eq!(classify(2, 1, 2, 2), NonExistence(Branch::II));
        assert_eq!(classify(3, 1, 2, 1), NonExistence(Branch::III));
        assert_eq!(classify(2, 1, 2, 1), QuadraticFamily);
        assert_eq!(classify(4, 1, 1, 3), NonExistence(Branch::IV));
        assert_eq!(classify(3, 1, 1, 2), Unknown);
        assert_eq!(classify(1, 3, 1, 3), NonExistence(Branch::I));
        assert_eq!(classify(1, 1, 2, 2), ExcludedTrivial);
        assert_eq!(classify(3, 3, 3, 3), NonExistence(Branch::ExponentBound));
    }

    #[test]
    fn verdict_json_has_tag_branch_clause() {
        let v = serde_json::to_value(classify(2, 2, 2, 1)).unwrap();
        assert_eq!(v["tag"], "NonExistence");
        assert_eq!(v["branch"], "2ii");
        assert_eq!(v["clause"], "n_i = m_i and n_j > m_j");
    }

    #[test]
    fn first_c3_example_validates_exactly() {
        let checks = validate_sine(&first_c3());
        assert!(all_pass(&checks), "{checks:?}");
        assert!(checks.iter().all(|c| c.exact));
        let (f1, f2) = build_sine_pair(&first_c3()).unwrap();
        let rep = verify_system(&first_c3().system(), &f1, &f2).unwrap();
        assert_eq!(rep.verdict, Verdict::IdentityZero);
    }

    #[test]
    fn mismatched_signs_fail_variant_one() {
        let spec = SineFamilySpec {
            m: 2,
            a: one(),
            b: Scalar::from_int(-1),
            a_coeffs: vec![one()],
            b_coeffs: vec![one()],
            q1: Poly::zero(),
            q2: Poly::zero(),
            c: ShiftVector::new(vec![pi_times(2, 1), Scalar::zero()]),
            variant: SineVariant::I,
        };
        let checks = validate_sine(&spec);
        let cond = checks.iter().find(|c| c.name.starts_with("B*exp")).unwrap();
        assert!(!cond.passed);
        assert_eq!(cond.lhs, "-1");
        assert!(build_sine_pair(&spec).is_err());
    }

    #[test]
    fn admissible_sign_pairs() {
        let c = ShiftVector::new(vec![pi_times(2, 1), Scalar::zero()]);
        let got = solve_admissible_ab(2, &[one()], &[one()], &c, SineVariant::I);
        assert_eq!(got, vec![(1, 1), (-1, -1)]);
        let got = solve_admissible_ab(2, &[one()], &[one()], &c, SineVariant::II);
        assert_eq!(got, vec![(1, 1), (-1, -1)]);
    }

    #[test]
    fn quadratic_example_validates() {
        let mut r = SymbolRegistry::new();
        r.declare("g", [2, 3]).unwrap();
        r.add_rule("g", vec![Scalar::zero(), Scalar::pi(), Scalar::pi()], Scalar::zero()).unwrap();
        let spec = QuadraticFamilySpec {
            m: 3,
            k1: Scalar::from_int(-1),
            k2: Scalar::from_int(-1),
            g: r.get("g").unwrap().clone(),
            c: ShiftVector::new(vec![Scalar::zero(), Scalar::pi(), Scalar::pi()]),
        };
        assert!(all_pass(&validate_quadratic(&spec)));
        let (f1, f2) = build_quadratic_pair(&spec).unwrap();
        let expected = parse_expr("1 - 1/4*z1^2 + z1*g - g^2", 3, &r).unwrap();
        assert_eq!(f1.to_poly().unwrap(), expected.to_poly().unwrap());
        let rep = Verifier::new(r).verify_system(&spec.system(), &f1, &f2).unwrap();
        assert_eq!(rep.verdict, Verdict::IdentityZero);
    }

    #[test]
    fn nonzero_c1_needs_a_matching_rule() {
        let mut r = SymbolRegistry::new();
        r.declare("g", [2, 3]).unwrap();
        r.add_rule("g", vec![one(), Scalar::pi(), Scalar::pi()], Scalar::zero()).unwrap();
        let spec = QuadraticFamilySpec {
            m: 3,
            k1: Scalar::from_int(-1),
            k2: Scalar::from_int(-1),
            g: r.get("g").unwrap().clone(),
            c: ShiftVector::new(vec![one(), Scalar::pi(), Scalar::pi()]),
        };
        let checks = validate_quadratic(&spec);
        let doubled = checks.iter().find(|c| c.name.contains("2c'")).unwrap();
        assert!(!doubled.passed);
        assert_eq!(doubled.lhs, "0");
        assert_eq!(doubled.rhs, "1");
    }

    #[test]
    fn single_equation_sine() {
        let spec = SingleSineSpec {
            m: 2,
            a: one(),
            coeffs: vec![Scalar::from_int(2)],
            p: poly("z2^3 + 1", 2),
            c: ShiftVector::new(vec![pi_times(2, 1), Scalar::zero()]),
        };
        let f = build_single_eq_sine(&spec).unwrap();
        let rep = Verifier::default().verify_single(2, 2, 2, &spec.c, &f).unwrap();
        assert_eq!(rep.verdict, Verdict::IdentityZero);
        let flipped = SingleSineSpec {
            a: Scalar::from_int(-1),
            coeffs: vec![],
            p: Poly::zero(),
            m: 1,
            c: ShiftVector::new(vec![Scalar::pi()]),
        };
        let f = build_single_eq_sine(&flipped).unwrap();
        let rep = Verifier::default().verify_single(1, 2, 2, &flipped.c, &f).unwrap();
        assert_eq!(rep.verdict, Verdict::IdentityZero);
    }
}

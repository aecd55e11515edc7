//! Exact complex scalars.
//!
//! A [`Scalar`] is either exact, an element of `Q(i)[pi]` (a polynomial in the
//! transcendental constant pi with Gaussian rational coefficients), or an
//! inexact complex double. Exact equality is decidable because pi is
//! transcendental over `Q(i)`: two exact scalars are equal iff their
//! coefficient vectors agree.
//!
//! The complex double value is always populated. For exact scalars it is
//! recomputed from the exact coefficients after every operation, so it never
//! accumulates rounding drift from a chain of operations.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A Gaussian rational `re + im*i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn zero() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        GaussRat::new(BigRational::one(), BigRational::zero())
    }

    pub fn i() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        GaussRat::new(BigRational::from_integer(n.into()), BigRational::zero())
    }

    pub fn real(re: BigRational) -> Self {
        GaussRat::new(re, BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }

    pub fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), -self.im.clone())
    }

    /// `|self|^2`, always a non-negative rational.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<GaussRat> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(GaussRat::new(&self.re / &n, -(&self.im / &n)))
    }

    /// `i^k` for any integer `k`.
    pub fn i_pow(k: i64) -> GaussRat {
        match k.rem_euclid(4) {
            0 => GaussRat::from_int(1),
            1 => GaussRat::i(),
            2 => GaussRat::from_int(-1),
            _ => -GaussRat::i(),
        }
    }
}

impl<'a> Add<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn add(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl<'a> Sub<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn sub(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl<'a> Mul<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn mul(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re, -self.im)
    }
}

fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Oversized numerator/denominator; fall back to a ratio of logs.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub(crate) fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A complex scalar, exact in `Q(i)[pi]` or an inexact double.
#[derive(Clone)]
pub struct Scalar {
    /// Coefficients of `pi^0, pi^1, ...`; trailing zeros trimmed. `None` when inexact.
    exact: Option<Vec<GaussRat>>,
    value: Complex64,
}

impl Scalar {
    fn from_coeffs(mut coeffs: Vec<GaussRat>) -> Scalar {
        while coeffs.last().is_some_and(GaussRat::is_zero) {
            coeffs.pop();
        }
        let value = eval_pi_poly(&coeffs);
        Scalar { exact: Some(coeffs), value }
    }

    pub fn zero() -> Scalar {
        Scalar::from_coeffs(Vec::new())
    }

    pub fn one() -> Scalar {
        Scalar::from_int(1)
    }

    pub fn i() -> Scalar {
        Scalar::gauss(GaussRat::i())
    }

    pub fn pi() -> Scalar {
        Scalar::from_coeffs(vec![GaussRat::zero(), GaussRat::one()])
    }

    pub fn from_int(n: i64) -> Scalar {
        Scalar::gauss(GaussRat::from_int(n))
    }

    pub fn from_bigint(n: BigInt) -> Scalar {
        Scalar::gauss(GaussRat::real(BigRational::from_integer(n)))
    }

    /// The rational `n/d`. Panics if `d == 0`.
    pub fn ratio(n: i64, d: i64) -> Scalar {
        Scalar::gauss(GaussRat::real(rat(n, d)))
    }

    pub fn rational(r: BigRational) -> Scalar {
        Scalar::gauss(GaussRat::real(r))
    }

    pub fn gauss(g: GaussRat) -> Scalar {
        Scalar::from_coeffs(vec![g])
    }

    /// `rat_part + pi_part * pi`.
    pub fn from_parts(rat_part: GaussRat, pi_part: GaussRat) -> Scalar {
        Scalar::from_coeffs(vec![rat_part, pi_part])
    }

    /// An inexact scalar.
    pub fn from_complex(value: Complex64) -> Scalar {
        Scalar { exact: None, value }
    }

    pub fn from_f64(value: f64) -> Scalar {
        Scalar::from_complex(Complex64::new(value, 0.0))
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Exact zero, or an inexact value that is exactly `0.0`.
    pub fn is_zero(&self) -> bool {
        match &self.exact {
            Some(c) => c.is_empty(),
            None => self.value == Complex64::new(0.0, 0.0),
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(&self.exact, Some(c) if c.len() == 1 && c[0] == GaussRat::one())
    }

    /// Coefficients of `pi^k` for an exact scalar.
    pub fn pi_coeffs(&self) -> Option<&[GaussRat]> {
        self.exact.as_deref()
    }

    /// The `pi^0` coefficient of an exact scalar.
    pub fn rat_part(&self) -> Option<GaussRat> {
        self.exact
            .as_ref()
            .map(|c| c.first().cloned().unwrap_or_else(GaussRat::zero))
    }

    /// The `pi^1` coefficient of an exact scalar.
    pub fn pi_part(&self) -> Option<GaussRat> {
        self.exact
            .as_ref()
            .map(|c| c.get(1).cloned().unwrap_or_else(GaussRat::zero))
    }

    /// The scalar as a Gaussian rational, when it has no pi component.
    pub fn as_gauss(&self) -> Option<GaussRat> {
        match self.exact.as_deref() {
            Some([]) => Some(GaussRat::zero()),
            Some([g]) => Some(g.clone()),
            _ => None,
        }
    }

    /// The scalar as an integer, when it is one.
    pub fn as_integer(&self) -> Option<BigInt> {
        let g = self.as_gauss()?;
        (g.im.is_zero() && g.re.is_integer()).then(|| g.re.to_integer())
    }

    pub fn to_complex(&self) -> Complex64 {
        self.value
    }

    /// Demote to an inexact scalar carrying the same value.
    pub fn to_inexact(&self) -> Scalar {
        Scalar::from_complex(self.value)
    }

    pub fn conj(&self) -> Scalar {
        match &self.exact {
            Some(c) => Scalar::from_coeffs(c.iter().map(GaussRat::conj).collect()),
            None => Scalar::from_complex(self.value.conj()),
        }
    }

    pub fn pow(&self, n: u32) -> Scalar {
        let mut acc = Scalar::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Division. Exact when the divisor is a non-zero Gaussian rational;
    /// a divisor involving pi demotes the result to an inexact scalar.
    /// Division by zero yields an inexact non-finite value.
    pub fn div(&self, divisor: &Scalar) -> Scalar {
        if let (Some(c), Some(inv)) = (&self.exact, divisor.as_gauss().and_then(|g| g.inv())) {
            return Scalar::from_coeffs(c.iter().map(|x| x * &inv).collect());
        }
        Scalar::from_complex(self.value / divisor.value)
    }

    /// `q` with `self == q * other`, when such a Gaussian rational exists.
    pub fn exact_ratio(&self, other: &Scalar) -> Option<GaussRat> {
        let a = self.exact.as_ref()?;
        let b = other.exact.as_ref()?;
        if b.is_empty() {
            return None;
        }
        if a.is_empty() {
            return Some(GaussRat::zero());
        }
        if a.len() != b.len() {
            return None;
        }
        let lead = b.iter().position(|x| !x.is_zero())?;
        let q = &a[lead] * &b[lead].inv()?;
        a.iter()
            .zip(b)
            .all(|(x, y)| *x == y * &q)
            .then_some(q)
    }

    /// Splits an exact scalar `s` as `s = i*pi*k/2 + r`, where the `i*pi`
    /// coefficient of `r` lies in `[0, 1/2)`, so that `e^s = i^k * e^r`.
    /// Returns `(k mod 4, r)`.
    pub fn exp_split(&self) -> Option<(u8, Scalar)> {
        let coeffs = self.exact.as_ref()?;
        let pi_coef = coeffs.get(1).cloned().unwrap_or_else(GaussRat::zero);
        let twice = &pi_coef.im * BigRational::from_integer(2.into());
        let k = twice.floor().to_integer();
        let mut rest = coeffs.clone();
        if rest.len() < 2 {
            rest.resize(2, GaussRat::zero());
        }
        rest[1].im = &rest[1].im - BigRational::new(k.clone(), 2.into());
        let k_mod = k.mod_floor(&BigInt::from(4)).to_u8().unwrap_or(0);
        Some((k_mod, Scalar::from_coeffs(rest)))
    }

    /// `e^s`. Exact (a fourth root of unity) when `s` is `i*pi*p/q` with
    /// `q` dividing 2, otherwise an inexact scalar.
    pub fn exp(&self) -> Scalar {
        if let Some((k, rest)) = self.exp_split() {
            if rest.is_zero() {
                return Scalar::gauss(GaussRat::i_pow(k as i64));
            }
        }
        Scalar::from_complex(self.value.exp())
    }

    fn zip_exact(&self, other: &Scalar, f: impl Fn(&GaussRat, &GaussRat) -> GaussRat) -> Option<Scalar> {
        let a = self.exact.as_ref()?;
        let b = other.exact.as_ref()?;
        let zero = GaussRat::zero();
        let n = a.len().max(b.len());
        Some(Scalar::from_coeffs(
            (0..n)
                .map(|k| f(a.get(k).unwrap_or(&zero), b.get(k).unwrap_or(&zero)))
                .collect(),
        ))
    }
}

/// `e^s` for a scalar, canonicalized to an exact root of unity where possible.
pub fn scalar_exp(s: &Scalar) -> Scalar {
    s.exp()
}

fn eval_pi_poly(coeffs: &[GaussRat]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * std::f64::consts::PI + c.to_complex();
    }
    acc
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        self.zip_exact(o, |x, y| x + y)
            .unwrap_or_else(|| Scalar::from_complex(self.value + o.value))
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        self.zip_exact(o, |x, y| x - y)
            .unwrap_or_else(|| Scalar::from_complex(self.value - o.value))
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        match (&self.exact, &o.exact) {
            (Some(a), Some(b)) => {
                if a.is_empty() || b.is_empty() {
                    return Scalar::zero();
                }
                let mut out = vec![GaussRat::zero(); a.len() + b.len() - 1];
                for (i, x) in a.iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    for (j, y) in b.iter().enumerate() {
                        out[i + j] = &out[i + j] + &(x * y);
                    }
                }
                Scalar::from_coeffs(out)
            }
            _ => Scalar::from_complex(self.value * o.value),
        }
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, o: Scalar) -> Scalar {
        &self + &o
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, o: Scalar) -> Scalar {
        &self - &o
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, o: Scalar) -> Scalar {
        &self * &o
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match &self.exact {
            Some(c) => Scalar::from_coeffs(c.iter().cloned().map(Neg::neg).collect()),
            None => Scalar::from_complex(-self.value),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Scalar {
        Scalar::from_int(n)
    }
}

fn norm_f64(x: f64) -> u64 {
    if x == 0.0 {
        0.0f64.to_bits()
    } else {
        x.to_bits()
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Scalar) -> bool {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => a == b,
            (None, None) => self.value == other.value,
            _ => false,
        }
    }
}

impl Eq for Scalar {}

impl Hash for Scalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.exact {
            Some(c) => {
                0u8.hash(state);
                c.hash(state);
            }
            None => {
                1u8.hash(state);
                norm_f64(self.value.re).hash(state);
                norm_f64(self.value.im).hash(state);
            }
        }
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Scalar) -> Ordering {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => a.len().cmp(&b.len()).then_with(|| a.cmp(b)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => {
                let z = |x: f64| if x == 0.0 { 0.0 } else { x };
                z(self.value.re)
                    .total_cmp(&z(other.value.re))
                    .then_with(|| z(self.value.im).total_cmp(&z(other.value.im)))
            }
        }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Scalar) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({self})")
    }
}

fn fmt_rat_factor(r: &BigRational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("({}/{})", r.numer(), r.denom())
    }
}

/// One signed monomial `r * pi^k [* i]` with a positive rational `r`.
fn fmt_term(mag: &BigRational, k: usize, imag: bool) -> String {
    let mut parts = Vec::new();
    let unit = mag.is_one();
    if !unit || (k == 0 && !imag) {
        parts.push(if k == 0 && !imag {
            if mag.is_integer() {
                mag.to_integer().to_string()
            } else {
                format!("{}/{}", mag.numer(), mag.denom())
            }
        } else {
            fmt_rat_factor(mag)
        });
    }
    match k {
        0 => {}
        1 => parts.push("pi".to_string()),
        _ => parts.push(format!("pi^{k}")),
    }
    if imag {
        parts.push("i".to_string());
    }
    parts.join("*")
}

fn fmt_float(x: f64) -> String {
    let s = format!("{x}");
    if s.contains('.') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

impl fmt::Display for Scalar {
    /// Canonical text form, reparseable by the expression grammar.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(coeffs) = &self.exact else {
            let v = self.value;
            if v.im == 0.0 {
                return f.write_str(&fmt_float(v.re));
            }
            let sign = if v.im.is_sign_negative() { "-" } else { "+" };
            return write!(f, "{} {} {}*i", fmt_float(v.re), sign, fmt_float(v.im.abs()));
        };
        let mut terms: Vec<(bool, String)> = Vec::new();
        for (k, c) in coeffs.iter().enumerate() {
            for (part, imag) in [(&c.re, false), (&c.im, true)] {
                if part.is_zero() {
                    continue;
                }
                terms.push((part.is_negative(), fmt_term(&part.abs(), k, imag)));
            }
        }
        if terms.is_empty() {
            return f.write_str("0");
        }
        for (idx, (neg, body)) in terms.iter().enumerate() {
            match (idx, neg) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => f.write_str(body)?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_even_multiple_of_pi_i_is_one() {
        let s = &Scalar::from_int(4) * &(&Scalar::pi() * &Scalar::i());
        let e = scalar_exp(&s);
        assert!(e.is_exact());
        assert_eq!(e, Scalar::one());
    }

    #[test]
    fn euler_identity_is_exact() {
        let e = scalar_exp(&(&Scalar::pi() * &Scalar::i()));
        assert_eq!(e, Scalar::from_int(-1));
        let half = scalar_exp(&(&Scalar::ratio(1, 2) * &(&Scalar::pi() * &Scalar::i())));
        assert_eq!(half, Scalar::i());
        let neg_half = scalar_exp(&(&Scalar::ratio(-1, 2) * &(&Scalar::pi() * &Scalar::i())));
        assert_eq!(neg_half, -Scalar::i());
    }

    #[test]
    fn exp_of_i_is_inexact() {
        let e = scalar_exp(&Scalar::i());
        assert!(!e.is_exact());
        let v = e.to_complex();
        assert!((v.re - 1.0f64.cos()).abs() < 1e-15);
        assert!((v.im - 1.0f64.sin()).abs() < 1e-15);
        assert!((v.re - 0.540302).abs() < 1e-6 && (v.im - 0.841471).abs() < 1e-6);
    }

    #[test]
    fn third_root_phase_stays_inexact() {
        let s = &Scalar::ratio(1, 3) * &(&Scalar::pi() * &Scalar::i());
        let e = scalar_exp(&s);
        assert!(!e.is_exact());
        let cube = e.pow(3).to_complex();
        assert!((cube + 1.0).norm() < 1e-12);
    }

    #[test]
    fn pi_squared_stays_exact() {
        let p2 = &Scalar::pi() * &Scalar::pi();
        assert!(p2.is_exact());
        assert_eq!(p2.pi_coeffs().unwrap().len(), 3);
        let back = &p2 - &(&Scalar::pi() * &Scalar::pi());
        assert!(back.is_zero());
    }

    #[test]
    fn division_by_pi_demotes() {
        let q = Scalar::one().div(&Scalar::pi());
        assert!(!q.is_exact());
        assert!((q.to_complex().re - 1.0 / std::f64::consts::PI).abs() < 1e-15);
        let r = Scalar::pi().div(&Scalar::from_int(2));
        assert!(r.is_exact());
    }

    #[test]
    fn exact_ratio_detects_multiples() {
        let two_pi = &Scalar::from_int(2) * &Scalar::pi();
        let six_pi = &Scalar::from_int(6) * &Scalar::pi();
        assert_eq!(six_pi.exact_ratio(&two_pi), Some(GaussRat::from_int(3)));
        let mixed = &Scalar::pi() + &Scalar::one();
        assert_eq!(mixed.exact_ratio(&two_pi), None);
        assert_eq!(Scalar::zero().exact_ratio(&two_pi), Some(GaussRat::zero()));
    }

    #[test]
    fn display_canonical_forms() {
        let s = &(&Scalar::ratio(1, 2) * &Scalar::pi()) * &Scalar::i();
        assert_eq!(s.to_string(), "(1/2)*pi*i");
        assert_eq!(Scalar::ratio(-3, 4).to_string(), "-3/4");
        assert_eq!((&Scalar::from_int(2) + &Scalar::i()).to_string(), "2 + i");
        assert_eq!(Scalar::zero().to_string(), "0");
        assert_eq!((&Scalar::pi() * &Scalar::pi()).to_string(), "pi^2");
    }

    #[test]
    fn inexact_equality_ignores_signed_zero() {
        let a = Scalar::from_complex(Complex64::new(0.0, 1.0));
        let b = Scalar::from_complex(Complex64::new(-0.0, 1.0));
        assert_eq!(a, b);
        assert_eq!(a.cmp(&b), Ordering::Equal);
    }
}

//! Bounded numerical probes: least-squares fits of exponential-polynomial
//! ansatze to the system, used to rediscover solvable cases and to collect
//! evidence (never proof) for non-existence claims.
//!
//! Each function is modelled as
//! `p(z) + sum_{mu in {l, -l, 2l, -2l}} (a_mu + sum_j b_{mu,j} z_j) e^{mu . z}`
//! with `p` of total degree at most `d` and the frequency `l` taken from a
//! finite lattice, one lattice element per restart.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{ShiftVector, SystemSpec};
use crate::error::SearchError;
use crate::families::{classify, FeasibilityVerdict};
use crate::verify::derived_seed;

/// Number of quasi-random sample points.
pub const GRID_POINTS: usize = 64;
/// Radius of the sampling polydisc.
pub const GRID_RADIUS: f64 = 1.5;
/// Minimum root mean square distance on the grid between each function's
/// exponential part and affine functions, so that polynomial
/// (non-transcendental) solutions are excluded.
pub const TRANSCENDENCE_FLOOR: f64 = 0.2;
/// Bound on the Euclidean norm of each function's coefficient vector. Without
/// it, large nearly cancelling exponential combinations imitate polynomials
/// on the grid.
pub const COEFFICIENT_CAP: f64 = 5.0;
/// Weight of the floor rows in the least-squares surrogate, comparable to
/// a residual spread over the whole grid.
const FLOOR_WEIGHT: f64 = 8.0;
/// A probe counts as evidence of non-existence above this residual.
pub const EVIDENCE_THRESHOLD: f64 = 1e-3;
/// A control counts as solved below this residual.
pub const CONTROL_THRESHOLD: f64 = 1e-6;
pub const DEFAULT_RESTARTS: usize = 50;
/// `(max_poly_degree, freq_bound)` rungs.
pub const DEFAULT_LADDER: [(u32, u32); 4] = [(1, 1), (2, 1), (2, 2), (3, 2)];

/// Iteration limit of one Levenberg-Marquardt run; the run also stops once
/// its cost has not dropped by `factor` over `window` iterations.
#[derive(Clone, Copy, Debug)]
struct Budget {
    iterations: usize,
    window: usize,
    factor: f64,
}

/// Short run from every lattice frequency; the best one is continued.
const SCREEN: Budget = Budget { iterations: 20, window: 20, factor: 1.0 };
const MAIN: Budget = Budget { iterations: 400, window: 30, factor: 0.99 };
/// Runs that end below `POLISH_BELOW` are continued with this budget, since
/// convergence onto the (non-isolated) solution sets is only linear.
const POLISH: Budget = Budget { iterations: 20000, window: 400, factor: 0.999 };
const POLISH_BELOW: f64 = 1e-2;
/// Scale of the non-core coefficients in the initial point on odd rounds.
const EXTRA_SCALE: f64 = 0.2;
/// Short runs per restart, the best of which is continued.
const SCREEN_STARTS: usize = 8;

/// Shape of the ansatz. The real parameter vector lists, for `f1` then `f2`:
/// the polynomial coefficients in [`AnsatzSpec::monomials`] order, then for
/// each exponential term (`l, -l, 2l, -2l`, truncated to
/// `terms_per_function`) the constant coefficient followed by the
/// coefficients of `z1..zm`. Every complex coefficient takes two slots
/// `(re, im)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub m: usize,
    pub max_poly_degree: u32,
    pub freq_bound: u32,
    pub terms_per_function: usize,
}

impl AnsatzSpec {
    pub fn new(m: usize, max_poly_degree: u32, freq_bound: u32) -> Self {
        AnsatzSpec {
            m,
            max_poly_degree,
            freq_bound,
            terms_per_function: 4,
        }
    }

    /// Exponent vectors of the polynomial part, by degree and then
    /// lexicographically with `z1` most significant.
    pub fn monomials(&self) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        for deg in 0..=self.max_poly_degree {
            let mut level = Vec::new();
            compositions(deg, self.m, &mut Vec::new(), &mut level);
            level.sort_by(|a, b| b.cmp(a));
            out.extend(level);
        }
        out
    }

    fn exp_multipliers(&self) -> Vec<f64> {
        [1.0, -1.0, 2.0, -2.0].into_iter().take(self.terms_per_function.min(4)).collect()
    }

    /// Complex coefficients per function.
    pub fn coeffs_per_function(&self) -> usize {
        self.monomials().len() + self.exp_multipliers().len() * (1 + self.m)
    }

    /// Length of the real parameter vector.
    pub fn param_len(&self) -> usize {
        4 * self.coeffs_per_function()
    }

    /// Frequencies `k v` with `v in {0, 1, -1, i, -i}^m \ {0}` and
    /// `1 <= k <= freq_bound`, one representative per sign pair (the first
    /// non-zero component of `v` is `1` or `i`).
    pub fn lattice(&self) -> Vec<Vec<Complex64>> {
        let units = [
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        let mut reps = Vec::new();
        let total = 5usize.pow(self.m as u32);
        for code in 0..total {
            let v: Vec<Complex64> = (0..self.m).map(|j| units[(code / 5usize.pow(j as u32)) % 5]).collect();
            let Some(first) = v.iter().find(|x| x.norm() > 0.0) else {
                continue;
            };
            if *first == units[1] || *first == units[2] {
                reps.push(v);
            }
        }
        let mut out = Vec::new();
        for k in 1..=self.freq_bound.max(1) {
            for v in &reps {
                out.push(v.iter().map(|x| x * k as f64).collect());
            }
        }
        out
    }
}

fn compositions(total: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for k in 0..=total {
        prefix.push(k);
        compositions(total - k, parts - 1, prefix, out);
        prefix.pop();
    }
}

/// An ansatz with its frequency fixed.
#[derive(Clone, Debug, PartialEq)]
pub struct Ansatz {
    pub spec: AnsatzSpec,
    pub lambda: Vec<Complex64>,
}

impl Ansatz {
    pub fn new(spec: AnsatzSpec, lambda: Vec<Complex64>) -> Self {
        Ansatz { spec, lambda }
    }

    /// Basis values and their `z1`-derivatives at `z`.
    fn basis(&self, z: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut val = Vec::new();
        let mut d1 = Vec::new();
        for alpha in self.spec.monomials() {
            let mut v = Complex64::new(1.0, 0.0);
            let mut rest = Complex64::new(1.0, 0.0);
            for (j, &a) in alpha.iter().enumerate() {
                v *= z[j].powu(a);
                if j > 0 {
                    rest *= z[j].powu(a);
                }
            }
            val.push(v);
            d1.push(if alpha[0] == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                rest * z[0].powu(alpha[0] - 1) * alpha[0] as f64
            });
        }
        for k in self.spec.exp_multipliers() {
            let mu: Vec<Complex64> = self.lambda.iter().map(|l| l * k).collect();
            let e = mu.iter().zip(z).map(|(a, b)| a * b).sum::<Complex64>().exp();
            val.push(e);
            d1.push(mu[0] * e);
            for (j, zj) in z.iter().enumerate().take(self.spec.m) {
                val.push(zj * e);
                let delta = if j == 0 { 1.0 } else { 0.0 };
                d1.push((mu[0] * zj + delta) * e);
            }
        }
        (val, d1)
    }

    /// Index range of the exponential coefficients within one function.
    fn exp_range(&self) -> std::ops::Range<usize> {
        self.spec.monomials().len()..self.spec.coeffs_per_function()
    }
}

/// Basis tables at the grid points: values, `z1`-derivatives, and values at
/// the shifted points. Each basis function is divided by its largest
/// magnitude on the grid so that the optimizer works with balanced columns;
/// `scale` holds those divisors.
struct Tables {
    val: Vec<Vec<Complex64>>,
    d1: Vec<Vec<Complex64>>,
    shifted: Vec<Vec<Complex64>>,
    scale: Vec<f64>,
    /// Exponential columns with their grid projection onto affine functions
    /// removed, divided by the square root of the grid size, so that
    /// `|content * theta_exp|` is the root mean square distance of a
    /// function's exponential part from affine functions. The second entry
    /// does the same at the shifted points.
    content: [DMatrix<Complex64>; 2],
}

fn tables(ansatz: &Ansatz, grid: &[Vec<Complex64>], c: &[Complex64]) -> Tables {
    let mut t = Tables {
        val: Vec::new(),
        d1: Vec::new(),
        shifted: Vec::new(),
        scale: vec![0.0; ansatz.spec.coeffs_per_function()],
        content: [DMatrix::zeros(0, 0), DMatrix::zeros(0, 0)],
    };
    for z in grid {
        let (v, d) = ansatz.basis(z);
        let zc: Vec<Complex64> = z.iter().zip(c).map(|(a, b)| a + b).collect();
        let sv = ansatz.basis(&zc).0;
        for (p, s) in t.scale.iter_mut().enumerate() {
            *s = s.max(v[p].norm()).max(sv[p].norm());
        }
        t.val.push(v);
        t.d1.push(d);
        t.shifted.push(sv);
    }
    for s in t.scale.iter_mut() {
        if !(s.is_finite() && *s > 0.0) {
            *s = 1.0;
        }
    }
    for rows in [&mut t.val, &mut t.d1, &mut t.shifted] {
        for row in rows.iter_mut() {
            for (x, s) in row.iter_mut().zip(&t.scale) {
                *x /= *s;
            }
        }
    }
    let split = ansatz.spec.monomials().len();
    t.content = [polynomial_complement(&t.val, split, split), polynomial_complement(&t.shifted, split, split)];
    t
}

/// Modified Gram-Schmidt (applied twice for stability): orthonormalizes the
/// first `keep` columns and removes their span from the columns from
/// `split` on, which are then divided by the square root of the grid size.
fn polynomial_complement(val: &[Vec<Complex64>], keep: usize, split: usize) -> DMatrix<Complex64> {
    let g = val.len();
    let n = val.first().map_or(0, Vec::len);
    let column = |p: usize| DVector::from_iterator(g, val.iter().map(|row| row[p]));
    let mut basis: Vec<DVector<Complex64>> = Vec::new();
    let reduce = |v: &mut DVector<Complex64>, basis: &[DVector<Complex64>]| {
        for _ in 0..2 {
            for q in basis {
                let proj = q.dotc(v);
                *v -= q * proj;
            }
        }
    };
    for p in 0..keep {
        let mut v = column(p);
        reduce(&mut v, &basis);
        let norm = v.norm();
        if norm > 1e-12 {
            basis.push(v / Complex64::new(norm, 0.0));
        }
    }
    let root = Complex64::new((g as f64).sqrt(), 0.0);
    let mut out = DMatrix::zeros(g, n - split);
    for p in split..n {
        let mut v = column(p);
        reduce(&mut v, &basis);
        out.set_column(p - split, &(v / root));
    }
    out
}

impl Tables {
    /// Raw coefficients to balanced ones (`unscale = false`) or back.
    fn rescale(&self, params: &[f64], unscale: bool) -> Vec<f64> {
        let n = self.scale.len();
        params
            .iter()
            .enumerate()
            .map(|(k, x)| {
                let s = self.scale[(k / 2) % n];
                if unscale {
                    x / s
                } else {
                    x * s
                }
            })
            .collect()
    }
}

fn coeffs(params: &[f64], k: usize, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|p| Complex64::new(params[2 * (k * n + p)], params[2 * (k * n + p) + 1]))
        .collect()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Residuals `(R1, R2)` at each grid point, plus the intermediate values
/// needed for the Jacobian.
struct Eval {
    r: Vec<[Complex64; 2]>,
    du: Vec<[Complex64; 2]>,
    sv: Vec<[Complex64; 2]>,
}

fn evaluate(spec: &SystemSpec, t: &Tables, params: &[f64], n: usize) -> Eval {
    let th = [coeffs(params, 0, n), coeffs(params, 1, n)];
    let mut e = Eval {
        r: Vec::new(),
        du: Vec::new(),
        sv: Vec::new(),
    };
    for g in 0..t.val.len() {
        let du = [dot(&t.d1[g], &th[0]), dot(&t.d1[g], &th[1])];
        let sv = [dot(&t.shifted[g], &th[0]), dot(&t.shifted[g], &th[1])];
        let one = Complex64::new(1.0, 0.0);
        let r1 = du[0].powu(spec.n1) + sv[1].powu(spec.m1) - one;
        let r2 = du[1].powu(spec.n2) + sv[0].powu(spec.m2) - one;
        e.r.push([r1, r2]);
        e.du.push(du);
        e.sv.push(sv);
    }
    e
}

/// Non-polynomial content `|content * theta_exp|` of `f1`, `f2`, then of
/// their shifts, with the vectors `content * theta_exp`, for balanced
/// parameters. A transcendental function keeps its content under shifts, so
/// both are floored; this rules out fits whose exponentials are negligible
/// at the shifted points only.
fn transcendence(ansatz: &Ansatz, t: &Tables, params: &[f64]) -> Vec<(f64, DVector<Complex64>)> {
    let n = ansatz.spec.coeffs_per_function();
    let range = ansatz.exp_range();
    let mut out = Vec::with_capacity(4);
    for content in &t.content {
        for k in 0..2 {
            let th = coeffs(params, k, n);
            let w = content * DVector::from_vec(th[range.clone()].to_vec());
            out.push((w.norm(), w));
        }
    }
    out
}

/// Raw coefficient norm of each function, for balanced parameters.
fn coefficient_norms(t: &Tables, params: &[f64]) -> [f64; 2] {
    let raw = t.rescale(params, true);
    let half = raw.len() / 2;
    [raw[..half].iter().map(|x| x * x).sum::<f64>().sqrt(), raw[half..].iter().map(|x| x * x).sum::<f64>().sqrt()]
}

/// Shortfall of each content below the floor, then the excess of each
/// coefficient norm over the cap.
fn floor_deficits(ansatz: &Ansatz, t: &Tables, params: &[f64]) -> Vec<f64> {
    let floors = transcendence(ansatz, t, params).into_iter().map(|(mass, _)| (TRANSCENDENCE_FLOOR - mass).max(0.0));
    let caps = coefficient_norms(t, params).into_iter().map(|norm| (norm - COEFFICIENT_CAP).max(0.0));
    floors.chain(caps).collect()
}

fn max_norm(e: &Eval) -> f64 {
    e.r.iter()
        .map(|[a, b]| {
            let s = a.norm() + b.norm();
            if s.is_finite() {
                s
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// `64` Halton points in the polydisc of radius `1.5` in `C^m`.
pub fn sample_grid(m: usize) -> Vec<Vec<Complex64>> {
    const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    let halton = |mut i: u64, b: u64| {
        let mut f = 1.0;
        let mut r = 0.0;
        while i > 0 {
            f /= b as f64;
            r += f * (i % b) as f64;
            i /= b;
        }
        r
    };
    (1..=GRID_POINTS as u64)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let r = GRID_RADIUS * halton(i, PRIMES[(2 * j) % 16]).sqrt();
                    let theta = std::f64::consts::TAU * halton(i, PRIMES[(2 * j + 1) % 16]);
                    Complex64::from_polar(r, theta)
                })
                .collect()
        })
        .collect()
}

fn check_shapes(spec: &SystemSpec, ansatz: &AnsatzSpec) -> Result<(), SearchError> {
    if spec.m == 0 || spec.m != ansatz.m || spec.c.len() != spec.m {
        return Err(SearchError::Dimension);
    }
    Ok(())
}

/// `max_grid (|R1| + |R2|)` for the instantiated pair, plus the shortfall of
/// each function's exponential content below the transcendence floor and the
/// excess of its coefficient norm over the cap.
pub fn residual_objective(
    spec: &SystemSpec,
    ansatz: &Ansatz,
    params: &[f64],
    grid: &[Vec<Complex64>],
) -> Result<f64, SearchError> {
    check_shapes(spec, &ansatz.spec)?;
    if params.len() != ansatz.spec.param_len() {
        return Err(SearchError::ParamShape {
            expected: ansatz.spec.param_len(),
            got: params.len(),
        });
    }
    let t = tables(ansatz, grid, &spec.c.to_complex());
    let y = t.rescale(params, false);
    let e = evaluate(spec, &t, &y, ansatz.spec.coeffs_per_function());
    let deficit: f64 = floor_deficits(ansatz, &t, &y).iter().sum();
    Ok(max_norm(&e) + deficit)
}

/// Real residual vector and Jacobian for the least-squares surrogate.
fn linearize(spec: &SystemSpec, ansatz: &Ansatz, t: &Tables, params: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let n = ansatz.spec.coeffs_per_function();
    let g_count = t.val.len();
    let rows = 4 * g_count + 6;
    let cols = params.len();
    let e = evaluate(spec, t, params, n);
    let mut r = DVector::zeros(rows);
    let mut j = DMatrix::zeros(rows, cols);
    let (n1, m1, n2, m2) = (spec.n1, spec.m1, spec.n2, spec.m2);
    let pow_deriv = |x: Complex64, k: u32| if k == 0 { Complex64::new(0.0, 0.0) } else { x.powu(k - 1) * k as f64 };
    let put = |row: usize, col_base: usize, d: Complex64, j: &mut DMatrix<f64>| {
        j[(row, col_base)] += d.re;
        j[(row, col_base + 1)] -= d.im;
        j[(row + 1, col_base)] += d.im;
        j[(row + 1, col_base + 1)] += d.re;
    };
    for g in 0..g_count {
        let [r1, r2] = e.r[g];
        let base = 4 * g;
        r[base] = r1.re;
        r[base + 1] = r1.im;
        r[base + 2] = r2.re;
        r[base + 3] = r2.im;
        let a1 = pow_deriv(e.du[g][0], n1);
        let b1 = pow_deriv(e.sv[g][1], m1);
        let a2 = pow_deriv(e.du[g][1], n2);
        let b2 = pow_deriv(e.sv[g][0], m2);
        for p in 0..n {
            let c1 = 2 * p;
            let c2 = 2 * (n + p);
            // R1 depends on f1 through its derivative and on f2 through its shift
            put(base, c1, a1 * t.d1[g][p], &mut j);
            put(base, c2, b1 * t.shifted[g][p], &mut j);
            put(base + 2, c2, a2 * t.d1[g][p], &mut j);
            put(base + 2, c1, b2 * t.shifted[g][p], &mut j);
        }
    }
    for (idx, (mass, w)) in transcendence(ansatz, t, params).into_iter().enumerate() {
        let (k, content) = (idx % 2, &t.content[idx / 2]);
        let row = 4 * g_count + idx;
        let d = TRANSCENDENCE_FLOOR - mass;
        if d > 0.0 {
            r[row] = FLOOR_WEIGHT * d;
            if mass > 0.0 {
                for (e, p) in ansatz.exp_range().enumerate() {
                    let col = 2 * (k * n + p);
                    let g = w.dotc(&content.column(e).into_owned()) / mass;
                    // d|w| = Re(conj(w) . M_p)/|w| d(re) - Im(conj(w) . M_p)/|w| d(im)
                    j[(row, col)] = -FLOOR_WEIGHT * g.re;
                    j[(row, col + 1)] = FLOOR_WEIGHT * g.im;
                }
            }
        }
    }
    let raw = t.rescale(params, true);
    for (k, norm) in coefficient_norms(t, params).into_iter().enumerate() {
        let row = 4 * g_count + 4 + k;
        if norm > COEFFICIENT_CAP {
            r[row] = FLOOR_WEIGHT * (norm - COEFFICIENT_CAP);
            for col in 2 * k * n..2 * (k + 1) * n {
                let s = t.scale[(col / 2) % n];
                j[(row, col)] = FLOOR_WEIGHT * raw[col] / (norm * s);
            }
        }
    }
    (r, j)
}

fn cost(r: &DVector<f64>) -> f64 {
    let c = r.norm_squared();
    if c.is_finite() {
        c
    } else {
        f64::INFINITY
    }
}

/// Levenberg-Marquardt with Marquardt diagonal scaling.
fn levenberg_marquardt(spec: &SystemSpec, ansatz: &Ansatz, t: &Tables, x0: Vec<f64>, free: &[bool], budget: Budget) -> (Vec<f64>, f64) {
    let mut x = DVector::from_vec(x0);
    let restrict = |(r, mut j): (DVector<f64>, DMatrix<f64>)| {
        for (col, f) in free.iter().enumerate() {
            if !f {
                j.column_mut(col).fill(0.0);
            }
        }
        (r, j)
    };
    let (mut r, mut j) = restrict(linearize(spec, ansatz, t, x.as_slice()));
    let mut c = cost(&r);
    if !c.is_finite() {
        return (x.as_slice().to_vec(), c);
    }
    let mut mu = 1e-3;
    let mut history = Vec::with_capacity(budget.iterations);
    for it in 0..budget.iterations {
        if c < 1e-30 || (it >= budget.window && c > budget.factor * history[it - budget.window]) {
            break;
        }
        history.push(c);
        let jt = j.transpose();
        let a = &jt * &j;
        let grad = &jt * &r;
        let mut accepted = false;
        while mu < 1e16 {
            let mut lhs = a.clone();
            for k in 0..lhs.nrows() {
                lhs[(k, k)] += mu * (a[(k, k)] + 1e-12);
            }
            let Some(chol) = lhs.cholesky() else {
                mu *= 4.0;
                continue;
            };
            let step = chol.solve(&(-&grad));
            let candidate = &x + &step;
            let (r_new, j_new) = restrict(linearize(spec, ansatz, t, candidate.as_slice()));
            let c_new = cost(&r_new);
            if c_new < c {
                let small = step.norm() <= 1e-14 * (1.0 + x.norm());
                x = candidate;
                r = r_new;
                j = j_new;
                let improved = c - c_new;
                c = c_new;
                mu = (mu / 3.0).max(1e-15);
                accepted = !(small || improved <= 1e-16 * c);
                break;
            }
            mu *= 4.0;
        }
        if !accepted {
            break;
        }
    }
    (x.as_slice().to_vec(), c)
}

/// Outcome of a multi-start minimization. `wall_time` is not serialized, so
/// reports from equal seeds compare byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub ansatz: AnsatzSpec,
    pub best_frequency: Vec<[f64; 2]>,
    pub best_params: Vec<f64>,
    pub best_residual: f64,
    pub best_restart: usize,
    pub restarts: usize,
    pub seed: u64,
    pub spec: SystemSpec,
    #[serde(skip)]
    pub wall_time: Duration,
}

struct RestartResult {
    score: f64,
    params: Vec<f64>,
    lambda: Vec<Complex64>,
}

/// Random start in raw coefficients. Only the constant and linear
/// polynomial coefficients and the pure exponential coefficients are drawn
/// (uniform in `[-0.5, 0.5]` per real part, in an order that does not depend
/// on the ansatz size); all others start at zero, so a larger ansatz starts
/// from the embedding of a smaller one's start. Returned in balanced units.
fn initial_point(ansatz: &Ansatz, t: &Tables, rng: &mut ChaCha8Rng, symmetric: bool, extra_scale: f64) -> Vec<f64> {
    let spec = &ansatz.spec;
    let n = spec.coeffs_per_function();
    let first_exp = spec.monomials().len();
    let stride = 1 + spec.m;
    let mut x = vec![0.0; spec.param_len()];
    let shared: Vec<f64> = (0..2 * (1 + spec.m + 4)).map(|_| rng.random_range(-0.5..0.5)).collect();
    for k in 0..2 {
        let own: Vec<f64> = (0..2 * (1 + spec.m + 4)).map(|_| rng.random_range(-0.5..0.5)).collect();
        let draws = if symmetric || k == 0 { &shared } else { &own };
        let slots = (0..first_exp.min(1 + spec.m)).map(|p| (p, p));
        let exp_slots = (0..spec.exp_multipliers().len()).map(|term| (1 + spec.m + term, first_exp + term * stride));
        for (d, p) in slots.chain(exp_slots) {
            x[2 * (k * n + p)] = draws[2 * d];
            x[2 * (k * n + p) + 1] = draws[2 * d + 1];
        }
    }
    let extra: Vec<f64> = (0..2 * n).map(|_| rng.random_range(-0.5..0.5) * extra_scale).collect();
    for k in 0..2 {
        for p in 0..n {
            let core = if p < first_exp { p <= spec.m } else { (p - first_exp).is_multiple_of(stride) };
            if !core {
                x[2 * (k * n + p)] = extra[2 * p];
                x[2 * (k * n + p) + 1] = extra[2 * p + 1];
            }
        }
    }
    t.rescale(&x, false)
}

fn run_restart(spec: &SystemSpec, ansatz_spec: &AnsatzSpec, grid: &[Vec<Complex64>], lattice: &[Vec<Complex64>], seed: u64, r: usize) -> RestartResult {
    let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(seed, r as u64));
    let all = vec![true; ansatz_spec.param_len()];
    let round = r / lattice.len();
    let symmetric = round % 3 != 2;
    let extra_scale = if round % 2 == 1 { EXTRA_SCALE } else { 0.0 };
    let c = spec.c.to_complex();
    let ansatz = Ansatz::new(ansatz_spec.clone(), lattice[r % lattice.len()].clone());
    let t = tables(&ansatz, grid, &c);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for _ in 0..SCREEN_STARTS {
        let x0 = initial_point(&ansatz, &t, &mut rng, symmetric, extra_scale);
        let (x, cost) = levenberg_marquardt(spec, &ansatz, &t, x0, &all, SCREEN);
        if best.as_ref().is_none_or(|b| cost < b.1) {
            best = Some((x, cost));
        }
    }
    let (x, _) = best.expect("at least one start");
    let (mut y, _) = levenberg_marquardt(spec, &ansatz, &t, x, &all, MAIN);
    let score_of = |y: &[f64]| {
        let e = evaluate(spec, &t, y, ansatz_spec.coeffs_per_function());
        let s = max_norm(&e) + floor_deficits(&ansatz, &t, y).iter().sum::<f64>();
        if s.is_nan() { f64::INFINITY } else { s }
    };
    let mut score = score_of(&y);
    if score < POLISH_BELOW {
        y = levenberg_marquardt(spec, &ansatz, &t, y, &all, POLISH).0;
        score = score_of(&y);
    }
    RestartResult {
        score,
        params: t.rescale(&y, true),
        lambda: ansatz.lambda,
    }
}

/// Multi-start least-squares fit. Restart `r` uses lattice frequency
/// `r mod |lattice|` and a start drawn from a generator seeded by
/// `(seed, r)`; the best max-norm score wins, ties going to the lower index.
pub fn minimize(spec: &SystemSpec, ansatz: &AnsatzSpec, restarts: usize, seed: u64) -> Result<SearchReport, SearchError> {
    if restarts == 0 {
        return Err(SearchError::NoRestarts);
    }
    check_shapes(spec, ansatz)?;
    let start = Instant::now();
    let grid = sample_grid(spec.m);
    let lattice = ansatz.lattice();
    let results: Vec<RestartResult> = (0..restarts)
        .into_par_iter()
        .map(|r| run_restart(spec, ansatz, &grid, &lattice, seed, r))
        .collect();
    let (best_restart, best) = results
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.score.total_cmp(&b.score).then(ia.cmp(ib)))
        .expect("at least one restart");
    Ok(SearchReport {
        ansatz: ansatz.clone(),
        best_frequency: best.lambda.iter().map(|l| [l.re, l.im]).collect(),
        best_params: best.params.clone(),
        best_residual: best.score,
        best_restart,
        restarts,
        seed,
        spec: spec.clone(),
        wall_time: start.elapsed(),
    })
}

/// Solvable control paired with a non-existence probe, and the smallest
/// polynomial degree at which the control's family fits the ansatz.
pub fn control_for(quadruple: [u32; 4]) -> ([u32; 4], u32) {
    let [n1, m1, n2, m2] = quadruple;
    if n1 > m1 && n2 > m2 {
        ([2, 1, 2, 1], 2)
    } else {
        ([2, 2, 2, 2], 0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RungReport {
    pub control: SearchReport,
    pub probe: SearchReport,
}

/// A non-existence probe across an ansatz ladder with paired controls.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub classification: FeasibilityVerdict,
    /// True when every probe stays above the evidence threshold and every
    /// control falls below the control threshold.
    pub consistent: bool,
    pub control_quadruple: [u32; 4],
    pub control_threshold: f64,
    pub control_worst: f64,
    pub evidence_threshold: f64,
    pub quadruple: [u32; 4],
    pub residual_floor: f64,
    pub rungs: Vec<RungReport>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeOptions {
    pub restarts: usize,
    pub seed: u64,
    pub ladder: Vec<(u32, u32)>,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            ladder: DEFAULT_LADDER.to_vec(),
        }
    }
}

/// Runs the probe quadruple and its solvable control on every ladder rung
/// where the control's family is representable. Fails with
/// `ClassifierMismatch` unless the quadruple is classified as non-existent.
pub fn nonexistence_probe(quadruple: [u32; 4], c: &ShiftVector, opts: &ProbeOptions) -> Result<ProbeReport, SearchError> {
    let [n1, m1, n2, m2] = quadruple;
    let classification = classify(n1, m1, n2, m2);
    if !matches!(classification, FeasibilityVerdict::NonExistence(_)) {
        return Err(SearchError::ClassifierMismatch(classification.to_string()));
    }
    let m = c.len();
    let (control_quadruple, min_degree) = control_for(quadruple);
    let probe_spec = SystemSpec::new(m, (n1, m1, n2, m2), c.clone());
    let [a, b, cc, d] = control_quadruple;
    let control_spec = SystemSpec::new(m, (a, b, cc, d), c.clone());
    let mut rungs = Vec::new();
    for &(degree, bound) in opts.ladder.iter().filter(|(d, _)| *d >= min_degree) {
        let ansatz = AnsatzSpec::new(m, degree, bound);
        rungs.push(RungReport {
            control: minimize(&control_spec, &ansatz, opts.restarts, opts.seed)?,
            probe: minimize(&probe_spec, &ansatz, opts.restarts, opts.seed)?,
        });
    }
    let residual_floor = rungs.iter().map(|r| r.probe.best_residual).fold(f64::INFINITY, f64::min);
    let control_worst = rungs.iter().map(|r| r.control.best_residual).fold(0.0, f64::max);
    Ok(ProbeReport {
        classification,
        consistent: !rungs.is_empty() && residual_floor > EVIDENCE_THRESHOLD && control_worst < CONTROL_THRESHOLD,
        control_quadruple,
        control_threshold: CONTROL_THRESHOLD,
        control_worst,
        evidence_threshold: EVIDENCE_THRESHOLD,
        quadruple,
        residual_floor,
        rungs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn ex11_spec() -> SystemSpec {
        let c = ShiftVector::new(vec![&Scalar::from_int(2) * &Scalar::pi(), Scalar::zero()]);
        SystemSpec::new(2, (2, 2, 2, 2), c)
    }

    /// Parameters for `f1 = f2 = sin(z1 + z2)` with `l = i(z1 + z2)`.
    fn sine_params(ansatz: &AnsatzSpec) -> Vec<f64> {
        let n = ansatz.coeffs_per_function();
        let first_exp = ansatz.monomials().len();
        let stride = 1 + ansatz.m;
        let mut p = vec![0.0; ansatz.param_len()];
        for k in 0..2 {
            // sin(u) = -i/2 e^{iu} + i/2 e^{-iu}
            p[2 * (k * n + first_exp) + 1] = -0.5;
            p[2 * (k * n + first_exp + stride) + 1] = 0.5;
        }
        p
    }

    #[test]
    fn lattice_has_one_representative_per_sign_pair() {
        let a = AnsatzSpec::new(2, 1, 1);
        assert_eq!(a.lattice().len(), 12);
        assert_eq!(AnsatzSpec::new(2, 1, 2).lattice().len(), 24);
        assert_eq!(a.monomials(), vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn exact_sine_member_has_zero_objective() {
        let spec = ex11_spec();
        let a = AnsatzSpec::new(2, 1, 1);
        let lambda = vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 1.0)];
        let ansatz = Ansatz::new(a.clone(), lambda);
        let obj = residual_objective(&spec, &ansatz, &sine_params(&a), &sample_grid(2)).unwrap();
        assert!(obj < 1e-9, "{obj}");
    }

    #[test]
    fn zero_parameters_score_two_plus_floor() {
        let spec = ex11_spec();
        let a = AnsatzSpec::new(2, 1, 1);
        let ansatz = Ansatz::new(a.clone(), a.lattice()[0].clone());
        let obj = residual_objective(&spec, &ansatz, &vec![0.0; a.param_len()], &sample_grid(2)).unwrap();
        assert!((obj - (2.0 + 4.0 * TRANSCENDENCE_FLOOR)).abs() < 1e-12);
    }

    #[test]
    fn wrong_parameter_length_is_rejected() {
        let spec = ex11_spec();
        let a = AnsatzSpec::new(2, 1, 1);
        let ansatz = Ansatz::new(a.clone(), a.lattice()[0].clone());
        let err = residual_objective(&spec, &ansatz, &[0.0; 3], &sample_grid(2)).unwrap_err();
        assert!(matches!(err, SearchError::ParamShape { got: 3, .. }));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let spec = SystemSpec::new(2, (3, 1, 2, 1), ex11_spec().c);
        let a = AnsatzSpec::new(2, 2, 1);
        let ansatz = Ansatz::new(a.clone(), vec![Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)]);
        let grid: Vec<_> = sample_grid(2).into_iter().take(5).collect();
        let t = tables(&ansatz, &grid, &spec.c.to_complex());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..a.param_len()).map(|_| rng.random_range(-0.3..0.3)).collect();
        let (_, j) = linearize(&spec, &ansatz, &t, &x);
        let h = 1e-6;
        for col in [0, 7, 30, a.param_len() - 1] {
            let mut xp = x.clone();
            xp[col] += h;
            let (r1, _) = linearize(&spec, &ansatz, &t, &xp);
            xp[col] -= 2.0 * h;
            let (rm, _) = linearize(&spec, &ansatz, &t, &xp);
            for row in 0..4 * grid.len() + 6 {
                let fd = (r1[row] - rm[row]) / (2.0 * h);
                assert!((fd - j[(row, col)]).abs() <= 1e-4 * (1.0 + fd.abs()), "row {row} col {col}: {fd} vs {}", j[(row, col)]);
            }
        }
    }

    #[test]
    fn positive_control_rediscovers_sine_pair() {
        let rep = minimize(&ex11_spec(), &AnsatzSpec::new(2, 1, 1), 12, 5).unwrap();
        assert!(rep.best_residual < 1e-6, "{}", rep.best_residual);
    }

    /// `f1 = f2 = 1 - (z1/2 - g)^2` with `g = z2/(4 pi) + beta e^{i z2}`.
    fn quadratic_params(ansatz: &AnsatzSpec, beta: f64) -> Vec<f64> {
        let n = ansatz.coeffs_per_function();
        let pi = std::f64::consts::PI;
        let mut p = vec![0.0; ansatz.param_len()];
        for k in 0..2 {
            let o = 2 * k * n;
            p[o] = 1.0;
            p[o + 2 * 3] = -0.25;
            p[o + 2 * 4] = 1.0 / (4.0 * pi);
            p[o + 2 * 5] = -1.0 / (16.0 * pi * pi);
            p[o + 2 * 7] = beta;
            p[o + 2 * 8] = -beta / (2.0 * pi);
            p[o + 2 * 12] = -beta * beta;
        }
        p
    }

    #[test]
    fn exact_quadratic_member_has_zero_objective() {
        let spec = SystemSpec::new(2, (2, 1, 2, 1), ShiftVector::new(vec![Scalar::one(), &Scalar::from_int(2) * &Scalar::pi()]));
        let ansatz_spec = AnsatzSpec::new(2, 2, 1);
        let ansatz = Ansatz::new(ansatz_spec.clone(), vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)]);
        let value = residual_objective(&spec, &ansatz, &quadratic_params(&ansatz_spec, 1.0), &sample_grid(2)).unwrap();
        assert!(value < 1e-12, "{value}");
    }

    #[test]
    fn solvable_spec_is_rejected_as_probe() {
        let c = ex11_spec().c;
        let err = nonexistence_probe([2, 2, 2, 2], &c, &ProbeOptions::default()).unwrap_err();
        assert!(matches!(err, SearchError::ClassifierMismatch(_)));
    }
}

//! Exact and numeric verification of residual identities.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{residuals, single_residual, ShiftVector, SystemSpec};
use crate::error::{CalculusError, ExprError};
use crate::expr::Expr;
use crate::nf::{to_nf, ExpPolyNF};
use crate::symbol::{SymbolModel, SymbolRegistry};

/// Pass threshold for numeric verification.
pub const NUMERIC_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_RADIUS: f64 = 2.0;
pub const DEFAULT_SAMPLES: usize = 100;

/// Samples per seeded chunk; chunks are the unit of parallel work, so the
/// points drawn do not depend on the number of threads.
const CHUNK: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Numeric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    IdentityZero,
    Nonzero,
    NumericPass,
    NumericFail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        matches!(self, Verdict::IdentityZero | Verdict::NumericPass)
    }
}

/// Evidence for a failed check: a surviving normal-form term, a sample point
/// with its residual value, or both. `equation` is 1 or 2 for systems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub equation: Option<usize>,
    pub point: Option<Vec<[f64; 2]>>,
    pub term: Option<String>,
    pub value: Option<[f64; 2]>,
}

/// Serializes with keys in sorted order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub max_abs_residual: f64,
    pub mode: Mode,
    pub samples: usize,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Sampling parameters for numeric verification.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericOptions {
    pub radius: f64,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for NumericOptions {
    fn default() -> Self {
        NumericOptions {
            radius: DEFAULT_RADIUS,
            samples: DEFAULT_SAMPLES,
            seed: 0,
            tolerance: NUMERIC_TOLERANCE,
        }
    }
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Seed for chunk `index` of a run seeded with `seed`.
pub(crate) fn derived_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut x = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// A point drawn uniformly from the polydisc `|z_j| <= radius`.
pub(crate) fn polydisc_point(rng: &mut impl Rng, m: usize, radius: f64) -> Vec<Complex64> {
    (0..m)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let theta = std::f64::consts::TAU * rng.random::<f64>();
            Complex64::from_polar(r, theta)
        })
        .collect()
}

/// Evaluates `e` with opaque symbols replaced by their numeric models.
pub fn eval_with_models(e: &Expr, point: &[Complex64], models: &BTreeMap<String, SymbolModel>) -> Result<Complex64, ExprError> {
    e.eval_with(point, &|name| models.get(name).map(|f| f(point)))
}

struct Worst {
    index: usize,
    value: f64,
    point: Vec<Complex64>,
    residual: Complex64,
    equation: usize,
}

/// Samples `max_k |e_k|` over seeded points; returns the worst sample.
fn sample_max(
    exprs: &[&Expr],
    m: usize,
    opts: &NumericOptions,
    models: &BTreeMap<String, SymbolModel>,
) -> Result<Option<Worst>, ExprError> {
    let chunks = opts.samples.div_ceil(CHUNK);
    let per_chunk: Vec<Result<Option<Worst>, ExprError>> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(opts.seed, ci as u64));
            let count = CHUNK.min(opts.samples - ci * CHUNK);
            let mut best: Option<Worst> = None;
            for k in 0..count {
                let point = polydisc_point(&mut rng, m, opts.radius);
                for (eq, e) in exprs.iter().enumerate() {
                    let v = eval_with_models(e, &point, models)?;
                    let mag = if v.re.is_finite() && v.im.is_finite() { v.norm() } else { f64::INFINITY };
                    if best.as_ref().is_none_or(|b| mag > b.value) {
                        best = Some(Worst {
                            index: ci * CHUNK + k,
                            value: mag,
                            point: point.clone(),
                            residual: v,
                            equation: eq + 1,
                        });
                    }
                }
            }
            Ok(best)
        })
        .collect();
    let mut worst: Option<Worst> = None;
    for r in per_chunk {
        if let Some(w) = r? {
            let better = match &worst {
                None => true,
                Some(b) => w.value > b.value || (w.value == b.value && w.index < b.index),
            };
            if better {
                worst = Some(w);
            }
        }
    }
    Ok(worst)
}

fn numeric_report(
    exprs: &[&Expr],
    m: usize,
    opts: &NumericOptions,
    models: &BTreeMap<String, SymbolModel>,
) -> Result<VerificationReport, ExprError> {
    let worst = sample_max(exprs, m, opts, models)?;
    let max = worst.as_ref().map_or(0.0, |w| w.value);
    let pass = max < opts.tolerance;
    Ok(VerificationReport {
        max_abs_residual: max,
        mode: Mode::Numeric,
        samples: opts.samples,
        verdict: if pass { Verdict::NumericPass } else { Verdict::NumericFail },
        witness: match worst {
            Some(w) if !pass => Some(Witness {
                equation: (exprs.len() > 1).then_some(w.equation),
                point: Some(w.point.iter().copied().map(pair).collect()),
                term: None,
                value: Some(pair(w.residual)),
            }),
            _ => None,
        },
    })
}

/// Evaluates `|e|` at `samples` seeded points of the closed polydisc of the
/// given radius; passes iff the maximum is below `1e-9`.
pub fn numeric_verify(
    e: &Expr,
    m: usize,
    radius: f64,
    samples: usize,
    seed: u64,
    symbol_model: &BTreeMap<String, SymbolModel>,
) -> Result<VerificationReport, ExprError> {
    let opts = NumericOptions {
        radius,
        samples: samples.max(1),
        seed,
        tolerance: NUMERIC_TOLERANCE,
    };
    numeric_report(&[e], m, &opts, symbol_model)
}

/// Verifier combining exact normal-form checks with a numeric fallback.
#[derive(Clone, Debug, Default)]
pub struct Verifier {
    pub registry: SymbolRegistry,
    pub options: NumericOptions,
}

enum ExactOutcome {
    Zero,
    Nonzero(usize, ExpPolyNF),
    Unsupported,
}

impl Verifier {
    pub fn new(registry: SymbolRegistry) -> Self {
        Verifier {
            registry,
            options: NumericOptions::default(),
        }
    }

    pub fn with_options(mut self, options: NumericOptions) -> Self {
        self.options = options;
        self
    }

    fn exact(&self, residuals: &[&Expr]) -> ExactOutcome {
        for (k, r) in residuals.iter().enumerate() {
            let Ok(nf) = to_nf(r) else {
                return ExactOutcome::Unsupported;
            };
            if nf.has_phase_collision() {
                return ExactOutcome::Unsupported;
            }
            if !nf.is_zero() {
                return ExactOutcome::Nonzero(k, nf);
            }
        }
        ExactOutcome::Zero
    }

    /// Decides that every residual vanishes identically, exactly when the
    /// normal form applies and numerically otherwise.
    pub fn verify_residuals(&self, residuals: &[&Expr], m: usize) -> Result<VerificationReport, ExprError> {
        match self.exact(residuals) {
            ExactOutcome::Zero => Ok(VerificationReport {
                max_abs_residual: 0.0,
                mode: Mode::Exact,
                samples: 0,
                verdict: Verdict::IdentityZero,
                witness: None,
            }),
            ExactOutcome::Nonzero(k, nf) => {
                let term = nf.witness().map(|t| {
                    let phase = if t.phase.is_zero() { String::new() } else { format!(" + {}", t.phase) };
                    format!("({}) * exp({}{})", t.coeff, t.exponent, phase)
                });
                // locate a sample point where the residual is visibly non-zero
                let numeric = numeric_report(&[residuals[k]], m, &self.options, self.registry.models()).ok();
                let (max, point, value) = match numeric.and_then(|r| r.witness.map(|w| (r.max_abs_residual, w))) {
                    Some((max, w)) => (max, w.point, w.value),
                    None => (f64::NAN, None, None),
                };
                Ok(VerificationReport {
                    max_abs_residual: max,
                    mode: Mode::Exact,
                    samples: if point.is_some() { self.options.samples } else { 0 },
                    verdict: Verdict::Nonzero,
                    witness: Some(Witness {
                        equation: (residuals.len() > 1).then_some(k + 1),
                        point,
                        term,
                        value,
                    }),
                })
            }
            ExactOutcome::Unsupported => numeric_report(residuals, m, &self.options, self.registry.models()),
        }
    }

    pub fn verify_system(&self, spec: &SystemSpec, f1: &Expr, f2: &Expr) -> Result<VerificationReport, CalculusError> {
        let (r1, r2) = residuals(spec, f1, f2)?;
        Ok(self.verify_residuals(&[&r1, &r2], spec.m)?)
    }

    /// The single equation `(d f/d z1)^n + f(z+c)^k = 1`.
    pub fn verify_single(&self, m: usize, n: u32, k: u32, c: &ShiftVector, f: &Expr) -> Result<VerificationReport, CalculusError> {
        let r = single_residual(f, n, k, c)?;
        Ok(self.verify_residuals(&[&r], m)?)
    }
}

/// Builds the residuals and decides them with default numeric options and no
/// symbol models.
pub fn verify_system(spec: &SystemSpec, f1: &Expr, f2: &Expr) -> Result<VerificationReport, CalculusError> {
    Verifier::default().verify_system(spec, f1, f2)
}

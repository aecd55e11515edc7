//! Exact verification and construction of entire solutions to Fermat-type
//! systems of partial differential-difference equations
//!
//! ```text
//! (d f1/d z1)^n1 + f2(z + c)^m1 = 1
//! (d f2/d z1)^n2 + f1(z + c)^m2 = 1
//! ```
//!
//! in `m` complex variables. Expressions are exponential polynomials over
//! `Q(i)[pi]` extended by opaque entire symbols; residuals are decided exactly
//! through an exponential-polynomial normal form, with a seeded numeric
//! fallback when exact mode does not apply.

pub mod calculus;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod families;
pub mod gen;
pub mod nf;
pub mod parser;
pub mod poly;
pub mod scalar;
pub mod search;
pub mod symbol;
pub mod verify;

pub use config::{ConfigDoc, ConfigError, FamilyKind, SearchSection};
pub use calculus::{partial, residuals, shift, ShiftVector, SystemSpec};
pub use error::{CalculusError, ExprError, NfError, SearchError};
pub use expr::{Expr, Func, Node, VarIndex};
pub use nf::{nf_mul, to_nf, ExpPolyNF};
pub use parser::{parse_expr, parse_scalar, print_expr, ParseError, SourceSpan};
pub use poly::{Monomial, Poly, Var};
pub use scalar::{scalar_exp, GaussRat, Scalar};
pub use symbol::{OpaqueSymbol, ShiftRule, SymbolRegistry};
pub use verify::{numeric_verify, verify_system, Mode, NumericOptions, Verdict, VerificationReport, Verifier, Witness};
pub use families::{
    build_quadratic_pair, build_single_eq_quadratic, build_single_eq_sine, build_sine_pair, classify, solve_admissible_ab,
    validate_quadratic, validate_sine, Branch, ConstraintCheck, FamilyError, FeasibilityVerdict, QuadraticFamilySpec,
    SineFamilySpec, SineVariant, SingleQuadraticSpec, SingleSineSpec,
};
pub use search::{minimize, nonexistence_probe, residual_objective, Ansatz, AnsatzSpec, ProbeOptions, ProbeReport, SearchReport};

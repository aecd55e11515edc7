//! Flat TOML run documents: the system, an optional family with its
//! parameters, opaque symbol declarations, numeric symbol models and search
//! settings.
//!
//! Scalars and polynomials are strings in the expression grammar, so a
//! document such as
//!
//! ```toml
//! family = "sine"
//! m = 2
//! c = ["2*pi", "0"]
//! A = "1"
//! B = "1"
//! a_coeffs = ["1"]
//! b_coeffs = ["1"]
//! Q1 = "z2^2"
//! Q2 = "z2^2 + pi"
//! variant = "i"
//! ```
//!
//! round-trips through [`ConfigDoc::from_sine`] and [`ConfigDoc::sine_spec`].

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::{ShiftVector, SystemSpec};
use crate::error::ExprError;
use crate::expr::Expr;
use crate::families::{
    build_quadratic_pair, build_single_eq_quadratic, build_single_eq_sine, build_sine_pair, FamilyError,
    QuadraticFamilySpec, SineFamilySpec, SineVariant, SingleQuadraticSpec, SingleSineSpec,
};
use crate::parser::{parse_expr, parse_scalar, parse_symbol_decls, print_expr, ParseError};
use crate::poly::Poly;
use crate::scalar::Scalar;
use crate::search::{ProbeOptions, DEFAULT_LADDER, DEFAULT_RESTARTS};
use crate::symbol::{OpaqueSymbol, SymbolRegistry};
use crate::verify::eval_with_models;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("malformed document: {0}")]
    Toml(String),
    #[error("field `{field}`: {}", error.render(text))]
    Parse { field: String, text: String, error: ParseError },
    #[error("missing field `{0}`")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// Which constructor a document describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Sine,
    Quadratic,
    SingleSine,
    SingleQuadratic,
}

impl FamilyKind {
    /// `(n1, m1, n2, m2)` of the system the family solves. Single-equation
    /// families are checked as the system with `f1 = f2`.
    pub fn exponents(self) -> [u32; 4] {
        match self {
            FamilyKind::Sine | FamilyKind::SingleSine => [2, 2, 2, 2],
            FamilyKind::Quadratic | FamilyKind::SingleQuadratic => [2, 1, 2, 1],
        }
    }
}

/// Search settings; every key is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ladder: Vec<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// The document itself. Field names follow the constraint notation; the
/// single-equation sine family reads `A`, `a_coeffs` and `Q1` as `P`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyKind>,
    pub m: usize,
    /// `[n1, m1, n2, m2]`; defaults to the family's system.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<[u32; 4]>,
    pub c: Vec<String>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub a_coeffs: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub b_coeffs: Vec<String>,
    #[serde(rename = "Q1", default, skip_serializing_if = "Option::is_none")]
    pub q1: Option<String>,
    #[serde(rename = "Q2", default, skip_serializing_if = "Option::is_none")]
    pub q2: Option<String>,
    #[serde(rename = "K1", default, skip_serializing_if = "Option::is_none")]
    pub k1: Option<String>,
    #[serde(rename = "K2", default, skip_serializing_if = "Option::is_none")]
    pub k2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<SineVariant>,
    /// Name of the opaque function in the quadratic families.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    /// Declaration lines, e.g. `symbol g depends [z2,z3] shift (0,pi,pi) adds 0`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub symbols: Vec<String>,
    /// Symbol-free expressions standing in for opaque symbols in numeric mode.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub models: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchSection>,
}

fn parse_field(field: &str, text: &str) -> Result<Scalar, ConfigError> {
    parse_scalar(text).map_err(|error| ConfigError::Parse {
        field: field.to_string(),
        text: text.to_string(),
        error,
    })
}

fn required<'a>(value: &'a Option<String>, field: &'static str) -> Result<&'a str, ConfigError> {
    value.as_deref().ok_or(ConfigError::Missing(field))
}

fn scalars(field: &str, texts: &[String]) -> Result<Vec<Scalar>, ConfigError> {
    texts.iter().map(|t| parse_field(field, t)).collect()
}

fn scalar_texts(values: &[Scalar]) -> Vec<String> {
    values.iter().map(Scalar::to_string).collect()
}

fn poly_text(p: &Poly) -> String {
    print_expr(&Expr::from_poly(p))
}

/// Declaration lines reproducing a symbol and its rules.
pub fn symbol_decl_lines(sym: &OpaqueSymbol) -> Vec<String> {
    let deps = sym.depends_on().iter().map(|j| format!("z{j}")).collect::<Vec<_>>().join(",");
    let head = format!("symbol {} depends [{deps}]", sym.name());
    if sym.rules().is_empty() {
        return vec![head];
    }
    sym.rules()
        .iter()
        .map(|r| format!("{head} shift ({}) adds {}", scalar_texts(&r.shift).join(", "), r.adds))
        .collect()
}

impl ConfigDoc {
    pub fn from_toml(text: &str) -> Result<ConfigDoc, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Toml(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("document serializes")
    }

    pub fn shift(&self) -> Result<ShiftVector, ConfigError> {
        if self.c.len() != self.m {
            return Err(ConfigError::Invalid(format!("c has {} components, m = {}", self.c.len(), self.m)));
        }
        Ok(ShiftVector::new(scalars("c", &self.c)?))
    }

    pub fn exponents(&self) -> Result<[u32; 4], ConfigError> {
        let e = match (self.exponents, self.family) {
            (Some(e), _) => e,
            (None, Some(f)) => f.exponents(),
            (None, None) => return Err(ConfigError::Missing("exponents")),
        };
        if e.contains(&0) {
            return Err(ConfigError::Invalid("exponents must be positive".into()));
        }
        Ok(e)
    }

    pub fn system(&self) -> Result<SystemSpec, ConfigError> {
        let [n1, m1, n2, m2] = self.exponents()?;
        Ok(SystemSpec::new(self.m, (n1, m1, n2, m2), self.shift()?))
    }

    /// Symbols with their rules, plus numeric models compiled from `models`.
    pub fn registry(&self) -> Result<SymbolRegistry, ConfigError> {
        let mut registry = SymbolRegistry::new();
        let text = self.symbols.join("\n");
        parse_symbol_decls(&text, &mut registry).map_err(|error| ConfigError::Parse {
            field: "symbols".into(),
            text: text.clone(),
            error,
        })?;
        for (name, body) in &self.models {
            if registry.get(name).is_none() {
                return Err(ConfigError::Invalid(format!("model for undeclared symbol `{name}`")));
            }
            let e = self.expr(&format!("models.{name}"), body, &SymbolRegistry::new())?;
            let none = BTreeMap::new();
            registry.set_model(
                name,
                Arc::new(move |z: &[Complex64]| eval_with_models(&e, z, &none).unwrap_or(Complex64::new(f64::NAN, f64::NAN))),
            );
        }
        Ok(registry)
    }

    /// Parses an expression in this document's dimension.
    pub fn expr(&self, field: &str, text: &str, registry: &SymbolRegistry) -> Result<Expr, ConfigError> {
        parse_expr(text, self.m, registry).map_err(|error| ConfigError::Parse {
            field: field.to_string(),
            text: text.to_string(),
            error,
        })
    }

    fn poly(&self, field: &str, text: &Option<String>) -> Result<Poly, ConfigError> {
        match text {
            None => Ok(Poly::zero()),
            Some(t) => Ok(self.expr(field, t, &SymbolRegistry::new())?.to_poly()?),
        }
    }

    fn symbol(&self, registry: &SymbolRegistry) -> Result<Arc<OpaqueSymbol>, ConfigError> {
        let name = required(&self.g, "g")?;
        registry
            .get(name)
            .cloned()
            .ok_or_else(|| ConfigError::Invalid(format!("`g = \"{name}\"` is not declared in `symbols`")))
    }

    pub fn sine_spec(&self) -> Result<SineFamilySpec, ConfigError> {
        Ok(SineFamilySpec {
            m: self.m,
            a: parse_field("A", required(&self.a, "A")?)?,
            b: parse_field("B", required(&self.b, "B")?)?,
            a_coeffs: scalars("a_coeffs", &self.a_coeffs)?,
            b_coeffs: scalars("b_coeffs", &self.b_coeffs)?,
            q1: self.poly("Q1", &self.q1)?,
            q2: self.poly("Q2", &self.q2)?,
            c: self.shift()?,
            variant: self.variant.ok_or(ConfigError::Missing("variant"))?,
        })
    }

    pub fn quadratic_spec(&self, registry: &SymbolRegistry) -> Result<QuadraticFamilySpec, ConfigError> {
        Ok(QuadraticFamilySpec {
            m: self.m,
            k1: parse_field("K1", required(&self.k1, "K1")?)?,
            k2: parse_field("K2", required(&self.k2, "K2")?)?,
            g: self.symbol(registry)?,
            c: self.shift()?,
        })
    }

    pub fn single_sine_spec(&self) -> Result<SingleSineSpec, ConfigError> {
        Ok(SingleSineSpec {
            m: self.m,
            a: parse_field("A", required(&self.a, "A")?)?,
            coeffs: scalars("a_coeffs", &self.a_coeffs)?,
            p: self.poly("Q1", &self.q1)?,
            c: self.shift()?,
        })
    }

    pub fn single_quadratic_spec(&self, registry: &SymbolRegistry) -> Result<SingleQuadraticSpec, ConfigError> {
        Ok(SingleQuadraticSpec {
            m: self.m,
            g: self.symbol(registry)?,
            c: self.shift()?,
        })
    }

    /// Validates the family's constraints and builds `(f1, f2)`.
    pub fn build(&self, registry: &SymbolRegistry) -> Result<(Expr, Expr), ConfigError> {
        let family = self.family.ok_or(ConfigError::Missing("family"))?;
        let pair = match family {
            FamilyKind::Sine => build_sine_pair(&self.sine_spec()?)?,
            FamilyKind::Quadratic => build_quadratic_pair(&self.quadratic_spec(registry)?)?,
            FamilyKind::SingleSine => {
                let f = build_single_eq_sine(&self.single_sine_spec()?)?;
                (f.clone(), f)
            }
            FamilyKind::SingleQuadratic => {
                let f = build_single_eq_quadratic(&self.single_quadratic_spec(registry)?)?;
                (f.clone(), f)
            }
        };
        Ok(pair)
    }

    pub fn from_sine(spec: &SineFamilySpec) -> ConfigDoc {
        ConfigDoc {
            family: Some(FamilyKind::Sine),
            m: spec.m,
            c: scalar_texts(spec.c.components()),
            a: Some(spec.a.to_string()),
            b: Some(spec.b.to_string()),
            a_coeffs: scalar_texts(&spec.a_coeffs),
            b_coeffs: scalar_texts(&spec.b_coeffs),
            q1: Some(poly_text(&spec.q1)),
            q2: Some(poly_text(&spec.q2)),
            variant: Some(spec.variant),
            ..ConfigDoc::default()
        }
    }

    pub fn from_quadratic(spec: &QuadraticFamilySpec) -> ConfigDoc {
        ConfigDoc {
            family: Some(FamilyKind::Quadratic),
            m: spec.m,
            c: scalar_texts(spec.c.components()),
            k1: Some(spec.k1.to_string()),
            k2: Some(spec.k2.to_string()),
            g: Some(spec.g.name().to_string()),
            symbols: symbol_decl_lines(&spec.g),
            ..ConfigDoc::default()
        }
    }

    /// Probe settings from the `search` section, falling back to defaults.
    pub fn probe_options(&self) -> ProbeOptions {
        let s = self.search.clone().unwrap_or_default();
        let defaults = ProbeOptions::default();
        ProbeOptions {
            restarts: s.restarts.unwrap_or(DEFAULT_RESTARTS),
            seed: s.seed.unwrap_or(defaults.seed),
            ladder: if s.ladder.is_empty() {
                DEFAULT_LADDER.to_vec()
            } else {
                s.ladder.iter().map(|&[d, b]| (d, b)).collect()
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{Verdict, Verifier};

    const EX11: &str = r#"
family = "sine"
m = 2
c = ["2*pi", "0"]
A = "1"
B = "1"
a_coeffs = ["1"]
b_coeffs = ["1"]
Q1 = "z2^2"
Q2 = "z2^2 + pi"
variant = "i"
"#;

    #[test]
    fn sine_document_builds_a_verified_pair() {
        let doc = ConfigDoc::from_toml(EX11).unwrap();
        let registry = doc.registry().unwrap();
        let (f1, f2) = doc.build(&registry).unwrap();
        let rep = Verifier::new(registry).verify_system(&doc.system().unwrap(), &f1, &f2).unwrap();
        assert_eq!(rep.verdict, Verdict::IdentityZero);
    }

    #[test]
    fn sine_spec_round_trips_through_toml() {
        let spec = ConfigDoc::from_toml(EX11).unwrap().sine_spec().unwrap();
        let text = ConfigDoc::from_sine(&spec).to_toml();
        assert_eq!(ConfigDoc::from_toml(&text).unwrap().sine_spec().unwrap(), spec);
    }

    #[test]
    fn quadratic_round_trip_keeps_rules() {
        let doc = ConfigDoc::from_toml(
            r#"
family = "quadratic"
m = 3
c = ["0", "pi", "pi"]
K1 = "-1"
K2 = "-1"
g = "g"
symbols = ["symbol g depends [z2,z3] shift (0,pi,pi) adds 0"]
"#,
        )
        .unwrap();
        let spec = doc.quadratic_spec(&doc.registry().unwrap()).unwrap();
        let back = ConfigDoc::from_quadratic(&spec);
        let again = back.quadratic_spec(&back.registry().unwrap()).unwrap();
        assert_eq!(again.k1, spec.k1);
        assert_eq!(again.g.rules(), spec.g.rules());
    }

    #[test]
    fn bad_scalar_reports_the_field() {
        let doc = ConfigDoc::from_toml(&EX11.replace("\"2*pi\"", "\"2*pi +\"")).unwrap();
        let err = doc.shift().unwrap_err();
        assert!(matches!(&err, ConfigError::Parse { field, .. } if field == "c"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(ConfigDoc::from_toml("m = 1\nc = [\"0\"]\nbogus = 1"), Err(ConfigError::Toml(_))));
    }

    #[test]
    fn models_evaluate_symbol_free_bodies() {
        let doc = ConfigDoc::from_toml(
            r#"
m = 3
exponents = [2, 1, 2, 1]
c = ["0", "pi", "pi"]
symbols = ["symbol g depends [z2,z3]"]
models = { g = "sin(z2 + z3)" }
"#,
        )
        .unwrap();
        let r = doc.registry().unwrap();
        let z = [0.0, 0.3, 0.4].map(|x| Complex64::new(x, 0.0));
        let v = r.model("g").unwrap()(&z);
        assert!((v.re - 0.7f64.sin()).abs() < 1e-15);
    }
}

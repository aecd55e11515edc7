//! Opaque entire symbols and their additive shift rules.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::ExprError;
use crate::scalar::{GaussRat, Scalar};

/// `g(z + shift) = g(z) + adds`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftRule {
    pub shift: Vec<Scalar>,
    pub adds: Scalar,
}

/// An uninterpreted entire function of some of `z2..zm`.
///
/// Never depends on `z1`, so its `z1`-derivative vanishes identically. The only
/// structure it carries is a list of additive shift rules; sums and integer
/// multiples of registered rules are derivable.
#[derive(Clone, Debug)]
pub struct OpaqueSymbol {
    name: Arc<str>,
    depends_on: BTreeSet<usize>,
    rules: Vec<ShiftRule>,
}

/// Integer coefficients tried for all but the last rule when deriving a shift.
const COMBINATION_BOUND: i64 = 6;

impl OpaqueSymbol {
    pub fn new(name: &str, depends_on: impl IntoIterator<Item = usize>) -> Result<OpaqueSymbol, ExprError> {
        let depends_on: BTreeSet<usize> = depends_on.into_iter().collect();
        if depends_on.contains(&1) || depends_on.contains(&0) {
            return Err(ExprError::SymbolDependsOnZ1(name.to_string()));
        }
        Ok(OpaqueSymbol {
            name: Arc::from(name),
            depends_on,
            rules: Vec::new(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub(crate) fn name_arc(&self) -> Arc<str> {
        self.name.clone()
    }

    /// 1-based indices of the variables the symbol depends on.
    pub fn depends_on(&self) -> &BTreeSet<usize> {
        &self.depends_on
    }

    pub fn rules(&self) -> &[ShiftRule] {
        &self.rules
    }

    fn restrict(&self, shift: &[Scalar]) -> Vec<Scalar> {
        self.depends_on
            .iter()
            .map(|&j| shift.get(j - 1).cloned().unwrap_or_else(Scalar::zero))
            .collect()
    }

    /// Adds a rule after checking it against the rules already registered.
    pub fn add_rule(&mut self, rule: ShiftRule) -> Result<(), ExprError> {
        if let Some(existing) = self.shift_increment(&rule.shift) {
            if !scalars_agree(&existing, &rule.adds) {
                return Err(ExprError::InconsistentShiftRule {
                    symbol: self.name.to_string(),
                    shift: fmt_vec(&rule.shift),
                    registered: existing.to_string(),
                    declared: rule.adds.to_string(),
                });
            }
            return Ok(());
        }
        self.rules.push(rule);
        Ok(())
    }

    /// The constant `s` with `g(z + shift) = g(z) + s`, when derivable from the
    /// registered rules. Components of `shift` outside `depends_on` are ignored.
    pub fn shift_increment(&self, shift: &[Scalar]) -> Option<Scalar> {
        let target = self.restrict(shift);
        if target.iter().all(Scalar::is_zero) {
            return Some(Scalar::zero());
        }
        let restricted: Vec<(Vec<Scalar>, &Scalar)> = self
            .rules
            .iter()
            .map(|r| (self.restrict(&r.shift), &r.adds))
            .filter(|(d, _)| !d.iter().all(Scalar::is_zero))
            .collect();
        let (last, head) = restricted.split_last()?;
        let candidates: Vec<i64> = std::iter::once(0)
            .chain((1..=COMBINATION_BOUND).flat_map(|k| [k, -k]))
            .collect();
        let mut idx = vec![0usize; head.len()];
        loop {
            let mut residual = target.clone();
            let mut acc = Scalar::zero();
            for ((d, s), &ki) in head.iter().zip(&idx) {
                let k = Scalar::from_int(candidates[ki]);
                for (r, dj) in residual.iter_mut().zip(d) {
                    *r = &*r - &(&k * dj);
                }
                acc = &acc + &(&k * s);
            }
            if let Some(t) = integer_multiple(&residual, &last.0) {
                let t = Scalar::from_int(t);
                return Some(&acc + &(&t * last.1));
            }
            // odometer over the candidate coefficients
            let mut pos = 0;
            loop {
                if pos == idx.len() {
                    return None;
                }
                idx[pos] += 1;
                if idx[pos] < candidates.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }
}

/// `t` with `v = t * d` for an integer `t`.
fn integer_multiple(v: &[Scalar], d: &[Scalar]) -> Option<i64> {
    let j = d.iter().position(|x| !x.is_zero())?;
    if v.iter().chain(d).all(Scalar::is_exact) {
        let t: GaussRat = v[j].exact_ratio(&d[j])?;
        if !t.im.is_zero() || !t.re.is_integer() {
            return None;
        }
        let t_int: i64 = num_traits::ToPrimitive::to_i64(&t.re.to_integer())?;
        let ts = Scalar::from_int(t_int);
        return v.iter().zip(d).all(|(a, b)| *a == &ts * b).then_some(t_int);
    }
    let t = v[j].to_complex() / d[j].to_complex();
    let t_int = t.re.round();
    if (t - Complex64::new(t_int, 0.0)).norm() > 1e-9 {
        return None;
    }
    let ok = v.iter().zip(d).all(|(a, b)| {
        let diff = a.to_complex() - b.to_complex() * t_int;
        diff.norm() <= 1e-12 * (1.0 + a.to_complex().norm())
    });
    ok.then_some(t_int as i64)
}

fn scalars_agree(a: &Scalar, b: &Scalar) -> bool {
    if a.is_exact() && b.is_exact() {
        a == b
    } else {
        (a.to_complex() - b.to_complex()).norm() <= 1e-12 * (1.0 + a.to_complex().norm())
    }
}

pub(crate) fn fmt_vec(v: &[Scalar]) -> String {
    let parts: Vec<String> = v.iter().map(|s| s.to_string()).collect();
    format!("({})", parts.join(", "))
}

impl PartialEq for OpaqueSymbol {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Eq for OpaqueSymbol {}

impl std::hash::Hash for OpaqueSymbol {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.name.hash(state);
    }
}

impl PartialOrd for OpaqueSymbol {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpaqueSymbol {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.name.cmp(&other.name)
    }
}

/// Numeric stand-in for an opaque symbol, evaluated at a point of `C^m`.
pub type SymbolModel = Arc<dyn Fn(&[Complex64]) -> Complex64 + Send + Sync>;

/// Declared symbols plus optional numeric models used by numeric verification.
///
/// Declarations happen in a setup phase; expressions capture the symbol as it
/// was when they were built.
#[derive(Clone, Default)]
pub struct SymbolRegistry {
    symbols: BTreeMap<String, Arc<OpaqueSymbol>>,
    models: BTreeMap<String, SymbolModel>,
}

impl fmt::Debug for SymbolRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymbolRegistry")
            .field("symbols", &self.symbols)
            .field("models", &self.models.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl SymbolRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a symbol, or checks that a repeated declaration agrees.
    pub fn declare(&mut self, name: &str, depends_on: impl IntoIterator<Item = usize>) -> Result<Arc<OpaqueSymbol>, ExprError> {
        let sym = OpaqueSymbol::new(name, depends_on)?;
        if let Some(existing) = self.symbols.get(name) {
            if existing.depends_on != sym.depends_on {
                return Err(ExprError::SymbolRedeclared(name.to_string()));
            }
            return Ok(existing.clone());
        }
        let sym = Arc::new(sym);
        self.symbols.insert(name.to_string(), sym.clone());
        Ok(sym)
    }

    pub fn add_rule(&mut self, name: &str, shift: Vec<Scalar>, adds: Scalar) -> Result<Arc<OpaqueSymbol>, ExprError> {
        let sym = self
            .symbols
            .get_mut(name)
            .ok_or_else(|| ExprError::MissingSymbol(name.to_string()))?;
        Arc::make_mut(sym).add_rule(ShiftRule { shift, adds })?;
        Ok(sym.clone())
    }

    pub fn insert(&mut self, sym: OpaqueSymbol) -> Arc<OpaqueSymbol> {
        let sym = Arc::new(sym);
        self.symbols.insert(sym.name().to_string(), sym.clone());
        sym
    }

    pub fn get(&self, name: &str) -> Option<&Arc<OpaqueSymbol>> {
        self.symbols.get(name)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Arc<OpaqueSymbol>> {
        self.symbols.values()
    }

    pub fn set_model(&mut self, name: &str, model: SymbolModel) {
        self.models.insert(name.to_string(), model);
    }

    pub fn model(&self, name: &str) -> Option<&SymbolModel> {
        self.models.get(name)
    }

    pub fn models(&self) -> &BTreeMap<String, SymbolModel> {
        &self.models
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_pi() -> Scalar {
        &Scalar::from_int(2) * &Scalar::pi()
    }

    #[test]
    fn rejects_dependence_on_z1() {
        assert!(OpaqueSymbol::new("g", [1, 2]).is_err());
    }

    #[test]
    fn multiples_of_a_rule_compose() {
        let mut g = OpaqueSymbol::new("g", [2, 3]).unwrap();
        let s = Scalar::ratio(1, 3);
        g.add_rule(ShiftRule {
            shift: vec![Scalar::zero(), two_pi(), two_pi()],
            adds: s.clone(),
        })
        .unwrap();
        let six_pi = &Scalar::from_int(3) * &two_pi();
        let inc = g.shift_increment(&[Scalar::zero(), six_pi.clone(), six_pi.clone()]).unwrap();
        assert_eq!(inc, &Scalar::from_int(3) * &s);
        let back = g.shift_increment(&[Scalar::zero(), -two_pi(), -two_pi()]).unwrap();
        assert_eq!(back, -s);
        assert!(g.shift_increment(&[Scalar::zero(), Scalar::pi(), Scalar::pi()]).is_none());
    }

    #[test]
    fn zero_shift_always_derivable_and_z1_ignored() {
        let g = OpaqueSymbol::new("g", [2]).unwrap();
        assert_eq!(g.shift_increment(&[Scalar::from_int(5), Scalar::zero()]), Some(Scalar::zero()));
        assert_eq!(g.shift_increment(&[Scalar::from_int(5), Scalar::one()]), None);
    }

    #[test]
    fn sums_of_two_rules() {
        let mut g = OpaqueSymbol::new("g", [2, 3]).unwrap();
        g.add_rule(ShiftRule { shift: vec![Scalar::zero(), Scalar::one(), Scalar::zero()], adds: Scalar::from_int(2) }).unwrap();
        g.add_rule(ShiftRule { shift: vec![Scalar::zero(), Scalar::zero(), Scalar::one()], adds: Scalar::from_int(5) }).unwrap();
        let inc = g.shift_increment(&[Scalar::zero(), Scalar::from_int(2), Scalar::from_int(-3)]).unwrap();
        assert_eq!(inc, Scalar::from_int(4 - 15));
    }

    #[test]
    fn inconsistent_rule_rejected() {
        let mut g = OpaqueSymbol::new("g", [2]).unwrap();
        g.add_rule(ShiftRule { shift: vec![Scalar::zero(), Scalar::one()], adds: Scalar::one() }).unwrap();
        let err = g.add_rule(ShiftRule { shift: vec![Scalar::zero(), Scalar::from_int(2)], adds: Scalar::one() });
        assert!(matches!(err, Err(ExprError::InconsistentShiftRule { .. })));
    }
}

//! Property tests over seeded random expressions and family specs.

mod common;

use common::{close, disk_point, eval, expr, rng, shift_with_symbol};
use fermat_pdde::families::{quadratic_pair_unchecked, sine_pair_unchecked};
use fermat_pdde::gen::{
    perturb_quadratic, perturb_sine, random_quadratic_spec, random_sine_spec, QUADRATIC_PERTURBATIONS, SINE_PERTURBATIONS,
};
use fermat_pdde::{
    build_quadratic_pair, build_sine_pair, classify, parse_expr, partial, print_expr, shift, to_nf, Expr, FeasibilityVerdict,
    Verdict, Verifier,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn nf_zero(e: &Expr) -> bool {
    to_nf(e).unwrap().is_zero()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn printed_expressions_parse_back_to_the_same_function(seed in any::<u64>()) {
        let (_, registry) = shift_with_symbol();
        let e = expr(&mut rng(seed), 3, true);
        let text = print_expr(&e);
        let back = parse_expr(&text, 2, &registry).unwrap();
        prop_assert_eq!(print_expr(&back), text.clone());
        prop_assert!(nf_zero(&Expr::sub(e, back)), "{}", text);
    }

    #[test]
    fn product_rule(seed in any::<u64>(), var in 1usize..=2) {
        let mut r = rng(seed);
        // the symbol depends on z2, so only z1 is safe with symbols present
        let symbolic = var == 1;
        let (f, g) = (expr(&mut r, 2, symbolic), expr(&mut r, 2, symbolic));
        let lhs = partial(&Expr::mul(vec![f.clone(), g.clone()]), var).unwrap();
        let rhs = Expr::add(vec![
            Expr::mul(vec![partial(&f, var).unwrap(), g.clone()]),
            Expr::mul(vec![f, partial(&g, var).unwrap()]),
        ]);
        prop_assert!(nf_zero(&Expr::sub(lhs, rhs)));
    }

    #[test]
    fn derivative_is_linear(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (f, g) = (expr(&mut r, 2, true), expr(&mut r, 2, true));
        let (a, b) = (fermat_pdde::gen::small_scalar(&mut r, true), fermat_pdde::gen::small_scalar(&mut r, true));
        let combo = Expr::add(vec![
            Expr::mul(vec![Expr::constant(a.clone()), f.clone()]),
            Expr::mul(vec![Expr::constant(b.clone()), g.clone()]),
        ]);
        let rhs = Expr::add(vec![
            Expr::mul(vec![Expr::constant(a), partial(&f, 1).unwrap()]),
            Expr::mul(vec![Expr::constant(b), partial(&g, 1).unwrap()]),
        ]);
        prop_assert!(nf_zero(&Expr::sub(partial(&combo, 1).unwrap(), rhs)));
    }

    #[test]
    fn shift_commutes_with_the_derivative(seed in any::<u64>()) {
        let (c, _) = shift_with_symbol();
        let f = expr(&mut rng(seed), 3, true);
        let a = partial(&shift(&f, &c).unwrap(), 1).unwrap();
        let b = shift(&partial(&f, 1).unwrap(), &c).unwrap();
        prop_assert!(nf_zero(&Expr::sub(a, b)));
    }

    #[test]
    fn central_differences_match_the_derivative(seed in any::<u64>(), var in 1usize..=2) {
        let mut r = rng(seed);
        let f = expr(&mut r, 3, false);
        let d = partial(&f, var).unwrap();
        let z = disk_point(&mut r, 2, 1.0);
        let h = 1e-5;
        let (mut zp, mut zm) = (z.clone(), z.clone());
        zp[var - 1] += h;
        zm[var - 1] -= h;
        let zero = Complex64::new(0.0, 0.0);
        let fd = (eval(&f, &zp, zero) - eval(&f, &zm, zero)) / (2.0 * h);
        prop_assert!(close(eval(&d, &z, zero), fd, 1e-6), "{}", print_expr(&f));
    }

    #[test]
    fn normal_form_evaluates_like_the_expression(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = expr(&mut r, 3, true);
        let back = to_nf(&f).unwrap().to_expr();
        for _ in 0..20 {
            let z = disk_point(&mut r, 2, 1.0);
            let g = disk_point(&mut r, 1, 1.0)[0];
            prop_assert!(close(eval(&f, &z, g), eval(&back, &z, g), 1e-9));
        }
    }

    #[test]
    fn normal_form_is_canonical(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = expr(&mut r, 3, true);
        prop_assert!(nf_zero(&Expr::sub(f.clone(), f.clone())));
        prop_assert_eq!(to_nf(&f).unwrap(), to_nf(&to_nf(&f).unwrap().to_expr()).unwrap());
    }

    #[test]
    fn classifier_is_total_and_deterministic(n1 in 1u32..=12, m1 in 1u32..=12, n2 in 1u32..=12, m2 in 1u32..=12) {
        let v = classify(n1, m1, n2, m2);
        prop_assert_eq!(v, classify(n1, m1, n2, m2));
        if v == FeasibilityVerdict::SineFamily {
            prop_assert_eq!((n1, m1, n2, m2), (2, 2, 2, 2));
        }
        if v == FeasibilityVerdict::QuadraticFamily {
            prop_assert_eq!((n1, m1, n2, m2), (2, 1, 2, 1));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn valid_sine_specs_build_exact_solutions(seed in any::<u64>()) {
        let spec = random_sine_spec(&mut rng(seed));
        let (f1, f2) = build_sine_pair(&spec).unwrap();
        let report = Verifier::default().verify_system(&spec.system(), &f1, &f2).unwrap();
        prop_assert_eq!(report.verdict, Verdict::IdentityZero);
    }

    #[test]
    fn valid_quadratic_specs_build_exact_solutions(seed in any::<u64>()) {
        let (spec, registry) = random_quadratic_spec(&mut rng(seed));
        let (f1, f2) = build_quadratic_pair(&spec).unwrap();
        let report = Verifier::new(registry).verify_system(&spec.system(), &f1, &f2).unwrap();
        prop_assert_eq!(report.verdict, Verdict::IdentityZero);
    }

    #[test]
    fn sine_perturbations_are_rejected_and_fail(seed in any::<u64>(), k in 0usize..SINE_PERTURBATIONS.len()) {
        let spec = perturb_sine(&random_sine_spec(&mut rng(seed)), SINE_PERTURBATIONS[k]);
        prop_assert!(build_sine_pair(&spec).is_err());
        let (f1, f2) = sine_pair_unchecked(&spec);
        let report = Verifier::default().verify_system(&spec.system(), &f1, &f2).unwrap();
        prop_assert_eq!(report.verdict, Verdict::Nonzero);
    }

    #[test]
    fn quadratic_perturbations_are_rejected_and_fail(seed in any::<u64>(), k in 0usize..QUADRATIC_PERTURBATIONS.len()) {
        let (spec, registry) = random_quadratic_spec(&mut rng(seed));
        let spec = perturb_quadratic(&spec, QUADRATIC_PERTURBATIONS[k]);
        prop_assert!(build_quadratic_pair(&spec).is_err());
        let mut registry = registry;
        registry.insert((*spec.g).clone());
        let (f1, f2) = quadratic_pair_unchecked(&spec);
        let report = Verifier::new(registry).verify_system(&spec.system(), &f1, &f2).unwrap();
        prop_assert_eq!(report.verdict, Verdict::Nonzero);
    }
}

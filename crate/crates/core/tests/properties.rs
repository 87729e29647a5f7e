use std::f64::consts::PI;

use num_complex::Complex;
use proptest::prelude::*;
use varsolve::barron::{
    barron_norm, bound_add, bound_derivative, bound_mul, bound_precondition, iteration_count, rate, step_size,
    BarronCertificate,
};
use varsolve::lagrangian::{linear_elliptic, MatrixField, ScalarField};
use varsolve::network::{extract, Activation};
use varsolve::oracle::dense_product_check;
use varsolve::solver::{energy, functional_gradient};
use varsolve::spectral::{from_grid, to_grid, trig_derivative, trig_multiply, SineFunction, TrigPolynomial};

fn sine(dim: usize, w: usize) -> impl Strategy<Value = SineFunction<f64>> {
    prop::collection::vec(-1.0f64..1.0, w.pow(dim as u32))
        .prop_map(move |v| SineFunction::from_dense(dim, w, &v).unwrap())
}

fn trig(dim: usize, r: i32) -> impl Strategy<Value = TrigPolynomial<f64>> {
    let term = (prop::collection::vec(-r..=r, dim), -1.0f64..1.0, -1.0f64..1.0);
    prop::collection::vec(term, 1..6).prop_map(move |terms| {
        let mut all = Vec::new();
        for (n, re, im) in terms {
            let neg: Vec<i32> = n.iter().map(|v| -v).collect();
            if n == neg {
                all.push((n, Complex::new(re, 0.0)));
            } else {
                all.push((n, Complex::new(re, im)));
                all.push((neg, Complex::new(re, -im)));
            }
        }
        TrigPolynomial::from_terms(dim, all, true).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grid_round_trip(f in sine(2, 5), extra in 0usize..6) {
        let g = to_grid(&f, 5 + extra).unwrap();
        let back = from_grid(&g, 5).unwrap();
        prop_assert!(back.max_coeff_diff(&f).unwrap() < 1e-12);
    }

    #[test]
    fn poincare_inequality(f in sine(2, 4)) {
        let l2 = f.l2_norm();
        prop_assert!(f.h01_norm().powi(2) >= 2.0 * PI * PI * l2 * l2 * (1.0 - 1e-12));
    }

    #[test]
    fn precondition_never_grows_norms(f in sine(1, 8)) {
        let p = f.precondition();
        prop_assert!(p.l2_norm() <= f.l2_norm());
        prop_assert!(p.h01_norm() <= f.h01_norm());
    }

    #[test]
    fn inner_product_is_symmetric(a in sine(2, 3), b in sine(2, 3)) {
        let ab = a.l2_inner(&b).unwrap();
        prop_assert!((ab - b.l2_inner(&a).unwrap()).abs() < 1e-14);
        let h = a.h01_inner(&b).unwrap();
        prop_assert!((h - b.h01_inner(&a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn barron_rules_are_sound(a in trig(2, 3), b in trig(2, 3)) {
        let (ca, cb) = (BarronCertificate::computed(&a), BarronCertificate::computed(&b));
        let slack = 1e-10;
        prop_assert!(barron_norm(&a.add(&b).unwrap()) <= bound_add(&ca, &cb).value() + slack);
        let prod = trig_multiply(&a, &b).unwrap();
        prop_assert!(barron_norm(&prod) <= bound_mul(&ca, &cb).value() * (1.0 + slack) + slack);
        for axis in 0..2 {
            let d = trig_derivative(&a, axis).unwrap();
            prop_assert!(barron_norm(&d) <= bound_derivative(&ca, ca.bandlimit()).value() + slack);
        }
        prop_assert!(barron_norm(&a.precondition()) <= bound_precondition(&ca).value() + slack);
    }

    #[test]
    fn products_match_pointwise(a in trig(2, 3), b in trig(2, 3)) {
        prop_assert!(dense_product_check(&a, &b, 6).unwrap() < 1e-12);
    }

    #[test]
    fn multiplication_commutes(a in trig(1, 4), b in trig(1, 4)) {
        let ab = trig_multiply(&a, &b).unwrap();
        let ba = trig_multiply(&b, &a).unwrap();
        for (n, c) in ab.iter() {
            prop_assert!((c - ba.coefficient(n)).norm() < 1e-14);
        }
    }

    #[test]
    fn poisson_energy_is_quadratic(u in sine(1, 4), f in sine(1, 4)) {
        let s = linear_elliptic(1, MatrixField::identity(1), ScalarField::Constant(0.0)).unwrap();
        let e = energy(&s, &u, &f, 16).unwrap();
        let closed = 0.5 * u.h01_norm().powi(2) - u.l2_inner(&f).unwrap();
        prop_assert!((e - closed).abs() < 1e-12 * (1.0 + closed.abs()));
    }

    #[test]
    fn gradient_is_linear_for_poisson(u in sine(2, 3), v in sine(2, 3)) {
        let s = linear_elliptic(2, MatrixField::identity(2), ScalarField::Constant(0.0)).unwrap();
        let zero = SineFunction::zero(2, 1);
        let g = |w: &SineFunction<f64>| functional_gradient(&s, w, &zero, 12, 3).unwrap();
        let lhs = g(&u.add(&v).unwrap());
        let rhs = g(&u).add(&g(&v)).unwrap();
        prop_assert!(lhs.max_coeff_diff(&rhs).unwrap() < 1e-9);
    }

    #[test]
    fn extraction_is_seeded_and_budgeted(a in trig(2, 3), k in 1usize..64, seed in any::<u64>()) {
        prop_assume!(!a.is_zero());
        let n1 = extract(&a, k, seed, Activation::CosineFeature).unwrap();
        let n2 = extract(&a, k, seed, Activation::CosineFeature).unwrap();
        prop_assert_eq!(&n1, &n2);
        prop_assert!(n1.weight_sum() <= 2.0 * barron_norm(&a) + 1e-12);
    }

    #[test]
    fn schedule_constants_are_consistent(lambda in 0.05f64..1.0, ratio in 1.0f64..4.0, d in 1usize..4) {
        let c_p = 1.0 / (PI * PI * d as f64);
        let cap = lambda * ratio;
        let eta = step_size(lambda, cap, c_p).unwrap();
        let r = rate(lambda, cap, c_p).unwrap();
        prop_assert!(eta > 0.0 && eta < 1.0);
        prop_assert!(r > 0.0 && r < 1.0);
        let t = iteration_count(1e-3, 1.0, lambda, cap, c_p).unwrap();
        // One fewer step would not meet the target under the stated rate.
        prop_assert!(r.powi(t as i32) * 1.0 <= lambda * 1e-3 / 2.0 * (1.0 + 1e-9));
        if t > 0 {
            prop_assert!(r.powi(t as i32 - 1) > lambda * 1e-3 / 2.0 * (1.0 - 1e-9));
        }
    }
}

use std::f64::consts::PI;

use super::*;
use crate::lagrangian::{linear_elliptic, polynomial_lagrangian, MatrixField, Monomial, ScalarField, ValueBox};
use crate::spectral::FrequencyIndex;

fn poisson(d: usize) -> LagrangianSpec<f64> {
    linear_elliptic(d, MatrixField::identity(d), ScalarField::Constant(0.0)).unwrap()
}

fn phi(omega: &[u32], c: f64) -> SineFunction<f64> {
    SineFunction::mode(omega, c).unwrap()
}

fn quartic(y_max: f64) -> LagrangianSpec<f64> {
    polynomial_lagrangian(
        1,
        vec![
            Monomial::new(0.5, 0, vec![2]),
            Monomial::new(0.5, 2, vec![0]),
            Monomial::new(0.25, 4, vec![0]),
        ],
        ValueBox::new(y_max, 2.0).unwrap(),
        4.0,
    )
    .unwrap()
}

#[test]
fn energy_examples() {
    let s = poisson(2);
    let f = phi(&[1, 1], 2.0 * PI * PI);
    let u = phi(&[1, 1], 1.0);
    let zero = SineFunction::zero(2, 1);
    assert_eq!(energy(&s, &zero, &f, 8).unwrap(), 0.0);
    assert!((energy(&s, &u, &f, 8).unwrap() + PI * PI / 4.0).abs() < 1e-12);
    assert!((energy(&s, &u, &zero, 8).unwrap() - PI * PI / 4.0).abs() < 1e-12);
    let wide = SineFunction::zero(2, 9);
    assert!(matches!(energy(&s, &wide, &f, 8), Err(Error::Aliasing { .. })));
}

#[test]
fn gradient_examples() {
    let s = poisson(2);
    let u = phi(&[1, 1], 1.0);
    let zero = SineFunction::zero(2, 1);
    let g = functional_gradient(&s, &u, &zero, 8, 4).unwrap();
    assert!((g.coefficient(&[1, 1]) - 2.0 * PI * PI).abs() < 1e-10);
    assert!(
        g.sub(&phi(&[1, 1], 2.0 * PI * PI))
            .unwrap()
            .max_coeff_diff(&SineFunction::zero(2, 4))
            .unwrap()
            < 1e-10
    );
    let f = phi(&[1, 1], 2.0 * PI * PI);
    let g = functional_gradient(&s, &u, &f, 8, 8).unwrap();
    assert!(g.iter().all(|(_, c)| c.abs() < 1e-10));
}

#[test]
fn gradient_matches_energy_differences() {
    let s = quartic(10.0);
    let u = SineFunction::from_dense(1, 3, &[0.3, -0.1, 0.05]).unwrap();
    let v = SineFunction::from_dense(1, 3, &[0.2, 0.4, -0.3]).unwrap();
    let f = phi(&[2], 0.7);
    let m = 12;
    let g = functional_gradient(&s, &u, &f, m, 3).unwrap();
    let h = 1e-5;
    let ep = energy(&s, &u.axpy(h, &v).unwrap(), &f, m).unwrap();
    let em = energy(&s, &u.axpy(-h, &v).unwrap(), &f, m).unwrap();
    let fd = (ep - em) / (2.0 * h);
    let an = g.l2_inner(&v).unwrap();
    assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0));
}

#[test]
fn one_step_from_zero() {
    let s = poisson(2);
    let f = phi(&[1, 1], 2.0 * PI * PI);
    let cfg = SolverConfig::new(4);
    let u1 = pgd_step(&s, &SineFunction::zero(2, 1), &f, &cfg).unwrap();
    let eta = step_size(1.0, 1.0, 1.0 / (2.0 * PI * PI)).unwrap();
    let expected = eta * 2.0 * PI * PI / (1.0 + 2.0 * PI * PI);
    assert!((u1.coefficient(&[1, 1]) - expected).abs() < 1e-12);
    assert!((expected - 0.16836).abs() < 1e-5);
}

#[test]
fn fixed_point_and_zero_step() {
    let s = poisson(2);
    let f = phi(&[1, 1], 2.0 * PI * PI);
    let star = phi(&[1, 1], 1.0);
    let cfg = SolverConfig::new(4);
    let next = pgd_step(&s, &star, &f, &cfg).unwrap();
    assert!((next.coefficient(&[1, 1]) - 1.0).abs() < 1e-10);
    assert!(next.sub(&star).unwrap().l2_norm() < 1e-10);
    let u = SineFunction::from_dense(2, 2, &[0.1, 0.2, -0.3, 0.4]).unwrap();
    let same = pgd_step(&s, &u, &f, &cfg.clone().with_eta(0.0)).unwrap();
    assert!(same.sub(&u).unwrap().l2_norm() == 0.0);
    assert!(pgd_step(&s, &u, &f, &cfg.with_eta(1.0)).is_err());
}

#[test]
fn one_dimensional_eigenfunction() {
    let s = poisson(1);
    let f = phi(&[1], PI * PI);
    let cfg = SolverConfig::new(4).with_reference(Some(phi(&[1], 1.0)), Some(-PI * PI / 4.0));
    let (u, rep) = solve(&s, &f, &SineFunction::zero(1, 1), &cfg).unwrap();
    assert!((u.coefficient(&[1]) - 1.0).abs() < 1e-9);
    assert_eq!(rep.summary.stop_reason, StopReason::Tolerance);
    assert!(rep.summary.energy_monotone && rep.summary.ledger_dominated);
}

#[test]
fn poisson_schedule_runs_formula_steps() {
    let s = poisson(2);
    let f = phi(&[1, 1], 2.0 * PI * PI);
    let cfg = SolverConfig::new(8)
        .with_schedule(1e-3)
        .with_reference(Some(phi(&[1, 1], 1.0)), Some(-PI * PI / 4.0));
    let (_, rep) = solve(&s, &f, &SineFunction::zero(2, 1), &cfg).unwrap();
    // gap₀ = π²/4 here, so the formula asks for one step more than with gap₀ = 1.
    assert_eq!(rep.summary.scheduled_iterations, Some(10));
    assert_eq!(rep.records.len(), 11);
    assert!(rep.summary.energy_monotone);
    // The measured per-step contraction is (1 − η·2π²/(1+2π²))² for this problem,
    // above the stated rate and below the conservative one.
    let c = rep.records[1].contraction.unwrap();
    let expected = (1.0f64 - 0.16836).powi(2);
    assert!((c - expected).abs() < 1e-4);
    assert!(c > rep.summary.stated_rate && c < rep.summary.conservative_rate);
}

#[test]
fn quartic_stays_in_box_and_decreases() {
    let s = quartic(0.25);
    let f = phi(&[1], 1.0);
    let cfg = SolverConfig::new(8).with_tolerance(1e-10, 2000);
    let (u, rep) = solve(&s, &f, &SineFunction::zero(1, 1), &cfg).unwrap();
    assert!(rep.summary.energy_monotone);
    assert!(rep.summary.ledger_dominated);
    // Stationarity of the nonlinear problem.
    let g = functional_gradient(&s, &u, &f, 32, 8).unwrap();
    assert!(g.iter().all(|(_, c)| c.abs() < 1e-6));
    assert!(u.nnz() > 1);
}

#[test]
fn box_escape_aborts() {
    let s = quartic(0.05);
    let f = phi(&[1], 5.0);
    let cfg = SolverConfig::new(4);
    let err = solve(&s, &f, &SineFunction::zero(1, 1), &cfg).unwrap_err();
    assert!(matches!(err, Error::BoxEscape { .. }));
}

#[test]
fn identical_pair_has_no_drift() {
    let s = quartic(0.25);
    let f = phi(&[1], 0.5);
    let cfg = SolverConfig::new(4).with_schedule(1e-3);
    let (_, _, rep) = solve_pair(&s, &s, &f, &SineFunction::zero(1, 1), &cfg).unwrap();
    assert_eq!(rep.eps_l, 0.0);
    assert!(rep.drift.iter().all(|r| r.measured == 0.0 && r.bound == 0.0));
}

#[test]
fn config_validation() {
    let s = poisson(1);
    let f = phi(&[3], 1.0);
    let u0 = SineFunction::zero(1, 1);
    assert!(solve(&s, &f, &u0, &SolverConfig::new(2)).is_err());
    assert!(solve(&s, &f, &u0, &SolverConfig::new(4).with_schedule(0.0)).is_err());
    let bad_dim = SineFunction::from_coefficients(2, 1, [(FrequencyIndex::ones(2), 1.0)]).unwrap();
    assert!(solve(&s, &bad_dim, &u0, &SolverConfig::new(4)).is_err());
}

use varsolve::lagrangian::{polynomial_lagrangian, Monomial, ValueBox};
use varsolve::oracle::{fd_minimize, golden, golden_names, FdProblem};
use varsolve::solver::{solve, SolverConfig, StopReason};
use varsolve::spectral::{to_grid, SineFunction};

fn fd_error(name: &str, n: usize) -> f64 {
    let g = golden::<f64>(name).unwrap();
    let p = FdProblem::from_sine(g.spec.clone(), &g.f, n).unwrap();
    let sol = fd_minimize(&p, 1e-9).unwrap();
    sol.max_error(to_grid(&g.u_star, n).unwrap().values())
}

#[test]
fn fd_converges_at_second_order() {
    for name in golden_names() {
        let errs: Vec<f64> = [32, 64, 128].iter().map(|&n| fd_error(name, n)).collect();
        let hs: Vec<f64> = [33.0f64, 65.0, 129.0].iter().map(|m| m.recip()).collect();
        let slope = (errs[2] / errs[0]).ln() / (hs[2] / hs[0]).ln();
        assert!((slope - 2.0).abs() < 0.3, "{name}: order {slope}, errors {errs:?}");
    }
}

fn quartic() -> varsolve::lagrangian::LagrangianSpec<f64> {
    polynomial_lagrangian(
        1,
        vec![
            Monomial::new(0.5, 0, vec![2]),
            Monomial::new(0.5, 2, vec![0]),
            Monomial::new(0.25, 4, vec![0]),
        ],
        ValueBox::new(0.3, 2.0).unwrap(),
        8.0,
    )
    .unwrap()
}

#[test]
fn fd_energy_not_above_interpolated_spectral() {
    let s = quartic();
    let f = SineFunction::from_dense(1, 3, &[2.0, 0.0, 1.0]).unwrap();
    let cfg = SolverConfig::new(16).with_tolerance(1e-12, 20_000);
    let (u, rep) = solve(&s, &f, &SineFunction::zero(1, 1), &cfg).unwrap();
    assert_eq!(rep.summary.stop_reason, StopReason::Tolerance);
    let p = FdProblem::from_sine(s, &f, 256).unwrap();
    let sol = fd_minimize(&p, 1e-9).unwrap();
    let interp = to_grid(&u, 256).unwrap();
    let e_interp = p.energy(interp.values()).unwrap();
    assert!(sol.energy <= e_interp + 1e-6, "{} vs {}", sol.energy, e_interp);
    let rel = sol.l2_distance(interp.values()) / sol.l2_norm();
    assert!(rel < 1e-2, "relative L2 difference {rel}");
}

#[test]
fn residual_reported_on_budget_exhaustion() {
    let g = golden::<f64>("poisson_1d").unwrap();
    let p = FdProblem::from_sine(g.spec, &g.f, 64).unwrap();
    // Below round-off: Newton converges in one step but the residual cannot reach it.
    let err = fd_minimize(&p, 1e-30).unwrap_err();
    assert!(matches!(err, varsolve::Error::NoConvergence { .. }), "{err}");
}

use varsolve::network::{extract, mse, Activation};
use varsolve::oracle::{fd_minimize, golden, FdProblem};
use varsolve::solver::{solve, SolverConfig};
use varsolve::spectral::{embed_sine_to_trig, to_grid, SineFunction};
use varsolve::SineFunctionF32;

#[test]
fn poisson_solves_in_f32() {
    let g = golden::<f32>("poisson_1d").unwrap();
    let cfg = SolverConfig::<f32>::new(4).with_tolerance(1e-6, 2000);
    let u0: SineFunctionF32 = SineFunction::zero(1, 1);
    let (u, rep) = solve(&g.spec, &g.f, &u0, &cfg).unwrap();
    assert!((u.coefficient(&[1]) - 1.0).abs() < 1e-4);
    assert!(rep.summary.energy_monotone);
}

#[test]
fn oracle_and_network_in_f32() {
    let g = golden::<f32>("poisson_2d").unwrap();
    let p = FdProblem::from_sine(g.spec.clone(), &g.f, 32).unwrap();
    let sol = fd_minimize(&p, 1e-3).unwrap();
    assert!(sol.max_error(to_grid(&g.u_star, 32).unwrap().values()) < 1e-2);
    let f = embed_sine_to_trig(&g.u_star);
    let net = extract(&f, 64, 3, Activation::CosineFeature).unwrap();
    let e32 = mse(&net, &f, 16).unwrap() as f64;
    let g64 = golden::<f64>("poisson_2d").unwrap();
    let f64_ = embed_sine_to_trig(&g64.u_star);
    let e64 = mse(&extract(&f64_, 64, 3, Activation::CosineFeature).unwrap(), &f64_, 16).unwrap();
    assert!((e32 - e64).abs() <= 1e-3 * e64 + 1e-6, "{e32} vs {e64}");
}

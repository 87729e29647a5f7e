//! Brute-force references: a finite-element minimizer for `d ≤ 2`, a pointwise
//! check of lattice products, and closed-form golden problems.

mod banded;
mod fd;

pub use fd::{fd_minimize, FdProblem, FdSolution, MIN_NODES};

use crate::error::{Error, Result};
use crate::lagrangian::{linear_elliptic, LagrangianSpec, MatrixField, ScalarField};
use crate::scalar::Scalar;
use crate::spectral::{trig_multiply, SineFunction, TrigPolynomial};

/// Max `|trig_multiply(a,b) − a·b|` over the nodes `j/M`, `j = 0..=M`, per axis.
pub fn dense_product_check<T: Scalar>(a: &TrigPolynomial<T>, b: &TrigPolynomial<T>, m: usize) -> Result<T> {
    let need = a.radius() + b.radius();
    if m < need.max(1) {
        return Err(Error::InvalidArgument(format!(
            "grid of {m} points cannot resolve product radius {need}"
        )));
    }
    let prod = trig_multiply(a, b)?;
    let d = a.dim();
    let h = T::one() / T::from_usize_lossy(m);
    let total = (m + 1).pow(d as u32);
    let mut x = vec![T::zero(); d];
    let mut worst = T::zero();
    for flat in 0..total {
        let mut r = flat;
        for xi in x.iter_mut().rev() {
            *xi = T::from_usize_lossy(r % (m + 1)) * h;
            r /= m + 1;
        }
        let direct = a.eval_complex(&x)? * b.eval_complex(&x)?;
        worst = worst.max((prod.eval_complex(&x)? - direct).norm());
    }
    Ok(worst)
}

#[derive(Clone, Debug)]
pub struct GoldenProblem<T: Scalar> {
    pub name: &'static str,
    pub spec: LagrangianSpec<T>,
    pub f: SineFunction<T>,
    pub u_star: SineFunction<T>,
    pub energy: T,
}

const GOLDEN: [&str; 3] = ["poisson_1d", "poisson_2d", "helmholtz_2d"];

pub fn golden_names() -> &'static [&'static str] {
    &GOLDEN
}

/// Problems with `u* = φ_{(1,…,1)}`, built from `(−Δ + c)φ = (π²d + c)φ`.
pub fn golden<T: Scalar>(name: &str) -> Result<GoldenProblem<T>> {
    let (name, d, c) = match name {
        "poisson_1d" => (GOLDEN[0], 1, 0.0),
        "poisson_2d" => (GOLDEN[1], 2, 0.0),
        "helmholtz_2d" => (GOLDEN[2], 2, 1.0),
        other => return Err(Error::UnknownProblem(other.to_string())),
    };
    let c = T::lit(c);
    let spec = linear_elliptic(d, MatrixField::identity(d), ScalarField::Constant(c))?.with_name(name);
    let ones = vec![1u32; d];
    let mu = T::PI() * T::PI() * T::from_usize_lossy(d) + c;
    let f = SineFunction::mode(&ones, mu)?;
    let u_star = SineFunction::mode(&ones, T::one())?;
    // E(φ) = ½μ‖φ‖² − μ‖φ‖² with ‖φ‖² = 2^{-d}.
    let energy = -mu / T::lit(2.0f64.powi(d as i32 + 1));
    Ok(GoldenProblem {
        name,
        spec,
        f,
        u_star,
        energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{energy, functional_gradient};
    use crate::spectral::{embed_sine_to_trig, to_grid};
    use num_complex::Complex;
    use std::f64::consts::PI;

    #[test]
    fn golden_values() {
        let p = golden::<f64>("poisson_2d").unwrap();
        assert!((p.energy + PI * PI / 4.0).abs() < 1e-14);
        let h = golden::<f64>("helmholtz_2d").unwrap();
        assert!((h.energy + (2.0 * PI * PI + 1.0) / 8.0).abs() < 1e-14);
        assert!(golden::<f64>("nope").is_err());
        for name in golden_names() {
            let g = golden::<f64>(name).unwrap();
            assert_eq!(g.spec.name(), *name);
            let e = energy(&g.spec, &g.u_star, &g.f, 8).unwrap();
            assert!((e - g.energy).abs() < 1e-12, "{name}");
            let grad = functional_gradient(&g.spec, &g.u_star, &g.f, 8, 4).unwrap();
            assert!(grad.iter().all(|(_, c)| c.abs() < 1e-10), "{name}");
        }
    }

    #[test]
    fn product_check_examples() {
        let s = embed_sine_to_trig(&SineFunction::<f64>::mode(&[1], 1.0).unwrap());
        assert!(dense_product_check(&s, &s, 4).unwrap() < 1e-14);
        let zero = TrigPolynomial::zero(1);
        assert_eq!(dense_product_check(&zero, &s, 4).unwrap(), 0.0);
        let a = TrigPolynomial::from_terms(2, [(vec![3, -1], Complex::new(0.5, 0.2))], false).unwrap();
        assert!(dense_product_check(&a, &a, 5).is_err());
        assert!(dense_product_check(&a, &a, 6).unwrap() < 1e-14);
    }

    #[test]
    fn golden_matches_fd() {
        let g = golden::<f64>("helmholtz_2d").unwrap();
        let p = FdProblem::from_sine(g.spec.clone(), &g.f, 32).unwrap();
        let sol = fd_minimize(&p, 1e-8).unwrap();
        let exact = to_grid(&g.u_star, 32).unwrap();
        assert!(sol.max_error(exact.values()) < 2e-2);
    }
}

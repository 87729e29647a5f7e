//! Polynomial integrands `L(y, z) = Σ_α A_α y^{α₀} z₁^{α₁}⋯z_d^{α_d}`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{estimate_on, sample_points, sandwich_violation, Integrand, LagrangianSpec, ValueBox, SAMPLE_SEED};
use crate::barron::AssumptionConstants;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::poincare_constant;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial<T> {
    pub coeff: T,
    pub y_pow: u32,
    pub z_pows: Vec<u32>,
}

impl<T: Scalar> Monomial<T> {
    pub fn new(coeff: T, y_pow: u32, z_pows: Vec<u32>) -> Self {
        Self { coeff, y_pow, z_pows }
    }

    pub fn degree(&self) -> u32 {
        self.y_pow + self.z_pows.iter().sum::<u32>()
    }

    fn exponents(&self) -> Vec<u32> {
        std::iter::once(self.y_pow).chain(self.z_pows.iter().copied()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct PolynomialIntegrand<T> {
    dim: usize,
    terms: Vec<Monomial<T>>,
}

impl<T: Scalar> PolynomialIntegrand<T> {
    pub fn terms(&self) -> &[Monomial<T>] {
        &self.terms
    }

    /// Mixed partial of the polynomial in the variables `v = (y, z)` listed in `wrt`.
    fn partial(&self, v: &[T], wrt: &[usize]) -> T {
        let mut total = T::zero();
        for term in &self.terms {
            let mut e = term.exponents();
            let mut c = term.coeff;
            let mut vanished = false;
            for &i in wrt {
                if e[i] == 0 {
                    vanished = true;
                    break;
                }
                c = c * T::from_u32(e[i]).unwrap();
                e[i] -= 1;
            }
            if vanished {
                continue;
            }
            let prod = e.iter().zip(v).fold(c, |acc, (&k, &x)| acc * x.powi(k as i32));
            total = total + prod;
        }
        total
    }

    fn vars(y: T, z: &[T]) -> Vec<T> {
        std::iter::once(y).chain(z.iter().copied()).collect()
    }
}

impl<T: Scalar> Integrand<T> for PolynomialIntegrand<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, _x: &[T], y: T, z: &[T]) -> T {
        self.partial(&Self::vars(y, z), &[])
    }

    fn du(&self, _x: &[T], y: T, z: &[T]) -> T {
        self.partial(&Self::vars(y, z), &[0])
    }

    fn dz(&self, _x: &[T], y: T, z: &[T], out: &mut [T]) {
        let v = Self::vars(y, z);
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.partial(&v, &[i + 1]);
        }
    }

    fn hessian(&self, _x: &[T], y: T, z: &[T], out: &mut [T]) {
        let v = Self::vars(y, z);
        let n = self.dim + 1;
        for i in 0..n {
            for j in i..n {
                let h = self.partial(&v, &[i, j]);
                out[i * n + j] = h;
                out[j * n + i] = h;
            }
        }
    }
}

const BOX_SAMPLES: usize = 512;

/// Builds a polynomial Lagrangian certified on `bx`. Terms of total degree
/// `≤ 1` are dropped (normalization `L(0,0) = 0`, `∇L(0,0) = 0`). Constants:
/// `λ = min(λ̂, 1/C_p)`, `Λ = Λ̂` over the box samples, and the growth constants
/// `B = d^{P/2} (2πW)^{P+1} (Σ A²)^{1/2}`, `p = k = P` for reference bandlimit `W`.
pub fn polynomial_lagrangian<T: Scalar>(
    dim: usize,
    terms: Vec<Monomial<T>>,
    bx: ValueBox<T>,
    w_ref: T,
) -> Result<LagrangianSpec<T>> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least one".into()));
    }
    if !(w_ref > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "reference bandlimit must be positive, got {w_ref}"
        )));
    }
    for t in &terms {
        if t.z_pows.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: t.z_pows.len(),
            });
        }
        if !t.coeff.is_finite() {
            return Err(Error::NonFinite("monomial coefficient".into()));
        }
    }
    let terms: Vec<Monomial<T>> = terms
        .into_iter()
        .filter(|t| t.degree() > 1 && t.coeff != T::zero())
        .collect();
    if terms.is_empty() {
        return Err(Error::Empty("polynomial has no terms of degree >= 2".into()));
    }
    let integrand = PolynomialIntegrand { dim, terms };
    let samples = sample_points(dim, &bx, BOX_SAMPLES, SAMPLE_SEED);
    let est = estimate_on(&integrand, &samples)?;
    if !(est.lambda > T::zero()) {
        return Err(Error::ConvexityViolation {
            point: est.lambda_at,
            detail: format!("gradient block eigenvalue {} is not positive", est.lambda),
        });
    }
    if let Some((point, detail)) = sandwich_violation(&integrand, &samples, est.lambda, est.cap_lambda) {
        return Err(Error::ConvexityViolation { point, detail });
    }
    let lambda = est.lambda.min(T::one() / poincare_constant::<T>(dim)?);

    let p = integrand.terms.iter().map(Monomial::degree).max().unwrap_or(0);
    let pp = T::from_u32(p).unwrap();
    let a_norm = integrand.terms.iter().map(|t| t.coeff * t.coeff).sum::<T>().sqrt();
    let b =
        T::from_usize_lossy(dim).powf(pp / T::lit(2.0)) * (T::lit(2.0) * T::PI() * w_ref).powi(p as i32 + 1) * a_norm;
    let assumptions = AssumptionConstants::new(b, pp, pp, T::zero())?.verified();
    LagrangianSpec::from_parts(
        "polynomial",
        Arc::new(integrand),
        lambda,
        est.cap_lambda,
        Some(assumptions),
        Some(bx),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::{estimate_convexity, linear_elliptic, MatrixField, ScalarField};

    fn quartic(d: usize, y_max: f64) -> LagrangianSpec<f64> {
        let mut terms = vec![Monomial::new(0.5, 2, vec![0; d]), Monomial::new(0.25, 4, vec![0; d])];
        for i in 0..d {
            let mut z = vec![0; d];
            z[i] = 2;
            terms.push(Monomial::new(0.5, 0, z));
        }
        polynomial_lagrangian(d, terms, ValueBox::new(y_max, 2.0).unwrap(), 4.0).unwrap()
    }

    #[test]
    fn quartic_derivatives_and_constants() {
        let s = quartic(1, 1.0);
        assert!((s.du(&[0.3], 0.5, &[1.0]) - (0.5 + 0.125)).abs() < 1e-15);
        let h = s.hessian(&[0.3], 0.5, &[1.0]);
        assert!((h[0] - 1.75).abs() < 1e-15);
        assert_eq!(h[3], 1.0);
        assert_eq!((s.lambda(), s.cap_lambda()), (1.0, 4.0));
        let est = estimate_convexity(&s, &ValueBox::new(1.0, 3.0).unwrap(), 50).unwrap();
        assert_eq!((est.lambda, est.cap_lambda), (1.0, 4.0));
        assert_eq!(est.cap_lambda_at[1].abs(), 1.0);
        let a = s.assumptions().unwrap();
        assert_eq!((a.p, a.k), (4.0, 4.0));
    }

    #[test]
    fn pure_gradient_energy_matches_poisson() {
        let s = polynomial_lagrangian(
            2,
            vec![Monomial::new(0.5, 0, vec![2, 0]), Monomial::new(0.5, 0, vec![0, 2])],
            ValueBox::new(1.0, 1.0).unwrap(),
            1.0,
        )
        .unwrap();
        let p = linear_elliptic(2, MatrixField::<f64>::identity(2), ScalarField::Constant(0.0)).unwrap();
        for (y, z) in [(0.3, [0.1, -0.7]), (-0.9, [0.5, 0.5])] {
            let x = [0.2, 0.6];
            assert!((s.value(&x, y, &z) - p.value(&x, y, &z)).abs() < 1e-15);
            assert_eq!(s.du(&x, y, &z), p.du(&x, y, &z));
            assert_eq!(s.dz(&x, y, &z), p.dz(&x, y, &z));
            assert_eq!(s.hessian(&x, y, &z), p.hessian(&x, y, &z));
        }
        assert_eq!((s.lambda(), s.cap_lambda()), (1.0, 1.0));
    }

    #[test]
    fn degenerate_gradient_block_rejected() {
        let err = polynomial_lagrangian(
            1,
            vec![Monomial::new(1.0, 0, vec![4])],
            ValueBox::new(1.0, 1.0).unwrap(),
            1.0,
        )
        .unwrap_err();
        match err {
            Error::ConvexityViolation { point, .. } => assert_eq!(point[2], 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn low_degree_terms_dropped() {
        let s = polynomial_lagrangian(
            1,
            vec![
                Monomial::new(3.0, 0, vec![0]),
                Monomial::new(2.0, 1, vec![0]),
                Monomial::new(0.5, 0, vec![2]),
                Monomial::new(0.5, 2, vec![0]),
            ],
            ValueBox::new(1.0, 1.0).unwrap(),
            1.0,
        )
        .unwrap();
        assert_eq!(s.value(&[0.5], 0.0, &[0.0]), 0.0);
        assert_eq!(s.du(&[0.5], 0.0, &[0.0]), 0.0);
    }
}

//! `L = ½ zᵀA(x)z + ½ c(x) y²`.

use std::fmt;
use std::sync::Arc;

use super::{max_asymmetry, symmetric_eigenvalues, Integrand, LagrangianSpec};
use crate::barron::AssumptionConstants;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{poincare_constant, SineFunction};

pub type PointwiseScalar<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
pub type PointwiseMatrix<T> = Arc<dyn Fn(&[T], &mut [T]) + Send + Sync>;

#[derive(Clone)]
pub enum ScalarField<T> {
    Constant(T),
    Sine(SineFunction<T>),
    Pointwise(PointwiseScalar<T>),
}

impl<T: Scalar> ScalarField<T> {
    pub fn eval(&self, x: &[T]) -> T {
        match self {
            Self::Constant(c) => *c,
            // Nodes come from the closed unit cube, so evaluation cannot fail.
            Self::Sine(f) => f.eval_point(x).unwrap_or_else(|_| T::nan()),
            Self::Pointwise(g) => g(x),
        }
    }
}

impl<T: Scalar> fmt::Debug for ScalarField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::Sine(s) => write!(f, "Sine(nnz={})", s.nnz()),
            Self::Pointwise(_) => f.write_str("Pointwise"),
        }
    }
}

/// Symmetric `d × d` coefficient matrix, constant or varying in `x` (row-major).
#[derive(Clone)]
pub enum MatrixField<T> {
    Constant(Vec<T>),
    Pointwise(PointwiseMatrix<T>),
}

impl<T: Scalar> MatrixField<T> {
    pub fn scaled_identity(dim: usize, s: T) -> Self {
        let mut m = vec![T::zero(); dim * dim];
        for i in 0..dim {
            m[i * dim + i] = s;
        }
        Self::Constant(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, T::one())
    }

    fn eval(&self, x: &[T], out: &mut [T]) {
        match self {
            Self::Constant(m) => out.copy_from_slice(m),
            Self::Pointwise(g) => g(x, out),
        }
    }
}

impl<T: Scalar> fmt::Debug for MatrixField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(m) => write!(f, "Constant({m:?})"),
            Self::Pointwise(_) => f.write_str("Pointwise"),
        }
    }
}

struct LinearElliptic<T> {
    dim: usize,
    a: MatrixField<T>,
    c: ScalarField<T>,
}

impl<T: Scalar> LinearElliptic<T> {
    fn apply_a(&self, x: &[T], z: &[T], out: &mut [T]) {
        let d = self.dim;
        let mut a = vec![T::zero(); d * d];
        self.a.eval(x, &mut a);
        for i in 0..d {
            out[i] = (0..d).map(|j| a[i * d + j] * z[j]).sum();
        }
    }
}

impl<T: Scalar> Integrand<T> for LinearElliptic<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[T], y: T, z: &[T]) -> T {
        let mut az = vec![T::zero(); self.dim];
        self.apply_a(x, z, &mut az);
        let half = T::lit(0.5);
        half * az.iter().zip(z).map(|(&a, &b)| a * b).sum::<T>() + half * self.c.eval(x) * y * y
    }

    fn du(&self, x: &[T], y: T, _z: &[T]) -> T {
        self.c.eval(x) * y
    }

    fn dz(&self, x: &[T], _y: T, z: &[T], out: &mut [T]) {
        self.apply_a(x, z, out)
    }

    fn hessian(&self, x: &[T], _y: T, _z: &[T], out: &mut [T]) {
        let d = self.dim;
        let n = d + 1;
        let mut a = vec![T::zero(); d * d];
        self.a.eval(x, &mut a);
        out.iter_mut().for_each(|v| *v = T::zero());
        out[0] = self.c.eval(x);
        for i in 0..d {
            for j in 0..d {
                out[(i + 1) * n + j + 1] = a[i * d + j];
            }
        }
    }
}

const CHECK_NODES: usize = 7;

fn check_grid<T: Scalar>(dim: usize) -> impl Iterator<Item = Vec<T>> {
    let total = CHECK_NODES.pow(dim as u32);
    (0..total).map(move |mut flat| {
        let mut x = vec![T::zero(); dim];
        for slot in x.iter_mut().rev() {
            *slot = T::from_usize_lossy(flat % CHECK_NODES) / T::from_usize_lossy(CHECK_NODES - 1);
            flat /= CHECK_NODES;
        }
        x
    })
}

/// Linear elliptic energy `½ ∇uᵀA∇u + ½ c u²`. The constants are read off a
/// `7^d` grid of `x` values: `λ` is the smallest eigenvalue of `A` (capped at
/// `1/C_p`), `Λ` the largest of `A` and `c`.
pub fn linear_elliptic<T: Scalar>(dim: usize, a: MatrixField<T>, c: ScalarField<T>) -> Result<LagrangianSpec<T>> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least one".into()));
    }
    if let MatrixField::Constant(m) = &a {
        if m.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: m.len(),
            });
        }
    }
    if let ScalarField::Sine(f) = &c {
        if f.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: f.dim(),
            });
        }
    }
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    let mut buf = vec![T::zero(); dim * dim];
    for x in check_grid::<T>(dim) {
        a.eval(&x, &mut buf);
        let flat: Vec<f64> = x.iter().map(|v| v.to_f64_lossy()).collect();
        if buf.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("coefficient matrix at {flat:?}")));
        }
        let asym = max_asymmetry(&buf, dim);
        if asym > T::lit(1e-10) {
            return Err(Error::AsymmetricHessian {
                point: flat,
                asymmetry: asym.to_f64_lossy(),
            });
        }
        let ev = symmetric_eigenvalues(&buf, dim);
        if !(ev[0] > T::zero()) {
            return Err(Error::ConvexityViolation {
                point: flat,
                detail: format!("coefficient matrix eigenvalue {} is not positive", ev[0]),
            });
        }
        let cx = c.eval(&x);
        if !(cx >= T::zero()) {
            return Err(Error::ConvexityViolation {
                point: flat,
                detail: format!("reaction coefficient {cx} is negative"),
            });
        }
        lo = lo.min(ev[0]);
        hi = hi.max(ev[dim - 1]).max(cx);
    }
    let lambda = lo.min(T::one() / poincare_constant::<T>(dim)?);
    let assumptions = match (&a, &c) {
        (MatrixField::Constant(m), ScalarField::Constant(cv)) => {
            let row = (0..dim)
                .map(|i| (0..dim).map(|j| m[i * dim + j].abs()).sum::<T>())
                .fold(T::zero(), T::max);
            Some(AssumptionConstants::new(row.max(cv.abs()), T::one(), T::one(), T::zero())?.verified())
        }
        _ => None,
    };
    let integrand = Arc::new(LinearElliptic { dim, a, c });
    LagrangianSpec::from_parts("linear_elliptic", integrand, lambda, hi, assumptions, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::{estimate_convexity, ValueBox};

    #[test]
    fn poisson_derivatives() {
        let s = linear_elliptic(2, MatrixField::<f64>::identity(2), ScalarField::Constant(0.0)).unwrap();
        assert_eq!(s.dz(&[0.2, 0.3], 5.0, &[1.5, -2.0]), vec![1.5, -2.0]);
        assert_eq!(s.du(&[0.2, 0.3], 5.0, &[1.5, -2.0]), 0.0);
        assert_eq!((s.lambda(), s.cap_lambda()), (1.0, 1.0));
        assert!(s.assumptions().unwrap().verified);
    }

    #[test]
    fn scaled_example() {
        let s = linear_elliptic(
            2,
            MatrixField::<f64>::scaled_identity(2, 2.0),
            ScalarField::Constant(1.0),
        )
        .unwrap();
        assert_eq!(s.dz(&[0.5, 0.5], 3.0, &[1.0, 0.0]), vec![2.0, 0.0]);
        assert_eq!(s.du(&[0.5, 0.5], 3.0, &[1.0, 0.0]), 3.0);
        let bx = ValueBox::new(1.0, 1.0).unwrap();
        let est = estimate_convexity(&s, &bx, 20).unwrap();
        assert_eq!((est.lambda, est.cap_lambda), (2.0, 2.0));
        let est = estimate_convexity(
            &linear_elliptic(2, MatrixField::<f64>::identity(2), ScalarField::Constant(0.0)).unwrap(),
            &bx,
            20,
        )
        .unwrap();
        assert_eq!((est.lambda, est.cap_lambda), (1.0, 1.0));
    }

    #[test]
    fn rejects_bad_coefficients() {
        let bad = MatrixField::Constant(vec![1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            linear_elliptic(2, bad, ScalarField::Constant(0.0)),
            Err(Error::ConvexityViolation { .. })
        ));
        let asym = MatrixField::Constant(vec![1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(
            linear_elliptic(2, asym, ScalarField::Constant(0.0)),
            Err(Error::AsymmetricHessian { .. })
        ));
        assert!(linear_elliptic(1, MatrixField::<f64>::identity(1), ScalarField::Constant(-1.0)).is_err());
        assert!(linear_elliptic(1, MatrixField::<f64>::identity(2), ScalarField::Constant(0.0)).is_err());
    }

    #[test]
    fn varying_coefficients() {
        let a = MatrixField::Pointwise(Arc::new(|x: &[f64], out: &mut [f64]| out[0] = 1.0 + x[0]));
        let c = ScalarField::Sine(SineFunction::mode(&[1], 0.5).unwrap());
        let s = linear_elliptic(1, a, c).unwrap();
        assert_eq!(s.lambda(), 1.0);
        assert_eq!(s.cap_lambda(), 2.0);
        assert!(s.assumptions().is_none());
        assert!((s.du(&[0.5], 2.0, &[0.0]) - 1.0).abs() < 1e-15);
    }
}

//! Integrands `L(x, y, z)` with `y = u(x)`, `z = ∇u(x)`, their derivatives, and
//! convexity certification on a value box.

mod eigen;
mod linear;
mod polynomial;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::barron::AssumptionConstants;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::poincare_constant;

pub(crate) use eigen::{max_asymmetry, symmetric_eigenvalues};
pub use linear::{linear_elliptic, MatrixField, ScalarField};
pub use polynomial::{polynomial_lagrangian, Monomial, PolynomialIntegrand};

/// Pointwise integrand. Implementations must be pure; they are called concurrently.
pub trait Integrand<T>: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[T], y: T, z: &[T]) -> T;
    fn du(&self, x: &[T], y: T, z: &[T]) -> T;
    /// Writes `∇_z L` into `out` (length `d`).
    fn dz(&self, x: &[T], y: T, z: &[T], out: &mut [T]);
    /// Writes the `(d+1)×(d+1)` Hessian in `(y, z)`, row-major, index 0 is `y`.
    fn hessian(&self, x: &[T], y: T, z: &[T], out: &mut [T]);
}

/// `|y| ≤ y_max`, `|z_i| ≤ z_max`: the region where convexity was certified.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueBox<T> {
    pub y_max: T,
    pub z_max: T,
}

impl<T: Scalar> ValueBox<T> {
    pub fn new(y_max: T, z_max: T) -> Result<Self> {
        if !(y_max > T::zero() && z_max > T::zero() && y_max.is_finite() && z_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "value box needs finite positive extents (got y {y_max}, z {z_max})"
            )));
        }
        Ok(Self { y_max, z_max })
    }

    pub fn contains(&self, y: T, z: &[T]) -> bool {
        y.abs() <= self.y_max && z.iter().all(|v| v.abs() <= self.z_max)
    }
}

/// One evaluation point `(x, y, z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample<T> {
    pub x: Vec<T>,
    pub y: T,
    pub z: Vec<T>,
}

impl<T: Scalar> Sample<T> {
    fn flat(&self) -> Vec<f64> {
        self.x
            .iter()
            .chain(std::iter::once(&self.y))
            .chain(self.z.iter())
            .map(|v| v.to_f64_lossy())
            .collect()
    }
}

/// Box corners and the origin (at the domain centre), then `n` uniform random samples.
pub fn sample_points<T: Scalar>(dim: usize, bx: &ValueBox<T>, n: usize, seed: u64) -> Vec<Sample<T>> {
    let centre = vec![T::lit(0.5); dim];
    let mut out = vec![Sample {
        x: centre.clone(),
        y: T::zero(),
        z: vec![T::zero(); dim],
    }];
    for mask in 0..(1usize << (dim + 1)) {
        let sign = |bit: usize| if mask >> bit & 1 == 1 { T::one() } else { -T::one() };
        out.push(Sample {
            x: centre.clone(),
            y: sign(0) * bx.y_max,
            z: (0..dim).map(|i| sign(i + 1) * bx.z_max).collect(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uni = |lo: f64, hi: f64| T::lit(rng.gen_range(lo..=hi));
    let (ym, zm) = (bx.y_max.to_f64_lossy(), bx.z_max.to_f64_lossy());
    for _ in 0..n {
        let x = (0..dim).map(|_| uni(0.0, 1.0)).collect();
        let y = uni(-ym, ym);
        let z = (0..dim).map(|_| uni(-zm, zm)).collect();
        out.push(Sample { x, y, z });
    }
    out
}

/// The integrand together with its convexity constants and optional Barron growth constants.
#[derive(Clone)]
pub struct LagrangianSpec<T> {
    name: String,
    integrand: Arc<dyn Integrand<T>>,
    lambda: T,
    cap_lambda: T,
    assumptions: Option<AssumptionConstants<T>>,
    value_box: Option<ValueBox<T>>,
}

impl<T: Scalar> fmt::Debug for LagrangianSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LagrangianSpec")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("lambda", &self.lambda)
            .field("cap_lambda", &self.cap_lambda)
            .field("assumptions", &self.assumptions)
            .field("value_box", &self.value_box)
            .finish()
    }
}

fn check_lambdas<T: Scalar>(dim: usize, lambda: T, cap_lambda: T) -> Result<()> {
    if !(lambda > T::zero() && lambda <= cap_lambda && cap_lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < lambda <= Lambda < inf (got {lambda}, {cap_lambda})"
        )));
    }
    let bound = T::one() / poincare_constant::<T>(dim)?;
    if lambda > bound {
        return Err(Error::LambdaTooLarge {
            lambda: lambda.to_f64_lossy(),
            bound: bound.to_f64_lossy(),
        });
    }
    Ok(())
}

impl<T: Scalar> LagrangianSpec<T> {
    pub(crate) fn from_parts(
        name: impl Into<String>,
        integrand: Arc<dyn Integrand<T>>,
        lambda: T,
        cap_lambda: T,
        assumptions: Option<AssumptionConstants<T>>,
        value_box: Option<ValueBox<T>>,
    ) -> Result<Self> {
        check_lambdas(integrand.dim(), lambda, cap_lambda)?;
        Ok(Self {
            name: name.into(),
            integrand,
            lambda,
            cap_lambda,
            assumptions,
            value_box,
        })
    }

    /// Wraps a user integrand. It is shifted so that `L(x,0,0) = 0` and
    /// `∇_{(y,z)} L(x,0,0) = 0`; the removed linear part acts as an extra source,
    /// so callers wanting the original equation must fold it into `f`.
    /// Supplied growth constants are recorded as unverified.
    pub fn custom(
        name: impl Into<String>,
        integrand: Arc<dyn Integrand<T>>,
        lambda: T,
        cap_lambda: T,
        assumptions: Option<AssumptionConstants<T>>,
    ) -> Result<Self> {
        let normalized: Arc<dyn Integrand<T>> = Arc::new(Normalized { inner: integrand });
        let assumptions = assumptions.map(|mut a| {
            a.verified = false;
            a
        });
        Self::from_parts(name, normalized, lambda, cap_lambda, assumptions, None)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.integrand.dim()
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn cap_lambda(&self) -> T {
        self.cap_lambda
    }

    pub fn assumptions(&self) -> Option<&AssumptionConstants<T>> {
        self.assumptions.as_ref()
    }

    pub fn value_box(&self) -> Option<&ValueBox<T>> {
        self.value_box.as_ref()
    }

    pub fn integrand(&self) -> &Arc<dyn Integrand<T>> {
        &self.integrand
    }

    pub fn value(&self, x: &[T], y: T, z: &[T]) -> T {
        self.integrand.value(x, y, z)
    }

    pub fn du(&self, x: &[T], y: T, z: &[T]) -> T {
        self.integrand.du(x, y, z)
    }

    pub fn dz(&self, x: &[T], y: T, z: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        self.integrand.dz(x, y, z, &mut out);
        out
    }

    pub fn hessian(&self, x: &[T], y: T, z: &[T]) -> Vec<T> {
        let n = self.dim() + 1;
        let mut out = vec![T::zero(); n * n];
        self.integrand.hessian(x, y, z, &mut out);
        out
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Overrides the declared constants; `λ` must still respect `λ ≤ 1/C_p`.
    pub fn with_constants(mut self, lambda: T, cap_lambda: T) -> Result<Self> {
        check_lambdas(self.dim(), lambda, cap_lambda)?;
        self.lambda = lambda;
        self.cap_lambda = cap_lambda;
        Ok(self)
    }

    pub fn with_assumptions(mut self, a: AssumptionConstants<T>) -> Self {
        self.assumptions = Some(a);
        self
    }

    pub fn with_value_box(mut self, bx: ValueBox<T>) -> Self {
        self.value_box = Some(bx);
        self
    }
}

struct Normalized<T> {
    inner: Arc<dyn Integrand<T>>,
}

impl<T: Scalar> Normalized<T> {
    fn origin(&self, x: &[T]) -> (T, T, Vec<T>) {
        let z0 = vec![T::zero(); self.inner.dim()];
        let mut g = vec![T::zero(); self.inner.dim()];
        self.inner.dz(x, T::zero(), &z0, &mut g);
        (self.inner.value(x, T::zero(), &z0), self.inner.du(x, T::zero(), &z0), g)
    }
}

impl<T: Scalar> Integrand<T> for Normalized<T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[T], y: T, z: &[T]) -> T {
        let (v0, u0, g0) = self.origin(x);
        let lin: T = g0.iter().zip(z).map(|(&a, &b)| a * b).sum();
        self.inner.value(x, y, z) - v0 - u0 * y - lin
    }

    fn du(&self, x: &[T], y: T, z: &[T]) -> T {
        let (_, u0, _) = self.origin(x);
        self.inner.du(x, y, z) - u0
    }

    fn dz(&self, x: &[T], y: T, z: &[T], out: &mut [T]) {
        let (_, _, g0) = self.origin(x);
        self.inner.dz(x, y, z, out);
        for (o, g) in out.iter_mut().zip(g0) {
            *o = *o - g;
        }
    }

    fn hessian(&self, x: &[T], y: T, z: &[T], out: &mut [T]) {
        self.inner.hessian(x, y, z, out)
    }
}

/// Extreme Hessian eigenvalues over a sample set and where they occur
/// (points flattened as `[x…, y, z…]`).
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexityEstimate<T> {
    pub lambda: T,
    pub cap_lambda: T,
    pub lambda_at: Vec<f64>,
    pub cap_lambda_at: Vec<f64>,
}

const SAMPLE_SEED: u64 = 0x5eed_1a9a;

/// `λ̂ = min` smallest eigenvalue of the `z`-block, `Λ̂ = max` largest Hessian eigenvalue.
pub fn estimate_convexity<T: Scalar>(
    spec: &LagrangianSpec<T>,
    bx: &ValueBox<T>,
    n_samples: usize,
) -> Result<ConvexityEstimate<T>> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument(
            "estimate_convexity needs at least one sample".into(),
        ));
    }
    let samples = sample_points(spec.dim(), bx, n_samples, SAMPLE_SEED);
    estimate_on(spec.integrand().as_ref(), &samples)
}

pub(crate) fn estimate_on<T: Scalar>(
    integrand: &dyn Integrand<T>,
    samples: &[Sample<T>],
) -> Result<ConvexityEstimate<T>> {
    let d = integrand.dim();
    let n = d + 1;
    let mut h = vec![T::zero(); n * n];
    let mut best = ConvexityEstimate {
        lambda: T::infinity(),
        cap_lambda: T::neg_infinity(),
        lambda_at: Vec::new(),
        cap_lambda_at: Vec::new(),
    };
    for s in samples {
        integrand.hessian(&s.x, s.y, &s.z, &mut h);
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("hessian at {:?}", s.flat())));
        }
        let asym = max_asymmetry(&h, n);
        if asym > T::lit(1e-8) {
            return Err(Error::AsymmetricHessian {
                point: s.flat(),
                asymmetry: asym.to_f64_lossy(),
            });
        }
        let zblock: Vec<T> = (1..n)
            .flat_map(|i| (1..n).map(move |j| (i, j)))
            .map(|(i, j)| h[i * n + j])
            .collect();
        let lo = symmetric_eigenvalues(&zblock, d)[0];
        let hi = *symmetric_eigenvalues(&h, n).last().unwrap();
        if lo < best.lambda {
            best.lambda = lo;
            best.lambda_at = s.flat();
        }
        if hi > best.cap_lambda {
            best.cap_lambda = hi;
            best.cap_lambda_at = s.flat();
        }
    }
    Ok(best)
}

/// First sample where `diag(0, λI) ≤ H ≤ ΛI` fails, if any.
pub(crate) fn sandwich_violation<T: Scalar>(
    integrand: &dyn Integrand<T>,
    samples: &[Sample<T>],
    lambda: T,
    cap_lambda: T,
) -> Option<(Vec<f64>, String)> {
    let n = integrand.dim() + 1;
    let tol = T::lit(1e-10) * cap_lambda.abs().max(T::one());
    let mut h = vec![T::zero(); n * n];
    for s in samples {
        integrand.hessian(&s.x, s.y, &s.z, &mut h);
        let mut lower = h.clone();
        let mut upper: Vec<T> = h.iter().map(|&v| -v).collect();
        for i in 0..n {
            if i > 0 {
                lower[i * n + i] = lower[i * n + i] - lambda;
            }
            upper[i * n + i] = upper[i * n + i] + cap_lambda;
        }
        let lo = symmetric_eigenvalues(&lower, n)[0];
        if lo < -tol {
            return Some((s.flat(), format!("H - diag(0, {lambda} I) has eigenvalue {lo}")));
        }
        let up = symmetric_eigenvalues(&upper, n)[0];
        if up < -tol {
            return Some((s.flat(), format!("{cap_lambda} I - H has eigenvalue {up}")));
        }
    }
    None
}

/// `ε̂ = max` over samples of the derivative discrepancies divided by `|y|`.
/// A nonzero discrepancy at `y = 0` gives `+∞`.
pub fn approximate_pair<T: Scalar>(
    exact: &LagrangianSpec<T>,
    approx: &LagrangianSpec<T>,
    samples: &[Sample<T>],
) -> Result<T> {
    if exact.dim() != approx.dim() {
        return Err(Error::DimensionMismatch {
            expected: exact.dim(),
            got: approx.dim(),
        });
    }
    if samples.is_empty() {
        return Err(Error::Empty("approximate_pair sample set".into()));
    }
    let d = exact.dim();
    let (mut ge, mut ga) = (vec![T::zero(); d], vec![T::zero(); d]);
    let mut worst = T::zero();
    for s in samples {
        if s.x.len() != d || s.z.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: s.x.len().max(s.z.len()),
            });
        }
        let du = (exact.du(&s.x, s.y, &s.z) - approx.du(&s.x, s.y, &s.z)).abs();
        exact.integrand().dz(&s.x, s.y, &s.z, &mut ge);
        approx.integrand().dz(&s.x, s.y, &s.z, &mut ga);
        let dz = ge.iter().zip(&ga).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>().sqrt();
        let disc = du.max(dz);
        if s.y == T::zero() {
            if disc > T::zero() {
                return Ok(T::infinity());
            }
            continue;
        }
        worst = worst.max(disc / s.y.abs());
    }
    Ok(worst)
}

//! Closed-form step size, contraction rate, iteration count, Barron growth and
//! drift bounds for preconditioned gradient descent.

use serde::{Deserialize, Serialize};

use super::certificate::BarronCertificate;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Growth constants of the surrogate Lagrangian `L̃`:
/// `‖∂L̃(g)‖_B ≤ b · ‖g‖_B^p`, derivatives stay in `Γ_{kW}` for `g ∈ Γ_W`,
/// and the partials of `L` and `L̃` differ by at most `eps · |u(x)|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionConstants<T> {
    pub b: T,
    pub p: T,
    pub k: T,
    pub eps: T,
    /// False when the constants were supplied by hand rather than derived.
    #[serde(default)]
    pub verified: bool,
}

impl<T: Scalar> AssumptionConstants<T> {
    pub fn new(b: T, p: T, k: T, eps: T) -> Result<Self> {
        if !(b >= T::zero() && p >= T::zero() && k > T::zero() && eps >= T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "assumption constants need b >= 0, p >= 0, k > 0, eps >= 0 (got b={b}, p={p}, k={k}, eps={eps})"
            )));
        }
        Ok(Self {
            b,
            p,
            k,
            eps,
            verified: false,
        })
    }

    pub fn verified(mut self) -> Self {
        self.verified = true;
        self
    }

    pub fn with_eps(mut self, eps: T) -> Self {
        self.eps = eps;
        self
    }
}

fn two_pi<T: Scalar>() -> T {
    T::lit(2.0) * T::PI()
}

/// One-step Barron growth of `ũ_{t+1} = ũ_t − η(I−Δ)^{-1}(DẼ(ũ_t) − f)`:
///
/// ```text
/// (1 + η (2π k d + 1) B (2π W_t)^p) ‖ũ_t‖^p + η ‖f‖
/// ```
///
/// The new bandlimit is `2π k W_t` (real; rounded only when attached to a series).
pub fn recursion_bound<T: Scalar>(
    u: &BarronCertificate<T>,
    f_norm: T,
    eta: T,
    dim: usize,
    k: &AssumptionConstants<T>,
) -> Result<BarronCertificate<T>> {
    if !(eta > T::zero()) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {eta}")));
    }
    Ok(recursion_step(u, f_norm, eta, dim, k))
}

pub(crate) fn recursion_step<T: Scalar>(
    u: &BarronCertificate<T>,
    f_norm: T,
    eta: T,
    dim: usize,
    k: &AssumptionConstants<T>,
) -> BarronCertificate<T> {
    let d = T::from_usize_lossy(dim);
    let w = u.bandlimit();
    let growth = T::one() + eta * (two_pi::<T>() * k.k * d + T::one()) * k.b * (two_pi::<T>() * w).powf(k.p);
    let value = growth * u.value().powf(k.p) + eta * f_norm;
    u.derive(
        &[],
        "recursion",
        &[u.value(), f_norm, eta, d, k.b, k.p, k.k, w],
        value,
        two_pi::<T>() * k.k * w,
    )
}

fn geometric_exponent<T: Scalar>(p: T, steps: u32) -> T {
    let t = T::from_u32(steps).unwrap();
    if (p - T::one()).abs() < T::lit(1e-12) {
        t
    } else {
        (p.powi(steps as i32) - T::one()) / (p - T::one())
    }
}

/// Barron norm bound on `ũ_T` after `T` steps from `ũ_0 ∈ Γ_{W_0}`:
///
/// ```text
/// ((1 + η 2π k W₀ (2π k d + 1) B)(1 + η‖f‖))^{pT + (p^T − 1)/(p − 1)} · max{1, ‖ũ₀‖^{p^T}}
/// ```
///
/// For `p = 1` the geometric term is replaced by its limit `T`.
pub fn final_norm_bound<T: Scalar>(
    steps: u32,
    eta: T,
    w0: T,
    dim: usize,
    f_norm: T,
    u0_norm: T,
    k: &AssumptionConstants<T>,
) -> T {
    let d = T::from_usize_lossy(dim);
    let tp = two_pi::<T>();
    let base = (T::one() + eta * tp * k.k * w0 * (tp * k.k * d + T::one()) * k.b) * (T::one() + eta * f_norm);
    let exponent = k.p * T::from_u32(steps).unwrap() + geometric_exponent(k.p, steps);
    let tail = T::one().max(u0_norm.powf(k.p.powi(steps as i32)));
    base.powf(exponent) * tail
}

fn check_constants<T: Scalar>(lambda: T, cap_lambda: T, c_p: T) -> Result<()> {
    if !(lambda > T::zero()) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    if !(lambda <= cap_lambda) {
        return Err(Error::InvalidArgument(format!(
            "lambda {lambda} exceeds Lambda {cap_lambda}"
        )));
    }
    if !(c_p > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "Poincare constant must be positive, got {c_p}"
        )));
    }
    if lambda * c_p > T::one() {
        return Err(Error::LambdaTooLarge {
            lambda: lambda.to_f64_lossy(),
            bound: (T::one() / c_p).to_f64_lossy(),
        });
    }
    Ok(())
}

/// `η = λ⁴ / (4 (1 + C_p)⁷ Λ⁴)`.
pub fn step_size<T: Scalar>(lambda: T, cap_lambda: T, c_p: T) -> Result<T> {
    check_constants(lambda, cap_lambda, c_p)?;
    Ok(lambda.powi(4) / (T::lit(4.0) * (T::one() + c_p).powi(7) * cap_lambda.powi(4)))
}

/// Stated per-step contraction of the energy gap, `1 − λ⁶ / ((1 + C_p)^{10} Λ⁵)`.
pub fn rate<T: Scalar>(lambda: T, cap_lambda: T, c_p: T) -> Result<T> {
    check_constants(lambda, cap_lambda, c_p)?;
    Ok(T::one() - lambda.powi(6) / ((T::one() + c_p).powi(10) * cap_lambda.powi(5)))
}

/// Contraction that the descent inequality actually yields at the default step:
/// the gap decreases by `η λ² / ((1 + C_p)³ Λ)` per step, i.e.
/// `1 − λ⁶ / (4 (1 + C_p)^{10} Λ⁵)`. Weaker than [`rate`] by the factor 4 in `η`.
pub fn conservative_rate<T: Scalar>(lambda: T, cap_lambda: T, c_p: T) -> Result<T> {
    check_constants(lambda, cap_lambda, c_p)?;
    let eta = step_size(lambda, cap_lambda, c_p)?;
    Ok(T::one() - eta * lambda.powi(2) / ((T::one() + c_p).powi(3) * cap_lambda))
}

/// `T = ⌈log(2 gap₀ / (λ ε)) / log(1 / rate)⌉`, clamped at zero.
pub fn iteration_count<T: Scalar>(eps: T, gap0: T, lambda: T, cap_lambda: T, c_p: T) -> Result<usize> {
    if !(eps > T::zero()) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {eps}")));
    }
    if !(gap0 > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "initial gap must be positive, got {gap0}"
        )));
    }
    let r = rate(lambda, cap_lambda, c_p)?;
    iteration_count_at_rate(eps, gap0, lambda, r)
}

/// Same schedule for an arbitrary contraction factor in `(0, 1)`.
pub fn iteration_count_at_rate<T: Scalar>(eps: T, gap0: T, lambda: T, r: T) -> Result<usize> {
    if !(r > T::zero() && r < T::one()) {
        return Err(Error::InvalidArgument(format!(
            "contraction factor must lie in (0,1), got {r}"
        )));
    }
    let num = (T::lit(2.0) * gap0 / (lambda * eps)).ln();
    if num <= T::zero() {
        return Ok(0);
    }
    let t = (num / (T::one() / r).ln()).ceil();
    t.to_usize()
        .ok_or_else(|| Error::InvalidArgument(format!("iteration count {t} not representable")))
}

/// Bound on `‖u_t − ũ_t‖_{H¹₀}` between exact and surrogate descent sequences:
/// `(ε R / (ε + Λ)) ((1 + η (1 + C_p)² (ε + Λ))^t − 1)`.
pub fn drift_bound<T: Scalar>(t: u32, eps_l: T, cap_lambda: T, r: T, eta: T, c_p: T) -> T {
    let s = eps_l + cap_lambda;
    if t == 0 || eps_l == T::zero() || s == T::zero() {
        return T::zero();
    }
    let growth = T::one() + eta * (T::one() + c_p).powi(2) * s;
    eps_l * r / s * (growth.powi(t as i32) - T::one())
}

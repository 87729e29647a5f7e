//! Sine-series and lattice trigonometric representations on `Ω = [0,1]^d`.

mod grid;
mod index;
mod sine;
mod trig;

pub(crate) use grid::{dsine_matrix, separable, sine_matrix, transpose};
pub use grid::{from_grid, gradient_on_grid, to_grid, GridFunction};
pub use index::FrequencyIndex;
pub use sine::SineFunction;
pub use trig::{embed_sine_to_trig, trig_derivative, trig_multiply, TrigPolynomial};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `1/(π² d)`, the reciprocal of the smallest Dirichlet eigenvalue of `−Δ` on `[0,1]^d`.
pub fn poincare_constant<T: Scalar>(dim: usize) -> Result<T> {
    if dim < 1 {
        return Err(Error::InvalidArgument("dimension must be at least one".into()));
    }
    Ok(T::one() / (T::PI() * T::PI() * T::from_usize_lossy(dim)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poincare_values() {
        assert!((poincare_constant::<f64>(1).unwrap() - 0.1013212).abs() < 1e-7);
        assert!((poincare_constant::<f64>(2).unwrap() - 0.0506606).abs() < 1e-7);
        assert!((poincare_constant::<f64>(4).unwrap() - 0.0253303).abs() < 1e-7);
        assert!(poincare_constant::<f64>(0).is_err());
    }
}

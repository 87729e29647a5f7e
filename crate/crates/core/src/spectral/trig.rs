use std::collections::BTreeMap;

use num_complex::Complex;

use super::SineFunction;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Finite trigonometric polynomial `Σ_n ĉ_n exp(iπ nᵀx)` over the integer lattice.
///
/// Lattice point `n` has effective frequency `n/2` in the `exp(i2π ωᵀx)` convention;
/// the period-2 lattice is what lets sine modes multiply exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial<T> {
    dim: usize,
    coeffs: BTreeMap<Vec<i32>, Complex<T>>,
    real_valued: bool,
}

impl<T: Scalar> TrigPolynomial<T> {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            coeffs: BTreeMap::new(),
            real_valued: true,
        }
    }

    /// Builds from explicit lattice terms. With `real_valued`, conjugate symmetry
    /// `ĉ_{−n} = conj(ĉ_n)` is checked to round-off.
    pub fn from_terms<I>(dim: usize, terms: I, real_valued: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<i32>, Complex<T>)>,
    {
        let mut coeffs: BTreeMap<Vec<i32>, Complex<T>> = BTreeMap::new();
        for (n, c) in terms {
            if n.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: n.len(),
                });
            }
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::NonFinite(format!("lattice coefficient at {n:?}")));
            }
            let e = coeffs.entry(n).or_default();
            *e = *e + c;
        }
        coeffs.retain(|_, c| *c != Complex::default());
        let out = Self {
            dim,
            coeffs,
            real_valued,
        };
        if real_valued {
            out.check_conjugate_symmetry()?;
        }
        Ok(out)
    }

    fn check_conjugate_symmetry(&self) -> Result<()> {
        let scale = self.coeffs.values().fold(T::zero(), |m, c| m.max(c.norm()));
        let tol = T::lit(1e-12) * scale.max(T::one());
        for (n, c) in &self.coeffs {
            let neg: Vec<i32> = n.iter().map(|v| -v).collect();
            let partner = self.coeffs.get(&neg).copied().unwrap_or_default();
            if (partner - c.conj()).norm() > tol {
                return Err(Error::InvalidArgument(format!(
                    "coefficient at {n:?} lacks its conjugate partner"
                )));
            }
        }
        Ok(())
    }

    /// Exact lattice embedding of a sine series. Each mode `c·Π sin(πω_i x_i)`
    /// expands into the `2^d` lattice points `s∘ω`, `s ∈ {±1}^d`, with value
    /// `c · (Π s_i) · (−i/2)^d`.
    pub fn from_sine(f: &SineFunction<T>) -> Self {
        let d = f.dim();
        let half = T::lit(0.5);
        // (−i/2)^d
        let mut base = Complex::new(T::one(), T::zero());
        for _ in 0..d {
            base = base * Complex::new(T::zero(), -half);
        }
        let mut coeffs: BTreeMap<Vec<i32>, Complex<T>> = BTreeMap::new();
        for (idx, c) in f.iter() {
            for signs in 0..(1u32 << d) {
                let mut n = Vec::with_capacity(d);
                let mut parity = T::one();
                for (i, &w) in idx.components().iter().enumerate() {
                    if signs >> i & 1 == 1 {
                        n.push(-(w as i32));
                        parity = -parity;
                    } else {
                        n.push(w as i32);
                    }
                }
                let e = coeffs.entry(n).or_default();
                *e = *e + base * (c * parity);
            }
        }
        Self {
            dim: d,
            coeffs,
            real_valued: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficient(&self, n: &[i32]) -> Complex<T> {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i32>, Complex<T>)> + '_ {
        self.coeffs.iter().map(|(k, &v)| (k, v))
    }

    /// Largest `|n_j|` over the support; zero for the empty polynomial.
    pub fn radius(&self) -> usize {
        self.coeffs
            .keys()
            .flat_map(|n| n.iter().map(|v| v.unsigned_abs() as usize))
            .max()
            .unwrap_or(0)
    }

    /// Per-axis `(min, max)` of the support, `None` when empty.
    pub fn support_box(&self) -> Option<Vec<(i32, i32)>> {
        let mut it = self.coeffs.keys();
        let first = it.next()?;
        let mut bounds: Vec<(i32, i32)> = first.iter().map(|&v| (v, v)).collect();
        for n in it {
            for (b, &v) in bounds.iter_mut().zip(n) {
                b.0 = b.0.min(v);
                b.1 = b.1.max(v);
            }
        }
        Some(bounds)
    }

    pub fn eval_complex(&self, x: &[T]) -> Result<Complex<T>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self.coeffs.iter().fold(Complex::default(), |acc, (n, &c)| {
            let phase = n
                .iter()
                .zip(x)
                .fold(T::zero(), |p, (&ni, &xi)| p + T::from_i32(ni).unwrap() * xi);
            acc + c * Complex::from_polar(T::one(), T::PI() * phase)
        }))
    }

    /// Real part of the series at `x`.
    pub fn eval(&self, x: &[T]) -> Result<T> {
        Ok(self.eval_complex(x)?.re)
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut coeffs = self.coeffs.clone();
        for (n, &c) in &other.coeffs {
            let e = coeffs.entry(n.clone()).or_default();
            *e = *e + c;
        }
        coeffs.retain(|_, c| *c != Complex::default());
        Ok(Self {
            dim: self.dim,
            coeffs,
            real_valued: self.real_valued && other.real_valued,
        })
    }

    pub fn scale(&self, s: T) -> Self {
        let mut coeffs = self.coeffs.clone();
        for c in coeffs.values_mut() {
            *c = *c * s;
        }
        coeffs.retain(|_, c| *c != Complex::default());
        Self {
            dim: self.dim,
            coeffs,
            real_valued: self.real_valued,
        }
    }

    /// Exact product: the finite convolution of the coefficient maps.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut coeffs: BTreeMap<Vec<i32>, Complex<T>> = BTreeMap::new();
        for (n, &a) in &self.coeffs {
            for (m, &b) in &other.coeffs {
                let key: Vec<i32> = n.iter().zip(m).map(|(x, y)| x + y).collect();
                let e = coeffs.entry(key).or_default();
                *e = *e + a * b;
            }
        }
        coeffs.retain(|_, c| *c != Complex::default());
        Ok(Self {
            dim: self.dim,
            coeffs,
            real_valued: self.real_valued && other.real_valued,
        })
    }

    /// `∂_axis`: multiplies the coefficient at `n` by `iπ n_axis`.
    pub fn derivative(&self, axis: usize) -> Result<Self> {
        if axis >= self.dim {
            return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
        }
        let mut coeffs = BTreeMap::new();
        for (n, &c) in &self.coeffs {
            if n[axis] == 0 {
                continue;
            }
            let f = T::PI() * T::from_i32(n[axis]).unwrap();
            coeffs.insert(n.clone(), c * Complex::new(T::zero(), f));
        }
        Ok(Self {
            dim: self.dim,
            coeffs,
            real_valued: self.real_valued,
        })
    }

    /// `(I − Δ)^{-1}` on the lattice: divides by `1 + π²‖n‖²`.
    pub fn precondition(&self) -> Self {
        let pi2 = T::PI() * T::PI();
        let mut coeffs = self.coeffs.clone();
        for (n, c) in coeffs.iter_mut() {
            let nn: i64 = n.iter().map(|&v| (v as i64) * (v as i64)).sum();
            *c = *c / (T::one() + pi2 * T::from_i64(nn).unwrap());
        }
        Self {
            dim: self.dim,
            coeffs,
            real_valued: self.real_valued,
        }
    }
}

/// Free-function spellings of the lattice algebra.
pub fn embed_sine_to_trig<T: Scalar>(f: &SineFunction<T>) -> TrigPolynomial<T> {
    TrigPolynomial::from_sine(f)
}

pub fn trig_multiply<T: Scalar>(a: &TrigPolynomial<T>, b: &TrigPolynomial<T>) -> Result<TrigPolynomial<T>> {
    a.multiply(b)
}

pub fn trig_derivative<T: Scalar>(a: &TrigPolynomial<T>, axis: usize) -> Result<TrigPolynomial<T>> {
    a.derivative(axis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn embed_single_mode() {
        let t = TrigPolynomial::<f64>::from_sine(&SineFunction::<f64>::mode(&[3], 1.0).unwrap());
        assert_eq!(t.len(), 2);
        assert!((t.coefficient(&[3]) - Complex::new(0.0, -0.5)).norm() < 1e-15);
        assert!((t.coefficient(&[-3]) - Complex::new(0.0, 0.5)).norm() < 1e-15);
        assert!(t.is_real_valued());
    }

    #[test]
    fn embed_evaluates_like_sine() {
        let f = SineFunction::<f64>::mode(&[2, 3], 1.5).unwrap();
        let t = TrigPolynomial::<f64>::from_sine(&f);
        for x in [[0.1, 0.7], [0.5, 0.5], [0.33, 0.91]] {
            let z = t.eval_complex(&x).unwrap();
            assert!((z.re - f.eval_point(&x).unwrap()).abs() < 1e-14);
            assert!(z.im.abs() < 1e-14);
        }
    }

    #[test]
    fn square_of_first_mode() {
        let t = TrigPolynomial::<f64>::from_sine(&SineFunction::<f64>::mode(&[1], 1.0).unwrap());
        let sq = trig_multiply(&t, &t).unwrap();
        assert!((sq.eval(&[0.5]).unwrap() - 1.0).abs() < 1e-15);
        for j in 0..64 {
            let x = j as f64 / 63.0;
            let s = (PI * x).sin();
            assert!((sq.eval(&[x]).unwrap() - s * s).abs() < 1e-12);
        }
        assert_eq!(sq.support_box().unwrap(), vec![(-2, 2)]);
    }

    #[test]
    fn derivative_example() {
        let t = TrigPolynomial::<f64>::from_sine(&SineFunction::<f64>::mode(&[2], 1.0).unwrap());
        let dt = trig_derivative(&t, 0).unwrap();
        assert!(dt.eval(&[0.25]).unwrap().abs() < 1e-14);
        assert!((dt.eval(&[0.1]).unwrap() - 2.0 * PI * (2.0 * PI * 0.1).cos()).abs() < 1e-13);
        assert!(trig_derivative(&t, 1).is_err());
    }

    #[test]
    fn rejects_asymmetric_real_polynomial() {
        let r = TrigPolynomial::<f64>::from_terms(1, [(vec![1], Complex::new(1.0, 0.0))], true);
        assert!(r.is_err());
        let ok = TrigPolynomial::<f64>::from_terms(
            1,
            [(vec![1], Complex::new(1.0, 2.0)), (vec![-1], Complex::new(1.0, -2.0))],
            true,
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn dimension_mismatch() {
        let a = TrigPolynomial::<f64>::zero(1);
        let b = TrigPolynomial::<f64>::zero(2);
        assert!(a.multiply(&b).is_err());
        assert!(a.add(&b).is_err());
    }
}

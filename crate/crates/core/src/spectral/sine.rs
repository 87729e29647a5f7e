use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::FrequencyIndex;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Truncated Dirichlet sine series on `[0,1]^d`:
///
/// ```text
/// f(x) = Σ_{ω ∈ [1,W]^d} c_ω Π_i sin(π ω_i x_i)
/// ```
///
/// Basis functions are stored with unit amplitude, so `‖f‖²_{L²} = 2^{-d} Σ c_ω²`.
/// Coefficients are kept in a sparse map; exact zeros are not stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SineFunction<T> {
    dim: usize,
    bandlimit: usize,
    coeffs: BTreeMap<FrequencyIndex, T>,
}

impl<T: Scalar> SineFunction<T> {
    pub fn zero(dim: usize, bandlimit: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least one");
        assert!(bandlimit >= 1, "bandlimit must be at least one");
        Self {
            dim,
            bandlimit,
            coeffs: BTreeMap::new(),
        }
    }

    /// Single eigenfunction `c · φ_ω`, with the smallest bandlimit containing `ω`.
    pub fn mode(omega: &[u32], c: T) -> Result<Self> {
        let idx = FrequencyIndex::new(omega.to_vec())?;
        let w = idx.max_component() as usize;
        let mut f = Self::zero(idx.dim(), w);
        f.set(idx, c)?;
        Ok(f)
    }

    pub fn from_coefficients<I>(dim: usize, bandlimit: usize, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (FrequencyIndex, T)>,
    {
        let mut f = Self::zero(dim, bandlimit);
        for (idx, c) in coeffs {
            f.add_at(idx, c)?;
        }
        Ok(f)
    }

    /// Builds from a dense row-major block over `[1, W]^d`.
    pub fn from_dense(dim: usize, bandlimit: usize, dense: &[T]) -> Result<Self> {
        let expected = bandlimit.pow(dim as u32);
        if dense.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "dense block has {} entries, expected {expected}",
                dense.len()
            )));
        }
        let mut f = Self::zero(dim, bandlimit);
        for (off, &c) in dense.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFinite(format!("dense coefficient at offset {off}")));
            }
            if c != T::zero() {
                f.coeffs
                    .insert(FrequencyIndex::from_dense_offset(off, dim, bandlimit), c);
            }
        }
        Ok(f)
    }

    pub fn to_dense(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.bandlimit.pow(self.dim as u32)];
        for (idx, &c) in &self.coeffs {
            out[idx.dense_offset(self.bandlimit)] = c;
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coefficient(&self, omega: &[u32]) -> T {
        FrequencyIndex::new(omega.to_vec())
            .ok()
            .and_then(|idx| self.coeffs.get(&idx).copied())
            .unwrap_or_else(T::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FrequencyIndex, T)> + '_ {
        self.coeffs.iter().map(|(k, &v)| (k, v))
    }

    fn check_index(&self, idx: &FrequencyIndex) -> Result<()> {
        if idx.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: idx.dim(),
            });
        }
        if idx.max_component() as usize > self.bandlimit {
            return Err(Error::OutsideBandlimit {
                index: idx.components().to_vec(),
                w: self.bandlimit,
            });
        }
        Ok(())
    }

    pub fn set(&mut self, idx: FrequencyIndex, c: T) -> Result<()> {
        self.check_index(&idx)?;
        if !c.is_finite() {
            return Err(Error::NonFinite(format!("coefficient at {idx:?}")));
        }
        if c == T::zero() {
            self.coeffs.remove(&idx);
        } else {
            self.coeffs.insert(idx, c);
        }
        Ok(())
    }

    pub fn add_at(&mut self, idx: FrequencyIndex, c: T) -> Result<()> {
        let cur = self.coeffs.get(&idx).copied().unwrap_or_else(T::zero);
        self.set(idx, cur + c)
    }

    /// Copy with a different bandlimit. Modes beyond the new bandlimit are dropped;
    /// the second return value is the L² norm of what was discarded.
    pub fn with_bandlimit(&self, bandlimit: usize) -> (Self, T) {
        assert!(bandlimit >= 1, "bandlimit must be at least one");
        let mut kept = BTreeMap::new();
        let mut dropped = T::zero();
        for (idx, &c) in &self.coeffs {
            if idx.max_component() as usize <= bandlimit {
                kept.insert(idx.clone(), c);
            } else {
                dropped = dropped + c * c;
            }
        }
        let out = Self {
            dim: self.dim,
            bandlimit,
            coeffs: kept,
        };
        (out, (dropped * self.parseval_factor()).sqrt())
    }

    fn parseval_factor(&self) -> T {
        T::lit(0.5).powi(self.dim as i32)
    }

    fn check_point(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let inside = x.iter().all(|&xi| xi >= T::zero() && xi <= T::one());
        if !inside {
            return Err(Error::OutsideDomain(x.iter().map(|v| v.to_f64_lossy()).collect()));
        }
        Ok(())
    }

    /// `Σ_ω c_ω Π_i sin(π ω_i x_i)`.
    pub fn eval_point(&self, x: &[T]) -> Result<T> {
        self.check_point(x)?;
        // sines[i][k-1] = sin(π k x_i)
        let sines: Vec<Vec<T>> = x
            .iter()
            .map(|&xi| {
                (1..=self.bandlimit)
                    .map(|k| (T::PI() * T::from_usize_lossy(k) * xi).sin())
                    .collect()
            })
            .collect();
        Ok(self
            .coeffs
            .iter()
            .map(|(idx, &c)| {
                idx.components()
                    .iter()
                    .zip(&sines)
                    .fold(c, |acc, (&w, s)| acc * s[w as usize - 1])
            })
            .sum())
    }

    /// Partial derivative `∂_axis f` at a point, by term-wise differentiation.
    pub fn eval_partial(&self, x: &[T], axis: usize) -> Result<T> {
        self.check_point(x)?;
        if axis >= self.dim {
            return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
        }
        let pi = T::PI();
        Ok(self
            .coeffs
            .iter()
            .map(|(idx, &c)| {
                idx.components().iter().enumerate().fold(c, |acc, (i, &w)| {
                    let k = T::from_u32(w).unwrap();
                    if i == axis {
                        acc * pi * k * (pi * k * x[i]).cos()
                    } else {
                        acc * (pi * k * x[i]).sin()
                    }
                })
            })
            .sum())
    }

    /// Applies a per-mode multiplier `c_ω ↦ m(ω)·c_ω`.
    pub fn map_modes(&self, mut multiplier: impl FnMut(&FrequencyIndex) -> T) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter_map(|(idx, &c)| {
                let v = multiplier(idx) * c;
                (v != T::zero()).then(|| (idx.clone(), v))
            })
            .collect();
        Self {
            dim: self.dim,
            bandlimit: self.bandlimit,
            coeffs,
        }
    }

    /// `Δf`: multiplies each coefficient by `−π²‖ω‖²`.
    pub fn laplacian(&self) -> Self {
        let pi2 = T::PI() * T::PI();
        self.map_modes(|idx| -pi2 * T::from_u64(idx.norm_sq()).unwrap())
    }

    /// `(I − Δ)^{-1} f`: divides each coefficient by `1 + π²‖ω‖²`.
    pub fn precondition(&self) -> Self {
        let pi2 = T::PI() * T::PI();
        self.map_modes(|idx| T::one() / (T::one() + pi2 * T::from_u64(idx.norm_sq()).unwrap()))
    }

    pub fn scale(&self, s: T) -> Self {
        self.map_modes(|_| s)
    }

    /// `self + s·other`, with bandlimit `max(W_self, W_other)`.
    pub fn axpy(&self, s: T, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self {
            dim: self.dim,
            bandlimit: self.bandlimit.max(other.bandlimit),
            coeffs: self.coeffs.clone(),
        };
        for (idx, &c) in &other.coeffs {
            let cur = out.coeffs.get(idx).copied().unwrap_or_else(T::zero);
            let v = cur + s * c;
            if v == T::zero() {
                out.coeffs.remove(idx);
            } else {
                out.coeffs.insert(idx.clone(), v);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(T::one(), other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-T::one(), other)
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

    pub fn l2_norm(&self) -> T {
        (self.parseval_factor() * self.coeffs.values().map(|&c| c * c).sum::<T>()).sqrt()
    }

    /// `‖∇f‖_{L²}`, the H¹₀ norm.
    pub fn h01_norm(&self) -> T {
        let pi2 = T::PI() * T::PI();
        let s: T = self
            .coeffs
            .iter()
            .map(|(idx, &c)| pi2 * T::from_u64(idx.norm_sq()).unwrap() * c * c)
            .sum();
        (self.parseval_factor() * s).sqrt()
    }

    pub fn l2_inner(&self, other: &Self) -> Result<T> {
        self.check_dim(other)?;
        let (small, large) = if self.coeffs.len() <= other.coeffs.len() {
            (self, other)
        } else {
            (other, self)
        };
        let s: T = small
            .coeffs
            .iter()
            .filter_map(|(idx, &c)| large.coeffs.get(idx).map(|&g| c * g))
            .sum();
        Ok(self.parseval_factor() * s)
    }

    /// `⟨∇f, ∇g⟩_{L²}`.
    pub fn h01_inner(&self, other: &Self) -> Result<T> {
        self.check_dim(other)?;
        let pi2 = T::PI() * T::PI();
        let s: T = self
            .coeffs
            .iter()
            .filter_map(|(idx, &c)| {
                other
                    .coeffs
                    .get(idx)
                    .map(|&g| pi2 * T::from_u64(idx.norm_sq()).unwrap() * c * g)
            })
            .sum();
        Ok(self.parseval_factor() * s)
    }

    /// Largest absolute coefficient difference over the union of supports.
    pub fn max_coeff_diff(&self, other: &Self) -> Result<T> {
        let diff = self.sub(other)?;
        Ok(diff.coeffs.values().fold(T::zero(), |m, &c| m.max(c.abs())))
    }

    pub fn cast<U: Scalar>(&self) -> SineFunction<U> {
        SineFunction {
            dim: self.dim,
            bandlimit: self.bandlimit,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, &v)| (k.clone(), U::lit(v.to_f64_lossy())))
                .collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SineWire {
    d: usize,
    #[serde(rename = "W")]
    w: usize,
    coeffs: Vec<(Vec<u32>, f64)>,
}

impl<T: Scalar> Serialize for SineFunction<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SineWire {
            d: self.dim,
            w: self.bandlimit,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, v)| (k.components().to_vec(), v.to_f64_lossy()))
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for SineFunction<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = SineWire::deserialize(deserializer)?;
        if wire.d == 0 || wire.w == 0 {
            return Err(D::Error::custom("d and W must be positive"));
        }
        let mut f = SineFunction::zero(wire.d, wire.w);
        for (omega, c) in wire.coeffs {
            let idx = FrequencyIndex::new(omega).map_err(D::Error::custom)?;
            f.add_at(idx, T::lit(c)).map_err(D::Error::custom)?;
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn phi(omega: &[u32]) -> SineFunction<f64> {
        SineFunction::<f64>::mode(omega, 1.0).unwrap()
    }

    #[test]
    fn eval_point_examples() {
        assert!((phi(&[1]).eval_point(&[0.5]).unwrap() - 1.0).abs() < 1e-15);
        assert!((phi(&[1, 1]).eval_point(&[0.25, 0.25]).unwrap() - 0.5).abs() < 1e-15);
        let f = SineFunction::<f64>::from_coefficients(
            2,
            3,
            [
                (FrequencyIndex::new(vec![1, 2]).unwrap(), 0.3),
                (FrequencyIndex::new(vec![3, 1]).unwrap(), -1.1),
            ],
        )
        .unwrap();
        for x in [[0.0, 0.4], [1.0, 0.7], [0.2, 0.0], [0.9, 1.0]] {
            assert!(f.eval_point(&x).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn eval_point_rejects_outside() {
        let f = phi(&[1, 1]);
        assert!(matches!(f.eval_point(&[1.2, 0.5]), Err(Error::OutsideDomain(_))));
        assert!(matches!(f.eval_point(&[-1e-9, 0.5]), Err(Error::OutsideDomain(_))));
        assert!(matches!(f.eval_point(&[f64::NAN, 0.5]), Err(Error::OutsideDomain(_))));
        assert!(matches!(f.eval_point(&[0.5]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn laplacian_examples() {
        let l = phi(&[1, 1]).laplacian();
        assert!((l.coefficient(&[1, 1]) + 2.0 * PI * PI).abs() < 1e-12);
        assert!((l.coefficient(&[1, 1]) + 19.7392).abs() < 1e-4);
        let f = SineFunction::<f64>::mode(&[2], 3.0).unwrap();
        assert!((f.laplacian().coefficient(&[2]) + 118.435).abs() < 1e-3);
        assert!(SineFunction::<f64>::zero(2, 4).laplacian().is_zero());
        assert_eq!(f.laplacian().bandlimit(), f.bandlimit());
    }

    #[test]
    fn precondition_examples() {
        let p = phi(&[1, 1]).precondition();
        assert!((p.coefficient(&[1, 1]) - 1.0 / (1.0 + 2.0 * PI * PI)).abs() < 1e-15);
        assert!((p.coefficient(&[1, 1]) - 0.048218).abs() < 1e-6);
        assert!(SineFunction::<f64>::zero(1, 3).precondition().is_zero());
    }

    #[test]
    fn norm_examples() {
        let f = phi(&[1, 1]);
        assert!((f.l2_norm() - 0.5).abs() < 1e-15);
        assert!((f.h01_norm() - PI * 2f64.sqrt() * 0.5).abs() < 1e-14);
        assert!((f.h01_norm() - 2.2214).abs() < 1e-4);
        let a = SineFunction::<f64>::mode(&[1, 2], 1.0).unwrap();
        let b = SineFunction::<f64>::mode(&[2, 1], 1.0).unwrap();
        assert_eq!(a.l2_inner(&b).unwrap(), 0.0);
        assert!(matches!(a.l2_inner(&phi(&[1])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn eval_partial_matches_closed_form() {
        let f = phi(&[1]);
        assert!(f.eval_partial(&[0.5], 0).unwrap().abs() < 1e-15);
        assert!((f.eval_partial(&[0.25], 0).unwrap() - PI * (PI / 4.0).cos()).abs() < 1e-14);
    }

    #[test]
    fn set_rejects_out_of_band_and_non_finite() {
        let mut f = SineFunction::<f64>::zero(2, 3);
        let idx = FrequencyIndex::new(vec![4, 1]).unwrap();
        assert!(matches!(f.set(idx, 1.0), Err(Error::OutsideBandlimit { .. })));
        let idx = FrequencyIndex::new(vec![1, 1]).unwrap();
        assert!(matches!(f.set(idx, f64::INFINITY), Err(Error::NonFinite(_))));
    }

    #[test]
    fn truncation_reports_discarded_norm() {
        let f = SineFunction::<f64>::from_coefficients(
            1,
            4,
            [
                (FrequencyIndex::new(vec![1]).unwrap(), 1.0),
                (FrequencyIndex::new(vec![4]).unwrap(), 2.0),
            ],
        )
        .unwrap();
        let (g, res) = f.with_bandlimit(2);
        assert_eq!(g.nnz(), 1);
        assert!((res - (0.5f64 * 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let f =
            SineFunction::<f64>::from_coefficients(2, 3, [(FrequencyIndex::new(vec![1, 3]).unwrap(), 0.25)]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"d":2,"W":3,"coeffs":[[[1,3],0.25]]}"#);
        let g: SineFunction<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
        assert!(serde_json::from_str::<SineFunction<f64>>(r#"{"d":1,"W":2,"coeffs":[[[3],1.0]]}"#).is_err());
    }
}

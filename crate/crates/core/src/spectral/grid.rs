//! DST-I collocation on the interior nodes `x_j = j/(M+1)`, `j = 1..=M`.
//!
//! All transforms are separable: a dense `W^d` (or `M^d`) block is contracted one
//! axis at a time against a small basis matrix.

use serde::{Deserialize, Serialize};

use super::SineFunction;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Samples of a function at the `M^d` interior nodes, row-major (axis 0 slowest).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction<T> {
    #[serde(rename = "d")]
    dim: usize,
    #[serde(rename = "M")]
    points: usize,
    values: Vec<T>,
}

impl<T: Scalar> GridFunction<T> {
    pub fn new(dim: usize, points: usize, values: Vec<T>) -> Result<Self> {
        if dim == 0 || points == 0 {
            return Err(Error::InvalidArgument("grid needs d >= 1 and M >= 1".into()));
        }
        let expected = points.pow(dim as u32);
        if values.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "grid holds {} values, expected {expected}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid value".into()));
        }
        Ok(Self { dim, points, values })
    }

    /// Samples `g` at every interior node.
    pub fn from_fn(dim: usize, points: usize, mut g: impl FnMut(&[T]) -> T) -> Result<Self> {
        let nodes = interior_nodes::<T>(points);
        let n = points.pow(dim as u32);
        let mut x = vec![T::zero(); dim];
        let mut values = Vec::with_capacity(n);
        for flat in 0..n {
            let mut rem = flat;
            for slot in x.iter_mut().rev() {
                *slot = nodes[rem % points];
                rem /= points;
            }
            values.push(g(&x));
        }
        Self::new(dim, points, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn node(&self, flat: usize) -> Vec<T> {
        let nodes = interior_nodes::<T>(self.points);
        let mut x = vec![T::zero(); self.dim];
        let mut rem = flat;
        for slot in x.iter_mut().rev() {
            *slot = nodes[rem % self.points];
            rem /= self.points;
        }
        x
    }

    /// Interior trapezoid quadrature `h^d Σ_j g(x_j)` with `h = 1/(M+1)`.
    /// Exact for functions vanishing on the boundary whose period-2 odd extension
    /// is a trigonometric polynomial of degree below `2(M+1)`.
    pub fn integrate(&self) -> T {
        let h = T::one() / T::from_usize_lossy(self.points + 1);
        h.powi(self.dim as i32) * self.values.iter().copied().sum::<T>()
    }
}

pub(crate) fn interior_nodes<T: Scalar>(m: usize) -> Vec<T> {
    let denom = T::from_usize_lossy(m + 1);
    (1..=m).map(|j| T::from_usize_lossy(j) / denom).collect()
}

/// Row-major matrix `S[j][k] = sin(π j k / (M+1))` over the given node ids `j` and `k = 1..=W`.
pub(crate) fn sine_matrix<T: Scalar>(node_ids: &[usize], m: usize, w: usize) -> Vec<T> {
    let denom = T::from_usize_lossy(m + 1);
    let mut out = Vec::with_capacity(node_ids.len() * w);
    for &j in node_ids {
        for k in 1..=w {
            let arg = T::PI() * T::from_usize_lossy(j) * T::from_usize_lossy(k) / denom;
            out.push(arg.sin());
        }
    }
    out
}

/// `C[j][k] = π k cos(π j k / (M+1))`, the derivative of the sine basis.
pub(crate) fn dsine_matrix<T: Scalar>(node_ids: &[usize], m: usize, w: usize) -> Vec<T> {
    let denom = T::from_usize_lossy(m + 1);
    let mut out = Vec::with_capacity(node_ids.len() * w);
    for &j in node_ids {
        for k in 1..=w {
            let kk = T::from_usize_lossy(k);
            let arg = T::PI() * T::from_usize_lossy(j) * kk / denom;
            out.push(T::PI() * kk * arg.cos());
        }
    }
    out
}

pub(crate) fn transpose<T: Copy>(mat: &[T], rows: usize, cols: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(mat.len());
    for c in 0..cols {
        for r in 0..rows {
            out.push(mat[r * cols + c]);
        }
    }
    out
}

/// Contracts axis `axis` of the row-major tensor `data` (shape `shape`) with the
/// `n_out × shape[axis]` matrix `mat`, returning the new tensor and updating `shape`.
pub(crate) fn mode_product<T: Scalar>(data: &[T], shape: &mut [usize], axis: usize, mat: &[T], n_out: usize) -> Vec<T> {
    let n_in = shape[axis];
    debug_assert_eq!(mat.len(), n_out * n_in);
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let mut out = vec![T::zero(); outer * n_out * inner];
    for o in 0..outer {
        let src = &data[o * n_in * inner..(o + 1) * n_in * inner];
        let dst = &mut out[o * n_out * inner..(o + 1) * n_out * inner];
        for k in 0..n_out {
            let row = &mat[k * n_in..(k + 1) * n_in];
            let d = &mut dst[k * inner..(k + 1) * inner];
            for (j, &a) in row.iter().enumerate() {
                if a == T::zero() {
                    continue;
                }
                let s = &src[j * inner..(j + 1) * inner];
                for (di, &si) in d.iter_mut().zip(s) {
                    *di = *di + a * si;
                }
            }
        }
    }
    shape[axis] = n_out;
    out
}

/// Applies one matrix per axis.
pub(crate) fn separable<T: Scalar>(
    data: &[T],
    in_extent: usize,
    dim: usize,
    mats: &[&[T]],
    out_extent: usize,
) -> Vec<T> {
    let mut shape = vec![in_extent; dim];
    let mut cur = data.to_vec();
    for (axis, mat) in mats.iter().enumerate() {
        cur = mode_product(&cur, &mut shape, axis, mat, out_extent);
    }
    cur
}

fn check_resolution(m: usize, w: usize) -> Result<()> {
    if m < w {
        return Err(Error::Aliasing { m, w });
    }
    Ok(())
}

/// Samples `f` on the `M^d` interior grid.
pub fn to_grid<T: Scalar>(f: &SineFunction<T>, m: usize) -> Result<GridFunction<T>> {
    let w = f.bandlimit();
    check_resolution(m, w)?;
    let ids: Vec<usize> = (1..=m).collect();
    let s = sine_matrix::<T>(&ids, m, w);
    let mats = vec![s.as_slice(); f.dim()];
    let values = separable(&f.to_dense(), w, f.dim(), &mats, m);
    GridFunction::new(f.dim(), m, values)
}

/// Orthogonal DST-I projection of grid data onto the bandlimit-`W` sine space.
pub fn from_grid<T: Scalar>(g: &GridFunction<T>, w: usize) -> Result<SineFunction<T>> {
    let m = g.points();
    check_resolution(m, w)?;
    let ids: Vec<usize> = (1..=m).collect();
    let scale = T::lit(2.0) / T::from_usize_lossy(m + 1);
    let st: Vec<T> = transpose(&sine_matrix::<T>(&ids, m, w), m, w)
        .into_iter()
        .map(|v| v * scale)
        .collect();
    let mats = vec![st.as_slice(); g.dim()];
    let dense = separable(g.values(), m, g.dim(), &mats, w);
    SineFunction::from_dense(g.dim(), w, &dense)
}

/// `∂_j f` at the interior nodes, one grid per axis.
pub fn gradient_on_grid<T: Scalar>(f: &SineFunction<T>, m: usize) -> Result<Vec<GridFunction<T>>> {
    let w = f.bandlimit();
    check_resolution(m, w)?;
    let ids: Vec<usize> = (1..=m).collect();
    let s = sine_matrix::<T>(&ids, m, w);
    let c = dsine_matrix::<T>(&ids, m, w);
    let dense = f.to_dense();
    (0..f.dim())
        .map(|axis| {
            let mats: Vec<&[T]> = (0..f.dim())
                .map(|i| if i == axis { c.as_slice() } else { s.as_slice() })
                .collect();
            GridFunction::new(f.dim(), m, separable(&dense, w, f.dim(), &mats, m))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::FrequencyIndex;
    use std::f64::consts::PI;

    #[test]
    fn round_trip_single_mode() {
        let f = SineFunction::<f64>::mode(&[2], 1.0).unwrap();
        let g = to_grid(&f, 8).unwrap();
        let back = from_grid(&g, 2).unwrap();
        assert!(back.max_coeff_diff(&f).unwrap() < 1e-12);
    }

    #[test]
    fn zero_function_grid() {
        let f = SineFunction::<f64>::zero(2, 3);
        let g = to_grid(&f, 5).unwrap();
        assert!(g.values().iter().all(|&v| v == 0.0));
        assert!(from_grid(&g, 3).unwrap().is_zero());
    }

    #[test]
    fn aliasing_rejected() {
        let f = SineFunction::<f64>::mode(&[5], 1.0).unwrap();
        assert_eq!(to_grid(&f, 4).unwrap_err(), Error::Aliasing { m: 4, w: 5 });
        let g = to_grid(&f, 6).unwrap();
        assert!(matches!(from_grid(&g, 7), Err(Error::Aliasing { .. })));
        assert!(matches!(gradient_on_grid(&f, 3), Err(Error::Aliasing { .. })));
    }

    #[test]
    fn grid_values_match_direct_summation() {
        let f = SineFunction::<f64>::from_coefficients(
            2,
            3,
            [
                (FrequencyIndex::new(vec![1, 3]).unwrap(), 0.7),
                (FrequencyIndex::new(vec![2, 2]).unwrap(), -0.4),
            ],
        )
        .unwrap();
        let g = to_grid(&f, 7).unwrap();
        for flat in 0..g.values().len() {
            let x = g.node(flat);
            assert!((g.values()[flat] - f.eval_point(&x).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn gradient_examples() {
        let f = SineFunction::<f64>::mode(&[1], 1.0).unwrap();
        // M = 3: nodes 0.25, 0.5, 0.75
        let g = gradient_on_grid(&f, 3).unwrap();
        assert!(g[0].values()[1].abs() < 1e-15);
        assert!((g[0].values()[0] - PI * (PI / 4.0).cos()).abs() < 1e-14);
        assert!((g[0].values()[0] - 2.2214).abs() < 1e-4);
    }

    #[test]
    fn grid_json_header() {
        let g = GridFunction::new(1, 2, vec![0.5, -1.0]).unwrap();
        assert_eq!(
            serde_json::to_string(&g).unwrap(),
            r#"{"d":1,"M":2,"values":[0.5,-1.0]}"#
        );
        assert!(GridFunction::new(2, 2, vec![0.0; 3]).is_err());
    }
}

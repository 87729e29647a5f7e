//! Closed-grid trapezoid quadrature for the energy and its weak-form gradient.
//!
//! Nodes `x_j = j/(M+1)`, `j = 0..=M+1`, end weights halved. Products of the
//! basis and its derivatives are integrated exactly for frequencies below
//! `2(M+1)`, which is what makes the assembled gradient the exact derivative of
//! the discrete energy.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lagrangian::LagrangianSpec;
use crate::scalar::Scalar;
use crate::spectral::{dsine_matrix, separable, sine_matrix, transpose, SineFunction};

/// Sample values of `u`, `∇u` and `f` on the closed grid.
pub(crate) struct Nodal<T> {
    pub dim: usize,
    pub m: usize,
    pub y: Vec<T>,
    /// `z[axis][node]`.
    pub z: Vec<Vec<T>>,
    pub f: Vec<T>,
}

impl<T: Scalar> Nodal<T> {
    pub fn extent(&self) -> usize {
        self.m + 2
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn node(&self, flat: usize, x: &mut [T]) {
        let n = self.extent();
        let denom = T::from_usize_lossy(self.m + 1);
        let mut rem = flat;
        for slot in x.iter_mut().rev() {
            *slot = T::from_usize_lossy(rem % n) / denom;
            rem /= n;
        }
    }

    pub fn weight(&self, flat: usize) -> T {
        let n = self.extent();
        let h = T::one() / T::from_usize_lossy(self.m + 1);
        let mut w = T::one();
        let mut rem = flat;
        for _ in 0..self.dim {
            let j = rem % n;
            rem /= n;
            w = w * if j == 0 || j == n - 1 { h * T::lit(0.5) } else { h };
        }
        w
    }

    pub fn z_at(&self, flat: usize, out: &mut [T]) {
        for (o, zs) in out.iter_mut().zip(&self.z) {
            *o = zs[flat];
        }
    }
}

fn check<T: Scalar>(u: &SineFunction<T>, m: usize) -> Result<()> {
    if m < u.bandlimit() {
        return Err(Error::Aliasing { m, w: u.bandlimit() });
    }
    Ok(())
}

fn closed_ids(m: usize) -> Vec<usize> {
    (0..=m + 1).collect()
}

fn values<T: Scalar>(u: &SineFunction<T>, m: usize) -> Vec<T> {
    let w = u.bandlimit();
    let s = sine_matrix::<T>(&closed_ids(m), m, w);
    let mats = vec![s.as_slice(); u.dim()];
    separable(&u.to_dense(), w, u.dim(), &mats, m + 2)
}

pub(crate) fn sample<T: Scalar>(u: &SineFunction<T>, f: &SineFunction<T>, m: usize) -> Result<Nodal<T>> {
    if u.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            got: f.dim(),
        });
    }
    check(u, m)?;
    check(f, m)?;
    let d = u.dim();
    let w = u.bandlimit();
    let ids = closed_ids(m);
    let s = sine_matrix::<T>(&ids, m, w);
    let c = dsine_matrix::<T>(&ids, m, w);
    let dense = u.to_dense();
    let y = separable(&dense, w, d, &vec![s.as_slice(); d], m + 2);
    let z = (0..d)
        .map(|axis| {
            let mats: Vec<&[T]> = (0..d)
                .map(|i| if i == axis { c.as_slice() } else { s.as_slice() })
                .collect();
            separable(&dense, w, d, &mats, m + 2)
        })
        .collect();
    Ok(Nodal {
        dim: d,
        m,
        y,
        z,
        f: values(f, m),
    })
}

fn non_finite<T: Scalar>(nodal: &Nodal<T>, flat: usize, what: &str) -> Error {
    let mut x = vec![T::zero(); nodal.dim];
    nodal.node(flat, &mut x);
    let xs: Vec<f64> = x.iter().map(|v| v.to_f64_lossy()).collect();
    Error::NonFinite(format!("{what} at x = {xs:?}"))
}

/// `Σ_j w_j [L(x_j, u_j, ∇u_j) − f_j u_j]`.
pub(crate) fn energy_of<T: Scalar>(spec: &LagrangianSpec<T>, nodal: &Nodal<T>) -> Result<T> {
    let d = nodal.dim;
    let terms: Vec<T> = (0..nodal.len())
        .into_par_iter()
        .map_init(
            || (vec![T::zero(); d], vec![T::zero(); d]),
            |(x, z), k| {
                nodal.node(k, x);
                nodal.z_at(k, z);
                nodal.weight(k) * (spec.value(x, nodal.y[k], z) - nodal.f[k] * nodal.y[k])
            },
        )
        .collect();
    if let Some(k) = terms.iter().position(|v| !v.is_finite()) {
        return Err(non_finite(nodal, k, "energy integrand"));
    }
    Ok(terms.into_iter().sum())
}

/// Weak-form gradient coefficients for all modes `1..=w_out` per axis:
/// `c_ω = 2^d Σ_j w_j [(∂_u L − f) φ_ω + ∇_z L · ∇φ_ω](x_j)`.
pub(crate) fn gradient_of<T: Scalar>(
    spec: &LagrangianSpec<T>,
    nodal: &Nodal<T>,
    w_out: usize,
) -> Result<SineFunction<T>> {
    let d = nodal.dim;
    let n = nodal.len();
    let m = nodal.m;
    if w_out > m {
        return Err(Error::Aliasing { m, w: w_out });
    }
    // Row k holds (weighted ∂_u L − f, weighted ∂_{z_1} L, …).
    let rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![T::zero(); d], vec![T::zero(); d]),
            |(x, z), k| {
                nodal.node(k, x);
                nodal.z_at(k, z);
                let w = nodal.weight(k);
                let y = nodal.y[k];
                let mut row = vec![T::zero(); d + 1];
                row[0] = w * (spec.du(x, y, z) - nodal.f[k]);
                let mut g = vec![T::zero(); d];
                spec.integrand().dz(x, y, z, &mut g);
                for (r, gi) in row[1..].iter_mut().zip(g) {
                    *r = w * gi;
                }
                row
            },
        )
        .collect();
    if let Some(k) = rows.iter().position(|r| r.iter().any(|v| !v.is_finite())) {
        return Err(non_finite(nodal, k, "Lagrangian derivative"));
    }
    let ids = closed_ids(m);
    let st = transpose(&sine_matrix::<T>(&ids, m, w_out), m + 2, w_out);
    let ct = transpose(&dsine_matrix::<T>(&ids, m, w_out), m + 2, w_out);
    let column = |c: usize| rows.iter().map(|r| r[c]).collect::<Vec<T>>();
    let mut acc = separable(&column(0), m + 2, d, &vec![st.as_slice(); d], w_out);
    for axis in 0..d {
        let mats: Vec<&[T]> = (0..d)
            .map(|i| if i == axis { ct.as_slice() } else { st.as_slice() })
            .collect();
        let part = separable(&column(axis + 1), m + 2, d, &mats, w_out);
        for (a, p) in acc.iter_mut().zip(part) {
            *a = *a + p;
        }
    }
    let scale = T::lit(2.0).powi(d as i32);
    acc.iter_mut().for_each(|v| *v = *v * scale);
    SineFunction::from_dense(d, w_out, &acc)
}

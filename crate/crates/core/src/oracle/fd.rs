//! Piecewise-linear finite-element discretization of the energy on the uniform grid
//! with `N` interior nodes per axis, minimized by damped Newton.
//!
//! In 1-D each cell `[x_i, x_{i+1}]` contributes `h L(x_mid, ū, Δu/h)`. In 2-D every
//! square is split along its anti-diagonal into two triangles, each evaluated at its
//! centroid with the constant gradient of the linear interpolant; for `L = ½|z|²`
//! this reproduces the five-point Laplacian. The source term is mass-lumped.

use super::banded::BandedSpd;
use crate::error::{Error, Result};
use crate::lagrangian::LagrangianSpec;
use crate::scalar::Scalar;
use crate::spectral::{to_grid, SineFunction};

pub const MIN_NODES: usize = 16;

#[derive(Clone, Debug)]
pub struct FdProblem<T: Scalar> {
    spec: LagrangianSpec<T>,
    n: usize,
    f: Vec<T>,
}

/// One linear element: nodal ids (`None` on the boundary), value weights, gradient
/// weights per node, quadrature point and measure.
struct Element<T> {
    nodes: Vec<Option<usize>>,
    a: Vec<T>,
    b: Vec<Vec<T>>,
    x: Vec<T>,
    measure: T,
}

impl<T: Scalar> FdProblem<T> {
    pub fn new(spec: LagrangianSpec<T>, n: usize, f: Vec<T>) -> Result<Self> {
        let d = spec.dim();
        if !(1..=2).contains(&d) {
            return Err(Error::InvalidArgument(format!(
                "finite-difference oracle supports d <= 2, got {d}"
            )));
        }
        if n < MIN_NODES {
            return Err(Error::InvalidArgument(format!(
                "need at least {MIN_NODES} nodes per axis, got {n}"
            )));
        }
        if f.len() != n.pow(d as u32) {
            return Err(Error::DimensionMismatch {
                expected: n.pow(d as u32),
                got: f.len(),
            });
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("source value".into()));
        }
        Ok(Self { spec, n, f })
    }

    /// Samples a sine-series source at the interior nodes.
    pub fn from_sine(spec: LagrangianSpec<T>, f: &SineFunction<T>, n: usize) -> Result<Self> {
        if f.dim() != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                got: f.dim(),
            });
        }
        let values = to_grid(f, n)?.values().to_vec();
        Self::new(spec, n, values)
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    pub fn unknowns(&self) -> usize {
        self.n.pow(self.dim() as u32)
    }

    pub fn spacing(&self) -> T {
        T::one() / T::from_usize_lossy(self.n + 1)
    }

    fn elements(&self) -> Vec<Element<T>> {
        let n = self.n;
        let h = self.spacing();
        let half = T::lit(0.5);
        let id = |i: usize| (1..=n).contains(&i).then(|| i - 1);
        let mut out = Vec::new();
        if self.dim() == 1 {
            for i in 0..=n {
                out.push(Element {
                    nodes: vec![id(i), id(i + 1)],
                    a: vec![half, half],
                    b: vec![vec![-T::one() / h], vec![T::one() / h]],
                    x: vec![(T::from_usize_lossy(i) + half) * h],
                    measure: h,
                });
            }
            return out;
        }
        let id2 = |i: usize, j: usize| match (id(i), id(j)) {
            (Some(a), Some(b)) => Some(a * n + b),
            _ => None,
        };
        let third = T::one() / T::lit(3.0);
        let area = h * h * half;
        let inv = T::one() / h;
        let zero = T::zero();
        for i in 0..=n {
            for j in 0..=n {
                let (xi, xj) = (T::from_usize_lossy(i), T::from_usize_lossy(j));
                // Lower-left triangle (i,j), (i+1,j), (i,j+1).
                out.push(Element {
                    nodes: vec![id2(i, j), id2(i + 1, j), id2(i, j + 1)],
                    a: vec![third; 3],
                    b: vec![vec![-inv, -inv], vec![inv, zero], vec![zero, inv]],
                    x: vec![(xi + third) * h, (xj + third) * h],
                    measure: area,
                });
                // Upper-right triangle (i+1,j+1), (i,j+1), (i+1,j).
                out.push(Element {
                    nodes: vec![id2(i + 1, j + 1), id2(i, j + 1), id2(i + 1, j)],
                    a: vec![third; 3],
                    b: vec![vec![inv, inv], vec![-inv, zero], vec![zero, -inv]],
                    x: vec![(xi + T::lit(2.0) * third) * h, (xj + T::lit(2.0) * third) * h],
                    measure: area,
                });
            }
        }
        out
    }

    fn local(&self, e: &Element<T>, u: &[T]) -> (T, Vec<T>) {
        let d = self.dim();
        let mut y = T::zero();
        let mut z = vec![T::zero(); d];
        for (k, node) in e.nodes.iter().enumerate() {
            if let Some(g) = node {
                y = y + e.a[k] * u[*g];
                for (zi, bi) in z.iter_mut().zip(&e.b[k]) {
                    *zi = *zi + *bi * u[*g];
                }
            }
        }
        (y, z)
    }

    fn source_weight(&self) -> T {
        self.spacing().powi(self.dim() as i32)
    }

    /// Discrete energy of nodal values `u` (row-major, axis 0 slowest).
    pub fn energy(&self, u: &[T]) -> Result<T> {
        if u.len() != self.unknowns() {
            return Err(Error::DimensionMismatch {
                expected: self.unknowns(),
                got: u.len(),
            });
        }
        let mut e = T::zero();
        for el in self.elements() {
            let (y, z) = self.local(&el, u);
            e = e + el.measure * self.spec.value(&el.x, y, &z);
        }
        let src: T = self.f.iter().zip(u).map(|(&f, &v)| f * v).sum();
        Ok(e - self.source_weight() * src)
    }

    fn gradient(&self, u: &[T], elements: &[Element<T>]) -> Vec<T> {
        let d = self.dim();
        let mut g: Vec<T> = self.f.iter().map(|&f| -self.source_weight() * f).collect();
        let mut dz = vec![T::zero(); d];
        for el in elements {
            let (y, z) = self.local(el, u);
            let du = self.spec.du(&el.x, y, &z);
            self.spec.integrand().dz(&el.x, y, &z, &mut dz);
            for (k, node) in el.nodes.iter().enumerate() {
                if let Some(i) = node {
                    let dot: T = dz.iter().zip(&el.b[k]).map(|(&p, &q)| p * q).sum();
                    g[*i] = g[*i] + el.measure * (du * el.a[k] + dot);
                }
            }
        }
        g
    }

    fn hessian(&self, u: &[T], elements: &[Element<T>]) -> BandedSpd<T> {
        let d = self.dim();
        let dd = d + 1;
        let bw = if d == 1 { 1 } else { self.n };
        let mut hmat = BandedSpd::zeros(self.unknowns(), bw);
        let mut hl = vec![T::zero(); dd * dd];
        for el in elements {
            let (y, z) = self.local(el, u);
            self.spec.integrand().hessian(&el.x, y, &z, &mut hl);
            let vecs: Vec<Vec<T>> = (0..el.nodes.len())
                .map(|k| std::iter::once(el.a[k]).chain(el.b[k].iter().copied()).collect())
                .collect();
            for (k, nk) in el.nodes.iter().enumerate() {
                let Some(i) = nk else { continue };
                for (l, nl) in el.nodes.iter().enumerate() {
                    let Some(j) = nl else { continue };
                    if j > i {
                        continue;
                    }
                    let mut s = T::zero();
                    for p in 0..dd {
                        for q in 0..dd {
                            s = s + vecs[k][p] * hl[p * dd + q] * vecs[l][q];
                        }
                    }
                    hmat.add(*i, *j, el.measure * s);
                }
            }
        }
        hmat
    }

    /// Nodal residual `∞`-norm of the discrete gradient divided by `h^d`.
    pub fn residual(&self, u: &[T]) -> T {
        let g = self.gradient(u, &self.elements());
        let w = self.source_weight();
        g.iter().fold(T::zero(), |m, v| m.max(v.abs() / w))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FdSolution<T> {
    pub dim: usize,
    pub nodes: usize,
    pub values: Vec<T>,
    pub energy: T,
    pub residual: T,
    pub iterations: usize,
}

impl<T: Scalar> FdSolution<T> {
    /// `h^d`-weighted discrete L² norm of `values − other`.
    pub fn l2_distance(&self, other: &[T]) -> T {
        let h = T::one() / T::from_usize_lossy(self.nodes + 1);
        let s: T = self.values.iter().zip(other).map(|(&a, &b)| (a - b) * (a - b)).sum();
        (h.powi(self.dim as i32) * s).sqrt()
    }

    pub fn l2_norm(&self) -> T {
        self.l2_distance(&vec![T::zero(); self.values.len()])
    }

    pub fn max_error(&self, other: &[T]) -> T {
        self.values
            .iter()
            .zip(other)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }
}

const MAX_ITERATIONS: usize = 200;
const MAX_HALVINGS: usize = 30;

/// Damped Newton from zero, falling back to a diagonally scaled gradient step when the
/// Hessian is not positive definite or the Newton direction fails to decrease the energy.
pub fn fd_minimize<T: Scalar>(p: &FdProblem<T>, tol: T) -> Result<FdSolution<T>> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let elements = p.elements();
    let w = p.source_weight();
    let mut u = vec![T::zero(); p.unknowns()];
    let mut e = p.energy(&u)?;
    let mut residual = T::infinity();
    for it in 0..MAX_ITERATIONS {
        let g = p.gradient(&u, &elements);
        residual = g.iter().fold(T::zero(), |m, v| m.max(v.abs() / w));
        if residual < tol {
            return Ok(FdSolution {
                dim: p.dim(),
                nodes: p.n,
                values: u,
                energy: e,
                residual,
                iterations: it,
            });
        }
        let hess = p.hessian(&u, &elements);
        let diag: Vec<T> = (0..p.unknowns()).map(|i| hess.diag(i)).collect();
        let newton = hess.cholesky().map(|c| {
            let neg: Vec<T> = g.iter().map(|&v| -v).collect();
            c.solve(&neg)
        });
        let fallback = || -> Vec<T> {
            g.iter()
                .zip(&diag)
                .map(|(&gi, &di)| -gi / if di > T::zero() { di } else { T::one() })
                .collect()
        };
        let mut accepted = false;
        for dir in newton.into_iter().chain(std::iter::once(fallback())) {
            if let Some((u_new, e_new)) = line_search(p, &u, &dir, e)? {
                u = u_new;
                e = e_new;
                accepted = true;
                break;
            }
        }
        if !accepted {
            break;
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        residual: residual.to_f64_lossy(),
    })
}

fn line_search<T: Scalar>(p: &FdProblem<T>, u: &[T], dir: &[T], e: T) -> Result<Option<(Vec<T>, T)>> {
    let mut alpha = T::one();
    let slack = T::epsilon() * T::lit(16.0) * e.abs().max(T::one());
    for _ in 0..=MAX_HALVINGS {
        let trial: Vec<T> = u.iter().zip(dir).map(|(&a, &b)| a + alpha * b).collect();
        let et = p.energy(&trial)?;
        if et <= e + slack && et.is_finite() {
            return Ok(Some((trial, et)));
        }
        alpha = alpha * T::lit(0.5);
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::{linear_elliptic, MatrixField, ScalarField};
    use std::f64::consts::PI;

    fn poisson(d: usize) -> LagrangianSpec<f64> {
        linear_elliptic(d, MatrixField::identity(d), ScalarField::Constant(0.0)).unwrap()
    }

    #[test]
    fn poisson_1d_eigenfunction() {
        let f = SineFunction::mode(&[1], PI * PI).unwrap();
        let p = FdProblem::from_sine(poisson(1), &f, 256).unwrap();
        let sol = fd_minimize(&p, 1e-8).unwrap();
        let exact = to_grid(&SineFunction::mode(&[1], 1.0).unwrap(), 256).unwrap();
        assert!(sol.max_error(exact.values()) < 1e-3);
    }

    #[test]
    fn poisson_2d_eigenfunction() {
        let f = SineFunction::mode(&[1, 1], 2.0 * PI * PI).unwrap();
        let p = FdProblem::from_sine(poisson(2), &f, 64).unwrap();
        let sol = fd_minimize(&p, 1e-8).unwrap();
        let exact = to_grid(&SineFunction::mode(&[1, 1], 1.0).unwrap(), 64).unwrap();
        assert!(sol.max_error(exact.values()) < 1e-2);
        assert!(sol.iterations <= 3);
    }

    #[test]
    fn five_point_stencil() {
        // For L = ½|z|² the Hessian row of an interior node is (4, -1, -1, -1, -1).
        let p = FdProblem::new(poisson(2), 16, vec![0.0; 256]).unwrap();
        let els = p.elements();
        let h = p.hessian(&vec![0.0; 256], &els);
        let i = 5 * 16 + 5;
        assert!((h.diag(i) - 4.0).abs() < 1e-12);
        let u: Vec<f64> = (0..256).map(|k| if k == i { 1.0 } else { 0.0 }).collect();
        let g = p.gradient(&u, &els);
        let expect = |k: usize| match k {
            k if k == i => 4.0,
            k if k == i + 1 || k == i - 1 || k == i + 16 || k == i - 16 => -1.0,
            _ => 0.0,
        };
        for (k, v) in g.iter().enumerate() {
            assert!((v - expect(k)).abs() < 1e-12, "node {k}: {v}");
        }
    }

    #[test]
    fn rejects_small_or_high_dimensional() {
        assert!(FdProblem::new(poisson(1), 8, vec![0.0; 8]).is_err());
        assert!(FdProblem::new(poisson(3), 16, vec![0.0; 4096]).is_err());
        assert!(FdProblem::new(poisson(1), 16, vec![0.0; 15]).is_err());
    }
}

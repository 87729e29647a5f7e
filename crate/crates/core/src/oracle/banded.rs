//! Symmetric positive definite banded storage and Cholesky factorization.

use crate::scalar::Scalar;

/// Lower band: `data[i * (b + 1) + (i - j)]` holds `A[i][j]` for `0 ≤ i - j ≤ b`.
#[derive(Clone, Debug)]
pub(crate) struct BandedSpd<T> {
    n: usize,
    b: usize,
    data: Vec<T>,
}

impl<T: Scalar> BandedSpd<T> {
    pub fn zeros(n: usize, b: usize) -> Self {
        Self {
            n,
            b,
            data: vec![T::zero(); n * (b + 1)],
        }
    }

    /// Adds `v` to `A[i][j]` (and implicitly `A[j][i]`); entries above the diagonal are ignored.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        if j > i {
            return;
        }
        debug_assert!(i - j <= self.b);
        let k = i * (self.b + 1) + (i - j);
        self.data[k] = self.data[k] + v;
    }

    pub fn diag(&self, i: usize) -> T {
        self.data[i * (self.b + 1)]
    }

    fn at(&self, i: usize, j: usize) -> T {
        self.data[i * (self.b + 1) + (i - j)]
    }

    /// In-place Cholesky `A = L Lᵀ`; `None` when a pivot is not positive.
    pub fn cholesky(mut self) -> Option<Self> {
        let w = self.b + 1;
        for i in 0..self.n {
            let j0 = i.saturating_sub(self.b);
            for j in j0..=i {
                let mut s = self.at(i, j);
                let k0 = j0.max(j.saturating_sub(self.b));
                for k in k0..j {
                    s = s - self.at(i, k) * self.at(j, k);
                }
                if i == j {
                    if !(s > T::zero()) || !s.is_finite() {
                        return None;
                    }
                    self.data[i * w] = s.sqrt();
                } else {
                    self.data[i * w + (i - j)] = s / self.at(j, j);
                }
            }
        }
        Some(self)
    }

    /// Solves `L Lᵀ x = rhs` with a factor produced by [`cholesky`](Self::cholesky).
    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let n = self.n;
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(self.b)..i {
                s = s - self.at(i, k) * y[k];
            }
            y[i] = s / self.at(i, i);
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..(i + self.b + 1).min(n) {
                s = s - self.at(k, i) * y[k];
            }
            y[i] = s / self.at(i, i);
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_solve() {
        let n = 6;
        let mut a = BandedSpd::<f64>::zeros(n, 1);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0).sin()).collect();
        let rhs: Vec<f64> = (0..n)
            .map(|i| 2.0 * x[i] - if i > 0 { x[i - 1] } else { 0.0 } - if i + 1 < n { x[i + 1] } else { 0.0 })
            .collect();
        let sol = a.cholesky().unwrap().solve(&rhs);
        for (s, e) in sol.iter().zip(&x) {
            assert!((s - e).abs() < 1e-13);
        }
    }

    #[test]
    fn indefinite_rejected() {
        let mut a = BandedSpd::<f64>::zeros(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(1, 0, 2.0);
        assert!(a.cholesky().is_none());
    }
}

//! Cyclic Jacobi eigenvalues for the small symmetric Hessians sampled here.

use crate::scalar::Scalar;

/// Eigenvalues of the symmetric row-major `n × n` matrix `a`, ascending.
pub(crate) fn symmetric_eigenvalues<T: Scalar>(a: &[T], n: usize) -> Vec<T> {
    debug_assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let two = T::lit(2.0);
    for _sweep in 0..64 {
        let mut off = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                off = off + m[i * n + j] * m[i * n + j];
            }
        }
        let scale: T = (0..n).map(|i| m[i * n + i] * m[i * n + i]).sum::<T>() + off;
        if off <= T::epsilon() * T::epsilon() * scale || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<T> = (0..n).map(|i| m[i * n + i]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

pub(crate) fn max_asymmetry<T: Scalar>(a: &[T], n: usize) -> T {
    let mut worst = T::zero();
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max((a[i * n + j] - a[j * n + i]).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_and_two_by_two() {
        assert_eq!(symmetric_eigenvalues(&[3.0, 0.0, 0.0, 1.0], 2), vec![1.0, 3.0]);
        let ev = symmetric_eigenvalues(&[2.0f64, 1.0, 1.0, 2.0], 2);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn three_by_three_trace_and_det() {
        let a = [4.0, 1.0, -2.0, 1.0, 2.0, 0.5, -2.0, 0.5, 3.0];
        let ev = symmetric_eigenvalues(&a, 3);
        let det = 4.0 * (2.0 * 3.0 - 0.25) - 1.0 * (3.0 + 1.0) + (-2.0) * (0.5 + 4.0);
        assert!((ev.iter().sum::<f64>() - 9.0).abs() < 1e-12);
        assert!((ev.iter().product::<f64>() - det).abs() < 1e-10);
        assert!(ev.windows(2).all(|w| w[0] <= w[1]));
    }
}

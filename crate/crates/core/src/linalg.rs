// SPDX-License-Identifier: MIT OR Apache-2.0

//! Row-major dense helpers for the small square matrices the dictionary keeps.

/// `a * x` for a row-major `n x n` matrix.
pub fn mat_vec(a: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(x.len(), n);
    a.chunks_exact(n.max(1))
        .take(n)
        .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

/// `a * b` for row-major `n x n` matrices.
pub fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

/// Frobenius norm of `a - I`.
pub fn distance_from_identity(a: &[f64], n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            let d = a[i * n + j] - target;
            acc += d * d;
        }
    }
    acc.sqrt()
}

/// Gauss-Jordan inverse with partial pivoting. `None` when singular.
pub fn invert(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut work = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| work[r * n + col].abs().total_cmp(&work[s * n + col].abs()))?;
        let p = work[pivot * n + col];
        if p.abs() < f64::MIN_POSITIVE {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                work.swap(pivot * n + j, col * n + j);
                inv.swap(pivot * n + j, col * n + j);
            }
        }
        let scale = 1.0 / p;
        for j in 0..n {
            work[col * n + j] *= scale;
            inv[col * n + j] *= scale;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = work[r * n + col];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                work[r * n + j] -= f * work[col * n + j];
                inv[r * n + j] -= f * inv[col * n + j];
            }
        }
    }
    Some(inv)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    let mut work = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| work[r * n + col].abs().total_cmp(&work[s * n + col].abs()))?;
        if work[pivot * n + col].abs() < f64::MIN_POSITIVE {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                work.swap(pivot * n + j, col * n + j);
            }
            rhs.swap(pivot, col);
        }
        for r in col + 1..n {
            let f = work[r * n + col] / work[col * n + col];
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                work[r * n + j] -= f * work[col * n + j];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let tail: f64 = (i + 1..n).map(|j| work[i * n + j] * x[j]).sum();
        x[i] = (rhs[i] - tail) / work[i * n + i];
    }
    Some(x)
}

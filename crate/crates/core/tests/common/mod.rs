// SPDX-License-Identifier: MIT OR Apache-2.0

//! Dense reference computations shared by the integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

pub fn gaussian(sigma: f64, x: &[f64], y: &[f64]) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (-d2 / (2.0 * sigma * sigma)).exp()
}

pub fn gram(sigma: f64, basis: &[Vec<f64>]) -> DMatrix<f64> {
    let m = basis.len();
    DMatrix::from_fn(m, m, |i, j| gaussian(sigma, &basis[i], &basis[j]))
}

/// Projection error of `x` onto `basis` by a dense LU solve.
pub fn dense_delta(sigma: f64, basis: &[Vec<f64>], x: &[f64]) -> f64 {
    if basis.is_empty() {
        return 1.0;
    }
    let k = DVector::from_iterator(basis.len(), basis.iter().map(|b| gaussian(sigma, b, x)));
    let a = gram(sigma, basis).lu().solve(&k).expect("gram matrix is nonsingular");
    1.0 - k.dot(&a)
}

/// Frobenius distance of `inv * K` from the identity.
pub fn inverse_error(sigma: f64, basis: &[Vec<f64>], inv_row_major: &[f64]) -> f64 {
    let m = basis.len();
    let inv = DMatrix::from_row_slice(m, m, inv_row_major);
    (inv * gram(sigma, basis) - DMatrix::identity(m, m)).norm()
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

// SPDX-License-Identifier: MIT OR Apache-2.0

//! Kernel functions.
//!
//! The detector never materializes a feature map; every inner product in
//! feature space goes through [`KernelSpec::eval`].

use std::fmt;

/// Supported kernel families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    /// `exp(-|x - y|^2 / (2 sigma^2))`
    Gaussian,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gaussian => f.write_str("gaussian"),
        }
    }
}

/// A kernel family together with its bandwidth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec {
    kind: KernelKind,
    sigma: f64,
    // 1 / (2 sigma^2), cached
    inv_two_sigma_sq: f64,
}

/// Rejected kernel parameters.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("kernel bandwidth must be finite and > 0; got {0}")]
pub struct InvalidBandwidth(pub f64);

impl KernelSpec {
    pub fn gaussian(sigma: f64) -> Result<Self, InvalidBandwidth> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(InvalidBandwidth(sigma));
        }
        Ok(Self {
            kind: KernelKind::Gaussian,
            sigma,
            inv_two_sigma_sq: 1.0 / (2.0 * sigma * sigma),
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Evaluates `k(x, y)`.
    ///
    /// # Panics
    ///
    /// Panics if `x` and `y` differ in length. Dimension agreement is a
    /// caller invariant, not a property of the data.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        assert_eq!(
            x.len(),
            y.len(),
            "kernel arguments differ in dimension ({} vs {})",
            x.len(),
            y.len()
        );
        match self.kind {
            KernelKind::Gaussian => {
                let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-sq * self.inv_two_sigma_sq).exp()
            }
        }
    }

    /// `k(x, x)`; constant 1 for the gaussian family.
    pub fn self_similarity(&self, x: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Gaussian => {
                let _ = x;
                1.0
            }
        }
    }

    /// Kernel values between `x` and every basis member, in basis order.
    pub fn kernel_vector<B: AsRef<[f64]>>(&self, basis: &[B], x: &[f64]) -> Vec<f64> {
        basis.iter().map(|b| self.eval(b.as_ref(), x)).collect()
    }

    /// Dense Gram matrix of `points`, row-major.
    pub fn gram<B: AsRef<[f64]>>(&self, points: &[B]) -> Vec<f64> {
        let m = points.len();
        let mut out = vec![0.0; m * m];
        for i in 0..m {
            out[i * m + i] = self.self_similarity(points[i].as_ref());
            for j in 0..i {
                let v = self.eval(points[i].as_ref(), points[j].as_ref());
                out[i * m + j] = v;
                out[j * m + i] = v;
            }
        }
        out
    }
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self::gaussian(1.0).expect("unit bandwidth is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_points_have_unit_similarity() {
        let k = KernelSpec::gaussian(0.3).unwrap();
        let x = [1.5, -2.0, 7.25];
        assert_eq!(k.eval(&x, &x), 1.0);
        assert_eq!(k.self_similarity(&x), 1.0);
    }

    #[test]
    fn unit_offset_with_unit_bandwidth() {
        let k = KernelSpec::gaussian(1.0).unwrap();
        let v = k.eval(&[0.0, 0.0], &[1.0, 0.0]);
        assert!((v - 0.606_530_659_712_633_4).abs() < 1e-12, "{v}");
    }

    #[test]
    fn rejects_bad_bandwidth() {
        assert!(KernelSpec::gaussian(0.0).is_err());
        assert!(KernelSpec::gaussian(-1.0).is_err());
        assert!(KernelSpec::gaussian(f64::NAN).is_err());
    }

    #[test]
    #[should_panic(expected = "differ in dimension")]
    fn dimension_mismatch_panics() {
        KernelSpec::default().eval(&[0.0], &[0.0, 1.0]);
    }

    #[test]
    fn kernel_vector_cases() {
        let k = KernelSpec::default();
        let x = vec![0.5, 0.25];
        assert_eq!(k.kernel_vector(&[x.clone()], &x), vec![1.0]);
        let empty: Vec<Vec<f64>> = vec![];
        assert!(k.kernel_vector(&empty, &x).is_empty());

        let basis = vec![vec![0.0, 0.0], vec![1.0, -1.0], vec![2.0, 0.5]];
        let kv = k.kernel_vector(&basis, &x);
        for (j, b) in basis.iter().enumerate() {
            assert_eq!(kv[j], k.eval(b, &x));
        }
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(
            x in prop::collection::vec(-5.0f64..5.0, 3),
            y in prop::collection::vec(-5.0f64..5.0, 3),
            sigma in 0.1f64..4.0,
        ) {
            let k = KernelSpec::gaussian(sigma).unwrap();
            let a = k.eval(&x, &y);
            prop_assert_eq!(a, k.eval(&y, &x));
            prop_assert!(a > 0.0 || x != y);
            prop_assert!(a <= 1.0);
            if x != y {
                // strict inequality can round to 1.0 only for near-identical points
                let sq: f64 = x.iter().zip(&y).map(|(p, q)| (p - q) * (p - q)).sum();
                if sq / (2.0 * sigma * sigma) > 1e-12 {
                    prop_assert!(a < 1.0);
                }
            }
        }
    }
}

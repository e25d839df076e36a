// SPDX-License-Identifier: MIT OR Apache-2.0

//! Sparsified kernel dictionary with a recursively maintained inverse Gram
//! matrix.
//!
//! Admitting a vector grows the inverse by a block update built from the
//! projection coefficients `a = K^-1 k` and the projection error `delta`:
//!
//! ```text
//!           [ K^-1 + a a^T / delta   -a / delta ]
//! K'^-1  =  [                                   ]
//!           [   -a^T / delta          1 / delta ]
//! ```
//!
//! and removing element `i` applies the matching block downdate
//! `P - q q^T / s` where `s` is the `(i, i)` entry of the inverse and `q` its
//! `i`-th column. Both cost `O(m^2)`.

use crate::kernel::KernelSpec;
use crate::linalg;

/// Result of projecting one arrival onto the dictionary span.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    /// Squared feature-space distance from the arrival to the span.
    pub delta: f64,
    /// Minimizing combination `K^-1 k`, one entry per basis element.
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DictionaryError {
    #[error("projection error {0} is not strictly positive; the vector is already in the span")]
    NonPositiveDelta(f64),
    #[error("dictionary is at capacity ({0}); prune before admitting")]
    Full(usize),
    #[error("element index {index} out of range for dictionary of size {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("vector has dimension {got}, dictionary holds dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coefficient vector has length {got}, dictionary has {expected} elements")]
    CoefficientLength { expected: usize, got: usize },
    #[error("inconsistent dictionary parts: {0}")]
    Inconsistent(String),
}

/// Retained basis vectors, their inverse Gram matrix, and per-element usage.
///
/// Each element carries a stable id that survives removals of other
/// elements, so callers can refer to an element without tracking index
/// shifts.
#[derive(Clone, Debug, PartialEq)]
pub struct Dictionary {
    dim: usize,
    max_size: usize,
    basis: Vec<Vec<f64>>,
    ids: Vec<u64>,
    usage: Vec<f64>,
    inv_gram: Vec<f64>,
    next_id: u64,
}

impl Dictionary {
    pub fn new(dim: usize, max_size: usize) -> Self {
        assert!(max_size > 0, "dictionary capacity must be positive");
        Self {
            dim,
            max_size,
            basis: Vec::new(),
            ids: Vec::new(),
            usage: Vec::new(),
            inv_gram: Vec::new(),
            next_id: 0,
        }
    }

    /// Rebuilds a dictionary from stored parts, checking shapes.
    pub fn from_parts(
        dim: usize,
        max_size: usize,
        basis: Vec<Vec<f64>>,
        ids: Vec<u64>,
        usage: Vec<f64>,
        inv_gram: Vec<f64>,
        next_id: u64,
    ) -> Result<Self, DictionaryError> {
        let m = basis.len();
        if max_size == 0 || m > max_size {
            return Err(DictionaryError::Inconsistent(format!(
                "{m} elements exceed capacity {max_size}"
            )));
        }
        if ids.len() != m || usage.len() != m || inv_gram.len() != m * m {
            return Err(DictionaryError::Inconsistent(format!(
                "{m} basis vectors but {} ids, {} usage entries, {} inverse entries",
                ids.len(),
                usage.len(),
                inv_gram.len()
            )));
        }
        if let Some(b) = basis.iter().find(|b| b.len() != dim) {
            return Err(DictionaryError::DimensionMismatch { expected: dim, got: b.len() });
        }
        if usage.iter().any(|u| !(*u >= 0.0)) {
            return Err(DictionaryError::Inconsistent("negative usage".into()));
        }
        if ids.iter().any(|&id| id >= next_id) {
            return Err(DictionaryError::Inconsistent("element id beyond id counter".into()));
        }
        Ok(Self { dim, max_size, basis, ids, usage, inv_gram, next_id })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() >= self.max_size
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn usage(&self) -> &[f64] {
        &self.usage
    }

    /// Row-major `m x m` inverse Gram matrix.
    pub fn inv_gram(&self) -> &[f64] {
        &self.inv_gram
    }

    pub(crate) fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.ids.iter().position(|&e| e == id)
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), DictionaryError> {
        if x.len() != self.dim {
            return Err(DictionaryError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(())
    }

    /// Projection error of `x` onto the current span, with the minimizing
    /// coefficients. Roundoff negatives clamp to zero.
    pub fn project(&self, kernel: &KernelSpec, x: &[f64]) -> Result<Projection, DictionaryError> {
        self.check_dim(x)?;
        let kxx = kernel.self_similarity(x);
        if self.is_empty() {
            return Ok(Projection { delta: kxx, coeffs: Vec::new() });
        }
        let kv = kernel.kernel_vector(&self.basis, x);
        let coeffs = linalg::mat_vec(&self.inv_gram, self.len(), &kv);
        let explained: f64 = kv.iter().zip(&coeffs).map(|(k, a)| k * a).sum();
        let delta = (kxx - explained).max(0.0);
        Ok(Projection { delta, coeffs })
    }

    /// Appends `x` using its projection, returning the new element's index.
    pub fn admit(&mut self, x: &[f64], projection: &Projection) -> Result<usize, DictionaryError> {
        self.check_dim(x)?;
        let Projection { delta, coeffs } = projection;
        let delta = *delta;
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(DictionaryError::NonPositiveDelta(delta));
        }
        if self.is_full() {
            return Err(DictionaryError::Full(self.max_size));
        }
        let m = self.len();
        if coeffs.len() != m {
            return Err(DictionaryError::CoefficientLength { expected: m, got: coeffs.len() });
        }

        let n = m + 1;
        let inv_delta = 1.0 / delta;
        let mut grown = vec![0.0; n * n];
        for i in 0..m {
            let ai = coeffs[i] * inv_delta;
            for j in 0..m {
                grown[i * n + j] = self.inv_gram[i * m + j] + ai * coeffs[j];
            }
            grown[i * n + m] = -ai;
            grown[m * n + i] = -ai;
        }
        grown[m * n + m] = inv_delta;

        self.inv_gram = grown;
        self.basis.push(x.to_vec());
        self.ids.push(self.next_id);
        self.usage.push(0.0);
        self.next_id += 1;
        Ok(m)
    }

    /// Removes element `index`, downdating the inverse Gram matrix.
    pub fn remove(&mut self, index: usize) -> Result<Vec<f64>, DictionaryError> {
        let m = self.len();
        if index >= m {
            return Err(DictionaryError::IndexOutOfRange { index, len: m });
        }
        let s = self.inv_gram[index * m + index];
        let n = m - 1;
        let mut shrunk = Vec::with_capacity(n * n);
        for r in (0..m).filter(|&r| r != index) {
            let qr = self.inv_gram[r * m + index] / s;
            for c in (0..m).filter(|&c| c != index) {
                shrunk.push(self.inv_gram[r * m + c] - qr * self.inv_gram[index * m + c]);
            }
        }
        self.inv_gram = shrunk;
        self.ids.remove(index);
        self.usage.remove(index);
        Ok(self.basis.remove(index))
    }

    /// Applies one step of exponential forgetting to every usage entry and
    /// credits `|contribution_j|` where a contribution vector is given.
    pub fn update_usage(&mut self, lambda: f64, contributions: Option<&[f64]>) {
        for (j, u) in self.usage.iter_mut().enumerate() {
            let credit = contributions.and_then(|c| c.get(j)).map_or(0.0, |a| a.abs());
            *u = lambda * *u + credit;
        }
    }

    /// Recomputes the Gram matrix from the basis, row-major.
    pub fn gram(&self, kernel: &KernelSpec) -> Vec<f64> {
        kernel.gram(&self.basis)
    }

    /// `|inv_gram * K - I|_F` against a freshly computed Gram matrix.
    pub fn consistency_error(&self, kernel: &KernelSpec) -> f64 {
        let m = self.len();
        let product = linalg::mat_mul(&self.inv_gram, &self.gram(kernel), m);
        linalg::distance_from_identity(&product, m)
    }

    /// Replaces the maintained inverse by a direct inversion of the Gram
    /// matrix. Returns `false` (leaving state untouched) if the Gram matrix
    /// is numerically singular.
    pub fn reinvert(&mut self, kernel: &KernelSpec) -> bool {
        match linalg::invert(&self.gram(kernel), self.len()) {
            Some(inv) => {
                self.inv_gram = inv;
                true
            }
            None => false,
        }
    }
}

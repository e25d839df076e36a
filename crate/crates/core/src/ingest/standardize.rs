// SPDX-License-Identifier: MIT OR Apache-2.0

//! Running per-channel z-scoring.

pub const DEFAULT_WARMUP: u64 = 50;
pub const DEFAULT_VARIANCE_FLOOR: f64 = 1e-6;

/// Output of one [`Standardizer::push`].
#[derive(Clone, Debug, PartialEq)]
pub struct Standardized {
    pub values: Vec<f64>,
    /// `true` while the warm-up window is still filling; `values` are then
    /// the raw input.
    pub warming_up: bool,
}

/// Welford running mean/variance per channel. Each frame is scaled with
/// the statistics of the frames before it, then folded in.
#[derive(Clone, Debug)]
pub struct Standardizer {
    warmup: u64,
    variance_floor: f64,
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Standardizer {
    pub fn new(dim: usize, warmup: u64, variance_floor: f64) -> Self {
        Self { warmup, variance_floor, count: 0, mean: vec![0.0; dim], m2: vec![0.0; dim] }
    }

    pub fn with_defaults(dim: usize) -> Self {
        Self::new(dim, DEFAULT_WARMUP, DEFAULT_VARIANCE_FLOOR)
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn is_warm(&self) -> bool {
        self.count >= self.warmup
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variance(&self, channel: usize) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2[channel] / (self.count - 1) as f64
        }
    }

    pub fn push(&mut self, raw: &[f64]) -> Standardized {
        assert_eq!(raw.len(), self.mean.len(), "channel count changed mid-stream");
        let warming_up = !self.is_warm();
        let values = if warming_up {
            raw.to_vec()
        } else {
            raw.iter()
                .enumerate()
                .map(|(i, &x)| (x - self.mean[i]) / self.variance(i).max(self.variance_floor).sqrt())
                .collect()
        };
        self.count += 1;
        let n = self.count as f64;
        for (i, &x) in raw.iter().enumerate() {
            let d = x - self.mean[i];
            self.mean[i] += d / n;
            self.m2[i] += d * (x - self.mean[i]);
        }
        Standardized { values, warming_up }
    }
}

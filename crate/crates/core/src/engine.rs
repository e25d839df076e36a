// SPDX-License-Identifier: MIT OR Apache-2.0

//! The online detector.
//!
//! Each arrival is projected onto the dictionary and its projection error
//! `delta` is compared against two thresholds `nu1 < nu2`:
//!
//! | `delta`              | immediate verdict | dictionary                   |
//! |----------------------|-------------------|------------------------------|
//! | `< nu1`              | Green             | unchanged, usage credited    |
//! | `nu1 ..= nu2`        | Orange            | provisionally admitted       |
//! | `> nu2`              | Red1              | unchanged                    |
//!
//! An Orange opens a tracker that counts how many of the next `ell`
//! arrivals the candidate explains (kernel similarity at least
//! `d_similar`). At its deadline the tracker resolves into a deferred Green
//! (candidate kept) or a Red2 (candidate removed).

use std::fmt;

use crate::dictionary::{Dictionary, DictionaryError, Projection};
use crate::kernel::KernelSpec;

/// Drift bound on `|inv_gram * K - I|_F` before the inverse is rebuilt.
pub const REINVERT_TOLERANCE: f64 = 1e-6;

/// One timestep's standardized reading.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementVector {
    pub values: Vec<f64>,
    pub timestep: u64,
}

impl MeasurementVector {
    pub fn new(timestep: u64, values: Vec<f64>) -> Self {
        Self { values, timestep }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VerdictKind {
    Green,
    Orange,
    Red1,
    Red2,
}

impl VerdictKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Green => "green",
            Self::Orange => "orange",
            Self::Red1 => "red1",
            Self::Red2 => "red2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "green" => Some(Self::Green),
            "orange" => Some(Self::Orange),
            "red1" => Some(Self::Red1),
            "red2" => Some(Self::Red2),
            _ => None,
        }
    }

    pub fn is_red(&self) -> bool {
        matches!(self, Self::Red1 | Self::Red2)
    }

    /// Immediate classification of a projection error. Both boundaries
    /// belong to the Orange band.
    pub fn classify(delta: f64, nu1: f64, nu2: f64) -> Self {
        if delta < nu1 {
            Self::Green
        } else if delta > nu2 {
            Self::Red1
        } else {
            Self::Orange
        }
    }
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub at_timestep: u64,
    /// For resolutions (deferred Green, Red2): timestep of the originating Orange.
    pub resolves_timestep: Option<u64>,
    pub delta: f64,
}

impl Verdict {
    pub fn is_resolution(&self) -> bool {
        self.resolves_timestep.is_some()
    }

    /// Timestep an alarm is attributed to when matched against labels.
    pub fn event_timestep(&self) -> u64 {
        match self.kind {
            VerdictKind::Red2 => self.resolves_timestep.unwrap_or(self.at_timestep),
            _ => self.at_timestep,
        }
    }
}

/// Detector parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdConfig {
    pub nu1: f64,
    pub nu2: f64,
    /// Orange resolution horizon, in timesteps.
    pub ell: u64,
    pub sigma: f64,
    /// Forgetting factor applied to usage statistics each step.
    pub lambda: f64,
    /// Kernel similarity at which a later arrival counts as explained by an Orange candidate.
    pub d_similar: f64,
    /// Fraction of the horizon that must be explained for a deferred Green.
    pub epsilon_frac: f64,
    pub prune_period: u64,
    pub usage_floor: f64,
    pub max_size: usize,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            nu1: 0.07,
            nu2: 0.16,
            ell: 20,
            sigma: 1.0,
            lambda: 0.98,
            d_similar: 0.9,
            epsilon_frac: 0.2,
            prune_period: 100,
            usage_floor: 1e-4,
            max_size: 50,
        }
    }
}

impl ThresholdConfig {
    pub fn with_thresholds(nu1: f64, nu2: f64) -> Self {
        Self { nu1, nu2, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |msg: String| Err(EngineError::InvalidConfig(msg));
        if !(self.nu1 > 0.0 && self.nu1 < self.nu2) {
            return bad(format!("need 0 < nu1 < nu2; got nu1={} nu2={}", self.nu1, self.nu2));
        }
        if !(self.nu2 < 1.0) {
            return bad(format!("nu2 must be < 1 for Red1 to be reachable; got {}", self.nu2));
        }
        if self.ell == 0 {
            return bad("ell must be >= 1".into());
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return bad(format!("sigma must be finite and > 0; got {}", self.sigma));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return bad(format!("lambda must lie in (0, 1]; got {}", self.lambda));
        }
        if !(self.d_similar > 0.0 && self.d_similar < 1.0) {
            return bad(format!("d_similar must lie in (0, 1); got {}", self.d_similar));
        }
        if !(self.epsilon_frac > 0.0 && self.epsilon_frac < 1.0) {
            return bad(format!("epsilon_frac must lie in (0, 1); got {}", self.epsilon_frac));
        }
        if self.prune_period == 0 {
            return bad("prune_period must be >= 1".into());
        }
        if !(self.usage_floor >= 0.0 && self.usage_floor.is_finite()) {
            return bad(format!("usage_floor must be finite and >= 0; got {}", self.usage_floor));
        }
        if self.max_size == 0 {
            return bad("max_size must be >= 1".into());
        }
        Ok(())
    }

    /// `ceil(epsilon_frac * ell)`: explained arrivals needed for a deferred Green.
    pub fn required_explained(&self) -> u64 {
        (self.epsilon_frac * self.ell as f64 - 1e-12).ceil().max(0.0) as u64
    }

    pub fn kernel(&self) -> Result<KernelSpec, EngineError> {
        KernelSpec::gaussian(self.sigma).map_err(|e| EngineError::InvalidConfig(e.to_string()))
    }
}

/// Bookkeeping for one unresolved Orange.
#[derive(Clone, Debug, PartialEq)]
pub struct OrangeTracker {
    pub raised_at: u64,
    pub deadline: u64,
    pub candidate: Vec<f64>,
    pub delta: f64,
    pub explained_count: u64,
    /// Id of the provisionally admitted element; `None` when the dictionary
    /// was full of protected elements and the candidate could not be admitted.
    pub element_id: Option<u64>,
}

/// Outcome of resolving a tracker at its deadline.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolution {
    pub verdict: Verdict,
    /// Dictionary element to drop (Red2 with an admitted candidate).
    pub evict: Option<u64>,
}

/// Resolves `tracker` at timestep `now`.
pub fn resolve_orange(tracker: &OrangeTracker, config: &ThresholdConfig, now: u64) -> Resolution {
    let green = tracker.explained_count >= config.required_explained();
    let kind = if green { VerdictKind::Green } else { VerdictKind::Red2 };
    Resolution {
        verdict: Verdict {
            kind,
            at_timestep: now,
            resolves_timestep: Some(tracker.raised_at),
            delta: tracker.delta,
        },
        evict: if green { None } else { tracker.element_id },
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub immediate: Verdict,
    /// Trackers that reached their deadline this step.
    pub resolutions: Vec<Verdict>,
    /// Indices (as of just before pruning) removed by this step's prune pass.
    pub pruned: Vec<usize>,
    /// Whether this arrival was added to the dictionary.
    pub admitted: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("invalid detector configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite component {index} at timestep {timestep}")]
    NonFinite { timestep: u64, index: usize },
    #[error("timestep {got} does not advance past {last}")]
    OutOfOrder { last: u64, got: u64 },
    #[error(transparent)]
    Dictionary(#[from] DictionaryError),
}

/// Single-bed online detector.
#[derive(Clone, Debug)]
pub struct Engine {
    pub(crate) config: ThresholdConfig,
    pub(crate) kernel: KernelSpec,
    pub(crate) dict: Dictionary,
    pub(crate) trackers: Vec<OrangeTracker>,
    pub(crate) last_timestep: Option<u64>,
    pub(crate) steps: u64,
    pub(crate) reinversions: u64,
}

impl Engine {
    pub fn new(config: ThresholdConfig, dim: usize) -> Result<Self, EngineError> {
        config.validate()?;
        let kernel = config.kernel()?;
        let dict = Dictionary::new(dim, config.max_size);
        Ok(Self {
            config,
            kernel,
            dict,
            trackers: Vec::new(),
            last_timestep: None,
            steps: 0,
            reinversions: 0,
        })
    }

    pub fn config(&self) -> &ThresholdConfig {
        &self.config
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    pub fn open_trackers(&self) -> &[OrangeTracker] {
        &self.trackers
    }

    pub fn dim(&self) -> usize {
        self.dict.dim()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn last_timestep(&self) -> Option<u64> {
        self.last_timestep
    }

    /// Number of times drift forced a full re-inversion.
    pub fn reinversions(&self) -> u64 {
        self.reinversions
    }

    /// Processes one arrival.
    ///
    /// When the dictionary is empty the arrival seeds it: it is admitted and
    /// reported Green with `delta = 0`, its projection error after admission.
    pub fn step(&mut self, x: &MeasurementVector) -> Result<StepOutcome, EngineError> {
        let t = x.timestep;
        if let Some(i) = x.values.iter().position(|v| !v.is_finite()) {
            return Err(EngineError::NonFinite { timestep: t, index: i });
        }
        if x.values.len() != self.dict.dim() {
            return Err(DictionaryError::DimensionMismatch {
                expected: self.dict.dim(),
                got: x.values.len(),
            }
            .into());
        }
        if let Some(last) = self.last_timestep {
            if t <= last {
                return Err(EngineError::OutOfOrder { last, got: t });
            }
        }

        let projection = self.dict.project(&self.kernel, &x.values)?;
        let mut admitted = false;

        let immediate = if self.dict.is_empty() {
            self.dict.admit(&x.values, &projection)?;
            admitted = true;
            Verdict { kind: VerdictKind::Green, at_timestep: t, resolves_timestep: None, delta: 0.0 }
        } else {
            let kind = VerdictKind::classify(projection.delta, self.config.nu1, self.config.nu2);
            let credit = (kind == VerdictKind::Green).then_some(projection.coeffs.as_slice());
            self.dict.update_usage(self.config.lambda, credit);
            if kind == VerdictKind::Orange {
                admitted = self.open_orange(t, &x.values, &projection)?;
            }
            Verdict { kind, at_timestep: t, resolves_timestep: None, delta: projection.delta }
        };

        for tr in &mut self.trackers {
            if tr.raised_at < t
                && t <= tr.deadline
                && self.kernel.eval(&tr.candidate, &x.values) >= self.config.d_similar
            {
                tr.explained_count += 1;
            }
        }

        let mut resolutions = Vec::new();
        let mut i = 0;
        while i < self.trackers.len() {
            if self.trackers[i].deadline <= t {
                let tr = self.trackers.remove(i);
                let res = resolve_orange(&tr, &self.config, t);
                if let Some(idx) = res.evict.and_then(|id| self.dict.index_of(id)) {
                    self.dict.remove(idx)?;
                }
                resolutions.push(res.verdict);
            } else {
                i += 1;
            }
        }

        self.steps += 1;
        self.last_timestep = Some(t);

        let mut pruned = Vec::new();
        if self.steps % self.config.prune_period == 0 {
            pruned = self.prune(false)?;
            self.check_consistency();
        }

        Ok(StepOutcome { immediate, resolutions, pruned, admitted })
    }

    fn open_orange(&mut self, t: u64, x: &[f64], projection: &Projection) -> Result<bool, EngineError> {
        if self.dict.is_full() {
            self.prune(true)?;
        }
        let element_id = if self.dict.is_full() {
            None
        } else {
            // pruning changed the basis, so the stored projection is stale
            let fresh;
            let p = if self.dict.len() == projection.coeffs.len() {
                projection
            } else {
                fresh = self.dict.project(&self.kernel, x)?;
                &fresh
            };
            if p.delta > 0.0 {
                let idx = self.dict.admit(x, p)?;
                Some(self.dict.ids()[idx])
            } else {
                None
            }
        };
        self.trackers.push(OrangeTracker {
            raised_at: t,
            deadline: t + self.config.ell,
            candidate: x.to_vec(),
            delta: projection.delta,
            explained_count: 0,
            element_id,
        });
        Ok(element_id.is_some())
    }

    /// Removes elements whose usage fell below the floor, sparing elements
    /// under an open Orange. With `forced`, also guarantees room for one
    /// admission by evicting the least-used unprotected element (lowest
    /// index on ties). Returns removed indices as of before the call.
    pub fn prune(&mut self, forced: bool) -> Result<Vec<usize>, EngineError> {
        let protected: Vec<u64> = self.trackers.iter().filter_map(|t| t.element_id).collect();
        let usage = self.dict.usage();
        let ids = self.dict.ids();
        let mut doomed: Vec<usize> = (0..self.dict.len())
            .filter(|&j| usage[j] < self.config.usage_floor && !protected.contains(&ids[j]))
            .collect();
        if forced && doomed.is_empty() && self.dict.is_full() {
            let victim = (0..self.dict.len())
                .filter(|&j| !protected.contains(&ids[j]))
                .min_by(|&a, &b| usage[a].total_cmp(&usage[b]).then(a.cmp(&b)));
            doomed.extend(victim);
        }
        for &j in doomed.iter().rev() {
            self.dict.remove(j)?;
        }
        Ok(doomed)
    }

    /// Rebuilds the inverse Gram matrix if it drifted past [`REINVERT_TOLERANCE`].
    pub fn check_consistency(&mut self) -> f64 {
        let err = self.dict.consistency_error(&self.kernel);
        if err > REINVERT_TOLERANCE && self.dict.reinvert(&self.kernel) {
            self.reinversions += 1;
            return self.dict.consistency_error(&self.kernel);
        }
        err
    }
}

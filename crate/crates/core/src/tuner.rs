// SPDX-License-Identifier: MIT OR Apache-2.0

//! Supervised threshold selection on a labeled training window.
//!
//! Every grid entry gets a fresh engine run over the same standardized
//! stream. Alarms are matched one-to-one against labels, earliest first:
//! a label is detected when an unmatched counted alarm lies within
//! `±window` timesteps of it. Red2 alarms are placed at the Orange they
//! resolve. Leftover labels are misses; leftover counted alarms are false.

use std::fmt::Write as _;
use std::io;
use std::thread;

use crate::engine::{Engine, EngineError, MeasurementVector, ThresholdConfig, Verdict, VerdictKind};
use crate::ingest::LabeledEvent;

/// Threshold pairs compared in the original training-window experiment.
pub const REFERENCE_THRESHOLDS: [(f64, f64); 3] = [(0.03, 0.08), (0.07, 0.16), (0.11, 0.24)];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchPolicy {
    pub window: u64,
    pub counted: Vec<VerdictKind>,
}

impl Default for MatchPolicy {
    fn default() -> Self {
        Self { window: 5, counted: vec![VerdictKind::Red1, VerdictKind::Red2] }
    }
}

impl MatchPolicy {
    pub fn counts(&self, v: &Verdict) -> bool {
        // deferred greens are never alarms
        v.kind != VerdictKind::Green && self.counted.contains(&v.kind)
    }

    pub fn describe(&self) -> String {
        let kinds = self.counted.iter().map(VerdictKind::as_str).collect::<Vec<_>>().join("+");
        format!("window +/-{} counting {}", self.window, kinds)
    }
}

/// Outcome of matching one run's alarms to the labels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatchOutcome {
    pub detected: usize,
    pub missed: usize,
    pub false_alarms: usize,
    /// `(label timestep, alarm timestep)` for each detection.
    pub matched: Vec<(u64, u64)>,
}

impl MatchOutcome {
    pub fn net(&self) -> i64 {
        self.detected as i64 - self.false_alarms as i64
    }
}

/// One grid entry's result.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionReport {
    pub config: ThresholdConfig,
    pub outcome: MatchOutcome,
}

impl DetectionReport {
    pub fn nu1(&self) -> f64 {
        self.config.nu1
    }

    pub fn nu2(&self) -> f64 {
        self.config.nu2
    }
}

pub fn score_run(alarms: &[Verdict], labels: &[LabeledEvent], policy: &MatchPolicy) -> MatchOutcome {
    let mut times: Vec<u64> = alarms.iter().filter(|v| policy.counts(v)).map(Verdict::event_timestep).collect();
    times.sort_unstable();
    let mut label_times: Vec<u64> = labels.iter().map(|l| l.timestep).collect();
    label_times.sort_unstable();

    let mut used = vec![false; times.len()];
    let mut first_open = 0;
    let mut matched = Vec::new();
    for &l in &label_times {
        let lo = l.saturating_sub(policy.window);
        let hi = l.saturating_add(policy.window);
        // alarms before `lo` can never match this or any later label
        while first_open < times.len() && (used[first_open] || times[first_open] < lo) {
            first_open += 1;
        }
        let hit = (first_open..times.len()).take_while(|&i| times[i] <= hi).find(|&i| !used[i]);
        if let Some(i) = hit {
            used[i] = true;
            matched.push((l, times[i]));
        }
    }
    let detected = matched.len();
    MatchOutcome {
        detected,
        missed: label_times.len() - detected,
        false_alarms: times.len() - detected,
        matched,
    }
}

/// Runs a fresh engine over `stream`, returning every non-Green immediate
/// verdict and every resolution.
pub fn run_detector(config: &ThresholdConfig, stream: &[MeasurementVector]) -> Result<Vec<Verdict>, EngineError> {
    let dim = stream.first().map_or(1, |v| v.values.len());
    let mut engine = Engine::new(config.clone(), dim)?;
    let mut out = Vec::new();
    for x in stream {
        let step = engine.step(x)?;
        if step.immediate.kind != VerdictKind::Green {
            out.push(step.immediate);
        }
        out.extend(step.resolutions);
    }
    Ok(out)
}

#[derive(Debug, thiserror::Error)]
pub enum TunerError {
    #[error("threshold grid is empty")]
    EmptyGrid,
    #[error("grid entry {index}: {source}")]
    Entry { index: usize, source: EngineError },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridResult {
    pub reports: Vec<DetectionReport>,
    pub best: usize,
    pub label_count: usize,
    pub policy: MatchPolicy,
}

impl GridResult {
    pub fn best_report(&self) -> &DetectionReport {
        &self.reports[self.best]
    }

    pub fn best_config(&self) -> &ThresholdConfig {
        &self.reports[self.best].config
    }
}

/// Index of the winner: largest `detected - false`, then fewer false
/// alarms, then lower `nu1`, then earlier grid position.
pub fn select_best(reports: &[DetectionReport]) -> Option<usize> {
    (0..reports.len()).min_by(|&a, &b| {
        let (ra, rb) = (&reports[a], &reports[b]);
        rb.outcome
            .net()
            .cmp(&ra.outcome.net())
            .then(ra.outcome.false_alarms.cmp(&rb.outcome.false_alarms))
            .then(ra.config.nu1.total_cmp(&rb.config.nu1))
            .then(a.cmp(&b))
    })
}

pub fn grid_search(
    grid: &[ThresholdConfig],
    stream: &[MeasurementVector],
    labels: &[LabeledEvent],
    policy: &MatchPolicy,
) -> Result<GridResult, TunerError> {
    if grid.is_empty() {
        return Err(TunerError::EmptyGrid);
    }
    for (index, c) in grid.iter().enumerate() {
        c.validate().map_err(|source| TunerError::Entry { index, source })?;
    }
    let runs: Vec<Result<Vec<Verdict>, EngineError>> = thread::scope(|s| {
        let handles: Vec<_> = grid.iter().map(|c| s.spawn(move || run_detector(c, stream))).collect();
        handles.into_iter().map(|h| h.join().expect("detector run panicked")).collect()
    });
    let mut reports = Vec::with_capacity(grid.len());
    for (index, (config, run)) in grid.iter().zip(runs).enumerate() {
        let alarms = run.map_err(|source| TunerError::Entry { index, source })?;
        reports.push(DetectionReport { config: config.clone(), outcome: score_run(&alarms, labels, policy) });
    }
    let best = select_best(&reports).expect("grid is non-empty");
    Ok(GridResult { reports, best, label_count: labels.len(), policy: policy.clone() })
}

/// Cartesian product of threshold pairs, bandwidths and horizons over `base`.
pub fn build_grid(base: &ThresholdConfig, pairs: &[(f64, f64)], sigmas: &[f64], ells: &[u64]) -> Vec<ThresholdConfig> {
    let sigmas = if sigmas.is_empty() { vec![base.sigma] } else { sigmas.to_vec() };
    let ells = if ells.is_empty() { vec![base.ell] } else { ells.to_vec() };
    let mut out = Vec::new();
    for &(nu1, nu2) in pairs {
        for &sigma in &sigmas {
            for &ell in &ells {
                out.push(ThresholdConfig { nu1, nu2, sigma, ell, ..base.clone() });
            }
        }
    }
    out
}

/// Aligned plain-text table of the grid, best row starred.
pub fn render_table(result: &GridResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Detection of {} labeled anomalies ({})", result.label_count, result.policy.describe());
    let _ = writeln!(
        out,
        "  {:>6} {:>6} {:>5} {:>6} {:>9} {:>7} {:>6}",
        "nu1", "nu2", "ell", "sigma", "Detected", "Missed", "False"
    );
    for (i, r) in result.reports.iter().enumerate() {
        let mark = if i == result.best { '*' } else { ' ' };
        let _ = writeln!(
            out,
            "{mark} {:>6.3} {:>6.3} {:>5} {:>6.2} {:>9} {:>7} {:>6}",
            r.config.nu1,
            r.config.nu2,
            r.config.ell,
            r.config.sigma,
            r.outcome.detected,
            r.outcome.missed,
            r.outcome.false_alarms
        );
    }
    out
}

/// CSV twin of [`render_table`].
pub fn write_report_csv<W: io::Write>(w: W, result: &GridResult) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["nu1", "nu2", "ell", "sigma", "detected", "missed", "false", "best"])?;
    for (i, r) in result.reports.iter().enumerate() {
        out.write_record([
            r.config.nu1.to_string(),
            r.config.nu2.to_string(),
            r.config.ell.to_string(),
            r.config.sigma.to_string(),
            r.outcome.detected.to_string(),
            r.outcome.missed.to_string(),
            r.outcome.false_alarms.to_string(),
            (i == result.best).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alarm(kind: VerdictKind, t: u64) -> Verdict {
        let resolves = (kind == VerdictKind::Red2).then(|| t.saturating_sub(20));
        Verdict { kind, at_timestep: t, resolves_timestep: resolves, delta: 0.5 }
    }

    fn labels(ts: &[u64]) -> Vec<LabeledEvent> {
        ts.iter().map(|&t| LabeledEvent { timestep: t, channels: vec![0], note: String::new() }).collect()
    }

    fn report(nu1: f64, detected: usize, false_alarms: usize) -> DetectionReport {
        DetectionReport {
            config: ThresholdConfig::with_thresholds(nu1, nu1 * 2.0),
            outcome: MatchOutcome { detected, missed: 0, false_alarms, matched: vec![] },
        }
    }

    #[test]
    fn exact_hits_with_zero_window() {
        let ls = labels(&[10, 20, 30]);
        let alarms: Vec<_> = [10, 20, 30].iter().map(|&t| alarm(VerdictKind::Red1, t)).collect();
        let policy = MatchPolicy { window: 0, ..Default::default() };
        let o = score_run(&alarms, &ls, &policy);
        assert_eq!((o.detected, o.missed, o.false_alarms), (3, 0, 0));
    }

    #[test]
    fn two_alarms_one_label() {
        let o = score_run(
            &[alarm(VerdictKind::Red1, 9), alarm(VerdictKind::Red1, 11)],
            &labels(&[10]),
            &MatchPolicy::default(),
        );
        assert_eq!((o.detected, o.missed, o.false_alarms), (1, 0, 1));
        assert_eq!(o.matched, vec![(10, 9)]);
    }

    #[test]
    fn red2_matches_at_originating_orange() {
        // resolves 40 -> attributed to 40, label at 42
        let o = score_run(&[alarm(VerdictKind::Red2, 60)], &labels(&[42]), &MatchPolicy::default());
        assert_eq!(o.detected, 1);
    }

    #[test]
    fn uncounted_kinds_are_ignored() {
        let o = score_run(
            &[alarm(VerdictKind::Orange, 10), alarm(VerdictKind::Green, 10)],
            &labels(&[10]),
            &MatchPolicy::default(),
        );
        assert_eq!((o.detected, o.missed, o.false_alarms), (0, 1, 0));
    }

    #[test]
    fn tie_breaks() {
        assert_eq!(select_best(&[report(0.07, 6, 2)]), Some(0));
        // same net and false count: lower nu1 wins regardless of order
        assert_eq!(select_best(&[report(0.11, 5, 1), report(0.03, 5, 1)]), Some(1));
        // same net: fewer false alarms wins
        assert_eq!(select_best(&[report(0.03, 6, 2), report(0.11, 5, 1)]), Some(1));
        assert_eq!(select_best(&[]), None);
    }

    #[test]
    fn empty_grid_is_an_error() {
        assert!(matches!(
            grid_search(&[], &[], &[], &MatchPolicy::default()),
            Err(TunerError::EmptyGrid)
        ));
    }

    #[test]
    fn grid_product_size() {
        let g = build_grid(&ThresholdConfig::default(), &REFERENCE_THRESHOLDS, &[1.0, 2.0], &[10, 20]);
        assert_eq!(g.len(), 12);
        assert!(g.iter().all(|c| c.validate().is_ok()));
    }
}

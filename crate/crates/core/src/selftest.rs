// SPDX-License-Identifier: MIT OR Apache-2.0

//! Built-in checks run by the `selftest` subcommand: the recursive
//! projection against a dense solve, and the alarm state machine on a
//! hand-built stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dictionary::Dictionary;
use crate::engine::{Engine, MeasurementVector, ThresholdConfig, VerdictKind};
use crate::kernel::KernelSpec;
use crate::linalg;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, failures: Vec<String>, ok_detail: String) -> Self {
        let passed = failures.is_empty();
        let detail = if passed { ok_detail } else { failures.join("; ") };
        Self { name, passed, detail }
    }
}

/// Projection error by direct solve of `K a = k`.
pub fn dense_delta(kernel: &KernelSpec, basis: &[Vec<f64>], x: &[f64]) -> Option<f64> {
    let m = basis.len();
    let kxx = kernel.self_similarity(x);
    if m == 0 {
        return Some(kxx);
    }
    let gram = kernel.gram(basis);
    let k = kernel.kernel_vector(basis, x);
    let a = linalg::solve(&gram, m, &k)?;
    Some(kxx - k.iter().zip(&a).map(|(u, v)| u * v).sum::<f64>())
}

/// Random admit/remove sequences; every probe must agree with the dense
/// solve to `1e-8` and the maintained inverse must stay within `1e-6` of
/// the true one (Frobenius distance of `inv * K` from identity).
pub fn oracle_equivalence(cases: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut probes = 0usize;
    for case in 0..cases {
        let d = rng.gen_range(1..=8);
        let sigma = rng.gen_range(0.5..3.0);
        let kernel = KernelSpec::gaussian(sigma).expect("positive bandwidth");
        let mut dict = Dictionary::new(d, 20);
        for _ in 0..40 {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let p = dict.project(&kernel, &x).expect("dimension matches");
            probes += 1;
            match dense_delta(&kernel, dict.basis(), &x) {
                Some(dense) if (dense.max(0.0) - p.delta).abs() <= 1e-8 => {}
                other => failures.push(format!("case {case}: recursive {} vs dense {other:?}", p.delta)),
            }
            if !dict.is_empty() && rng.gen_bool(0.25) {
                let j = rng.gen_range(0..dict.len());
                dict.remove(j).expect("index in range");
            } else if p.delta > 1e-2 && !dict.is_full() {
                dict.admit(&x, &p).expect("room and positive delta");
            }
            let err = dict.consistency_error(&kernel);
            if err > 1e-6 {
                failures.push(format!("case {case}: inverse drift {err:e} at m={}", dict.len()));
            }
        }
        if failures.len() > 5 {
            break;
        }
    }
    CheckResult::new("oracle-equivalence", failures, format!("{cases} cases, {probes} probes"))
}

/// Drives a 2-d engine through every verdict branch: a seed, a Green, a
/// Red1 (dictionary untouched), an Orange that is explained and resolves
/// Green, and an Orange that is not and resolves Red2 with eviction.
pub fn state_machine() -> CheckResult {
    let config = ThresholdConfig { ell: 4, epsilon_frac: 0.5, ..ThresholdConfig::default() };
    let mut engine = Engine::new(config.clone(), 2).expect("default config is valid");
    let mut failures = Vec::new();
    let feed = |engine: &mut Engine, x: [f64; 2]| {
        let t = engine.last_timestep().map_or(0, |l| l + 1);
        engine.step(&MeasurementVector::new(t, x.to_vec())).expect("finite, ordered input")
    };
    let expect = |failures: &mut Vec<String>, what: &str, got: VerdictKind, want: VerdictKind| {
        if got != want {
            failures.push(format!("{what}: expected {} got {}", want.as_str(), got.as_str()));
        }
    };

    // with one element at the origin and sigma = 1, delta = 1 - exp(-r^2)
    let seed = feed(&mut engine, [0.0, 0.0]);
    expect(&mut failures, "seed", seed.immediate.kind, VerdictKind::Green);
    expect(&mut failures, "near", feed(&mut engine, [0.1, 0.0]).immediate.kind, VerdictKind::Green);

    let m = engine.dictionary().len();
    let red = feed(&mut engine, [3.0, 3.0]);
    expect(&mut failures, "far", red.immediate.kind, VerdictKind::Red1);
    if engine.dictionary().len() != m || red.admitted {
        failures.push("Red1 changed the dictionary".into());
    }

    let orange_at = engine.steps();
    let o = feed(&mut engine, [0.0, 0.3246]);
    expect(&mut failures, "middle band", o.immediate.kind, VerdictKind::Orange);
    if !o.admitted {
        failures.push("Orange was not provisionally admitted".into());
    }
    let mut resolutions = Vec::new();
    for _ in 0..config.ell {
        resolutions.extend(feed(&mut engine, [0.0, 0.33]).resolutions);
    }
    match resolutions.as_slice() {
        [r] if r.kind == VerdictKind::Green && r.resolves_timestep == Some(orange_at) && r.at_timestep == orange_at + config.ell => {}
        other => failures.push(format!("explained Orange resolved as {other:?}")),
    }

    let orange_at = engine.steps();
    let o = feed(&mut engine, [-0.33, 0.0]);
    expect(&mut failures, "second middle band", o.immediate.kind, VerdictKind::Orange);
    let m = engine.dictionary().len();
    let mut resolutions = Vec::new();
    for _ in 0..config.ell {
        resolutions.extend(feed(&mut engine, [0.1, 0.33]).resolutions);
    }
    match resolutions.as_slice() {
        [r] if r.kind == VerdictKind::Red2 && r.resolves_timestep == Some(orange_at) && r.at_timestep == orange_at + config.ell => {}
        other => failures.push(format!("unexplained Orange resolved as {other:?}")),
    }
    if engine.dictionary().len() != m - 1 {
        failures.push("Red2 did not evict its candidate".into());
    }
    if !engine.open_trackers().is_empty() {
        failures.push("trackers left open".into());
    }
    CheckResult::new("state-machine", failures, format!("{} steps, all branches", engine.steps()))
}

pub fn run_all() -> Vec<CheckResult> {
    vec![oracle_equivalence(200, 0x6b6f6164), state_machine()]
}

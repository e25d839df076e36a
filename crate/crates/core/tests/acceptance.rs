// SPDX-License-Identifier: MIT OR Apache-2.0

//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any failed.

mod common;

use std::collections::HashMap;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use koad::archive::{strip_column, FrameArchive, EVENT_CLOCK_COLUMN, FRAME_CLOCK_COLUMN};
use koad::config::RunConfig;
use koad::dictionary::Dictionary;
use koad::engine::{Engine, MeasurementVector, ThresholdConfig, VerdictKind};
use koad::ingest::SyntheticSpec;
use koad::kernel::KernelSpec;
use koad::pipeline::{prepare_stream, BedPipeline, PipelineConfig};
use koad::run::{self, BoardOptions};
use koad::tuner::{build_grid, grid_search, run_detector, score_run, MatchPolicy, REFERENCE_THRESHOLDS};
use koad::validity::{
    parse_frame, validate, BedId, DataWarning, FlagReason, FlagStreak, ParameterSchema, ValidationResult,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// 1. Recursive projection error and inverse against a dense solve.
fn ald_oracle() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_delta, mut worst_inv, mut probes) = (0.0f64, 0.0f64, 0);
    let cases = 250;
    for _ in 0..cases {
        let d = rng.gen_range(1..=8);
        let sigma = rng.gen_range(0.5..3.0);
        let kernel = KernelSpec::gaussian(sigma).unwrap();
        let mut dict = Dictionary::new(d, 20);
        let mut points: Vec<Vec<f64>> = Vec::new();
        for _ in 0..rng.gen_range(20..60) {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.5..2.5)).collect();
            let p = dict.project(&kernel, &x).unwrap();
            let dense = common::dense_delta(sigma, &points, &x).max(0.0);
            worst_delta = worst_delta.max((p.delta - dense).abs());
            probes += 1;
            if !dict.is_empty() && rng.gen_bool(0.3) {
                let j = rng.gen_range(0..dict.len());
                dict.remove(j).unwrap();
                points.remove(j);
            } else if p.delta > 1e-2 && !dict.is_full() {
                dict.admit(&x, &p).unwrap();
                points.push(x);
            }
            check(dict.basis() == points.as_slice(), || "basis diverged from the reference list".into())?;
            if !points.is_empty() {
                worst_inv = worst_inv.max(common::inverse_error(sigma, &points, dict.inv_gram()));
            }
        }
    }
    let elapsed = started.elapsed();
    check(worst_delta <= 1e-8, || format!("max |delta - dense| = {worst_delta:e}"))?;
    check(worst_inv <= 1e-6, || format!("max ||inv*K - I||_F = {worst_inv:e}"))?;
    check(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{cases} cases, {probes} probes, max delta err {worst_delta:.1e}, max inverse err {worst_inv:.1e}, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

// 2. Verdict semantics against an independent model of the alarm rules.
fn state_machine() -> Outcome {
    let config = ThresholdConfig {
        ell: 5,
        epsilon_frac: 0.4,
        max_size: 1000,
        prune_period: u64::MAX,
        ..ThresholdConfig::default()
    };
    let need = 2; // ceil(0.4 * 5)
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for seed in 0..300u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut engine = Engine::new(config.clone(), 2).unwrap();
        // raised_at -> (candidate, deadline, explained, admitted)
        let mut open: HashMap<u64, (Vec<f64>, u64, u64, bool)> = HashMap::new();
        let mut centre = [0.0, 0.0];
        for t in 0..80u64 {
            let r: f64 = rng.gen();
            let x = if r < 0.08 {
                vec![centre[0] + rng.gen_range(2.0..4.0), centre[1] - rng.gen_range(2.0..4.0)]
            } else if r < 0.25 {
                let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let rad = rng.gen_range(0.27..0.42);
                vec![centre[0] + rad * a.cos(), centre[1] + rad * a.sin()]
            } else {
                vec![centre[0] + rng.gen_range(-0.1..0.1), centre[1] + rng.gen_range(-0.1..0.1)]
            };
            if rng.gen_bool(0.05) {
                centre = [x[0], x[1]];
            }
            let before: Vec<Vec<f64>> = engine.dictionary().basis().to_vec();
            let oracle = if before.is_empty() { 0.0 } else { common::dense_delta(config.sigma, &before, &x).max(0.0) };
            let out = engine.step(&MeasurementVector::new(t, x.clone())).unwrap();
            let after = engine.dictionary().basis();

            // immediate verdict
            let v = &out.immediate;
            check((v.delta - oracle).abs() < 1e-9, || format!("seed {seed} t {t}: delta {} vs oracle {oracle}", v.delta))?;
            let margin = (oracle - config.nu1).abs().min((oracle - config.nu2).abs());
            if !before.is_empty() && margin > 1e-9 {
                let want = if oracle < config.nu1 {
                    VerdictKind::Green
                } else if oracle > config.nu2 {
                    VerdictKind::Red1
                } else {
                    VerdictKind::Orange
                };
                check(v.kind == want, || format!("seed {seed} t {t}: {} for delta {oracle}", v.kind))?;
            }
            check(v.resolves_timestep.is_none() && v.kind != VerdictKind::Red2, || "Red2 as an immediate verdict".into())?;

            // explained counts for trackers opened earlier
            for (raised, (cand, deadline, explained, _)) in open.iter_mut() {
                if *raised < t && t <= *deadline && common::gaussian(config.sigma, cand, &x) >= config.d_similar {
                    *explained += 1;
                }
            }

            // resolutions: exactly the trackers due now
            let mut due: Vec<u64> = open.iter().filter(|(_, o)| o.1 == t).map(|(r, _)| *r).collect();
            due.sort_unstable();
            let mut got: Vec<u64> = out.resolutions.iter().map(|r| r.resolves_timestep.unwrap_or(u64::MAX)).collect();
            got.sort_unstable();
            check(due == got, || format!("seed {seed} t {t}: due {due:?}, resolved {got:?}"))?;
            let mut evicted = 0;
            for r in &out.resolutions {
                let (cand, _, explained, admitted) = open.remove(&r.resolves_timestep.unwrap()).unwrap();
                let want = if explained >= need { VerdictKind::Green } else { VerdictKind::Red2 };
                check(r.kind == want, || format!("seed {seed} t {t}: resolution {} with {explained} explained", r.kind))?;
                check(r.at_timestep == t, || "resolution stamped with the wrong timestep".into())?;
                if r.kind == VerdictKind::Red2 && admitted {
                    check(!after.contains(&cand), || "Red2 candidate still in dictionary".into())?;
                    evicted += 1;
                }
                *seen.entry(if r.kind == VerdictKind::Green { "green-resolution" } else { "red2" }).or_default() += 1;
            }

            match v.kind {
                VerdictKind::Green if before.is_empty() => {
                    check(out.admitted && after.len() == 1, || "seed arrival not admitted".into())?;
                    *seen.entry("seed").or_default() += 1;
                }
                VerdictKind::Green => {
                    check(!out.admitted && after.len() == before.len() - evicted, || format!("seed {seed} t {t}: Green changed dictionary"))?;
                    *seen.entry("green").or_default() += 1;
                }
                VerdictKind::Red1 => {
                    check(!out.admitted && after.len() == before.len() - evicted && !after.contains(&x), || {
                        format!("seed {seed} t {t}: Red1 changed dictionary")
                    })?;
                    *seen.entry("red1").or_default() += 1;
                }
                VerdictKind::Orange => {
                    check(out.admitted && after.contains(&x), || format!("seed {seed} t {t}: Orange not admitted"))?;
                    open.insert(t, (x.clone(), t + config.ell, 0, true));
                    *seen.entry("orange").or_default() += 1;
                }
                VerdictKind::Red2 => unreachable!(),
            }
        }
        let mut still: Vec<u64> = engine.open_trackers().iter().map(|tr| tr.raised_at).collect();
        still.sort_unstable();
        let mut model: Vec<u64> = open.keys().copied().collect();
        model.sort_unstable();
        check(still == model, || format!("seed {seed}: open trackers {still:?} vs model {model:?}"))?;
        check(model.iter().all(|r| r + config.ell > 79), || "tracker outlived its deadline".into())?;
    }
    for branch in ["seed", "green", "red1", "orange", "green-resolution", "red2"] {
        check(seen.get(branch).copied().unwrap_or(0) > 0, || format!("branch {branch} never exercised"))?;
    }
    let builtin = koad::selftest::state_machine();
    check(builtin.passed, || builtin.detail.clone())?;
    let mut counts: Vec<String> = seen.iter().map(|(k, v)| format!("{k}={v}")).collect();
    counts.sort();
    Ok(format!("300 streams; {}", counts.join(" ")))
}

// 3. Dictionary size stays bounded on a finite point set, and elements no
// longer used are pruned.
fn boundedness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let set: Vec<Vec<f64>> = (0..50).map(|_| (0..3).map(|_| rng.gen_range(-6.0..6.0)).collect()).collect();
    let cfg = ThresholdConfig {
        nu1: 0.01,
        nu2: 0.999_999,
        epsilon_frac: 0.05,
        max_size: 500,
        ..ThresholdConfig::default()
    };
    let mut engine = Engine::new(cfg.clone(), 3).unwrap();
    let mut max_m = 0;
    for t in 0..10_000u64 {
        let x = set[rng.gen_range(0..set.len())].clone();
        engine.step(&MeasurementVector::new(t, x)).unwrap();
        max_m = max_m.max(engine.dictionary().len());
        check(engine.dictionary().len() <= 50, || format!("m = {} at step {t}", engine.dictionary().len()))?;
    }
    let full_m = engine.dictionary().len();

    // second run: lambda = 0.9; after 3000 steps only the first 10 points recur
    let cfg = ThresholdConfig { lambda: 0.9, usage_floor: 1e-4, ..cfg };
    let mut engine = Engine::new(cfg, 3).unwrap();
    let mut t = 0u64;
    for _ in 0..3000 {
        engine.step(&MeasurementVector::new(t, set[rng.gen_range(0..50)].clone())).unwrap();
        t += 1;
    }
    let before = engine.dictionary().len();
    for _ in 0..1000 {
        engine.step(&MeasurementVector::new(t, set[rng.gen_range(0..10)].clone())).unwrap();
        t += 1;
    }
    let basis = engine.dictionary().basis();
    let stale = basis.iter().filter(|b| !set[..10].contains(b)).count();
    check(before > 10, || format!("only {before} elements before the switch"))?;
    check(stale == 0, || format!("{stale} unused elements survived 1000 steps"))?;
    Ok(format!(
        "max m {max_m} (final {full_m}) over 10000 draws; lambda 0.9 run shrank {before} -> {} after the set narrowed",
        basis.len()
    ))
}

// 4. Validity screen branches, warning timing, archive rows.
fn validity() -> Outcome {
    let schema = ParameterSchema::new(["HR", "SpO2", "RR"]).unwrap();
    let table: &[(&str, Option<FlagReason>)] = &[
        ("PW,72,98,16", None),
        ("XX,72,98,16", Some(FlagReason::BadPassword)),
        ("PW,null,98,16", Some(FlagReason::Null)),
        ("PW,,98,16", Some(FlagReason::Null)),
        ("PW,72,0,16", Some(FlagReason::Zero)),
        ("PW,72,0.0,16", Some(FlagReason::Zero)),
        ("PW,-,98,16", Some(FlagReason::Hyphen)),
        ("PW,---,98,16", Some(FlagReason::Hyphen)),
        ("PW,72,98,10000.5", Some(FlagReason::OverLimit)),
        ("PW,72,98,10000", None),
        ("PW,7x2,98,16", Some(FlagReason::NonNumeric)),
        ("PW,NaN,98,16", Some(FlagReason::NonNumeric)),
        ("PW,72,98", Some(FlagReason::BadArity)),
        ("PW,72,98,16,1", Some(FlagReason::BadArity)),
        ("", Some(FlagReason::BadArity)),
    ];
    for (line, want) in table {
        let r = validate(&parse_frame(line, BedId(1), 0), "PW", &schema);
        let got = match &r {
            ValidationResult::Valid(_) => None,
            ValidationResult::Flagged(f) => Some(f[0].reason),
        };
        check(got == *want, || format!("`{line}`: expected {want:?}, got {got:?}"))?;
    }

    for w in 1..=8u32 {
        let mut s = FlagStreak::new(w);
        for i in 1..=w + 3 {
            let ev = s.record(false);
            let want = (i == w).then_some(DataWarning::Raised);
            check(ev == want, || format!("W={w}: frame {i} gave {ev:?}"))?;
        }
        check(s.record(true) == Some(DataWarning::Cleared), || format!("W={w}: valid frame did not clear"))?;
        check(s.record(true).is_none(), || "second valid frame emitted again".into())?;
    }

    let mut cfg = PipelineConfig::new(schema.clone(), "PW");
    cfg.warmup = 0;
    let mut pipe = BedPipeline::new(BedId(1), &cfg).unwrap();
    let mut archive = FrameArchive::new(Vec::new(), &schema).unwrap();
    let mut valid = 0;
    for (t, (line, want)) in table.iter().enumerate() {
        let report = pipe.on_line(line, t as u64).unwrap();
        archive.record(&report.frame, report.timestep, &report.result).unwrap();
        valid += usize::from(want.is_none());
        check(report.outcome.is_some() == want.is_none(), || format!("`{line}` engine routing wrong"))?;
    }
    check(pipe.engine().steps() == valid as u64, || "flagged frame reached the engine".into())?;
    let text = String::from_utf8(archive.into_inner().unwrap()).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    check(rows.len() == table.len(), || "archive row count".into())?;
    for (row, (_, want)) in rows.iter().zip(table) {
        let flags = row.split(',').nth(3).unwrap_or("");
        check(flags.is_empty() == want.is_none(), || format!("archive row `{row}`"))?;
        if let Some(reason) = want {
            check(flags.contains(reason.as_str()), || format!("archive row `{row}` lacks {}", reason.as_str()))?;
        }
    }
    Ok(format!("{} screen cases, W=1..8 streaks, {} archive rows", table.len(), rows.len()))
}

fn training_stream(seed: u64, length: u64, anomalies: usize, magnitude: f64) -> (Vec<MeasurementVector>, Vec<koad::ingest::LabeledEvent>) {
    let spec = SyntheticSpec::vital_signs(14, length, seed).with_spikes(anomalies, magnitude, 1, 60);
    let s = spec.generate().unwrap();
    let cfg = PipelineConfig::new(ParameterSchema::new(s.columns.clone()).unwrap(), spec.password.clone());
    (prepare_stream(&s.records, &cfg), s.labels)
}

// 5. Three report rows over the reference thresholds.
fn tuner_structure() -> Outcome {
    let started = Instant::now();
    let (stream, labels) = training_stream(5, 300, 9, 5.0);
    check(labels.len() == 9, || format!("{} labels", labels.len()))?;
    let base = ThresholdConfig { sigma: 8.0, ..ThresholdConfig::default() };
    let grid = build_grid(&base, &REFERENCE_THRESHOLDS, &[], &[]);
    let policy = MatchPolicy::default();
    let result = grid_search(&grid, &stream, &labels, &policy).unwrap();
    check(result.reports.len() == 3, || format!("{} rows", result.reports.len()))?;
    let mut rows = Vec::new();
    for r in &result.reports {
        let o = &r.outcome;
        check(o.detected + o.missed == 9, || format!("row {:?}: {} + {} != 9", (r.nu1(), r.nu2()), o.detected, o.missed))?;
        rows.push(format!("({},{})->{}/{}/{}", r.nu1(), r.nu2(), o.detected, o.missed, o.false_alarms));
    }
    let best_net = result.reports.iter().map(|r| r.outcome.net()).max().unwrap();
    check(result.best_report().outcome.net() == best_net, || "winner does not maximize detected - false".into())?;
    let elapsed = started.elapsed();
    check(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("{} winner #{}, {:.2}s", rows.join(" "), result.best + 1, elapsed.as_secs_f64()))
}

// 6. Thresholds tuned on a short labeled window, scored on a long stream.
fn detection_power() -> Outcome {
    let (train, train_labels) = training_stream(101, 300, 9, 4.0);
    let config = RunConfig::default();
    let grid = config.threshold_grid();
    let result = grid_search(&grid, &train, &train_labels, &config.policy).unwrap();
    let chosen = result.best_config().clone();

    let (test, labels) = training_stream(202, 2000, 36, 4.0);
    check(labels.len() == 36, || format!("{} labels", labels.len()))?;
    let alarms = run_detector(&chosen, &test).unwrap();
    let o = score_run(&alarms, &labels, &config.policy);
    let rate = o.detected as f64 / 36.0;
    let quiet_steps = 2000 - 36;
    let false_rate = o.false_alarms as f64 / quiet_steps as f64;
    let detail = format!(
        "tuned nu=({},{}) sigma={} on 300 steps; 2000-step test: detected {}/36 ({:.0}%), false {} ({:.2}% of {quiet_steps})",
        chosen.nu1,
        chosen.nu2,
        chosen.sigma,
        o.detected,
        rate * 100.0,
        o.false_alarms,
        false_rate * 100.0
    );
    check(rate >= 0.75 && false_rate <= 0.02, || detail.clone())?;
    Ok(detail)
}

// 7. Throughput and growth of per-step cost with dictionary size.
fn performance() -> Outcome {
    let (stream, _) = training_stream(7, 2050, 0, 4.0);
    let cfg = ThresholdConfig { sigma: 8.0, ..ThresholdConfig::default() };
    let mut engine = Engine::new(cfg, 14).unwrap();
    let started = Instant::now();
    let mut max_m = 0;
    for x in stream.iter().take(2000) {
        engine.step(x).unwrap();
        max_m = max_m.max(engine.dictionary().len());
    }
    let elapsed = started.elapsed();
    check(stream.len() >= 2000, || "stream too short".into())?;
    check(max_m <= 50, || format!("m reached {max_m}"))?;
    check(elapsed < Duration::from_secs(1), || format!("2000 steps took {elapsed:?}"))?;

    // per-step cost at a full dictionary of size m
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let sizes = [10usize, 20, 40];
    let mut costs = Vec::new();
    for &m in &sizes {
        let cfg = ThresholdConfig {
            nu1: 1e-9,
            nu2: 0.999_999_9,
            sigma: 6.0,
            ell: 1,
            d_similar: 1e-6,
            max_size: m,
            ..ThresholdConfig::default()
        };
        let mut engine = Engine::new(cfg, 14).unwrap();
        let mut t = 0;
        let mut point = || -> Vec<f64> { (0..14).map(|_| rng.gen_range(-3.0..3.0)).collect() };
        while engine.dictionary().len() < m {
            engine.step(&MeasurementVector::new(t, point())).unwrap();
            t += 1;
        }
        let xs: Vec<Vec<f64>> = (0..4000).map(|_| point()).collect();
        let mut best = f64::INFINITY;
        for chunk in xs.chunks(1000) {
            let s = Instant::now();
            for x in chunk {
                engine.step(&MeasurementVector::new(t, x.clone())).unwrap();
                t += 1;
            }
            best = best.min(s.elapsed().as_secs_f64() / chunk.len() as f64);
        }
        costs.push(best);
    }
    // least-squares slope of log cost on log m
    let lx: Vec<f64> = sizes.iter().map(|&m| (m as f64).ln()).collect();
    let ly: Vec<f64> = costs.iter().map(|c| c.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / 3.0, ly.iter().sum::<f64>() / 3.0);
    let slope = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    check(slope <= 2.2, || format!("log-log slope {slope:.2}"))?;
    Ok(format!(
        "2000 steps in {:.1} ms (max m {max_m}); per-step {:.1}/{:.1}/{:.1} us at m=10/20/40, slope {slope:.2}",
        elapsed.as_secs_f64() * 1e3,
        costs[0] * 1e6,
        costs[1] * 1e6,
        costs[2] * 1e6
    ))
}

fn koad_bin(args: &[&str], cwd: &Path) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_koad")).args(args).current_dir(cwd).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("koad {args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

// 8. Replay and synth reproduce their outputs.
fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let fixture = common::fixture("bed_fixture.csv");
    let config = common::fixture("replay.cfg");
    let mut archives = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        koad_bin(
            &["replay", fixture.to_str().unwrap(), "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()],
            dir.path(),
        )?;
        let frames = strip_column(&read(&out.join("frames-1.csv")), FRAME_CLOCK_COLUMN).unwrap();
        let events = strip_column(&read(&out.join("events-1.csv")), EVENT_CLOCK_COLUMN).unwrap();
        archives.push((frames, events));
    }
    check(archives[0] == archives[1], || "replay archives differ".into())?;
    let (frames, events) = &archives[0];
    check(events.contains("data-warning-raised") && events.contains("data-warning-cleared"), || {
        "hyphen gap did not raise and clear a warning".into()
    })?;

    let mut synth = Vec::new();
    for run in ["s1", "s2"] {
        let cap = dir.path().join(format!("{run}.csv"));
        let lab = dir.path().join(format!("{run}-labels.csv"));
        koad_bin(
            &["synth", "--set", "synth.seed=9", "--out", cap.to_str().unwrap(), "--labels", lab.to_str().unwrap()],
            dir.path(),
        )?;
        synth.push((std::fs::read(&cap).unwrap(), std::fs::read(&lab).unwrap()));
    }
    check(synth[0] == synth[1], || "synth output differs between runs".into())?;
    Ok(format!(
        "replay x2: {} frame rows, {} event rows identical; synth x2 identical ({} bytes)",
        frames.lines().count() - 1,
        events.lines().count() - 1,
        synth[0].0.len()
    ))
}

// 9. Paced replay keeps the recorded 12 s cadence, scaled.
fn cadence() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let speedup = 240.0;
    let mut cfg = RunConfig::parse(&read(&common::fixture("replay.cfg"))).unwrap();
    cfg.speedup = speedup;
    cfg.set_bed(BedId(1), &format!("replay:{}", common::fixture("cadence_50.csv").display())).unwrap();
    let mut screen = Vec::new();
    run::run_beds(&cfg, dir.path(), BoardOptions::default(), &mut screen).map_err(|e| e.to_string())?;
    let frames = read(&run::frames_path(dir.path(), BedId(1)));
    let mut rdr = csv::Reader::from_reader(frames.as_bytes());
    let col = rdr.headers().unwrap().iter().position(|h| h == FRAME_CLOCK_COLUMN).unwrap();
    let times: Vec<f64> = rdr.records().map(|r| r.unwrap()[col].parse::<f64>().unwrap()).collect();
    check(times.len() == 50, || format!("{} frames", times.len()))?;
    let nominal_ms = 12_000.0 / speedup;
    let mut gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    let span = times[49] - times[0];
    let expect = 49.0 * nominal_ms;
    gaps.sort_by(f64::total_cmp);
    let median = gaps[gaps.len() / 2];
    let detail = format!(
        "49 gaps: span {span:.0} ms vs {expect:.0} ms nominal ({:+.1}%), median gap {median:.0} ms vs {nominal_ms:.0}",
        (span / expect - 1.0) * 100.0
    );
    check((span / expect - 1.0).abs() <= 0.2 && (median / nominal_ms - 1.0).abs() <= 0.2, || detail.clone())?;
    Ok(detail)
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 ALD oracle equivalence", ald_oracle),
        ("2 alarm state machine", state_machine),
        ("3 dictionary boundedness", boundedness),
        ("4 validity check", validity),
        ("5 tuner structure", tuner_structure),
        ("6 detection power", detection_power),
        ("7 performance", performance),
        ("8 pipeline determinism", determinism),
        ("9 cadence", cadence),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let result = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match result {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

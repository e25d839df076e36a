// SPDX-License-Identifier: MIT OR Apache-2.0

//! Versioned text snapshot of an [`Engine`], so a monitor restart can resume
//! exactly where it stopped.
//!
//! The format is line oriented, whitespace separated, and every float is
//! written in shortest round-trip exponent form, so `read(write(e))`
//! reproduces the engine bit for bit:
//!
//! ```text
//! koad-engine-snapshot 1
//! dim <d>
//! config <nu1> <nu2> <ell> <sigma> <lambda> <d_similar> <epsilon_frac> <prune_period> <usage_floor> <max_size>
//! clock <steps> <last_timestep|-> <reinversions> <next_id>
//! elements <m>
//! element <id> <usage> <x_1> .. <x_d>          (m lines)
//! inv <row values>                             (m lines)
//! trackers <n>
//! tracker <raised_at> <deadline> <delta> <explained> <element_id|-> <x_1> .. <x_d>
//! end
//! ```

use std::io::{self, BufRead, Write};

use crate::dictionary::Dictionary;
use crate::engine::{Engine, OrangeTracker, ThresholdConfig};

pub const SNAPSHOT_MAGIC: &str = "koad-engine-snapshot";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("snapshot I/O: {0}")]
    Io(#[from] io::Error),
    #[error("snapshot line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("unsupported snapshot version {0}")]
    Version(u32),
    #[error("snapshot restores an invalid engine: {0}")]
    Invalid(String),
}

fn f(v: f64) -> String {
    format!("{v:e}")
}

fn join(values: &[f64]) -> String {
    values.iter().map(|&v| f(v)).collect::<Vec<_>>().join(" ")
}

pub fn write_snapshot<W: Write>(engine: &Engine, mut w: W) -> io::Result<()> {
    let c = &engine.config;
    let d = &engine.dict;
    let m = d.len();
    writeln!(w, "{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION}")?;
    writeln!(w, "dim {}", d.dim())?;
    writeln!(
        w,
        "config {} {} {} {} {} {} {} {} {} {}",
        f(c.nu1),
        f(c.nu2),
        c.ell,
        f(c.sigma),
        f(c.lambda),
        f(c.d_similar),
        f(c.epsilon_frac),
        c.prune_period,
        f(c.usage_floor),
        c.max_size
    )?;
    let last = engine.last_timestep.map_or("-".to_string(), |t| t.to_string());
    writeln!(w, "clock {} {} {} {}", engine.steps, last, engine.reinversions, d.next_id())?;
    writeln!(w, "elements {m}")?;
    for j in 0..m {
        writeln!(w, "element {} {} {}", d.ids()[j], f(d.usage()[j]), join(&d.basis()[j]))?;
    }
    for row in d.inv_gram().chunks(m.max(1)).take(m) {
        writeln!(w, "inv {}", join(row))?;
    }
    writeln!(w, "trackers {}", engine.trackers.len())?;
    for t in &engine.trackers {
        let id = t.element_id.map_or("-".to_string(), |id| id.to_string());
        writeln!(
            w,
            "tracker {} {} {} {} {} {}",
            t.raised_at,
            t.deadline,
            f(t.delta),
            t.explained_count,
            id,
            join(&t.candidate)
        )?;
    }
    writeln!(w, "end")?;
    Ok(())
}

pub fn snapshot_string(engine: &Engine) -> String {
    let mut buf = Vec::new();
    write_snapshot(engine, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("snapshot is ASCII")
}

struct Lines<R> {
    inner: io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn err(&self, message: impl Into<String>) -> SnapshotError {
        SnapshotError::Malformed { line: self.line, message: message.into() }
    }

    /// Next line split into tokens, requiring the leading keyword.
    fn expect(&mut self, keyword: &str) -> Result<Vec<String>, SnapshotError> {
        self.line += 1;
        let text = match self.inner.next() {
            Some(l) => l?,
            None => return Err(self.err(format!("unexpected end of input, wanted `{keyword}`"))),
        };
        let mut tokens = text.split_whitespace().map(str::to_string);
        match tokens.next() {
            Some(k) if k == keyword => Ok(tokens.collect()),
            other => Err(self.err(format!("expected `{keyword}`, found {other:?}"))),
        }
    }

    fn num<T: std::str::FromStr>(&self, tok: &str) -> Result<T, SnapshotError> {
        tok.parse().map_err(|_| self.err(format!("cannot parse `{tok}`")))
    }

    fn opt_num<T: std::str::FromStr>(&self, tok: &str) -> Result<Option<T>, SnapshotError> {
        if tok == "-" {
            Ok(None)
        } else {
            self.num(tok).map(Some)
        }
    }

    fn floats(&self, toks: &[String], want: usize) -> Result<Vec<f64>, SnapshotError> {
        if toks.len() != want {
            return Err(self.err(format!("expected {want} values, found {}", toks.len())));
        }
        toks.iter().map(|t| self.num(t)).collect()
    }

    fn arity(&self, toks: &[String], want: usize) -> Result<(), SnapshotError> {
        if toks.len() != want {
            return Err(self.err(format!("expected {want} fields, found {}", toks.len())));
        }
        Ok(())
    }
}

pub fn read_snapshot<R: BufRead>(reader: R) -> Result<Engine, SnapshotError> {
    let mut lines = Lines { inner: reader.lines(), line: 0 };

    let head = lines.expect(SNAPSHOT_MAGIC)?;
    lines.arity(&head, 1)?;
    let version: u32 = lines.num(&head[0])?;
    if version != SNAPSHOT_VERSION {
        return Err(SnapshotError::Version(version));
    }

    let dim_toks = lines.expect("dim")?;
    lines.arity(&dim_toks, 1)?;
    let dim: usize = lines.num(&dim_toks[0])?;

    let c = lines.expect("config")?;
    lines.arity(&c, 10)?;
    let config = ThresholdConfig {
        nu1: lines.num(&c[0])?,
        nu2: lines.num(&c[1])?,
        ell: lines.num(&c[2])?,
        sigma: lines.num(&c[3])?,
        lambda: lines.num(&c[4])?,
        d_similar: lines.num(&c[5])?,
        epsilon_frac: lines.num(&c[6])?,
        prune_period: lines.num(&c[7])?,
        usage_floor: lines.num(&c[8])?,
        max_size: lines.num(&c[9])?,
    };

    let clock = lines.expect("clock")?;
    lines.arity(&clock, 4)?;
    let steps: u64 = lines.num(&clock[0])?;
    let last_timestep: Option<u64> = lines.opt_num(&clock[1])?;
    let reinversions: u64 = lines.num(&clock[2])?;
    let next_id: u64 = lines.num(&clock[3])?;

    let count = lines.expect("elements")?;
    lines.arity(&count, 1)?;
    let m: usize = lines.num(&count[0])?;
    let mut basis = Vec::with_capacity(m);
    let mut ids = Vec::with_capacity(m);
    let mut usage = Vec::with_capacity(m);
    for _ in 0..m {
        let e = lines.expect("element")?;
        if e.len() < 2 {
            return Err(lines.err("element line too short"));
        }
        ids.push(lines.num(&e[0])?);
        usage.push(lines.num(&e[1])?);
        basis.push(lines.floats(&e[2..], dim)?);
    }
    let mut inv_gram = Vec::with_capacity(m * m);
    for _ in 0..m {
        let row = lines.expect("inv")?;
        inv_gram.extend(lines.floats(&row, m)?);
    }

    let count = lines.expect("trackers")?;
    lines.arity(&count, 1)?;
    let n: usize = lines.num(&count[0])?;
    let mut trackers = Vec::with_capacity(n);
    for _ in 0..n {
        let t = lines.expect("tracker")?;
        if t.len() < 5 {
            return Err(lines.err("tracker line too short"));
        }
        trackers.push(OrangeTracker {
            raised_at: lines.num(&t[0])?,
            deadline: lines.num(&t[1])?,
            delta: lines.num(&t[2])?,
            explained_count: lines.num(&t[3])?,
            element_id: lines.opt_num(&t[4])?,
            candidate: lines.floats(&t[5..], dim)?,
        });
    }
    lines.expect("end")?;

    let mut engine = Engine::new(config.clone(), dim).map_err(|e| SnapshotError::Invalid(e.to_string()))?;
    engine.dict = Dictionary::from_parts(dim, config.max_size, basis, ids, usage, inv_gram, next_id)
        .map_err(|e| SnapshotError::Invalid(e.to_string()))?;
    engine.trackers = trackers;
    engine.steps = steps;
    engine.last_timestep = last_timestep;
    engine.reinversions = reinversions;
    Ok(engine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::MeasurementVector;

    #[test]
    fn rejects_unknown_version() {
        let err = read_snapshot("koad-engine-snapshot 9\n".as_bytes()).unwrap_err();
        assert!(matches!(err, SnapshotError::Version(9)));
    }

    #[test]
    fn reports_line_numbers() {
        let text = "koad-engine-snapshot 1\ndim 2\nconfig 1 2\n";
        match read_snapshot(text.as_bytes()).unwrap_err() {
            SnapshotError::Malformed { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn empty_engine_round_trips() {
        let e = Engine::new(ThresholdConfig::default(), 3).unwrap();
        let back = read_snapshot(snapshot_string(&e).as_bytes()).unwrap();
        assert_eq!(snapshot_string(&back), snapshot_string(&e));
        assert_eq!(back.last_timestep(), None);
    }

    #[test]
    fn open_tracker_survives() {
        let mut e = Engine::new(ThresholdConfig::with_thresholds(0.05, 0.9), 1).unwrap();
        e.step(&MeasurementVector::new(0, vec![0.0])).unwrap();
        let out = e.step(&MeasurementVector::new(1, vec![0.7])).unwrap();
        assert_eq!(out.immediate.kind, crate::engine::VerdictKind::Orange);
        let back = read_snapshot(snapshot_string(&e).as_bytes()).unwrap();
        assert_eq!(back.open_trackers(), e.open_trackers());
        assert_eq!(back.dictionary(), e.dictionary());
    }
}

// SPDX-License-Identifier: MIT OR Apache-2.0

//! Per-bed processing: parse, screen, standardize, detect.
//!
//! Every received frame (and every idle poll, as a `missing` frame) gets a
//! timestep and an archive row. Only valid frames past the standardizer
//! warm-up reach the engine, so engine timesteps can have gaps.

use std::io::{self, Write};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::archive::{EventLog, FrameArchive, LoggedEvent};
use crate::board::BoardEvent;
use crate::engine::{Engine, EngineError, MeasurementVector, StepOutcome, ThresholdConfig};
use crate::ingest::source::{FrameSource, Next, SourceError};
use crate::ingest::standardize::{Standardizer, DEFAULT_VARIANCE_FLOOR, DEFAULT_WARMUP};
use crate::validity::{
    parse_frame, validate, BedId, DataWarning, Flag, FlagReason, FlagStreak, Millis, ParameterSchema,
    RawFrame, ValidationResult, DEFAULT_WARN_AFTER,
};

pub fn now_millis() -> Millis {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as Millis)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub schema: ParameterSchema,
    pub password: String,
    pub warn_after: u32,
    pub warmup: u64,
    pub variance_floor: f64,
    pub thresholds: ThresholdConfig,
}

impl PipelineConfig {
    pub fn new(schema: ParameterSchema, password: impl Into<String>) -> Self {
        Self {
            schema,
            password: password.into(),
            warn_after: DEFAULT_WARN_AFTER,
            warmup: DEFAULT_WARMUP,
            variance_floor: DEFAULT_VARIANCE_FLOOR,
            thresholds: ThresholdConfig::default(),
        }
    }
}

/// What happened to one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameReport {
    pub timestep: u64,
    pub frame: RawFrame,
    pub result: ValidationResult,
    pub data_warning: Option<DataWarning>,
    /// `None` for flagged frames and warm-up frames.
    pub outcome: Option<StepOutcome>,
}

impl FrameReport {
    /// Board and log events in the order they occurred.
    pub fn events(&self) -> Vec<LoggedEvent> {
        let mut out = Vec::new();
        if let Some(w) = self.data_warning {
            out.push(LoggedEvent::Data { warning: w, timestep: self.timestep });
        }
        if let Some(o) = &self.outcome {
            out.push(LoggedEvent::Verdict(o.immediate.clone()));
            out.extend(o.resolutions.iter().cloned().map(LoggedEvent::Verdict));
        }
        out
    }
}

pub struct BedPipeline {
    bed: BedId,
    schema: ParameterSchema,
    password: String,
    streak: FlagStreak,
    standardizer: Standardizer,
    engine: Engine,
    next_timestep: u64,
    warn_after: u32,
}

impl BedPipeline {
    pub fn new(bed: BedId, config: &PipelineConfig) -> Result<Self, EngineError> {
        let dim = config.schema.active_dim();
        Ok(Self {
            bed,
            schema: config.schema.clone(),
            password: config.password.clone(),
            streak: FlagStreak::new(config.warn_after),
            standardizer: Standardizer::new(dim, config.warmup, config.variance_floor),
            engine: Engine::new(config.thresholds.clone(), dim)?,
            next_timestep: 0,
            warn_after: config.warn_after,
        })
    }

    pub fn bed(&self) -> BedId {
        self.bed
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn on_line(&mut self, line: &str, received_at: Millis) -> Result<FrameReport, EngineError> {
        let frame = parse_frame(line, self.bed, received_at);
        let result = validate(&frame, &self.password, &self.schema);
        self.process(frame, result)
    }

    /// A poll that produced nothing counts as a `missing` frame.
    pub fn on_idle(&mut self, received_at: Millis) -> Result<FrameReport, EngineError> {
        let frame = RawFrame::empty(self.bed, received_at);
        self.process(frame, ValidationResult::Flagged(vec![Flag::frame(FlagReason::Missing)]))
    }

    fn process(&mut self, frame: RawFrame, result: ValidationResult) -> Result<FrameReport, EngineError> {
        let timestep = self.next_timestep;
        self.next_timestep += 1;
        let data_warning = self.streak.track(&result);
        let outcome = match &result {
            ValidationResult::Valid(values) => {
                let z = self.standardizer.push(values);
                if z.warming_up {
                    None
                } else {
                    Some(self.engine.step(&MeasurementVector::new(timestep, z.values))?)
                }
            }
            ValidationResult::Flagged(_) => None,
        };
        Ok(FrameReport { timestep, frame, result, data_warning, outcome })
    }
}

/// Standardized engine input from a capture, with timestep = record index.
/// Flagged records and warm-up records are skipped.
pub fn prepare_stream<S: AsRef<str>>(records: &[S], config: &PipelineConfig) -> Vec<MeasurementVector> {
    let mut standardizer =
        Standardizer::new(config.schema.active_dim(), config.warmup, config.variance_floor);
    let mut out = Vec::new();
    for (t, line) in records.iter().enumerate() {
        let frame = parse_frame(line.as_ref(), BedId(0), 0);
        if let ValidationResult::Valid(values) = validate(&frame, &config.password, &config.schema) {
            let z = standardizer.push(&values);
            if !z.warming_up {
                out.push(MeasurementVector::new(t as u64, z.values));
            }
        }
    }
    out
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("archive: {0}")]
    Io(#[from] io::Error),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DriveSummary {
    pub frames: u64,
    pub flagged: u64,
    pub logged_events: u64,
}

/// Pulls frames from `source` until it ends or `stop` is set, archiving
/// everything and handing board events to `sink`.
///
/// A source error counts as a missing frame. After `warn_after + 1`
/// consecutive errors (so the data warning is already up) the error is
/// returned.
pub fn drive<S, F, E>(
    source: &mut S,
    pipeline: &mut BedPipeline,
    frames: &mut FrameArchive<F>,
    events: &mut EventLog<E>,
    clock: &mut dyn FnMut() -> Millis,
    sink: &mut dyn FnMut(BedId, BoardEvent, Millis),
    stop: Option<&AtomicBool>,
) -> Result<DriveSummary, PipelineError>
where
    S: FrameSource + ?Sized,
    F: Write,
    E: Write,
{
    let mut summary = DriveSummary::default();
    let bed = pipeline.bed();
    let mut errors = 0;
    while !stop.is_some_and(|s| s.load(Ordering::Relaxed)) {
        let next = match source.next_frame() {
            Ok(n) => {
                errors = 0;
                n
            }
            Err(e) => {
                errors += 1;
                if errors > pipeline.warn_after {
                    frames.flush()?;
                    events.flush()?;
                    return Err(e.into());
                }
                Next::Idle
            }
        };
        let report = match next {
            Next::End => break,
            Next::Frame(line) => pipeline.on_line(&line, clock())?,
            Next::Idle => pipeline.on_idle(clock())?,
        };
        summary.frames += 1;
        if !report.result.is_valid() {
            summary.flagged += 1;
        }
        frames.record(&report.frame, report.timestep, &report.result)?;
        let wall = report.frame.received_at;
        for ev in report.events() {
            if events.record(wall, bed, &ev)? {
                summary.logged_events += 1;
            }
            let board_event = match ev {
                LoggedEvent::Verdict(v) => BoardEvent::Verdict(v),
                LoggedEvent::Data { warning, .. } => BoardEvent::Data(warning),
            };
            sink(bed, board_event, wall);
        }
    }
    frames.flush()?;
    events.flush()?;
    Ok(summary)
}

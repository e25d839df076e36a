// SPDX-License-Identifier: MIT OR Apache-2.0

//! Whole-run drivers behind the command-line subcommands.
//!
//! `run_beds` starts one thread per bed and keeps the board on the calling
//! thread; bed threads send events over a bounded channel, so the board
//! sees each bed's events in order. Bed `n` writes `frames-<n>.csv` and
//! `events-<n>.csv` into the output directory.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use crate::archive::{EventLog, FrameArchive};
use crate::board::{AckOutcome, Board, BoardEvent};
use crate::config::{ConfigError, RunConfig};
use crate::ingest::capture::{self, CaptureError};
use crate::ingest::source::{FrameSource, Next, SourceError};
use crate::ingest::SyntheticStream;
use crate::pipeline::{drive, now_millis, prepare_stream, BedPipeline, DriveSummary};
use crate::tuner::{grid_search, GridResult, TunerError};
use crate::validity::{BedId, Millis};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Capture(#[from] CaptureError),
    #[error(transparent)]
    Tuner(#[from] TunerError),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Other(String),
}

/// Operator input while a board is live.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Ack(BedId),
    Quit,
}

impl Command {
    /// `ack <bed>` or `quit`.
    pub fn parse(line: &str) -> Result<Self, String> {
        let mut words = line.split_whitespace();
        match (words.next(), words.next(), words.next()) {
            (Some("ack"), Some(n), None) => {
                n.parse().map(|b| Self::Ack(BedId(b))).map_err(|_| format!("bad bed number `{n}`"))
            }
            (Some("quit" | "q"), None, None) => Ok(Self::Quit),
            _ => Err(format!("unknown command `{}` (try `ack <bed>` or `quit`)", line.trim())),
        }
    }
}

#[derive(Default)]
pub struct BoardOptions {
    /// Redraw the board every `refresh`; otherwise only the final board is
    /// drawn.
    pub live: bool,
    pub commands: Option<Receiver<Command>>,
}

pub struct BedResult {
    pub bed: BedId,
    pub outcome: Result<DriveSummary, String>,
}

pub struct RunReport {
    pub board: Board,
    pub beds: Vec<BedResult>,
}

enum Message {
    Event(BedId, BoardEvent, Millis),
    Done(BedResult),
}

/// A source that could not be opened: every poll fails, so the bed shows
/// a data warning instead of taking the process down.
struct Unavailable(String);

impl FrameSource for Unavailable {
    fn next_frame(&mut self) -> Result<Next, SourceError> {
        Err(SourceError::Config(self.0.clone()))
    }
}

pub fn frames_path(dir: &Path, bed: BedId) -> PathBuf {
    dir.join(format!("frames-{bed}.csv"))
}

pub fn events_path(dir: &Path, bed: BedId) -> PathBuf {
    dir.join(format!("events-{bed}.csv"))
}

/// Runs every configured bed to completion (or until `quit`), rendering the
/// board to `screen`.
pub fn run_beds(config: &RunConfig, out_dir: &Path, options: BoardOptions, screen: &mut dyn Write) -> Result<RunReport, RunError> {
    config.validate()?;
    if config.beds.is_empty() {
        return Err(RunError::Other("no beds configured (add `bed.<n> = ...` or --bed)".into()));
    }
    fs::create_dir_all(out_dir)?;

    // open everything up front so configuration mistakes fail fast
    let mut prepared = Vec::new();
    for sc in config.source_configs() {
        let source: Box<dyn FrameSource> = match sc.open() {
            Ok(s) => s,
            Err(e) => {
                writeln!(screen, "bed {}: {e}; showing as no data", sc.bed)?;
                Box::new(Unavailable(e.to_string()))
            }
        };
        let schema = config.schema(source.columns())?;
        let pipeline = BedPipeline::new(sc.bed, &config.pipeline_config(schema.clone()))
            .map_err(|e| RunError::Other(e.to_string()))?;
        let frames = FrameArchive::create(&frames_path(out_dir, sc.bed), &schema)?;
        let events = EventLog::create(&events_path(out_dir, sc.bed))?;
        prepared.push((source, pipeline, frames, events));
    }

    let beds: Vec<BedId> = config.beds.iter().map(|(b, _)| *b).collect();
    let mut board = Board::new(&beds).map_err(|e| RunError::Other(e.to_string()))?;
    let stop = AtomicBool::new(false);
    let (tx, rx) = mpsc::sync_channel::<Message>(1024);
    let mut results = Vec::new();

    thread::scope(|s| -> Result<(), RunError> {
        for (mut source, mut pipeline, mut frames, mut events) in prepared {
            let tx = tx.clone();
            let stop = &stop;
            s.spawn(move || {
                let bed = pipeline.bed();
                let mut sink = |b, e, at| {
                    let _ = tx.send(Message::Event(b, e, at));
                };
                let outcome = drive(&mut source, &mut pipeline, &mut frames, &mut events, &mut now_millis, &mut sink, Some(stop))
                    .map_err(|e| e.to_string());
                let _ = tx.send(Message::Done(BedResult { bed, outcome }));
            });
        }
        drop(tx);

        let mut phase = 0u64;
        let mut next_draw = Instant::now();
        loop {
            if let Some(cmds) = &options.commands {
                while let Ok(cmd) = cmds.try_recv() {
                    match cmd {
                        Command::Quit => stop.store(true, Ordering::Relaxed),
                        Command::Ack(bed) => match board.acknowledge(bed) {
                            Ok(AckOutcome::Cleared) => {}
                            Ok(AckOutcome::NotRed) => writeln!(screen, "bed {bed} is not Red; nothing to acknowledge")?,
                            Err(e) => writeln!(screen, "{e}")?,
                        },
                    }
                }
            }
            match rx.recv_timeout(Duration::from_millis(50)) {
                Ok(Message::Event(bed, ev, at)) => {
                    board.apply(bed, &ev, at).map_err(|e| RunError::Other(e.to_string()))?;
                }
                Ok(Message::Done(r)) => results.push(r),
                Err(RecvTimeoutError::Timeout) => {}
                Err(RecvTimeoutError::Disconnected) => break,
            }
            if options.live && Instant::now() >= next_draw {
                write!(screen, "\x1b[2J\x1b[H{}", board.render(phase, now_millis()))?;
                screen.flush()?;
                phase += 1;
                next_draw = Instant::now() + config.refresh;
            }
        }
        Ok(())
    })?;

    results.sort_by_key(|r| r.bed);
    write!(screen, "{}", board.render(0, now_millis()))?;
    for r in &results {
        match &r.outcome {
            Ok(s) => writeln!(screen, "bed {}: {} frames, {} flagged, {} events logged", r.bed, s.frames, s.flagged, s.logged_events)?,
            Err(e) => writeln!(screen, "bed {}: stopped: {e}", r.bed)?,
        }
    }
    Ok(RunReport { board, beds: results })
}

/// Grid search over a capture file and its labels.
pub fn tune(config: &RunConfig, capture_path: &Path, labels_path: &Path) -> Result<GridResult, RunError> {
    config.validate()?;
    let header = capture::read_header(capture_path)?;
    let schema = config.schema(Some(&header))?;
    let records = capture::read_records(capture_path)?;
    let labels = capture::read_label_file(labels_path)?;
    let stream = prepare_stream(&records, &config.pipeline_config(schema));
    Ok(grid_search(&config.threshold_grid(), &stream, &labels, &config.policy)?)
}

/// Generates the configured synthetic stream into a capture file and a
/// label file.
pub fn synth(config: &RunConfig, capture_path: &Path, labels_path: &Path) -> Result<SyntheticStream, RunError> {
    config.validate()?;
    let stream = config.synthetic_spec().generate().map_err(|e| RunError::Other(e.to_string()))?;
    capture::write_capture(capture_path, &stream.columns, &stream.records)?;
    capture::write_labels(fs::File::create(labels_path)?, &stream.labels)?;
    Ok(stream)
}

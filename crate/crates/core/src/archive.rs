// SPDX-License-Identifier: MIT OR Apache-2.0

//! Append-only CSV archives: every received frame with its flags, and every
//! alarm or data-warning transition.
//!
//! Frame rows: `bed,timestep,received_at,flags,<columns...>`. Flagged rows
//! keep the raw field text; the password token is never written.
//!
//! Event rows: `wall_ms,bed,timestep,event,delta,resolves_timestep`.
//! Immediate Green verdicts are not logged.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::engine::{Verdict, VerdictKind};
use crate::validity::{BedId, DataWarning, Millis, ParameterSchema, RawFrame, ValidationResult};

/// Columns that carry wall-clock time and differ between otherwise
/// identical runs.
pub const FRAME_CLOCK_COLUMN: &str = "received_at";
pub const EVENT_CLOCK_COLUMN: &str = "wall_ms";

pub struct FrameArchive<W: Write> {
    out: csv::Writer<W>,
    width: usize,
}

impl FrameArchive<BufWriter<File>> {
    pub fn create(path: &Path, schema: &ParameterSchema) -> io::Result<Self> {
        Self::new(BufWriter::new(File::create(path)?), schema)
    }
}

impl<W: Write> FrameArchive<W> {
    pub fn new(w: W, schema: &ParameterSchema) -> io::Result<Self> {
        let mut out = csv::WriterBuilder::new().flexible(true).from_writer(w);
        let mut header = vec!["bed", "timestep", FRAME_CLOCK_COLUMN, "flags"];
        header.extend(schema.names().iter().map(String::as_str));
        out.write_record(&header).map_err(io::Error::other)?;
        Ok(Self { out, width: schema.arity() })
    }

    /// Writes one frame. Rows with the wrong field count are padded or
    /// truncated to the schema width so the file stays rectangular.
    pub fn record(&mut self, frame: &RawFrame, timestep: u64, result: &ValidationResult) -> io::Result<()> {
        let mut row = vec![
            frame.bed.to_string(),
            timestep.to_string(),
            frame.received_at.to_string(),
            result.flag_string(),
        ];
        for i in 0..self.width {
            row.push(frame.fields.get(i).cloned().unwrap_or_default());
        }
        self.out.write_record(&row).map_err(io::Error::other)
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }

    pub fn into_inner(self) -> io::Result<W> {
        self.out.into_inner().map_err(|e| e.into_error())
    }
}

/// Something worth an event row.
#[derive(Clone, Debug, PartialEq)]
pub enum LoggedEvent {
    Verdict(Verdict),
    Data { warning: DataWarning, timestep: u64 },
}

impl LoggedEvent {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Verdict(v) => v.kind.as_str(),
            Self::Data { warning, .. } => warning.as_str(),
        }
    }

    /// Immediate Greens are routine and skipped.
    pub fn is_logged(&self) -> bool {
        match self {
            Self::Verdict(v) => v.kind != VerdictKind::Green || v.is_resolution(),
            Self::Data { .. } => true,
        }
    }
}

pub struct EventLog<W: Write> {
    out: csv::Writer<W>,
}

impl EventLog<BufWriter<File>> {
    pub fn create(path: &Path) -> io::Result<Self> {
        Self::new(BufWriter::new(File::create(path)?))
    }
}

impl<W: Write> EventLog<W> {
    pub fn new(w: W) -> io::Result<Self> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([EVENT_CLOCK_COLUMN, "bed", "timestep", "event", "delta", "resolves_timestep"])
            .map_err(io::Error::other)?;
        Ok(Self { out })
    }

    /// Returns whether a row was written.
    pub fn record(&mut self, wall: Millis, bed: BedId, event: &LoggedEvent) -> io::Result<bool> {
        if !event.is_logged() {
            return Ok(false);
        }
        let (timestep, delta, resolves) = match event {
            LoggedEvent::Verdict(v) => (
                v.at_timestep,
                format!("{:.6}", v.delta),
                v.resolves_timestep.map_or(String::new(), |t| t.to_string()),
            ),
            LoggedEvent::Data { timestep, .. } => (*timestep, String::new(), String::new()),
        };
        self.out
            .write_record([
                wall.to_string(),
                bed.to_string(),
                timestep.to_string(),
                event.name().to_string(),
                delta,
                resolves,
            ])
            .map_err(io::Error::other)?;
        Ok(true)
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }

    pub fn into_inner(self) -> io::Result<W> {
        self.out.into_inner().map_err(|e| e.into_error())
    }
}

/// Drops the named column from CSV text, for comparing runs that differ
/// only in wall-clock time.
pub fn strip_column(csv_text: &str, column: &str) -> Result<String, csv::Error> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).has_headers(false).from_reader(csv_text.as_bytes());
    let mut wtr = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    let mut skip = None;
    for rec in rdr.records() {
        let rec = rec?;
        if skip.is_none() {
            skip = Some(rec.iter().position(|c| c == column));
        }
        let keep: Vec<&str> = rec
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != skip.flatten())
            .map(|(_, c)| c)
            .collect();
        wtr.write_record(&keep)?;
    }
    let bytes = wtr.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

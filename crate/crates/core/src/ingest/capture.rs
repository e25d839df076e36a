// SPDX-License-Identifier: MIT OR Apache-2.0

//! Capture-style CSV files and label files.
//!
//! A capture file is a header row followed by one wire record per poll:
//!
//! ```text
//! password,HR,SpO2,SYS,DIA
//! PW123,72,98,120,80
//! PW123,73,98,121,79
//! ```
//!
//! The first header cell names the password column and is otherwise
//! ignored. Label files are `timestep,channels,note` with channels joined
//! by `;`.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::validity::{ParameterSchema, SchemaError};

pub const PASSWORD_COLUMN: &str = "password";

/// Column names from a capture header line, without the password cell.
pub fn parse_header(line: &str) -> Vec<String> {
    line.trim_end_matches(['\n', '\r'])
        .split(',')
        .skip(1)
        .map(|c| c.trim().to_string())
        .collect()
}

pub fn header_line(columns: &[String]) -> String {
    let mut out = String::from(PASSWORD_COLUMN);
    for c in columns {
        out.push(',');
        out.push_str(c);
    }
    out
}

/// Reads just the header of a capture file.
pub fn read_header(path: &Path) -> io::Result<Vec<String>> {
    let mut first = String::new();
    BufReader::new(File::open(path)?).read_line(&mut first)?;
    Ok(parse_header(&first))
}

pub fn schema_from_header(path: &Path) -> Result<ParameterSchema, CaptureError> {
    Ok(ParameterSchema::new(read_header(path)?)?)
}

/// Writes a header and records as a capture file.
pub fn write_capture<S: AsRef<str>>(path: &Path, columns: &[String], records: &[S]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", header_line(columns))?;
    for r in records {
        writeln!(w, "{}", r.as_ref())?;
    }
    w.flush()
}

/// All data records of a capture file, header skipped, in order.
pub fn read_records(path: &Path) -> io::Result<Vec<String>> {
    let reader = BufReader::new(File::open(path)?);
    reader.lines().skip(1).collect()
}

/// Ground-truth event.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledEvent {
    pub timestep: u64,
    pub channels: Vec<usize>,
    pub note: String,
}

#[derive(Debug, thiserror::Error)]
pub enum CaptureError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("label file line {line}: {message}")]
    Label { line: u64, message: String },
}

pub fn write_labels<W: Write>(w: W, labels: &[LabeledEvent]) -> Result<(), CaptureError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["timestep", "channels", "note"])?;
    for l in labels {
        let channels = l.channels.iter().map(ToString::to_string).collect::<Vec<_>>().join(";");
        out.write_record([l.timestep.to_string(), channels, l.note.clone()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_labels<R: io::Read>(r: R) -> Result<Vec<LabeledEvent>, CaptureError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(r);
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |message: String| CaptureError::Label { line, message };
        let ts = rec.get(0).ok_or_else(|| bad("missing timestep".into()))?;
        let timestep = ts.trim().parse().map_err(|_| bad(format!("bad timestep `{ts}`")))?;
        let channels = match rec.get(1).map(str::trim) {
            None | Some("") => Vec::new(),
            Some(list) => list
                .split(';')
                .map(|c| c.trim().parse().map_err(|_| bad(format!("bad channel `{c}`"))))
                .collect::<Result<_, _>>()?,
        };
        let note = rec.get(2).unwrap_or("").to_string();
        out.push(LabeledEvent { timestep, channels, note });
    }
    out.sort_by_key(|l| l.timestep);
    Ok(out)
}

pub fn read_label_file(path: &Path) -> Result<Vec<LabeledEvent>, CaptureError> {
    read_labels(File::open(path)?)
}

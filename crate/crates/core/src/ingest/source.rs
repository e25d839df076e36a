// SPDX-License-Identifier: MIT OR Apache-2.0

//! Frame sources: file replay, file tailing, in-memory streams and a
//! newline-delimited TCP feed.
//!
//! Every source yields raw record lines in arrival order, at most once.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::thread;
use std::time::{Duration, Instant};

use super::capture::parse_header;
use super::synthetic::SyntheticSpec;
use crate::validity::BedId;

/// Capture cadence of the bedside extraction.
pub const DEFAULT_POLL_INTERVAL: Duration = Duration::from_secs(12);

const MIN_BACKOFF: Duration = Duration::from_millis(100);
const MAX_BACKOFF: Duration = Duration::from_secs(5);

#[derive(Debug, Clone, PartialEq)]
pub enum Next {
    Frame(String),
    /// A poll interval passed without a record.
    Idle,
    End,
}

#[derive(Debug, thiserror::Error)]
pub enum SourceError {
    #[error("source I/O: {0}")]
    Io(#[from] io::Error),
    #[error("invalid source configuration: {0}")]
    Config(String),
}

pub trait FrameSource: Send {
    fn next_frame(&mut self) -> Result<Next, SourceError>;

    /// Column names announced by the source, if it has a header.
    fn columns(&self) -> Option<&[String]> {
        None
    }
}

impl<S: FrameSource + ?Sized> FrameSource for Box<S> {
    fn next_frame(&mut self) -> Result<Next, SourceError> {
        (**self).next_frame()
    }

    fn columns(&self) -> Option<&[String]> {
        (**self).columns()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceKind {
    Tail(PathBuf),
    Replay(PathBuf),
    Synthetic(SyntheticSpec),
    Socket(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceConfig {
    pub bed: BedId,
    pub kind: SourceKind,
    pub poll_interval: Duration,
    /// Replay acceleration; `f64::INFINITY` disables pacing.
    pub speedup: f64,
    /// Column carrying a per-row time in seconds, used for replay pacing.
    pub time_column: Option<String>,
}

impl SourceConfig {
    pub fn new(bed: BedId, kind: SourceKind) -> Self {
        Self { bed, kind, poll_interval: DEFAULT_POLL_INTERVAL, speedup: 1.0, time_column: None }
    }

    pub fn validate(&self) -> Result<(), SourceError> {
        if self.poll_interval.is_zero() {
            return Err(SourceError::Config("poll interval must be > 0".into()));
        }
        if !(self.speedup > 0.0) {
            return Err(SourceError::Config(format!("speedup must be > 0; got {}", self.speedup)));
        }
        Ok(())
    }

    pub fn open(&self) -> Result<Box<dyn FrameSource>, SourceError> {
        self.validate()?;
        Ok(match &self.kind {
            SourceKind::Replay(p) => Box::new(
                ReplaySource::open(p, self.poll_interval, self.speedup)?
                    .with_time_column(self.time_column.as_deref())?,
            ),
            SourceKind::Tail(p) => Box::new(TailSource::open(p, self.poll_interval)?),
            SourceKind::Socket(addr) => Box::new(SocketSource::new(addr.clone(), self.poll_interval)),
            SourceKind::Synthetic(spec) => {
                let stream = spec.generate().map_err(|e| SourceError::Config(e.to_string()))?;
                Box::new(
                    MemorySource::new(stream.records, self.poll_interval, self.speedup)
                        .with_columns(stream.columns),
                )
            }
        })
    }
}

/// Wall-clock pacing against a fixed schedule, so per-frame sleep error
/// does not accumulate.
#[derive(Debug)]
pub struct Pacer {
    speedup: f64,
    start: Option<Instant>,
    nominal: Duration,
}

impl Pacer {
    pub fn new(speedup: f64) -> Self {
        Self { speedup, start: None, nominal: Duration::ZERO }
    }

    /// Blocks until the frame that follows the previous one by `gap` of
    /// recorded time is due. The first call returns immediately.
    pub fn wait(&mut self, gap: Duration) {
        let Some(start) = self.start else {
            self.start = Some(Instant::now());
            return;
        };
        if !self.speedup.is_finite() {
            return;
        }
        self.nominal += gap;
        let due = start + self.nominal.div_f64(self.speedup);
        let now = Instant::now();
        if due > now {
            thread::sleep(due - now);
        }
    }
}

/// Replays a capture file at `speedup` times its recorded pace.
pub struct ReplaySource<R> {
    reader: R,
    columns: Vec<String>,
    poll_interval: Duration,
    time_index: Option<usize>,
    last_time: Option<f64>,
    pacer: Pacer,
    done: bool,
}

impl ReplaySource<BufReader<File>> {
    pub fn open(path: &Path, poll_interval: Duration, speedup: f64) -> Result<Self, SourceError> {
        Self::from_reader(BufReader::new(File::open(path)?), poll_interval, speedup)
    }
}

impl<R: BufRead + Send> ReplaySource<R> {
    pub fn from_reader(mut reader: R, poll_interval: Duration, speedup: f64) -> Result<Self, SourceError> {
        let mut header = String::new();
        reader.read_line(&mut header)?;
        Ok(Self {
            reader,
            columns: parse_header(&header),
            poll_interval,
            time_index: None,
            last_time: None,
            pacer: Pacer::new(speedup),
            done: false,
        })
    }

    /// Paces rows by the named column (seconds) instead of the poll interval.
    pub fn with_time_column(mut self, name: Option<&str>) -> Result<Self, SourceError> {
        if let Some(name) = name {
            let idx = self
                .columns
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| SourceError::Config(format!("no time column `{name}` in header")))?;
            self.time_index = Some(idx);
        }
        Ok(self)
    }

    fn gap_for(&mut self, line: &str) -> Duration {
        let t = self.time_index.and_then(|i| {
            line.split(',').nth(i + 1).and_then(|s| s.trim().parse::<f64>().ok())
        });
        match (t, self.last_time) {
            (Some(now), Some(prev)) if now >= prev => {
                self.last_time = Some(now);
                Duration::from_secs_f64(now - prev)
            }
            (Some(now), _) => {
                self.last_time = Some(now);
                self.poll_interval
            }
            (None, _) => self.poll_interval,
        }
    }
}

impl<R: BufRead + Send> FrameSource for ReplaySource<R> {
    fn next_frame(&mut self) -> Result<Next, SourceError> {
        if self.done {
            return Ok(Next::End);
        }
        let mut line = String::new();
        if self.reader.read_line(&mut line)? == 0 {
            self.done = true;
            return Ok(Next::End);
        }
        let line = line.trim_end_matches(['\n', '\r']).to_string();
        let gap = self.gap_for(&line);
        self.pacer.wait(gap);
        Ok(Next::Frame(line))
    }

    fn columns(&self) -> Option<&[String]> {
        Some(&self.columns)
    }
}

/// Follows a growing file, like `tail -f`. Starts at the current end of
/// the file; only lines appended afterwards are delivered.
pub struct TailSource {
    path: PathBuf,
    file: File,
    position: u64,
    pending: Vec<u8>,
    poll_interval: Duration,
    check_every: Duration,
}

impl TailSource {
    pub fn open(path: &Path, poll_interval: Duration) -> Result<Self, SourceError> {
        let mut file = File::open(path)?;
        let position = file.seek(SeekFrom::End(0))?;
        Ok(Self {
            path: path.to_path_buf(),
            file,
            position,
            pending: Vec::new(),
            poll_interval,
            check_every: poll_interval.min(Duration::from_millis(25)),
        })
    }

    fn take_line(&mut self) -> Option<String> {
        let nl = self.pending.iter().position(|&b| b == b'\n')?;
        let rest = self.pending.split_off(nl + 1);
        let line = std::mem::replace(&mut self.pending, rest);
        let text = String::from_utf8_lossy(&line);
        Some(text.trim_end_matches(['\n', '\r']).to_string())
    }

    fn read_more(&mut self) -> io::Result<()> {
        let len = std::fs::metadata(&self.path)?.len();
        if len < self.position {
            // truncated or rotated: start over
            self.file = File::open(&self.path)?;
            self.position = 0;
            self.pending.clear();
        }
        self.file.seek(SeekFrom::Start(self.position))?;
        let n = (&mut self.file).read_to_end(&mut self.pending)?;
        self.position += n as u64;
        Ok(())
    }
}

impl FrameSource for TailSource {
    fn next_frame(&mut self) -> Result<Next, SourceError> {
        let deadline = Instant::now() + self.poll_interval;
        loop {
            if let Some(line) = self.take_line() {
                return Ok(Next::Frame(line));
            }
            self.read_more()?;
            if let Some(line) = self.take_line() {
                return Ok(Next::Frame(line));
            }
            let now = Instant::now();
            if now >= deadline {
                return Ok(Next::Idle);
            }
            thread::sleep(self.check_every.min(deadline - now));
        }
    }
}

/// Pre-materialized records, paced at `poll_interval / speedup`.
pub struct MemorySource {
    records: std::vec::IntoIter<String>,
    columns: Option<Vec<String>>,
    poll_interval: Duration,
    pacer: Pacer,
}

impl MemorySource {
    pub fn new(records: Vec<String>, poll_interval: Duration, speedup: f64) -> Self {
        Self { records: records.into_iter(), columns: None, poll_interval, pacer: Pacer::new(speedup) }
    }

    pub fn with_columns(mut self, columns: Vec<String>) -> Self {
        self.columns = Some(columns);
        self
    }
}

impl FrameSource for MemorySource {
    fn next_frame(&mut self) -> Result<Next, SourceError> {
        match self.records.next() {
            Some(r) => {
                self.pacer.wait(self.poll_interval);
                Ok(Next::Frame(r))
            }
            None => Ok(Next::End),
        }
    }

    fn columns(&self) -> Option<&[String]> {
        self.columns.as_deref()
    }
}

/// Client side of the newline-delimited record feed. Reconnects with
/// exponential backoff (capped) after a disconnect; while disconnected each
/// call reports [`Next::Idle`] so the gap shows up as missing frames.
pub struct SocketSource {
    addr: String,
    poll_interval: Duration,
    conn: Option<BufReader<TcpStream>>,
    pending: Vec<u8>,
    backoff: Duration,
}

impl SocketSource {
    pub fn new(addr: String, poll_interval: Duration) -> Self {
        Self { addr, poll_interval, conn: None, pending: Vec::new(), backoff: MIN_BACKOFF }
    }

    fn connect(&mut self) -> io::Result<()> {
        let addr = self
            .addr
            .to_socket_addrs()?
            .next()
            .ok_or_else(|| io::Error::new(io::ErrorKind::NotFound, "address did not resolve"))?;
        let stream = TcpStream::connect_timeout(&addr, self.poll_interval)?;
        stream.set_read_timeout(Some(self.poll_interval))?;
        self.conn = Some(BufReader::new(stream));
        self.backoff = MIN_BACKOFF;
        Ok(())
    }

    fn disconnect(&mut self) {
        self.conn = None;
        self.pending.clear();
    }
}

impl FrameSource for SocketSource {
    fn next_frame(&mut self) -> Result<Next, SourceError> {
        if self.conn.is_none() {
            if self.connect().is_err() {
                thread::sleep(self.backoff);
                self.backoff = (self.backoff * 2).min(MAX_BACKOFF);
                return Ok(Next::Idle);
            }
        }
        let conn = self.conn.as_mut().expect("connected above");
        match conn.read_until(b'\n', &mut self.pending) {
            Ok(0) => {
                self.disconnect();
                Ok(Next::Idle)
            }
            Ok(_) if self.pending.ends_with(b"\n") => {
                let line = String::from_utf8_lossy(&self.pending).trim_end_matches(['\n', '\r']).to_string();
                self.pending.clear();
                Ok(Next::Frame(line))
            }
            // partial line, EOF mid-record
            Ok(_) => {
                self.disconnect();
                Ok(Next::Idle)
            }
            Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => Ok(Next::Idle),
            Err(_) => {
                self.disconnect();
                Ok(Next::Idle)
            }
        }
    }
}

/// Serves records from `source` to one connected client at a time, one
/// line per record. Returns once the source ends.
pub fn serve_records<S: FrameSource>(listener: &TcpListener, mut source: S) -> Result<u64, SourceError> {
    let mut sent = 0;
    let mut client: Option<TcpStream> = None;
    loop {
        let line = match source.next_frame()? {
            Next::Frame(line) => line,
            Next::Idle => continue,
            Next::End => return Ok(sent),
        };
        loop {
            if client.is_none() {
                let (stream, _) = listener.accept()?;
                client = Some(stream);
            }
            let stream = client.as_mut().expect("accepted above");
            if writeln!(stream, "{line}").and_then(|_| stream.flush()).is_ok() {
                sent += 1;
                break;
            }
            client = None;
        }
    }
}

// SPDX-License-Identifier: MIT OR Apache-2.0

//! Frame screening ahead of the detector.
//!
//! A frame passes only if its leading password token matches, it carries
//! one field per schema column, and every active field is a plain decimal
//! number that is neither zero nor greater than 10000. Anything else is
//! flagged, archived with its flags, and kept away from the detector. A run
//! of `W` consecutive flagged frames raises a data warning that the next
//! valid frame clears.
//!
//! Field tokenizer rules:
//!
//! * a record is one line, `\r\n` or `\n` terminated; terminators are stripped
//! * fields are split on `,` and trimmed of ASCII whitespace
//! * empty or `null` (any case) is *null*; a field made only of `-` is *hyphen*
//! * numbers match `[+-]?(digits[.digits*] | .digits)`; exponents, `nan` and
//!   `inf` are *non-numeric*

use std::fmt;

/// Values strictly above this are rejected as over-limit.
pub const VALUE_LIMIT: f64 = 10_000.0;

/// Default consecutive-flag count that raises a data warning
/// (one minute at a 12 s cadence).
pub const DEFAULT_WARN_AFTER: u32 = 5;

/// Wall-clock receive time, milliseconds since the Unix epoch.
pub type Millis = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BedId(pub u16);

impl fmt::Display for BedId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Column layout of the wire record (after the password token).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParameterSchema {
    names: Vec<String>,
    omitted: Vec<bool>,
    zero_allowed: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemaError {
    #[error("schema has no columns")]
    Empty,
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("every column is omitted")]
    NothingActive,
}

impl ParameterSchema {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, SchemaError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(SchemaError::Empty);
        }
        let n = names.len();
        Ok(Self { names, omitted: vec![false; n], zero_allowed: vec![false; n] })
    }

    /// Columns named `ch1..chd`.
    pub fn anonymous(d: usize) -> Result<Self, SchemaError> {
        Self::new((1..=d).map(|i| format!("ch{i}")))
    }

    fn position(&self, name: &str) -> Result<usize, SchemaError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| SchemaError::UnknownColumn(name.to_string()))
    }

    /// Drops the named columns from the measurement vector. Omitted columns
    /// are not screened.
    pub fn omit<S: AsRef<str>>(mut self, names: &[S]) -> Result<Self, SchemaError> {
        for n in names {
            let i = self.position(n.as_ref())?;
            self.omitted[i] = true;
        }
        if self.omitted.iter().all(|&o| o) {
            return Err(SchemaError::NothingActive);
        }
        Ok(self)
    }

    /// Columns on which a literal zero is a legitimate reading.
    pub fn allow_zero<S: AsRef<str>>(mut self, names: &[S]) -> Result<Self, SchemaError> {
        for n in names {
            let i = self.position(n.as_ref())?;
            self.zero_allowed[i] = true;
        }
        Ok(self)
    }

    /// Number of value fields in a wire record.
    pub fn arity(&self) -> usize {
        self.names.len()
    }

    /// Dimension of the measurement vectors this schema produces.
    pub fn active_dim(&self) -> usize {
        self.omitted.iter().filter(|&&o| !o).count()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn active_names(&self) -> Vec<&str> {
        self.names
            .iter()
            .zip(&self.omitted)
            .filter(|(_, &o)| !o)
            .map(|(n, _)| n.as_str())
            .collect()
    }

    pub fn is_omitted(&self, index: usize) -> bool {
        self.omitted[index]
    }
}

/// One received record before any numeric conversion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawFrame {
    pub bed: BedId,
    pub received_at: Millis,
    pub password: String,
    pub fields: Vec<String>,
}

impl RawFrame {
    /// Frame with no tokens at all.
    pub fn empty(bed: BedId, received_at: Millis) -> Self {
        Self { bed, received_at, password: String::new(), fields: Vec::new() }
    }
}

/// Splits one wire record. Trailing `\r`/`\n` are ignored.
pub fn parse_frame(line: &str, bed: BedId, received_at: Millis) -> RawFrame {
    let line = line.trim_end_matches(['\n', '\r']);
    if line.trim().is_empty() {
        return RawFrame::empty(bed, received_at);
    }
    let mut tokens = line.split(',').map(|t| t.trim().to_string());
    let password = tokens.next().unwrap_or_default();
    RawFrame { bed, received_at, password, fields: tokens.collect() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FlagReason {
    Null,
    Zero,
    Hyphen,
    OverLimit,
    BadPassword,
    BadArity,
    NonNumeric,
    /// No record arrived within the poll interval.
    Missing,
}

impl FlagReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Null => "null",
            Self::Zero => "zero",
            Self::Hyphen => "hyphen",
            Self::OverLimit => "over-limit",
            Self::BadPassword => "bad-password",
            Self::BadArity => "bad-arity",
            Self::NonNumeric => "non-numeric",
            Self::Missing => "missing",
        }
    }
}

impl fmt::Display for FlagReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One flag; `field` is `None` for whole-frame problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Flag {
    pub field: Option<usize>,
    pub reason: FlagReason,
}

impl Flag {
    pub fn frame(reason: FlagReason) -> Self {
        Self { field: None, reason }
    }

    pub fn field(index: usize, reason: FlagReason) -> Self {
        Self { field: Some(index), reason }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.field {
            Some(i) => write!(f, "{i}:{}", self.reason),
            None => write!(f, "*:{}", self.reason),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ValidationResult {
    /// Active fields, in schema order, all finite.
    Valid(Vec<f64>),
    Flagged(Vec<Flag>),
}

impl ValidationResult {
    pub fn is_valid(&self) -> bool {
        matches!(self, Self::Valid(_))
    }

    /// Flags joined with `;`, empty for valid frames.
    pub fn flag_string(&self) -> String {
        match self {
            Self::Valid(_) => String::new(),
            Self::Flagged(flags) => {
                flags.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
            }
        }
    }
}

fn parse_decimal(s: &str) -> Option<f64> {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    let digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    let ok = match frac {
        None => !int.is_empty() && digits(int),
        Some(f) => digits(int) && digits(f) && !(int.is_empty() && f.is_empty()),
    };
    if ok {
        s.parse().ok()
    } else {
        None
    }
}

fn screen_field(raw: &str, zero_ok: bool) -> Result<f64, FlagReason> {
    let t = raw.trim();
    if t.is_empty() || t.eq_ignore_ascii_case("null") {
        return Err(FlagReason::Null);
    }
    if t.bytes().all(|b| b == b'-') {
        return Err(FlagReason::Hyphen);
    }
    let v = parse_decimal(t).ok_or(FlagReason::NonNumeric)?;
    if v == 0.0 && !zero_ok {
        return Err(FlagReason::Zero);
    }
    if v > VALUE_LIMIT {
        return Err(FlagReason::OverLimit);
    }
    Ok(v)
}

/// Screens one frame.
pub fn validate(frame: &RawFrame, expected_password: &str, schema: &ParameterSchema) -> ValidationResult {
    if frame.password.is_empty() && frame.fields.is_empty() {
        return ValidationResult::Flagged(vec![Flag::frame(FlagReason::BadArity)]);
    }
    if frame.password != expected_password {
        return ValidationResult::Flagged(vec![Flag::frame(FlagReason::BadPassword)]);
    }
    if frame.fields.len() != schema.arity() {
        return ValidationResult::Flagged(vec![Flag::frame(FlagReason::BadArity)]);
    }
    let mut values = Vec::with_capacity(schema.active_dim());
    let mut flags = Vec::new();
    for (i, raw) in frame.fields.iter().enumerate() {
        if schema.omitted[i] {
            continue;
        }
        match screen_field(raw, schema.zero_allowed[i]) {
            Ok(v) => values.push(v),
            Err(reason) => flags.push(Flag::field(i, reason)),
        }
    }
    if flags.is_empty() {
        ValidationResult::Valid(values)
    } else {
        ValidationResult::Flagged(flags)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataWarning {
    Raised,
    Cleared,
}

impl DataWarning {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Raised => "data-warning-raised",
            Self::Cleared => "data-warning-cleared",
        }
    }
}

/// Per-bed run length of flagged frames.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlagStreak {
    consecutive_flagged: u32,
    warning_active: bool,
    warn_after: u32,
}

impl FlagStreak {
    pub fn new(warn_after: u32) -> Self {
        assert!(warn_after > 0, "warning threshold must be positive");
        Self { consecutive_flagged: 0, warning_active: false, warn_after }
    }

    pub fn consecutive_flagged(&self) -> u32 {
        self.consecutive_flagged
    }

    pub fn warning_active(&self) -> bool {
        self.warning_active
    }

    pub fn track(&mut self, result: &ValidationResult) -> Option<DataWarning> {
        self.record(result.is_valid())
    }

    /// Same as [`track`](Self::track) for callers that only know validity.
    pub fn record(&mut self, valid: bool) -> Option<DataWarning> {
        if valid {
            self.consecutive_flagged = 0;
            if self.warning_active {
                self.warning_active = false;
                return Some(DataWarning::Cleared);
            }
            return None;
        }
        self.consecutive_flagged = self.consecutive_flagged.saturating_add(1);
        if !self.warning_active && self.consecutive_flagged >= self.warn_after {
            self.warning_active = true;
            return Some(DataWarning::Raised);
        }
        None
    }
}

impl Default for FlagStreak {
    fn default() -> Self {
        Self::new(DEFAULT_WARN_AFTER)
    }
}

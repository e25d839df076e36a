// SPDX-License-Identifier: MIT OR Apache-2.0

//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Later keys override
//! earlier ones. Lists are comma-separated; threshold pairs are written
//! `nu1:nu2`. Bed sources are `bed.<n> = replay:<path>`, `tail:<path>`,
//! `socket:<host:port>` or `synthetic`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::board::MAX_BEDS;
use crate::engine::{ThresholdConfig, VerdictKind};
use crate::ingest::source::{SourceConfig, SourceKind, DEFAULT_POLL_INTERVAL};
use crate::ingest::standardize::{DEFAULT_VARIANCE_FLOOR, DEFAULT_WARMUP};
use crate::ingest::SyntheticSpec;
use crate::pipeline::PipelineConfig;
use crate::tuner::{build_grid, MatchPolicy, REFERENCE_THRESHOLDS};
use crate::validity::{BedId, ParameterSchema, DEFAULT_WARN_AFTER};

/// `line` is 0 for errors not tied to one line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "config line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn whole(message: impl Into<String>) -> ConfigError {
    ConfigError { line: 0, message: message.into() }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub pairs: Vec<(f64, f64)>,
    pub sigmas: Vec<f64>,
    pub ells: Vec<u64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { pairs: REFERENCE_THRESHOLDS.to_vec(), sigmas: vec![1.0, 2.0, 4.0, 8.0], ells: vec![20] }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthSettings {
    pub length: u64,
    pub anomalies: usize,
    pub dim: usize,
    pub seed: u64,
    /// Spike size in channel standard deviations.
    pub magnitude: f64,
    pub duration: u64,
    /// No anomaly is placed before this timestep.
    pub start: u64,
}

impl Default for SynthSettings {
    fn default() -> Self {
        Self { length: 300, anomalies: 9, dim: 14, seed: 1, magnitude: 5.0, duration: 1, start: 60 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub thresholds: ThresholdConfig,
    pub password: String,
    pub warn_after: u32,
    pub warmup: u64,
    pub variance_floor: f64,
    /// Wire columns; when unset they come from the source header.
    pub columns: Option<Vec<String>>,
    pub omit: Vec<String>,
    pub zero_ok: Vec<String>,
    pub time_column: Option<String>,
    pub poll_interval: Duration,
    pub speedup: f64,
    pub refresh: Duration,
    pub policy: MatchPolicy,
    pub grid: GridSpec,
    pub beds: Vec<(BedId, SourceKind)>,
    pub synth: SynthSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            thresholds: ThresholdConfig::default(),
            password: "PW123".into(),
            warn_after: DEFAULT_WARN_AFTER,
            warmup: DEFAULT_WARMUP,
            variance_floor: DEFAULT_VARIANCE_FLOOR,
            columns: None,
            omit: Vec::new(),
            zero_ok: Vec::new(),
            time_column: None,
            poll_interval: DEFAULT_POLL_INTERVAL,
            speedup: 1.0,
            refresh: Duration::from_secs(1),
            policy: MatchPolicy::default(),
            grid: GridSpec::default(),
            beds: Vec::new(),
            synth: SynthSettings::default(),
        }
    }
}

fn num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("`{v}` is not a valid number"))
}

fn list(v: &str) -> Vec<String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

fn num_list<T: std::str::FromStr>(v: &str) -> Result<Vec<T>, String> {
    list(v).iter().map(|s| num(s)).collect()
}

fn seconds(v: &str) -> Result<Duration, String> {
    let s: f64 = num(v)?;
    if !(s > 0.0) || !s.is_finite() {
        return Err(format!("duration must be a positive number of seconds; got {v}"));
    }
    Ok(Duration::from_secs_f64(s))
}

/// `inf` (or `max`) disables pacing.
pub fn parse_speedup(v: &str) -> Result<f64, String> {
    match v.trim().to_ascii_lowercase().as_str() {
        "inf" | "max" => Ok(f64::INFINITY),
        other => {
            let s: f64 = num(other)?;
            if s > 0.0 {
                Ok(s)
            } else {
                Err(format!("speedup must be > 0; got {v}"))
            }
        }
    }
}

/// `replay:<path>`, `tail:<path>`, `socket:<addr>` or `synthetic`.
pub fn parse_source(v: &str) -> Result<Option<SourceKind>, String> {
    let v = v.trim();
    if v == "synthetic" {
        return Ok(None);
    }
    let (kind, target) = v.split_once(':').ok_or_else(|| format!("source `{v}` needs kind:target"))?;
    let target = target.trim();
    if target.is_empty() {
        return Err(format!("source `{v}` has an empty target"));
    }
    match kind.trim() {
        "replay" => Ok(Some(SourceKind::Replay(PathBuf::from(target)))),
        "tail" => Ok(Some(SourceKind::Tail(PathBuf::from(target)))),
        "socket" => Ok(Some(SourceKind::Socket(target.to_string()))),
        other => Err(format!("unknown source kind `{other}`")),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| ConfigError { line: i + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected key = value, got `{line}`")))?;
            cfg.set(key.trim(), value.trim()).map_err(err)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| whole(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        let t = &mut self.thresholds;
        match key {
            "nu1" => t.nu1 = num(v)?,
            "nu2" => t.nu2 = num(v)?,
            "ell" => t.ell = num(v)?,
            "sigma" => t.sigma = num(v)?,
            "lambda" => t.lambda = num(v)?,
            "d_similar" => t.d_similar = num(v)?,
            "epsilon_frac" => t.epsilon_frac = num(v)?,
            "prune_period" => t.prune_period = num(v)?,
            "usage_floor" => t.usage_floor = num(v)?,
            "max_size" => t.max_size = num(v)?,
            "password" => self.password = v.to_string(),
            "warn_after" => self.warn_after = num(v)?,
            "warmup" => self.warmup = num(v)?,
            "variance_floor" => self.variance_floor = num(v)?,
            "columns" => self.columns = Some(list(v)),
            "omit" => self.omit = list(v),
            "zero_ok" => self.zero_ok = list(v),
            "time_column" => self.time_column = Some(v.to_string()).filter(|s| !s.is_empty()),
            "poll_interval" => self.poll_interval = seconds(v)?,
            "speedup" => self.speedup = parse_speedup(v)?,
            "refresh" => self.refresh = seconds(v)?,
            "match_window" => self.policy.window = num(v)?,
            "match_kinds" => {
                self.policy.counted = list(v)
                    .iter()
                    .map(|s| VerdictKind::parse(s).ok_or_else(|| format!("unknown verdict `{s}`")))
                    .collect::<Result<_, _>>()?
            }
            "grid_nu" => {
                self.grid.pairs = list(v)
                    .iter()
                    .map(|p| {
                        let (a, b) = p.split_once(':').ok_or_else(|| format!("pair `{p}` must be nu1:nu2"))?;
                        Ok((num(a.trim())?, num(b.trim())?))
                    })
                    .collect::<Result<_, String>>()?
            }
            "grid_sigma" => self.grid.sigmas = num_list(v)?,
            "grid_ell" => self.grid.ells = num_list(v)?,
            "synth.length" => self.synth.length = num(v)?,
            "synth.anomalies" => self.synth.anomalies = num(v)?,
            "synth.dim" => self.synth.dim = num(v)?,
            "synth.seed" => self.synth.seed = num(v)?,
            "synth.magnitude" => self.synth.magnitude = num(v)?,
            "synth.duration" => self.synth.duration = num(v)?,
            "synth.start" => self.synth.start = num(v)?,
            k if k.starts_with("bed.") => {
                let id: u16 = k[4..].parse().map_err(|_| format!("bad bed number in `{k}`"))?;
                self.set_bed(BedId(id), v)?;
            }
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Adds or replaces one bed's source.
    pub fn set_bed(&mut self, bed: BedId, source: &str) -> Result<(), String> {
        let kind = match parse_source(source)? {
            Some(k) => k,
            None => SourceKind::Synthetic(self.synthetic_spec_for(bed)),
        };
        match self.beds.iter_mut().find(|(b, _)| *b == bed) {
            Some(slot) => slot.1 = kind,
            None => self.beds.push((bed, kind)),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.thresholds.validate().map_err(|e| whole(e.to_string()))?;
        if self.beds.len() > MAX_BEDS {
            return Err(whole(format!("at most {MAX_BEDS} beds; got {}", self.beds.len())));
        }
        if self.warn_after == 0 {
            return Err(whole("warn_after must be >= 1"));
        }
        if !(self.variance_floor > 0.0) {
            return Err(whole("variance_floor must be > 0"));
        }
        if self.policy.counted.is_empty() {
            return Err(whole("match_kinds is empty"));
        }
        if self.grid.pairs.is_empty() {
            return Err(whole("grid_nu is empty"));
        }
        for c in self.threshold_grid() {
            c.validate().map_err(|e| whole(format!("grid: {e}")))?;
        }
        self.synthetic_spec().validate().map_err(|e| whole(format!("synth: {e}")))?;
        Ok(())
    }

    /// Schema from explicit `columns` or else the source header.
    pub fn schema(&self, header: Option<&[String]>) -> Result<ParameterSchema, ConfigError> {
        let names = match (&self.columns, header) {
            (Some(c), _) => c.clone(),
            (None, Some(h)) => h.to_vec(),
            (None, None) => return Err(whole("no `columns` key and the source has no header")),
        };
        ParameterSchema::new(names)
            .and_then(|s| s.omit(&self.omit))
            .and_then(|s| s.allow_zero(&self.zero_ok))
            .map_err(|e| whole(e.to_string()))
    }

    pub fn pipeline_config(&self, schema: ParameterSchema) -> PipelineConfig {
        PipelineConfig {
            schema,
            password: self.password.clone(),
            warn_after: self.warn_after,
            warmup: self.warmup,
            variance_floor: self.variance_floor,
            thresholds: self.thresholds.clone(),
        }
    }

    pub fn source_configs(&self) -> Vec<SourceConfig> {
        self.beds
            .iter()
            .map(|(bed, kind)| SourceConfig {
                bed: *bed,
                kind: match kind {
                    // built here so synth.* keys apply regardless of order
                    SourceKind::Synthetic(_) => SourceKind::Synthetic(self.synthetic_spec_for(*bed)),
                    k => k.clone(),
                },
                poll_interval: self.poll_interval,
                speedup: self.speedup,
                time_column: self.time_column.clone(),
            })
            .collect()
    }

    pub fn synthetic_spec(&self) -> SyntheticSpec {
        let s = &self.synth;
        let mut spec = SyntheticSpec::vital_signs(s.dim, s.length, s.seed)
            .with_spikes(s.anomalies, s.magnitude, s.duration, s.start);
        spec.password = self.password.clone();
        spec
    }

    /// Synthetic stream for a bed: seed offset by the bed number so beds differ.
    fn synthetic_spec_for(&self, bed: BedId) -> SyntheticSpec {
        let mut c = self.clone();
        c.synth.seed = self.synth.seed.wrapping_add(u64::from(bed.0));
        c.synthetic_spec()
    }

    pub fn threshold_grid(&self) -> Vec<ThresholdConfig> {
        build_grid(&self.thresholds, &self.grid.pairs, &self.grid.sigmas, &self.grid.ells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn overrides_and_lists() {
        let c = RunConfig::parse(
            "# demo\n\nnu1 = 0.05\nnu2=0.2\ncolumns = HR, SpO2 ,RR\nomit = RR\n\
             speedup = inf\ngrid_nu = 0.03:0.08, 0.11:0.24\nmatch_kinds = red1\n\
             bed.2 = replay:/tmp/x.csv\nbed.3 = socket:127.0.0.1:9000\n",
        )
        .unwrap();
        assert_eq!((c.thresholds.nu1, c.thresholds.nu2), (0.05, 0.2));
        assert_eq!(c.columns.as_deref().unwrap(), ["HR", "SpO2", "RR"]);
        assert!(c.speedup.is_infinite());
        assert_eq!(c.grid.pairs, vec![(0.03, 0.08), (0.11, 0.24)]);
        assert_eq!(c.policy.counted, vec![VerdictKind::Red1]);
        assert_eq!(c.beds[0], (BedId(2), SourceKind::Replay("/tmp/x.csv".into())));
        assert_eq!(c.beds[1], (BedId(3), SourceKind::Socket("127.0.0.1:9000".into())));
        assert_eq!(c.schema(None).unwrap().active_dim(), 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = RunConfig::parse("nu1 = 0.05\nbogus = 1\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert_eq!(e.to_string(), "config line 2: unknown key `bogus`");
        assert_eq!(RunConfig::parse("\n\nnu1 0.05").unwrap_err().line, 3);
        assert_eq!(RunConfig::parse("ell = -3").unwrap_err().line, 1);
    }

    #[test]
    fn semantic_errors() {
        let c = RunConfig::parse("nu1 = 0.3\nnu2 = 0.2\n").unwrap();
        assert!(c.validate().is_err());
        let six: String = (1..=6).map(|i| format!("bed.{i} = synthetic\n")).collect();
        assert!(RunConfig::parse(&six).unwrap().validate().is_err());
    }

    #[test]
    fn synthetic_beds_differ() {
        let c = RunConfig::parse("bed.1 = synthetic\nbed.2 = synthetic\nsynth.seed = 10\n").unwrap();
        let seeds: Vec<u64> = c
            .source_configs()
            .iter()
            .map(|s| match &s.kind {
                SourceKind::Synthetic(s) => s.seed,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(seeds, [11, 12]);
    }
}

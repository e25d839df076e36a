// SPDX-License-Identifier: MIT OR Apache-2.0

use std::io::{self, BufRead};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::mpsc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use koad::config::{parse_speedup, RunConfig};
use koad::ingest::source::ReplaySource;
use koad::run::{self, BoardOptions, Command, RunError};
use koad::selftest;
use koad::tuner::{render_table, write_report_csv};
use koad::validity::BedId;

#[derive(Parser)]
#[command(name = "koad", version, about = "Kernel-based online anomaly detection for bedside monitor streams")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Mode,
}

#[derive(Args)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Pacing factor for recorded streams (`inf` = as fast as possible).
    #[arg(long, global = true, value_parser = parse_speedup)]
    speedup: Option<f64>,
    /// Board redraw interval in seconds.
    #[arg(long, global = true)]
    refresh: Option<f64>,
    /// Bed source, `<n>=replay:<path>`, `<n>=tail:<path>`, `<n>=socket:<addr>` or `<n>=synthetic`.
    #[arg(long, global = true)]
    bed: Vec<String>,
    /// Label file (read by `tune`, written by `synth`).
    #[arg(long, global = true)]
    labels: Option<PathBuf>,
    /// Output directory (`monitor`, `replay`) or file (`tune`, `synth`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Extra `key=value` configuration override.
    #[arg(long = "set", global = true)]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Mode {
    /// Live board over the configured beds; type `ack <bed>` or `quit`.
    Monitor,
    /// Process capture files (one bed each, numbered from 1) and print the final board.
    Replay { files: Vec<PathBuf> },
    /// Grid-search thresholds on a labeled capture.
    Tune { capture: PathBuf },
    /// Write a labeled synthetic capture.
    Synth,
    /// Check the detector against its dense oracle and the alarm rules.
    Selftest,
    /// Serve a capture file over TCP, one record per line, at the configured pace.
    Transceiver {
        #[arg(long, default_value = "127.0.0.1:7878")]
        listen: String,
        capture: PathBuf,
    },
}

fn load_config(c: &Common) -> Result<RunConfig, RunError> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let bad = |m: String| RunError::Other(m);
    for kv in &c.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| bad(format!("--set expects key=value, got `{kv}`")))?;
        cfg.set(k.trim(), v.trim()).map_err(|e| bad(format!("--set {kv}: {e}")))?;
    }
    if let Some(s) = c.speedup {
        cfg.speedup = s;
    }
    if let Some(r) = c.refresh {
        if !(r > 0.0) {
            return Err(bad("--refresh must be > 0".into()));
        }
        cfg.refresh = Duration::from_secs_f64(r);
    }
    for b in &c.bed {
        let (n, src) = b.split_once('=').ok_or_else(|| bad(format!("--bed expects <n>=<source>, got `{b}`")))?;
        let n: u16 = n.trim().parse().map_err(|_| bad(format!("bad bed number in `{b}`")))?;
        cfg.set_bed(BedId(n), src).map_err(|e| bad(format!("--bed {b}: {e}")))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(c: &Common) -> PathBuf {
    c.out.clone().unwrap_or_else(|| PathBuf::from("koad-out"))
}

fn run(cli: Cli) -> Result<ExitCode, RunError> {
    let mut cfg = load_config(&cli.common)?;
    let stdout = &mut io::stdout();
    match cli.command {
        Mode::Monitor => {
            let (tx, rx) = mpsc::channel();
            std::thread::spawn(move || {
                for line in io::stdin().lock().lines() {
                    let Ok(line) = line else { break };
                    match Command::parse(&line) {
                        Ok(cmd) => {
                            let quit = cmd == Command::Quit;
                            if tx.send(cmd).is_err() || quit {
                                break;
                            }
                        }
                        Err(e) => eprintln!("{e}"),
                    }
                }
            });
            let options = BoardOptions { live: true, commands: Some(rx) };
            run::run_beds(&cfg, &out_dir(&cli.common), options, stdout)?;
        }
        Mode::Replay { files } => {
            for (i, f) in files.iter().enumerate() {
                let spec = format!("replay:{}", f.display());
                cfg.set_bed(BedId(i as u16 + 1), &spec).map_err(RunError::Other)?;
            }
            let options = BoardOptions { live: cli.common.refresh.is_some(), commands: None };
            run::run_beds(&cfg, &out_dir(&cli.common), options, stdout)?;
        }
        Mode::Tune { capture } => {
            let labels = cli.common.labels.as_deref().ok_or_else(|| RunError::Other("tune needs --labels".into()))?;
            let result = run::tune(&cfg, &capture, labels)?;
            print!("{}", render_table(&result));
            if let Some(out) = &cli.common.out {
                write_report_csv(std::fs::File::create(out)?, &result).map_err(|e| RunError::Other(e.to_string()))?;
            }
        }
        Mode::Synth => {
            let capture = cli.common.out.clone().unwrap_or_else(|| PathBuf::from("synthetic.csv"));
            let labels = cli.common.labels.clone().unwrap_or_else(|| PathBuf::from("labels.csv"));
            let s = run::synth(&cfg, &capture, &labels)?;
            println!(
                "wrote {} records x {} channels to {} and {} labels to {}",
                s.records.len(),
                s.columns.len(),
                capture.display(),
                s.labels.len(),
                labels.display()
            );
        }
        Mode::Selftest => {
            let mut ok = true;
            for r in selftest::run_all() {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
                ok &= r.passed;
            }
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
        Mode::Transceiver { listen, capture } => serve(&cfg, &listen, &capture)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn serve(cfg: &RunConfig, listen: &str, capture: &Path) -> Result<(), RunError> {
    let source = ReplaySource::open(capture, cfg.poll_interval, cfg.speedup)
        .and_then(|s| s.with_time_column(cfg.time_column.as_deref()))
        .map_err(|e| RunError::Other(e.to_string()))?;
    let listener = TcpListener::bind(listen)?;
    eprintln!("serving {} on {}", capture.display(), listener.local_addr()?);
    let sent = koad::ingest::source::serve_records(&listener, source).map_err(|e| RunError::Other(e.to_string()))?;
    eprintln!("sent {sent} records");
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("koad: {e}");
            ExitCode::from(2)
        }
    }
}

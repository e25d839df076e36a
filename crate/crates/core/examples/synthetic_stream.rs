// SPDX-License-Identifier: MIT OR Apache-2.0

//! Generates a labeled 14-channel vital-sign capture with injected spikes.
//!
//! Usage: `cargo run --example synthetic_stream [out-dir]`

use std::path::PathBuf;

use koad::ingest::capture::{write_capture, write_labels};
use koad::ingest::SyntheticSpec;

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "synthetic-out".into()));
    std::fs::create_dir_all(&dir).unwrap();

    let spec = SyntheticSpec::vital_signs(14, 600, 42).with_spikes(12, 5.0, 1, 60);
    let stream = spec.generate().unwrap();

    let capture = dir.join("capture.csv");
    let labels = dir.join("labels.csv");
    write_capture(&capture, &stream.columns, &stream.records).unwrap();
    write_labels(std::fs::File::create(&labels).unwrap(), &stream.labels).unwrap();

    println!("columns: {}", stream.columns.join(" "));
    for r in stream.records.iter().take(3) {
        println!("  {r}");
    }
    for l in &stream.labels {
        println!("anomaly at t={:<4} channels {:?}  {}", l.timestep, l.channels, l.note);
    }
    println!("wrote {} and {}", capture.display(), labels.display());
}

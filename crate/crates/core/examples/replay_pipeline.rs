// SPDX-License-Identifier: MIT OR Apache-2.0

//! Two beds replayed through the full pipeline: screening, standardizing,
//! detection, archives and the final board.
//!
//! Usage: `cargo run --example replay_pipeline [out-dir]`

use std::path::PathBuf;

use koad::config::RunConfig;
use koad::ingest::capture::write_capture;
use koad::ingest::SyntheticSpec;
use koad::run::{self, BoardOptions};
use koad::validity::BedId;

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "replay-out".into()));
    std::fs::create_dir_all(&dir).unwrap();

    for bed in 1..=2u16 {
        let s = SyntheticSpec::vital_signs(8, 400, u64::from(bed)).with_spikes(5, 6.0, 1, 80).generate().unwrap();
        let mut records = s.records.clone();
        if bed == 2 {
            // the monitor drops out for a minute and a half
            for r in &mut records[200..208] {
                *r = format!("PW123{}", ",-".repeat(8));
            }
        }
        write_capture(&dir.join(format!("bed{bed}.csv")), &s.columns, &records).unwrap();
    }

    let mut config = RunConfig::parse("sigma = 6\nspeedup = inf\n").unwrap();
    for bed in 1..=2u16 {
        let src = format!("replay:{}", dir.join(format!("bed{bed}.csv")).display());
        config.set_bed(BedId(bed), &src).unwrap();
    }
    let report = run::run_beds(&config, &dir, BoardOptions::default(), &mut std::io::stdout()).unwrap();
    println!("archives in {}; console warning {}", dir.display(), report.board.console_warning());
}

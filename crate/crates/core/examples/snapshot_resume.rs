// SPDX-License-Identifier: MIT OR Apache-2.0

//! Saving a detector mid-stream and resuming from the saved text.

use koad::engine::{Engine, MeasurementVector, ThresholdConfig};
use koad::ingest::SyntheticSpec;
use koad::pipeline::{prepare_stream, PipelineConfig};
use koad::snapshot::{read_snapshot, snapshot_string};
use koad::validity::ParameterSchema;

fn main() {
    let s = SyntheticSpec::vital_signs(6, 400, 3).with_spikes(4, 6.0, 1, 100).generate().unwrap();
    let cfg = PipelineConfig::new(ParameterSchema::new(s.columns.clone()).unwrap(), "PW123");
    let stream: Vec<MeasurementVector> = prepare_stream(&s.records, &cfg);
    let (head, tail) = stream.split_at(stream.len() / 2);

    let config = ThresholdConfig { sigma: 4.0, ..ThresholdConfig::default() };
    let mut original = Engine::new(config, 6).unwrap();
    for x in head {
        original.step(x).unwrap();
    }
    let text = snapshot_string(&original);
    println!("snapshot after {} steps: {} bytes, m = {}", original.steps(), text.len(), original.dictionary().len());
    for line in text.lines().take(6) {
        println!("  {line}");
    }

    let mut resumed = read_snapshot(text.as_bytes()).unwrap();
    let mut same = 0;
    for x in tail {
        let a = original.step(x).unwrap();
        let b = resumed.step(x).unwrap();
        same += usize::from(a == b);
    }
    println!("resumed engine matched the original on {same}/{} later steps", tail.len());
}

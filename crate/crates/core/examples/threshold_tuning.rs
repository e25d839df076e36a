// SPDX-License-Identifier: MIT OR Apache-2.0

//! Picks thresholds and bandwidth on a short labeled window, then checks
//! them on a longer stream.

use koad::config::RunConfig;
use koad::ingest::SyntheticSpec;
use koad::pipeline::prepare_stream;
use koad::tuner::{grid_search, render_table, run_detector, score_run};
use koad::validity::ParameterSchema;

fn main() {
    let config = RunConfig::default();
    let prepare = |spec: SyntheticSpec| {
        let s = spec.generate().unwrap();
        let schema = ParameterSchema::new(s.columns.clone()).unwrap();
        (prepare_stream(&s.records, &config.pipeline_config(schema)), s.labels)
    };

    let (train, train_labels) = prepare(SyntheticSpec::vital_signs(14, 300, 1).with_spikes(9, 4.0, 1, 60));
    let result = grid_search(&config.threshold_grid(), &train, &train_labels, &config.policy).unwrap();
    print!("{}", render_table(&result));

    let best = result.best_config();
    let (test, labels) = prepare(SyntheticSpec::vital_signs(14, 2000, 2).with_spikes(36, 4.0, 1, 60));
    let alarms = run_detector(best, &test).unwrap();
    let o = score_run(&alarms, &labels, &config.policy);
    println!(
        "\nheld-out 2000 steps with nu=({}, {}) sigma={}: detected {}/{}, missed {}, false alarms {}",
        best.nu1,
        best.nu2,
        best.sigma,
        o.detected,
        labels.len(),
        o.missed,
        o.false_alarms
    );
}

// SPDX-License-Identifier: MIT OR Apache-2.0

//! Walks the detector through each verdict on a hand-made 2-d stream.
//!
//! With one element at the origin and sigma = 1, a point at radius r has
//! delta = 1 - exp(-r^2), so r = 0.1 is Green, r = 0.33 lands between the
//! thresholds and r = 3 is far past the upper one.

use koad::engine::{Engine, MeasurementVector, ThresholdConfig};

fn main() {
    let config = ThresholdConfig { ell: 4, epsilon_frac: 0.5, ..ThresholdConfig::default() };
    println!(
        "nu1 = {}, nu2 = {}, ell = {}, need {} explained arrivals",
        config.nu1,
        config.nu2,
        config.ell,
        config.required_explained()
    );
    let mut engine = Engine::new(config, 2).unwrap();

    let stream: &[(&str, [f64; 2])] = &[
        ("seed", [0.0, 0.0]),
        ("nearby", [0.1, 0.0]),
        ("far jump", [3.0, 3.0]),
        ("new regime", [0.0, 0.33]),
        ("stays", [0.0, 0.34]),
        ("stays", [0.02, 0.33]),
        ("stays", [0.0, 0.32]),
        ("stays", [0.01, 0.33]),
        ("blip", [-0.33, 0.0]),
        ("back", [0.1, 0.33]),
        ("back", [0.1, 0.33]),
        ("back", [0.1, 0.34]),
        ("back", [0.1, 0.33]),
    ];
    for (t, (what, x)) in stream.iter().enumerate() {
        let out = engine.step(&MeasurementVector::new(t as u64, x.to_vec())).unwrap();
        let v = &out.immediate;
        print!("t={t:>2} {what:<10} delta {:.4} -> {:<6}", v.delta, v.kind.as_str());
        for r in &out.resolutions {
            print!("  resolves t={} as {}", r.resolves_timestep.unwrap(), r.kind.as_str());
        }
        println!("  (m = {})", engine.dictionary().len());
    }
}

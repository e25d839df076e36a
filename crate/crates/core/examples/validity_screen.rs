// SPDX-License-Identifier: MIT OR Apache-2.0

//! Screening raw monitor records and raising a data warning after a run of
//! bad frames.

use koad::validity::{parse_frame, validate, BedId, FlagStreak, ParameterSchema};

fn main() {
    let schema = ParameterSchema::new(["HR", "SpO2", "NBP_SYS", "NBP_DIA"]).unwrap();
    let mut streak = FlagStreak::new(3);
    let records = [
        "PW123,72,98,121,79",
        "PW124,72,98,121,79",
        "PW123,72,null,121,79",
        "PW123,-,-,-,-",
        "PW123,72,0,121,79",
        "PW123,72,98,12000,79",
        "PW123,72,98,121",
        "PW123,73,97,120,80",
    ];
    for (i, line) in records.iter().enumerate() {
        let frame = parse_frame(line, BedId(1), 12_000 * i as u64);
        let result = validate(&frame, "PW123", &schema);
        let verdict = if result.is_valid() { "valid".to_string() } else { result.flag_string() };
        let warning = streak.track(&result).map(|w| w.as_str()).unwrap_or("");
        println!("{line:<24} {verdict:<20} {warning}");
    }
}

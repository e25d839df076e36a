// SPDX-License-Identifier: MIT OR Apache-2.0

pub mod archive;
pub mod board;
pub mod config;
pub mod dictionary;
pub mod engine;
pub mod ingest;
pub mod kernel;
pub mod linalg;
pub mod pipeline;
pub mod run;
pub mod selftest;
pub mod snapshot;
pub mod tuner;
pub mod validity;

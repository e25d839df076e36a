// SPDX-License-Identifier: MIT OR Apache-2.0

//! Getting records in: capture files, live sources, synthetic streams and
//! standardization.

pub mod capture;
pub mod source;
pub mod standardize;
pub mod synthetic;

pub use capture::LabeledEvent;
pub use source::{FrameSource, Next, SourceConfig, SourceError, SourceKind};
pub use standardize::Standardizer;
pub use synthetic::{AnomalySpec, ChannelBaseline, SyntheticSpec, SyntheticStream};

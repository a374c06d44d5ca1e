//! On-disk formats. Every JSON document and JSON-lines header carries
//! `format_version: 1`; floats are written in shortest round-trip form so
//! write → read → write is byte-stable.

pub mod calibration;
pub mod config;
pub mod fitlog;
pub mod image;
pub mod landmarks;
pub mod metrics;
pub mod model;
pub mod motion;
pub mod observations;

//! File formats, hashing, parallel drivers and the `densemocap` command
//! line around [`densemocap_core`].

pub mod error;
pub mod formats;
pub mod hash;
pub mod io;
pub mod pipeline;
pub mod scene;

pub use error::{Error, Result};

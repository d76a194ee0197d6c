//! Viewport-aware adaptive streaming of tiled 360° video.
//!
//! An equirectangular frame is split into two pole tiles and a row of
//! equator tiles. For every segment the client estimates its bandwidth,
//! gives a fixed share of it to the tiles the viewport touches (weighted by
//! how many viewport pixels each one holds) and spreads the rest over the
//! remaining tiles in inverse proportion to their distance from the view
//! axis. Each tile then fetches the representation whose bitrate is closest
//! to its share.
//!
//! The crate also contains a deterministic trace-driven simulator that runs
//! this policy against a single-tile reference streamer and scores viewport
//! quality with a logarithmic rate-quality model.

pub mod allocation;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod manifest;
pub mod quality;
pub mod simulator;

pub use error::{Error, Result};

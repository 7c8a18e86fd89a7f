//! IO, file formats, and command drivers for the metric-regularity
//! verification lab. The algorithmic core lives in `reglab-core`.

pub mod report;
pub mod runner;
pub mod schema;

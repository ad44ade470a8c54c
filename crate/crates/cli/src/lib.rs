//! File formats, structured reports, and the command-line driver for the
//! stable-matching swap solvers in `smpswap-core`.

pub mod cli;
pub mod format;
pub mod report;

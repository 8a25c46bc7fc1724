//! File formats, Monte Carlo error exponents and the command-line front end
//! for the `graftci` library.

pub mod app;
pub mod format;
pub mod numfmt;
pub mod simulate;

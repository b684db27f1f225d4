//! Command-line front end for the `varlp` library: array input, exponent
//! generators, scenario runs and the runtime verification suites.

pub mod config;
pub mod generate;
pub mod io;
pub mod scenario;
pub mod verify;

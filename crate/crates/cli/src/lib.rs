//! Command-line and HTTP front ends for `hueshift-core`.

pub mod ops;
pub mod server;

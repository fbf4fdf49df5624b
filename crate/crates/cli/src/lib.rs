//! Configuration, scenario drivers and output for the `cwlab` binary.

// `!(x > 0)` is how NaN gets rejected alongside nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod scenario;

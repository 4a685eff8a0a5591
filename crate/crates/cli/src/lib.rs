//! Experiment runner behind the `speclab` binary: sweeps over sets, one
//! record per check, JSON or CSV out.

pub mod alpha;
pub mod args;
pub mod report;
pub mod run;

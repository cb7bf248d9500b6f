//! Command-line front end for weighted residual dynamics: JSON specs, trace and
//! report writers, random ensembles and the sweep harness.

pub mod commands;
pub mod ensemble;
pub mod report;
pub mod spec;
pub mod sweep;

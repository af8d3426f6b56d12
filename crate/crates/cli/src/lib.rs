//! File formats, configuration and pipeline orchestration around
//! `copnet-core`. The binary (`copnet`) is a thin wrapper over this
//! library so the pipeline can be driven from tests as well.

pub mod config;
pub mod formats;
pub mod pipeline;

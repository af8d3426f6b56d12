//! Core algorithms for analysing the structure and stability of online
//! communities from their interaction logs.
//!
//! The crate covers the whole analytical chain:
//!
//! * [`netmodel`] — one-mode / two-mode network types, partitions, and a
//!   Pajek text codec (`.net` / `.clu`);
//! * [`ingest`] — activity logs, two-mode network construction, temporal
//!   splitting and per-period activity statistics;
//! * [`transform`] — two-mode projection to directed actor networks,
//!   reaction binarization, reduction to active actors, log normalization;
//! * [`blockmodel`] — indirect structural-equivalence blockmodeling
//!   (corrected Euclidean dissimilarity, Ward clustering, image matrices,
//!   position labels, global-structure classification);
//! * [`stability`] — partition-agreement scores over non-equal unit sets;
//! * [`trajectory`] — per-actor position sequences, trajectory types and
//!   perspectives, flow tables;
//! * [`synth`] — planted core-periphery generators used as test oracles.
//!
//! The crate is `no_std` (with `alloc`); everything that touches the file
//! system or a terminal lives in the companion CLI crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod blockmodel;
pub mod error;
pub mod ingest;
pub mod netmodel;
pub mod stability;
pub mod synth;
pub mod trajectory;
pub mod transform;

pub use error::{Error, Result};
pub use netmodel::{OneModeNetwork, Partition, TwoModeNetwork};

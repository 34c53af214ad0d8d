//! Passive-acoustic source ranging and waveguide-invariant estimation from
//! spectrogram striations.
//!
//! The pipeline maps a complex spectrogram to range, projects samples along
//! hypothesised striations, whitens them per frequency and scores the
//! hypothesis with a Rayleigh joint likelihood. A Rician estimator on tonal
//! lines is included for comparison, along with a scene simulator and the
//! file formats used by the command-line tool.

// `!(x > 0.0)` style guards are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod band;
pub mod config;
pub mod error;
pub mod estimate;
pub mod ingest;
pub mod likelihood;
pub mod simulate;
pub mod surface;
pub mod tonal;
pub mod transform;
pub mod whiten;

pub use band::{partition_bands, partition_bands_within, BandPartition};
pub use error::{Error, Result};
pub use estimate::{estimate_range, estimate_wi, run_track};
pub use surface::{
    linear_grid, ComplexSurface, EstimateDiagnostics, EstimateResult, ParameterHypothesis,
    RangeRate, SearchGrid,
};
pub use tonal::{estimate_range_tonal, estimate_wi_tonal};

/// Crate version, written into every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

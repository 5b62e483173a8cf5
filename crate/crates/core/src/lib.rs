//! Semi-numerical modeling chain for 1-bit, column-coded reflective
//! intelligent surfaces: unit-cell data ingestion, surface-impedance
//! analysis, coding-pattern synthesis, FFT far-field evaluation and
//! cascaded link budgets.
//!
//! Numerical modules are generic over [`Real`] (f32 or f64). The aliases
//! below fix the scalar to f64, which is what the file formats, fixtures and
//! pipeline use.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod farfield;
pub mod fixtures;
pub mod impedance;
pub mod linkbudget;
pub mod model;
pub mod pipeline;
pub mod reports;
pub mod scalar;
pub mod sparam;
pub mod synthesis;

pub use error::{Error, Result};
pub use scalar::Real;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const BUILD_HASH: &str = env!("RISIM_BUILD_HASH");

pub type Grid = model::FrequencyGrid<f64>;
pub type Response = model::UnitCellResponse<f64>;
pub type Layout = model::ApertureLayout<f64>;
pub type Steering = model::SteeringSpec<f64>;
pub type SourceSpec = model::Source<f64>;
pub type Extraction = impedance::ImpedanceExtraction<f64>;
pub type Resonances = impedance::ResonanceList<f64>;
pub type Contrast = impedance::PhaseContrast<f64>;
pub type Profile = synthesis::PhaseProfile<f64>;
pub type Pattern = synthesis::CodingPattern<f64>;
pub type Illumination = synthesis::IlluminationPhase<f64>;
pub type Cells<'a> = synthesis::CellModel<'a, f64>;
pub type Aperture = synthesis::ApertureField<f64>;
pub type FarField = farfield::FarFieldPattern<f64>;
pub type Lobes = farfield::LobeReport<f64>;
pub type Scenario = linkbudget::LinkScenario<f64>;
pub type Sweep = linkbudget::LinkBudgetSweep<f64>;
pub type Scan = linkbudget::AngularScan<f64>;

//! Unit-cell data ingestion (Touchstone, CSV) and report emission.

pub mod report;
mod svg;
pub mod table;
pub mod touchstone;

pub use report::{emit_report, EmittedFiles, PlotSpec, Reportable, Series};
pub use table::{load_response_table, save_response_table};
pub use touchstone::{
    parse_touchstone, DataFormat, DataRow, FrequencyUnit, OptionLine, TouchstoneDocument,
};

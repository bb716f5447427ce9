//! Station-data pipeline and the simulation-study harness.

mod cells;
mod grid;
mod ingest;
mod matrix;
mod seasonal;
mod study;
mod synthetic;

pub use cells::{
    cell_area_data, cell_area_model, read_strata_csv, CellAreaReport, CellAreaRow, DataCellOptions, ModelCellReport,
    ModelCellRow, Strata,
};
pub use grid::{grid_map, haversine_km, write_grid_csv, GridPoint, GridSpec, StationValue, EARTH_RADIUS_KM};
pub use ingest::{
    ingest_csv, ingest_reader, read_stations_csv, write_records_csv, write_stations_csv, ColumnNames, IngestOptions,
    Ingested, StationRecord, StationSummary,
};
pub use matrix::{pairwise_matrix, read_matrix_csv, write_matrix_csv, ConcurrenceMatrix, PairMethod};
pub use seasonal::{read_extremes_csv, seasonal_blocks, write_extremes_csv, Polarity, Season, SeasonalExtremes, Variable};
pub use study::{
    brown_resnick_study_model, extremal_t_study_model, find_lag, format_table1, study_harness, write_study_csv,
    StudyConfig, StudyRow, StudyTable,
};
pub use synthetic::synthetic_station_records;

use crate::error::Result;
use serde::Serialize;

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    schema_version: u32,
    kind: &'a str,
    #[serde(flatten)]
    payload: &'a T,
}

/// Pretty JSON of `payload` (a struct) with `schema_version` and `kind`
/// fields added at the top level.
pub fn json_report<T: Serialize>(kind: &str, payload: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(&Report {
        schema_version: crate::SCHEMA_VERSION,
        kind,
        payload,
    })?)
}

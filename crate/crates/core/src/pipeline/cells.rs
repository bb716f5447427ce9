use super::grid::{grid_map, GridSpec, StationValue};
use super::matrix::{pairwise_matrix, PairMethod};
use super::seasonal::SeasonalExtremes;
use crate::concurrence::{cell_measure, ecp_mc, integrated_cp, pairwise_p};
use crate::error::{domain, Error, Result};
use crate::models::{ModelSpec, SiteSet};
use crate::simulate::simulate_cell_labels;
use crate::specfun::stats::mean_se;
use crate::specfun::SeededRng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Year → stratum label (e.g. an ENSO phase or a period).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Strata(pub BTreeMap<i32, String>);

impl Strata {
    pub fn labels(&self) -> Vec<String> {
        let mut l: Vec<String> = self.0.values().cloned().collect();
        l.sort();
        l.dedup();
        l
    }
}

/// Reads `year,label` rows.
pub fn read_strata_csv(path: &Path) -> Result<Strata> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut out = BTreeMap::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let year: i32 = row.get(0).unwrap_or("").parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: format!("bad year '{}'", row.get(0).unwrap_or("")),
        })?;
        out.insert(year, row.get(1).unwrap_or("").to_string());
    }
    Ok(Strata(out))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellAreaRow {
    pub stratum: String,
    pub anchor: String,
    /// Σ_g w_g p(s0, s_g) in km².
    pub area_km2: f64,
    /// Area as a share of the grid.
    pub fraction: f64,
    /// Area minus the base stratum's area for the same anchor.
    pub anomaly: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellAreaReport {
    pub base: Option<String>,
    pub rows: Vec<CellAreaRow>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataCellOptions {
    pub method: PairMethod,
    pub min_common: usize,
    pub idw_power: f64,
    pub base: Option<String>,
    /// Defaults to every station with coordinates.
    pub anchors: Option<Vec<String>>,
}

impl Default for DataCellOptions {
    fn default() -> Self {
        Self {
            method: PairMethod::Kendall,
            min_common: 3,
            idw_power: 2.0,
            base: None,
            anchors: None,
        }
    }
}

/// Expected cell areas from data: per stratum, pairwise estimates from the
/// stratum's years are mapped onto the grid by logit IDW and integrated
/// with cos(lat) cell areas.
pub fn cell_area_data(
    extremes: &[SeasonalExtremes],
    coords: &[(String, f64, f64)],
    grid: &GridSpec,
    strata: Option<&Strata>,
    opts: &DataCellOptions,
) -> Result<CellAreaReport> {
    grid.validate()?;
    let points = grid.points();
    let areas = grid.cell_areas();
    let total: f64 = areas.iter().sum();
    let coord_of: BTreeMap<&str, (f64, f64)> = coords.iter().map(|(id, a, b)| (id.as_str(), (*a, *b))).collect();

    let groups: Vec<(String, Vec<SeasonalExtremes>)> = match strata {
        None => vec![("all".to_string(), extremes.to_vec())],
        Some(s) => s
            .labels()
            .into_iter()
            .map(|label| {
                let rows = extremes
                    .iter()
                    .filter(|e| s.0.get(&e.year) == Some(&label))
                    .cloned()
                    .collect();
                (label, rows)
            })
            .collect(),
    };
    if let Some(b) = &opts.base {
        if !groups.iter().any(|(l, _)| l == b) {
            return domain(format!("unknown stratum label '{b}'"));
        }
    }

    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (label, ext) in &groups {
        let matrix = pairwise_matrix(ext, opts.method, None, opts.min_common)?;
        let anchors: Vec<String> = match &opts.anchors {
            Some(a) => a.clone(),
            None => matrix.ids.iter().filter(|id| coord_of.contains_key(id.as_str())).cloned().collect(),
        };
        for anchor in anchors {
            let Some(row) = matrix.row(&anchor) else {
                warnings.push(format!("{label}: anchor {anchor} has no data"));
                continue;
            };
            let stations: Vec<StationValue> = row
                .into_iter()
                .filter_map(|(id, value)| {
                    coord_of.get(id.as_str()).map(|&(lat, lon)| StationValue {
                        station_id: id,
                        lat,
                        lon,
                        value,
                    })
                })
                .collect();
            if stations.len() < 3 {
                warnings.push(format!("{label}: anchor {anchor} has fewer than 3 located estimates"));
                continue;
            }
            let map = grid_map(&stations, &points, opts.idw_power)?;
            let p: Vec<f64> = map.iter().map(|g| g.value).collect();
            let area = integrated_cp(&p, &areas)?;
            rows.push(CellAreaRow {
                stratum: label.clone(),
                anchor,
                area_km2: area,
                fraction: area / total,
                anomaly: None,
            });
        }
    }
    if let Some(b) = &opts.base {
        let base: BTreeMap<String, f64> = rows
            .iter()
            .filter(|r| &r.stratum == b)
            .map(|r| (r.anchor.clone(), r.area_km2))
            .collect();
        for r in &mut rows {
            r.anomaly = base.get(&r.anchor).map(|v| r.area_km2 - v);
        }
    }
    Ok(CellAreaReport {
        base: opts.base.clone(),
        rows,
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelCellRow {
    pub anchor: usize,
    /// Mean simulated cell measure and its standard error.
    pub simulated: f64,
    pub simulated_se: f64,
    pub integrated_cp: f64,
    /// Monte-Carlo error of `integrated_cp` (0 for deterministic p).
    pub integrated_cp_se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelCellReport {
    pub model: ModelSpec,
    pub reps: usize,
    pub truncated: usize,
    pub rows: Vec<ModelCellRow>,
}

/// Expected cell measure under a model, two ways: the mean simulated
/// cell measure and integrated_cp of the pairwise probabilities
/// (deterministic, or by ecp_mc with `mc_draws` antithetic draws).
pub fn cell_area_model(
    model: &ModelSpec,
    grid: &SiteSet,
    weights: &[f64],
    anchors: &[usize],
    reps: usize,
    mc_draws: Option<u64>,
    rng: &mut SeededRng,
) -> Result<ModelCellReport> {
    if weights.len() != grid.len() {
        return domain("one weight per grid site is required");
    }
    if let Some(&a) = anchors.iter().find(|&&a| a >= grid.len()) {
        return domain(format!("anchor {a} outside the grid"));
    }
    if reps < 2 {
        return domain("need at least two replicates");
    }
    let cells = simulate_cell_labels(model, grid, reps, rng)?;
    let mut rows = Vec::with_capacity(anchors.len());
    for &a in anchors {
        let measures: Vec<f64> = cells.labels.iter().map(|l| cell_measure(l, a, weights)).collect();
        let (simulated, simulated_se) = mean_se(&measures);
        let mut p = vec![1.0; grid.len()];
        let mut var = 0.0;
        for g in 0..grid.len() {
            if g == a {
                continue;
            }
            let pair = grid.subset(&[a, g])?;
            p[g] = match mc_draws {
                Some(n) => {
                    let est = ecp_mc(model, &pair, n, true, rng)?;
                    var += (weights[g] * est.stderr).powi(2);
                    est.value
                }
                None => pairwise_p(model, &pair)?,
            };
        }
        rows.push(ModelCellRow {
            anchor: a,
            simulated,
            simulated_se,
            integrated_cp: integrated_cp(&p, weights)?,
            integrated_cp_se: var.sqrt(),
        });
    }
    Ok(ModelCellReport {
        model: model.clone(),
        reps,
        truncated: cells.truncated,
        rows,
    })
}

use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};

pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Great-circle distance in kilometres.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().min(1.0).asin()
}

/// Regular lat/lon grid with cell centres lat_min, lat_min + step, … .
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.step > 0.0
            && self.lat_min <= self.lat_max
            && self.lon_min <= self.lon_max
            && self.lat_min >= -90.0
            && self.lat_max <= 90.0
            && self.lon_min >= -180.0
            && self.lon_max <= 180.0;
        if !ok {
            return domain(format!("invalid grid {self:?}"));
        }
        Ok(())
    }

    fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| lo + i as f64 * step).collect()
    }

    /// Cell centres, latitude-major.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let lons = Self::axis(self.lon_min, self.lon_max, self.step);
        Self::axis(self.lat_min, self.lat_max, self.step)
            .into_iter()
            .flat_map(|lat| lons.iter().map(move |&lon| (lat, lon)))
            .collect()
    }

    /// Cell areas in km², R²·Δλ·Δφ·cos(lat).
    pub fn cell_areas(&self) -> Vec<f64> {
        let d = self.step.to_radians();
        self.points()
            .iter()
            .map(|(lat, _)| EARTH_RADIUS_KM * EARTH_RADIUS_KM * d * d * lat.to_radians().cos())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationValue {
    pub station_id: String,
    pub lat: f64,
    pub lon: f64,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub lat: f64,
    pub lon: f64,
    pub value: f64,
}

/// Probabilities are clamped to [ε, 1 − ε] before the logit.
const LOGIT_EPS: f64 = 1e-9;

fn logit(p: f64) -> f64 {
    let p = p.clamp(LOGIT_EPS, 1.0 - LOGIT_EPS);
    (p / (1.0 - p)).ln()
}

fn expit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Inverse-distance-weighted interpolation in logit space with weights
/// d^{−power} (haversine d). A grid point within 1 m of a station takes
/// that station's value.
pub fn grid_map(stations: &[StationValue], grid: &[(f64, f64)], power: f64) -> Result<Vec<GridPoint>> {
    if grid.is_empty() {
        return domain("empty grid");
    }
    if stations.len() < 3 {
        return domain(format!("need at least 3 stations, got {}", stations.len()));
    }
    if !(power > 0.0) {
        return domain("IDW power must be positive");
    }
    let logits: Vec<f64> = stations.iter().map(|s| logit(s.value)).collect();
    Ok(grid
        .iter()
        .map(|&(lat, lon)| {
            let mut num = 0.0;
            let mut den = 0.0;
            for (s, l) in stations.iter().zip(&logits) {
                let d = haversine_km(lat, lon, s.lat, s.lon);
                if d < 1e-3 {
                    return GridPoint { lat, lon, value: s.value };
                }
                let w = d.powf(-power);
                num += w * l;
                den += w;
            }
            GridPoint {
                lat,
                lon,
                value: expit(num / den),
            }
        })
        .collect())
}

pub fn write_grid_csv<W: std::io::Write>(out: W, points: &[GridPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lat", "lon", "value"])?;
    for p in points {
        w.write_record([p.lat.to_string(), p.lon.to_string(), p.value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

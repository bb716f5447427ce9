use crate::error::{Error, Result};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::io::Read;
use std::path::Path;

/// One station-day.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationRecord {
    pub station_id: String,
    pub lat: f64,
    pub lon: f64,
    pub date: NaiveDate,
    pub tmin: Option<f64>,
    pub tmax: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnNames {
    pub station_id: String,
    pub lat: String,
    pub lon: String,
    pub date: String,
    pub tmin: String,
    pub tmax: String,
}

impl Default for ColumnNames {
    fn default() -> Self {
        Self {
            station_id: "station_id".into(),
            lat: "lat".into(),
            lon: "lon".into(),
            date: "date".into(),
            tmin: "tmin".into(),
            tmax: "tmax".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestOptions {
    pub columns: ColumnNames,
    /// Cell contents (after trimming) read as missing. Numeric markers also
    /// match other spellings of the same number, e.g. `-9999.0`.
    pub missing: Vec<String>,
    pub date_format: String,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            columns: ColumnNames::default(),
            missing: vec![String::new(), "-9999".into()],
            date_format: "%Y-%m-%d".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationSummary {
    pub station_id: String,
    pub lat: f64,
    pub lon: f64,
    pub n_days: usize,
    /// Share of missing tmin/tmax values.
    pub missing_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ingested {
    pub records: Vec<StationRecord>,
    pub stations: Vec<StationSummary>,
    pub warnings: Vec<String>,
}

pub fn ingest_csv(path: &Path, opts: &IngestOptions) -> Result<Ingested> {
    let file = std::fs::File::open(path)?;
    ingest_reader(file, path, opts)
}

/// As [`ingest_csv`], reading from any source; `path` only labels errors.
pub fn ingest_reader<R: Read>(source: R, path: &Path, opts: &IngestOptions) -> Result<Ingested> {
    let err = |line: u64, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| err(1, format!("missing column '{name}'")))
    };
    let c = &opts.columns;
    let (i_id, i_lat, i_lon, i_date) = (col(&c.station_id)?, col(&c.lat)?, col(&c.lon)?, col(&c.date)?);
    let (i_tmin, i_tmax) = (col(&c.tmin)?, col(&c.tmax)?);
    let numeric_markers: Vec<f64> = opts.missing.iter().filter_map(|m| parse_number(m)).collect();
    let is_missing = |s: &str| {
        opts.missing.iter().any(|m| m == s) || parse_number(s).is_some_and(|v| numeric_markers.contains(&v))
    };

    let mut records = Vec::new();
    let mut seen: HashSet<(String, NaiveDate)> = HashSet::new();
    let mut coords: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    let mut tally: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let get = |i: usize| row.get(i).unwrap_or("");
        let station_id = get(i_id).to_string();
        if station_id.is_empty() {
            return Err(err(line, "empty station id".into()));
        }
        let coord = |i: usize, name: &str, bound: f64| -> Result<f64> {
            match parse_number(get(i)) {
                Some(v) if v.abs() <= bound => Ok(v),
                _ => Err(err(line, format!("{name} '{}' is not a number in [-{bound}, {bound}]", get(i)))),
            }
        };
        let lat = coord(i_lat, "lat", 90.0)?;
        let lon = coord(i_lon, "lon", 180.0)?;
        let date = NaiveDate::parse_from_str(get(i_date), &opts.date_format)
            .map_err(|e| err(line, format!("bad date '{}': {e}", get(i_date))))?;
        let temp = |i: usize, name: &str| -> Result<Option<f64>> {
            let s = get(i);
            if is_missing(s) {
                return Ok(None);
            }
            parse_number(s)
                .map(Some)
                .ok_or_else(|| err(line, format!("{name} '{s}' is not a number")))
        };
        let tmin = temp(i_tmin, "tmin")?;
        let tmax = temp(i_tmax, "tmax")?;
        if !seen.insert((station_id.clone(), date)) {
            return Err(err(line, format!("duplicate date {date} for station {station_id}")));
        }
        match coords.get(&station_id) {
            Some(&(a, b)) if (a, b) != (lat, lon) => {
                return Err(err(line, format!("station {station_id} changes coordinates")));
            }
            Some(_) => {}
            None => {
                coords.insert(station_id.clone(), (lat, lon));
            }
        }
        let t = tally.entry(station_id.clone()).or_default();
        t.0 += 1;
        t.1 += usize::from(tmin.is_none()) + usize::from(tmax.is_none());
        records.push(StationRecord {
            station_id,
            lat,
            lon,
            date,
            tmin,
            tmax,
        });
    }
    let mut warnings = Vec::new();
    let stations = tally
        .into_iter()
        .map(|(id, (days, missing))| {
            let frac = missing as f64 / (2 * days) as f64;
            if frac > 0.5 {
                warnings.push(format!("station {id}: {:.1}% of values missing", 100.0 * frac));
            }
            let (lat, lon) = coords[&id];
            StationSummary {
                station_id: id,
                lat,
                lon,
                n_days: days,
                missing_fraction: frac,
            }
        })
        .collect();
    Ok(Ingested {
        records,
        stations,
        warnings,
    })
}

/// Parses a decimal number, accepting the Unicode minus sign.
fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim().replace('\u{2212}', "-");
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Station coordinates as `station_id,lat,lon`.
pub fn write_stations_csv<W: std::io::Write>(out: W, stations: &[StationSummary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["station_id", "lat", "lon", "n_days", "missing_fraction"])?;
    for s in stations {
        w.write_record([
            s.station_id.clone(),
            s.lat.to_string(),
            s.lon.to_string(),
            s.n_days.to_string(),
            s.missing_fraction.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `station_id,lat,lon` (further columns ignored).
pub fn read_stations_csv(path: &Path) -> Result<Vec<(String, f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let num = |i: usize| {
            row.get(i).and_then(parse_number).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line,
                msg: format!("column {} is not a number", i + 1),
            })
        };
        out.push((row.get(0).unwrap_or("").to_string(), num(1)?, num(2)?));
    }
    Ok(out)
}

/// Writes records in the default ingest layout.
pub fn write_records_csv<W: std::io::Write>(out: W, records: &[StationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["station_id", "lat", "lon", "date", "tmin", "tmax"])?;
    let fmt = |v: Option<f64>| v.map_or_else(|| "-9999".to_string(), |x| format!("{x:.3}"));
    for r in records {
        w.write_record([
            r.station_id.clone(),
            r.lat.to_string(),
            r.lon.to_string(),
            r.date.format("%Y-%m-%d").to_string(),
            fmt(r.tmin),
            fmt(r.tmax),
        ])?;
    }
    w.flush()?;
    Ok(())
}

use super::ingest::StationRecord;
use crate::error::{domain, Result};
use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Season {
    Djf,
    Mam,
    Jja,
    Son,
}

impl Season {
    pub fn of_month(month: u32) -> Self {
        match month {
            12 | 1 | 2 => Season::Djf,
            3..=5 => Season::Mam,
            6..=8 => Season::Jja,
            _ => Season::Son,
        }
    }

    /// Season-year of a date; December belongs to the following winter.
    pub fn year_of(date: NaiveDate) -> i32 {
        if date.month() == 12 {
            date.year() + 1
        } else {
            date.year()
        }
    }

    /// Calendar days in this season of season-year `year`.
    pub fn days(self, year: i32) -> i64 {
        let (start, end) = match self {
            Season::Djf => (ymd(year - 1, 12, 1), ymd(year, 3, 1)),
            Season::Mam => (ymd(year, 3, 1), ymd(year, 6, 1)),
            Season::Jja => (ymd(year, 6, 1), ymd(year, 9, 1)),
            Season::Son => (ymd(year, 9, 1), ymd(year, 12, 1)),
        };
        (end - start).num_days()
    }

    pub fn label(self) -> &'static str {
        match self {
            Season::Djf => "DJF",
            Season::Mam => "MAM",
            Season::Jja => "JJA",
            Season::Son => "SON",
        }
    }
}

fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid calendar date")
}

impl FromStr for Season {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "DJF" => Ok(Season::Djf),
            "MAM" => Ok(Season::Mam),
            "JJA" => Ok(Season::Jja),
            "SON" => Ok(Season::Son),
            _ => domain(format!("unknown season '{s}'")),
        }
    }
}

/// `NegatedMin` stores −min so that everything downstream takes maxima.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Max,
    NegatedMin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    Tmin,
    Tmax,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeasonalExtremes {
    pub station_id: String,
    pub season: Season,
    pub year: i32,
    pub value: f64,
    pub coverage: f64,
    pub polarity: Polarity,
}

/// Per station and season-year, the maximum (or negated minimum) of
/// `variable`, kept when the share of non-missing days reaches
/// `min_coverage`. Output is sorted by station, then year.
pub fn seasonal_blocks(
    records: &[StationRecord],
    season: Season,
    polarity: Polarity,
    variable: Variable,
    min_coverage: f64,
) -> Vec<SeasonalExtremes> {
    let mut groups: BTreeMap<(&str, i32), (usize, f64)> = BTreeMap::new();
    for r in records.iter().filter(|r| Season::of_month(r.date.month()) == season) {
        let v = match variable {
            Variable::Tmin => r.tmin,
            Variable::Tmax => r.tmax,
        };
        let entry = groups
            .entry((r.station_id.as_str(), Season::year_of(r.date)))
            .or_insert((0, f64::NEG_INFINITY));
        if let Some(v) = v {
            let v = match polarity {
                Polarity::Max => v,
                Polarity::NegatedMin => -v,
            };
            entry.0 += 1;
            entry.1 = entry.1.max(v);
        }
    }
    groups
        .into_iter()
        .filter_map(|((id, year), (count, value))| {
            let coverage = count as f64 / season.days(year) as f64;
            (count > 0 && coverage >= min_coverage).then(|| SeasonalExtremes {
                station_id: id.to_string(),
                season,
                year,
                value,
                coverage,
                polarity,
            })
        })
        .collect()
}

pub fn write_extremes_csv<W: std::io::Write>(out: W, rows: &[SeasonalExtremes]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_extremes_csv(path: &std::path::Path) -> Result<Vec<SeasonalExtremes>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

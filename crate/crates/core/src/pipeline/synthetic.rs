use super::ingest::StationRecord;
use super::seasonal::Season;
use crate::error::{domain, Result};
use crate::models::{ModelSpec, SiteSet};
use crate::simulate::{simulate_fields, SimControl};
use crate::specfun::SeededRng;
use chrono::{Datelike, NaiveDate};

/// Daily station records whose seasonal maxima of `tmax` and seasonal
/// maxima of `−tmin` follow `model` exactly.
///
/// Each day carries an independent field η_d at sites (lon, lat) in degrees;
/// tmax = 20 + 5·log(η_d/N) and tmin = 5 − 5·log(η'_d/N) with N the number
/// of days in the day's season, so that max_d η_d/N has the law of η.
/// Values go missing independently with probability `missing_rate`.
pub fn synthetic_station_records(
    model: &ModelSpec,
    stations: &[(String, f64, f64)],
    first_year: i32,
    last_year: i32,
    missing_rate: f64,
    rng: &mut SeededRng,
) -> Result<Vec<StationRecord>> {
    if first_year > last_year {
        return domain("first_year must not exceed last_year");
    }
    if !(0.0..1.0).contains(&missing_rate) {
        return domain("missing_rate must be in [0, 1)");
    }
    let sites = SiteSet::new(stations.iter().map(|(_, lat, lon)| vec![*lon, *lat]).collect())?;
    let start = NaiveDate::from_ymd_opt(first_year, 1, 1).expect("valid year");
    let end = NaiveDate::from_ymd_opt(last_year, 12, 31).expect("valid year");
    let days: Vec<NaiveDate> = start.iter_days().take_while(|d| *d <= end).collect();
    let ctrl = SimControl::default();
    let hot = simulate_fields(model, &sites, days.len(), &ctrl, rng)?;
    let cold = simulate_fields(model, &sites, days.len(), &ctrl, rng)?;
    let mut out = Vec::with_capacity(days.len() * stations.len());
    for (d, date) in days.iter().enumerate() {
        let season = Season::of_month(date.month());
        let n = season.days(Season::year_of(*date)) as f64;
        for (j, (id, lat, lon)) in stations.iter().enumerate() {
            let mut keep = || rng.uniform_open() >= missing_rate;
            let tmax = keep().then(|| 20.0 + 5.0 * (hot[d].values[j] / n).ln());
            let tmin = keep().then(|| 5.0 - 5.0 * (cold[d].values[j] / n).ln());
            out.push(StationRecord {
                station_id: id.clone(),
                lat: *lat,
                lon: *lon,
                date: *date,
                tmin,
                tmax,
            });
        }
    }
    Ok(out)
}

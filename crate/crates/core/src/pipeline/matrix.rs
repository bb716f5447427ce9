use super::seasonal::SeasonalExtremes;
use crate::error::{domain, Error, Result};
use crate::estimators::{
    ecp_kendall, multivariate_log_detail, sample_cp_block, sample_cp_bootstrap, sample_cp_unbiased, Sample,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Estimator used for each station pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum PairMethod {
    Kendall,
    Block { m: usize },
    Bootstrap { m: usize },
    /// Reports the raw (unclipped) value.
    Unbiased { m: usize },
    Mvlog { jackknife: bool },
}

impl PairMethod {
    pub fn label(&self) -> &'static str {
        match self {
            PairMethod::Kendall => "kendall",
            PairMethod::Block { .. } => "block",
            PairMethod::Bootstrap { .. } => "bootstrap",
            PairMethod::Unbiased { .. } => "unbiased",
            PairMethod::Mvlog { .. } => "mvlog",
        }
    }

    fn min_n(&self) -> usize {
        match self {
            PairMethod::Block { m } | PairMethod::Bootstrap { m } | PairMethod::Unbiased { m } => *m,
            _ => 0,
        }
    }

    /// Estimate and optional standard error for one bivariate sample.
    pub fn estimate(&self, sample: &Sample) -> Result<(f64, Option<f64>)> {
        Ok(match *self {
            PairMethod::Kendall => {
                let k = ecp_kendall(sample)?;
                (k.tau, k.stderr)
            }
            PairMethod::Block { m } => (sample_cp_block(sample, m)?, None),
            PairMethod::Bootstrap { m } => (sample_cp_bootstrap(sample, m)?, None),
            PairMethod::Unbiased { m } => (sample_cp_unbiased(sample, m)?.raw, None),
            PairMethod::Mvlog { jackknife } => {
                let d = multivariate_log_detail(sample, &[0, 1])?;
                (if jackknife { d.jackknife } else { d.estimate }, Some(d.stderr))
            }
        })
    }
}

/// Symmetric matrix of pairwise estimates; `None` marks pairs that were not
/// computed (insufficient overlap or outside the anchor row).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceMatrix {
    pub ids: Vec<String>,
    pub estimate: Vec<Vec<Option<f64>>>,
    pub stderr: Vec<Vec<Option<f64>>>,
    pub n_pairs: Vec<Vec<usize>>,
    pub method: String,
    /// Some pair's sample had tied values.
    pub ties_detected: bool,
}

impl ConcurrenceMatrix {
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|s| s == id)
    }

    /// Row of `id` as (station, estimate) for computed entries.
    pub fn row(&self, id: &str) -> Option<Vec<(String, f64)>> {
        let i = self.index_of(id)?;
        Some(
            self.ids
                .iter()
                .zip(&self.estimate[i])
                .filter_map(|(s, e)| e.map(|v| (s.clone(), v)))
                .collect(),
        )
    }
}

/// Series per station keyed by year.
pub(crate) fn series_by_station(extremes: &[SeasonalExtremes]) -> Result<BTreeMap<String, BTreeMap<i32, f64>>> {
    let mut out: BTreeMap<String, BTreeMap<i32, f64>> = BTreeMap::new();
    for e in extremes {
        if out.entry(e.station_id.clone()).or_default().insert(e.year, e.value).is_some() {
            return domain(format!(
                "station {} has two extremes for year {}; pass one season at a time",
                e.station_id, e.year
            ));
        }
    }
    Ok(out)
}

/// (estimate, stderr, n_pairs, ties_detected) for one station pair.
type PairResult = (f64, Option<f64>, usize, bool);

/// Pairwise estimates over common years (pairwise-complete deletion).
/// Pairs with fewer than `min_common` (at least 3) shared years, or fewer
/// than the method's block size, are left absent. With `anchor`, only the
/// anchor's row and column are computed.
pub fn pairwise_matrix(
    extremes: &[SeasonalExtremes],
    method: PairMethod,
    anchor: Option<&str>,
    min_common: usize,
) -> Result<ConcurrenceMatrix> {
    let series = series_by_station(extremes)?;
    let ids: Vec<String> = series.keys().cloned().collect();
    let k = ids.len();
    let anchor_idx = match anchor {
        Some(a) => Some(
            ids.iter()
                .position(|s| s == a)
                .ok_or_else(|| Error::Domain(format!("anchor station '{a}' has no extremes")))?,
        ),
        None => None,
    };
    let min_common = min_common.max(3).max(method.min_n());
    let cols: Vec<&BTreeMap<i32, f64>> = ids.iter().map(|id| &series[id]).collect();
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .filter(|&(i, j)| anchor_idx.is_none_or(|a| i == a || j == a))
        .collect();
    let results: Vec<Option<PairResult>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let rows: Vec<Vec<f64>> = cols[i]
                .iter()
                .filter_map(|(y, a)| cols[j].get(y).map(|b| vec![*a, *b]))
                .collect();
            let n = rows.len();
            if n < min_common {
                return Ok(None);
            }
            let sample = Sample::from_rows(rows)?;
            let (e, se) = method.estimate(&sample)?;
            Ok(Some((e, se, n, sample.ties_detected())))
        })
        .collect::<Result<_>>()?;
    let mut estimate = vec![vec![None; k]; k];
    let mut stderr = vec![vec![None; k]; k];
    let mut n_pairs = vec![vec![0; k]; k];
    let mut ties = false;
    for i in 0..k {
        estimate[i][i] = Some(1.0);
        stderr[i][i] = Some(0.0);
        n_pairs[i][i] = cols[i].len();
    }
    for (&(i, j), r) in pairs.iter().zip(results) {
        let Some((e, se, n, t)) = r else { continue };
        estimate[i][j] = Some(e);
        estimate[j][i] = Some(e);
        stderr[i][j] = se;
        stderr[j][i] = se;
        n_pairs[i][j] = n;
        n_pairs[j][i] = n;
        ties |= t;
    }
    Ok(ConcurrenceMatrix {
        ids,
        estimate,
        stderr,
        n_pairs,
        method: method.label().to_string(),
        ties_detected: ties,
    })
}

/// Long form `id1,id2,estimate,stderr,n_pairs` over i ≤ j; absent values
/// are empty cells and uncomputed anchor-mode pairs are skipped.
pub fn write_matrix_csv<W: std::io::Write>(out: W, m: &ConcurrenceMatrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id1", "id2", "estimate", "stderr", "n_pairs"])?;
    let fmt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    for i in 0..m.ids.len() {
        for j in i..m.ids.len() {
            if m.estimate[i][j].is_none() && m.n_pairs[i][j] == 0 {
                continue;
            }
            w.write_record([
                m.ids[i].clone(),
                m.ids[j].clone(),
                fmt(m.estimate[i][j]),
                fmt(m.stderr[i][j]),
                m.n_pairs[i][j].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv(path: &Path, method: &str) -> Result<ConcurrenceMatrix> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut entries = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |msg: &str| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: msg.to_string(),
        };
        let opt = |i: usize| -> Result<Option<f64>> {
            match row.get(i).unwrap_or("") {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| bad("bad number")),
            }
        };
        let n: usize = row.get(4).unwrap_or("").parse().map_err(|_| bad("bad n_pairs"))?;
        entries.push((row.get(0).unwrap_or("").to_string(), row.get(1).unwrap_or("").to_string(), opt(2)?, opt(3)?, n));
    }
    let mut ids: Vec<String> = entries.iter().flat_map(|e| [e.0.clone(), e.1.clone()]).collect();
    ids.sort();
    ids.dedup();
    let k = ids.len();
    let pos = |s: &str| ids.binary_search_by(|x| x.as_str().cmp(s)).unwrap_or(0);
    let mut estimate = vec![vec![None; k]; k];
    let mut stderr = vec![vec![None; k]; k];
    let mut n_pairs = vec![vec![0; k]; k];
    for i in 0..k {
        estimate[i][i] = Some(1.0);
        stderr[i][i] = Some(0.0);
    }
    for (a, b, e, s, n) in entries {
        let (i, j) = (pos(&a), pos(&b));
        for (x, y) in [(i, j), (j, i)] {
            estimate[x][y] = e;
            stderr[x][y] = s;
            n_pairs[x][y] = n;
        }
    }
    Ok(ConcurrenceMatrix {
        ids,
        estimate,
        stderr,
        n_pairs,
        method: method.to_string(),
        ties_detected: false,
    })
}

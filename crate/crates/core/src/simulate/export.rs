use super::FieldRealization;
use crate::error::{domain, Result};
use std::io::Write;

/// Writes one row per realization: `site_names` as value columns, then
/// `hit_<name>` columns when `with_hits` is set.
pub fn write_realizations_csv<W: Write>(
    out: W,
    site_names: &[String],
    fields: &[FieldRealization],
    with_hits: bool,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = site_names.to_vec();
    if with_hits {
        header.extend(site_names.iter().map(|s| format!("hit_{s}")));
    }
    header.push("truncated".into());
    w.write_record(&header)?;
    for f in fields {
        if f.values.len() != site_names.len() {
            return domain(format!("realization has {} sites, expected {}", f.values.len(), site_names.len()));
        }
        let mut row: Vec<String> = f.values.iter().map(|v| format!("{v:e}")).collect();
        if with_hits {
            match &f.hit_index {
                Some(h) => row.extend(h.iter().map(|v| v.to_string())),
                None => row.extend(std::iter::repeat_n(String::new(), site_names.len())),
            }
        }
        row.push(u8::from(f.truncation_flag).to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

//! `concur`: concurrence probabilities of spatial extremes from the command line.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use concur_core::concurrence::{
    ecp_closed_form, ecp_mc, pairwise_p, ConcurrenceEstimate, Method};
use concur_core::estimators::{
    ecp_kendall, multivariate_log_detail, optimal_block_size, sample_cp_block, sample_cp_bootstrap,
    sample_cp_unbiased, Sample,
};
use concur_core::models::{ModelSpec, SiteSet};
use concur_core::pipeline::{
    cell_area_data, cell_area_model, format_table1, grid_map, ingest_csv, json_report, pairwise_matrix,
    read_extremes_csv, read_matrix_csv, read_stations_csv, read_strata_csv, seasonal_blocks, study_harness,
    write_extremes_csv, write_grid_csv, write_matrix_csv, write_stations_csv, write_study_csv, DataCellOptions,
    GridSpec, IngestOptions, PairMethod, Polarity, Season, StationValue, StudyConfig, Variable,
};
use concur_core::simulate::{write_realizations_csv, DoaSampler, FieldRealization, MaxStableSimulator, SimControl};
use concur_core::specfun::SeededRng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "concur", version, about = "Extremal concurrence probabilities of max-stable processes")]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstMethod {
    Block,
    Bootstrap,
    Unbiased,
    Kendall,
    Mvlog,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolarityArg {
    Max,
    NegatedMin,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariableArg {
    Tmin,
    Tmax,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate a station CSV and report missing values per station.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        /// JSON ingest options (column names, missing markers, date format).
        #[arg(long)]
        options: Option<PathBuf>,
        /// Also write station coordinates here.
        #[arg(long)]
        stations_out: Option<PathBuf>,
    },
    /// Seasonal maxima (or negated minima) per station and year.
    Blocks {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        options: Option<PathBuf>,
        #[arg(long)]
        season: String,
        #[arg(long, value_enum, default_value = "max")]
        polarity: PolarityArg,
        /// Defaults to tmax for maxima and tmin for negated minima.
        #[arg(long, value_enum)]
        variable: Option<VariableArg>,
        #[arg(long, default_value_t = 0.9)]
        min_coverage: f64,
    },
    /// Pairwise concurrence estimates between stations (long-form CSV).
    Matrix {
        /// Seasonal extremes CSV from `blocks`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "kendall")]
        method: EstMethod,
        #[arg(long, default_value_t = 10)]
        block_size: usize,
        #[arg(long)]
        anchor: Option<String>,
        #[arg(long, default_value_t = 3)]
        min_common: usize,
    },
    /// Interpolate an anchor's row of a matrix onto a lat/lon grid.
    Map {
        #[arg(long)]
        matrix: PathBuf,
        /// CSV with station_id,lat,lon.
        #[arg(long)]
        stations: PathBuf,
        #[arg(long)]
        anchor: String,
        /// lat_min,lat_max,lon_min,lon_max,step
        #[arg(long)]
        grid: String,
        #[arg(long, default_value_t = 2.0)]
        power: f64,
    },
    /// Expected concurrence cell areas from data or from a model.
    Cells {
        /// Data mode: seasonal extremes CSV.
        #[arg(long)]
        extremes: Option<PathBuf>,
        #[arg(long)]
        stations: Option<PathBuf>,
        /// Data mode grid: lat_min,lat_max,lon_min,lon_max,step
        #[arg(long)]
        grid: Option<String>,
        /// CSV of year,label.
        #[arg(long)]
        strata: Option<PathBuf>,
        #[arg(long)]
        base: Option<String>,
        /// Model mode: model JSON.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Model mode 1-d grid: start,end,step
        #[arg(long)]
        grid_1d: Option<String>,
        /// Model mode anchor indices, comma separated.
        #[arg(long, default_value = "0")]
        anchors: String,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        /// Use ecp_mc with this many draws for the pairwise probabilities.
        #[arg(long)]
        mc_draws: Option<u64>,
    },
    /// Extremal concurrence probability of a model at a set of sites.
    Ecp {
        #[arg(long)]
        model: PathBuf,
        /// CSV with a header and one row of coordinates per site.
        #[arg(long)]
        sites: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        draws: u64,
        #[arg(long)]
        antithetic: bool,
        /// Skip closed forms and always sample.
        #[arg(long)]
        mc: bool,
    },
    /// Estimate concurrence from a data CSV (columns = sites).
    Estimate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        method: EstMethod,
        #[arg(long)]
        block_size: Option<usize>,
        /// Column names to use, comma separated (default: all).
        #[arg(long)]
        pairs: Option<String>,
        /// Break ties with seeded uniform noise of this resolution.
        #[arg(long)]
        jitter: Option<f64>,
        /// Jackknife bias correction for mvlog.
        #[arg(long)]
        jackknife: bool,
    },
    /// Simulate max-stable (or domain-of-attraction) fields to CSV.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        sites: PathBuf,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        /// Partial maxima of this many storms instead of exact fields.
        #[arg(long)]
        doa: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        max_atoms: usize,
        #[arg(long)]
        bound_hint: Option<f64>,
        /// Include hit-index columns.
        #[arg(long)]
        hits: bool,
    },
    /// Asymptotically MSE-optimal block size.
    Plan {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1)]
        r: u32,
        #[arg(long, default_value_t = 1.0)]
        c_r: f64,
    },
    /// Simulation-study tables (fig1, fig2, fig3, table1).
    Study {
        #[arg(long)]
        experiment: Option<String>,
        /// JSON StudyConfig; command-line values override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        reps: Option<usize>,
    },
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: &Option<PathBuf>, kind: &str, payload: &T) -> Result<()> {
    let mut text = json_report(kind, payload)?;
    text.push('\n');
    emit(out, text.as_bytes())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_model(path: &Path) -> Result<ModelSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ModelSpec::from_json(&text)?)
}

/// Numeric CSV with a header: returns (column names, rows).
fn read_numeric_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("{}: line {} is not numeric", path.display(), i + 2))?;
        rows.push(row);
    }
    Ok((names, rows))
}

fn read_sites(path: &Path) -> Result<SiteSet> {
    let (_, rows) = read_numeric_csv(path)?;
    Ok(SiteSet::new(rows)?)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|v| v.trim().parse::<T>().map_err(|_| anyhow::anyhow!("bad {what} value '{v}'")))
        .collect()
}

fn parse_grid(s: &str) -> Result<GridSpec> {
    let v: Vec<f64> = parse_list(s, "grid")?;
    if v.len() != 5 {
        bail!("grid needs lat_min,lat_max,lon_min,lon_max,step");
    }
    let g = GridSpec {
        lat_min: v[0],
        lat_max: v[1],
        lon_min: v[2],
        lon_max: v[3],
        step: v[4],
    };
    g.validate()?;
    Ok(g)
}

fn ingest_options(path: &Option<PathBuf>) -> Result<IngestOptions> {
    match path {
        Some(p) => read_json(p),
        None => Ok(IngestOptions::default()),
    }
}

fn pair_method(method: EstMethod, m: usize, jackknife: bool) -> PairMethod {
    match method {
        EstMethod::Kendall => PairMethod::Kendall,
        EstMethod::Block => PairMethod::Block { m },
        EstMethod::Bootstrap => PairMethod::Bootstrap { m },
        EstMethod::Unbiased => PairMethod::Unbiased { m },
        EstMethod::Mvlog => PairMethod::Mvlog { jackknife },
    }
}

#[derive(Serialize)]
struct EstimateReport {
    method: &'static str,
    estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    clipped: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    n: usize,
    columns: Vec<String>,
    ties_detected: bool,
}

fn run(cli: Cli) -> Result<()> {
    let mut rng = SeededRng::new(cli.seed, 0);
    let out = &cli.out;
    match cli.cmd {
        Cmd::Ingest {
            input,
            options,
            stations_out,
        } => {
            let ing = ingest_csv(&input, &ingest_options(&options)?)?;
            for w in &ing.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(p) = stations_out {
                let f = std::fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?;
                write_stations_csv(f, &ing.stations)?;
            }
            #[derive(Serialize)]
            struct Summary<'a> {
                n_records: usize,
                stations: &'a [concur_core::pipeline::StationSummary],
                warnings: &'a [String],
            }
            emit_json(
                out,
                "ingest",
                &Summary {
                    n_records: ing.records.len(),
                    stations: &ing.stations,
                    warnings: &ing.warnings,
                },
            )
        }
        Cmd::Blocks {
            input,
            options,
            season,
            polarity,
            variable,
            min_coverage,
        } => {
            let ing = ingest_csv(&input, &ingest_options(&options)?)?;
            let season: Season = season.parse()?;
            let polarity = match polarity {
                PolarityArg::Max => Polarity::Max,
                PolarityArg::NegatedMin => Polarity::NegatedMin,
            };
            let variable = match (variable, polarity) {
                (Some(VariableArg::Tmin), _) | (None, Polarity::NegatedMin) => Variable::Tmin,
                (Some(VariableArg::Tmax), _) | (None, Polarity::Max) => Variable::Tmax,
            };
            let rows = seasonal_blocks(&ing.records, season, polarity, variable, min_coverage);
            let mut buf = Vec::new();
            write_extremes_csv(&mut buf, &rows)?;
            emit(out, &buf)
        }
        Cmd::Matrix {
            input,
            method,
            block_size,
            anchor,
            min_common,
        } => {
            let ext = read_extremes_csv(&input)?;
            let m = pairwise_matrix(&ext, pair_method(method, block_size, false), anchor.as_deref(), min_common)?;
            if m.ties_detected {
                eprintln!("warning: tied values detected; ties count as non-concordant");
            }
            let mut buf = Vec::new();
            write_matrix_csv(&mut buf, &m)?;
            emit(out, &buf)
        }
        Cmd::Map {
            matrix,
            stations,
            anchor,
            grid,
            power,
        } => {
            let m = read_matrix_csv(&matrix, "file")?;
            let coords = read_stations_csv(&stations)?;
            let row = m.row(&anchor).with_context(|| format!("anchor '{anchor}' not in matrix"))?;
            let values: Vec<StationValue> = row
                .into_iter()
                .filter_map(|(id, value)| {
                    coords.iter().find(|c| c.0 == id).map(|c| StationValue {
                        station_id: id,
                        lat: c.1,
                        lon: c.2,
                        value,
                    })
                })
                .collect();
            let points = grid_map(&values, &parse_grid(&grid)?.points(), power)?;
            let mut buf = Vec::new();
            write_grid_csv(&mut buf, &points)?;
            emit(out, &buf)
        }
        Cmd::Cells {
            extremes,
            stations,
            grid,
            strata,
            base,
            model,
            grid_1d,
            anchors,
            reps,
            mc_draws,
        } => {
            if let Some(model) = model {
                let model_spec = read_model(&model)?;
                let g: Vec<f64> = parse_list(grid_1d.as_deref().context("model mode needs --grid-1d")?, "grid")?;
                if g.len() != 3 {
                    bail!("--grid-1d needs start,end,step");
                }
                let sites = SiteSet::grid_1d(g[0], g[1], g[2])?;
                let weights = concur_core::concurrence::rectangle_weights(sites.len(), g[2], 1);
                let anchors: Vec<usize> = parse_list(&anchors, "anchor")?;
                let rep = cell_area_model(&model_spec, &sites, &weights, &anchors, reps, mc_draws, &mut rng)?;
                return emit_json(out, "cells_model", &rep);
            }
            let extremes = extremes.context("data mode needs --extremes (or use --model)")?;
            let ext = read_extremes_csv(&extremes)?;
            let coords = read_stations_csv(&stations.context("data mode needs --stations")?)?;
            let grid = parse_grid(grid.as_deref().context("data mode needs --grid")?)?;
            let strata = strata.map(|p| read_strata_csv(&p)).transpose()?;
            let opts = DataCellOptions {
                base,
                ..DataCellOptions::default()
            };
            let rep = cell_area_data(&ext, &coords, &grid, strata.as_ref(), &opts)?;
            for w in &rep.warnings {
                eprintln!("warning: {w}");
            }
            emit_json(out, "cells_data", &rep)
        }
        Cmd::Ecp {
            model,
            sites,
            draws,
            antithetic,
            mc,
        } => {
            let model_spec = read_model(&model)?;
            let sites = read_sites(&sites)?;
            let closed = if mc { None } else { ecp_closed_form(&model_spec, &sites)? };
            let quad = if mc || closed.is_some() || sites.len() != 2 {
                None
            } else {
                pairwise_p(&model_spec, &sites).ok()
            };
            let est = match (closed, quad) {
                (Some(v), _) => ConcurrenceEstimate::exact(v, Method::ClosedForm),
                (None, Some(v)) => ConcurrenceEstimate::exact(v, Method::Quadrature),
                (None, None) => ecp_mc(&model_spec, &sites, draws, antithetic, &mut rng)?,
            };
            emit_json(out, "ecp", &est)
        }
        Cmd::Estimate {
            input,
            method,
            block_size,
            pairs,
            jitter,
            jackknife,
        } => {
            let (names, rows) = read_numeric_csv(&input)?;
            let mut sample = Sample::new(rows, names.clone())?;
            if let Some(cols) = pairs {
                let idx = cols
                    .split(',')
                    .map(|c| {
                        names
                            .iter()
                            .position(|n| n == c.trim())
                            .with_context(|| format!("no column '{c}'"))
                    })
                    .collect::<Result<Vec<_>>>()?;
                sample = sample.select(&idx)?;
            }
            let ties = sample.ties_detected();
            if let Some(res) = jitter {
                sample = sample.jittered(res, &mut rng)?;
            }
            let need_m = || block_size.context("this method needs --block-size");
            let (label, estimate, stderr, clipped, m) = match method {
                EstMethod::Block => {
                    let m = need_m()?;
                    ("block", sample_cp_block(&sample, m)?, None, None, Some(m))
                }
                EstMethod::Bootstrap => {
                    let m = need_m()?;
                    ("bootstrap", sample_cp_bootstrap(&sample, m)?, None, None, Some(m))
                }
                EstMethod::Unbiased => {
                    let m = need_m()?;
                    let u = sample_cp_unbiased(&sample, m)?;
                    ("unbiased", u.raw, None, Some(u.clipped), Some(m))
                }
                EstMethod::Kendall => {
                    let k = ecp_kendall(&sample)?;
                    ("kendall", k.tau, k.stderr, None, None)
                }
                EstMethod::Mvlog => {
                    let all: Vec<usize> = (0..sample.k()).collect();
                    let d = multivariate_log_detail(&sample, &all)?;
                    let v = if jackknife { d.jackknife } else { d.estimate };
                    ("mvlog", v, Some(d.stderr), None, None)
                }
            };
            emit_json(
                out,
                "estimate",
                &EstimateReport {
                    method: label,
                    estimate,
                    stderr,
                    clipped,
                    m,
                    n: sample.n(),
                    columns: sample.names().to_vec(),
                    ties_detected: ties,
                },
            )
        }
        Cmd::Simulate {
            model,
            sites,
            reps,
            doa,
            max_atoms,
            bound_hint,
            hits,
        } => {
            let model_spec = read_model(&model)?;
            let sites = read_sites(&sites)?;
            let base = SeededRng::new(cli.seed, 1);
            let fields: Vec<FieldRealization> = match doa {
                Some(n0) => {
                    let s = DoaSampler::new(&model_spec, &sites, n0)?;
                    (0..reps as u64)
                        .into_par_iter()
                        .map(|r| FieldRealization {
                            values: s.draw(&mut base.derive(r)),
                            hit_index: None,
                            truncation_flag: false,
                        })
                        .collect()
                }
                None => {
                    let ctrl = SimControl { max_atoms, bound_hint };
                    let s = MaxStableSimulator::new(&model_spec, &sites, &ctrl)?;
                    (0..reps as u64).into_par_iter().map(|r| s.draw(&mut base.derive(r))).collect()
                }
            };
            let flagged = fields.iter().filter(|f| f.truncation_flag).count();
            if flagged > 0 {
                eprintln!("warning: {flagged} of {reps} realizations hit max_atoms (biased)");
            }
            let names: Vec<String> = (0..sites.len()).map(|j| format!("s{j}")).collect();
            let mut buf = Vec::new();
            write_realizations_csv(&mut buf, &names, &fields, hits && doa.is_none())?;
            emit(out, &buf)
        }
        Cmd::Plan { n, p, r, c_r } => emit_json(out, "plan", &optimal_block_size(n, p, r, c_r)?),
        Cmd::Study {
            experiment,
            config,
            reps,
        } => {
            let mut cfg = match (&config, &experiment) {
                (Some(p), _) => read_json::<StudyConfig>(p)?,
                (None, Some(e)) => StudyConfig::new(e),
                (None, None) => bail!("study needs --experiment or --config"),
            };
            if let Some(e) = experiment {
                cfg.experiment = e;
            }
            if let Some(r) = reps {
                cfg.reps = r;
            }
            if config.is_none() {
                cfg.seed = cli.seed;
            }
            let table = study_harness(&cfg)?;
            if cfg.experiment == "table1" {
                eprint!("{}", format_table1(&table));
            }
            let mut buf = Vec::new();
            write_study_csv(&mut buf, &table)?;
            emit(out, &buf)?;
            if let Some(p) = out {
                let json = p.with_extension("json");
                std::fs::write(&json, serde_json::to_string_pretty(&table)?)
                    .with_context(|| format!("writing {}", json.display()))?;
            }
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

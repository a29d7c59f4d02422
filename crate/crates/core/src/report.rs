//! Report writers behind the command-line subcommands.
//!
//! Every CSV is written with `\n` line endings and a JSON sidecar at the
//! same path with a `.json` extension. Sidecars and JSON reports carry the
//! library version and the scenario hash.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::CodePoint;
use crate::cost::{cost_bounds_closed, CostBounds};
use crate::error::{Error, Result};
use crate::optimize::{cost_surface, minimize_upper_bound, surface_minimum, OptimizationResult};
use crate::scenario::Scenario;
use crate::sim::{estimate_average_cost, SimResult};
use crate::stability::{boundedness, region, BoundScheme, BoundednessReport, RegionGrid, Scheme};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Axis varied by [`cmd_cost`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sweep {
    N,
    R,
}

impl std::str::FromStr for Sweep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" => Ok(Sweep::N),
            "R" | "r" => Ok(Sweep::R),
            other => Err(Error::Config(format!("unknown sweep axis '{other}' (expected n or R)"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct Provenance<'a, T: Serialize> {
    version: &'static str,
    scenario_hash: String,
    scenario: &'a Scenario,
    #[serde(flatten)]
    body: T,
}

fn provenance<T: Serialize>(scenario: &Scenario, body: T) -> Provenance<'_, T> {
    Provenance {
        version: VERSION,
        scenario_hash: scenario.hash(),
        scenario,
        body,
    }
}

/// `out` with its extension replaced by `json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish_csv(writer: csv::Writer<Vec<u8>>, path: &Path) -> Result<()> {
    let bytes = writer.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    write_file(path, &bytes)
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionReport {
    pub scheme: Scheme,
    pub stable_cells: usize,
    pub knee: Option<u32>,
    pub boundedness: BoundednessReport,
}

/// Stability mask as `n,R,stable` rows (row-major over `n`), plus the
/// boundedness report in the sidecar.
pub fn cmd_region(scenario: &Scenario, scheme: Scheme, out: &Path) -> Result<RegionReport> {
    let channel = scenario.channel()?;
    let a = scenario.plant.a;
    let grid = region(&scenario.axes()?, &channel, a, scheme)?;
    let report = RegionReport {
        scheme,
        stable_cells: grid.stable_count(),
        knee: grid.knee(),
        boundedness: boundedness(&channel, a, BoundScheme::from(scheme))?,
    };
    let mut w = csv_writer();
    w.write_record(["n", "R", "stable"])?;
    for (i, n) in grid.n_values.iter().enumerate() {
        for (j, r) in grid.r_values.iter().enumerate() {
            w.write_record([n.to_string(), num(*r), (grid.at(i, j) as u8).to_string()])?;
        }
    }
    finish_csv(w, out)?;
    write_json(&sidecar_path(out), &provenance(scenario, &report))?;
    Ok(report)
}

/// Parse a region CSV back into a grid.
pub fn read_region_csv(path: &Path) -> Result<RegionGrid> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Config(format!("{other:?}")),
    })?;
    let mut n_values: Vec<u32> = Vec::new();
    let mut r_values: Vec<f64> = Vec::new();
    let mut mask: Vec<Vec<bool>> = Vec::new();
    for row in reader.records() {
        let row = row?;
        let parse = |k: usize| row.get(k).ok_or_else(|| Error::Config("short region row".into()));
        let n: u32 = parse(0)?.parse().map_err(|_| Error::Config("bad n".into()))?;
        let r: f64 = parse(1)?.parse().map_err(|_| Error::Config("bad R".into()))?;
        let stable = parse(2)? == "1";
        if n_values.last() != Some(&n) {
            n_values.push(n);
            mask.push(Vec::new());
        }
        if n_values.len() == 1 {
            r_values.push(r);
        }
        mask.last_mut().expect("row pushed above").push(stable);
    }
    Ok(RegionGrid {
        n_values,
        r_values,
        mask,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CostPoint {
    pub x: f64,
    pub bounds: CostBounds,
    pub simulated: Option<f64>,
    pub ci95: Option<f64>,
}

/// Bounds along `n` (at the sweep rate) or along `R` (at the sweep
/// blocklength). With `simulate`, every point whose upper bound converges
/// and which admits a quantizer is also simulated with the `[sim]` run
/// settings.
pub fn cmd_cost(scenario: &Scenario, sweep: Sweep, simulate: bool, out: &Path) -> Result<Vec<CostPoint>> {
    let plant = scenario.plant()?;
    let channel = scenario.channel()?;
    let axes = scenario.axes()?;
    let points: Vec<(u32, f64, f64)> = match sweep {
        Sweep::N => axes
            .n_values
            .iter()
            .map(|&n| (n, scenario.sweep.rate, n as f64))
            .collect(),
        Sweep::R => axes.r_values.iter().map(|&r| (scenario.sweep.n, r, r)).collect(),
    };

    let mut rows = Vec::with_capacity(points.len());
    for (n, rate, x) in points {
        let code = CodePoint::derive(n, rate, &channel)?;
        let zoom = scenario.zoom_for(n, rate).unwrap_or(crate::quantizer::ZoomParams {
            xi0: scenario.quantizer.xi0,
            scale_l: f64::INFINITY,
        });
        let bounds = cost_bounds_closed(&plant, &code, &zoom);
        let (mut simulated, mut ci95) = (None, None);
        if simulate && bounds.upper_converges {
            if let Ok(cfg) = scenario.sim_config_at(n, rate) {
                let r = estimate_average_cost(&cfg)?;
                simulated = Some(r.mean_cost_downsampled);
                ci95 = Some(r.ci95_halfwidth);
            }
        }
        rows.push(CostPoint {
            x,
            bounds,
            simulated,
            ci95,
        });
    }

    let mut w = csv_writer();
    let mut header = vec!["x", "upper", "lower", "diverged"];
    if simulate {
        header.extend(["simulated", "ci95"]);
    }
    w.write_record(&header)?;
    for p in &rows {
        let mut rec = vec![
            num(p.x),
            opt_num(p.bounds.upper.value()),
            opt_num(p.bounds.lower.value()),
            (p.bounds.upper.is_diverged() as u8).to_string(),
        ];
        if simulate {
            rec.push(opt_num(p.simulated));
            rec.push(opt_num(p.ci95));
        }
        w.write_record(&rec)?;
    }
    finish_csv(w, out)?;

    #[derive(Serialize)]
    struct CostSidecar {
        sweep: Sweep,
        points: usize,
    }
    write_json(
        &sidecar_path(out),
        &provenance(
            scenario,
            CostSidecar {
                sweep,
                points: rows.len(),
            },
        ),
    )?;
    Ok(rows)
}

fn require_fixed_scale(scenario: &Scenario) -> Result<crate::quantizer::ZoomParams> {
    match scenario.quantizer.scale_l {
        Some(scale_l) => Ok(crate::quantizer::ZoomParams {
            xi0: scenario.quantizer.xi0,
            scale_l,
        }),
        None => Err(Error::Config("surface commands need quantizer.scale_l".into())),
    }
}

/// Upper-bound surface as `n,R,log10_cost` with empty cost for infeasible
/// cells; the optimum goes to the sidecar. Writes both files before
/// reporting an empty feasible set.
pub fn cmd_contour(scenario: &Scenario, out: &Path) -> Result<OptimizationResult> {
    let zoom = require_fixed_scale(scenario)?;
    let surface = cost_surface(&scenario.plant()?, &scenario.channel()?, &zoom, &scenario.axes()?)?;
    let mut w = csv_writer();
    w.write_record(["n", "R", "log10_cost"])?;
    for (i, n) in surface.axes.n_values.iter().enumerate() {
        for (j, r) in surface.axes.r_values.iter().enumerate() {
            w.write_record([n.to_string(), num(*r), opt_num(surface.at(i, j).value().map(f64::log10))])?;
        }
    }
    finish_csv(w, out)?;
    let optimum = surface_minimum(&surface);

    #[derive(Serialize)]
    struct ContourSidecar {
        optimum: Option<OptimizationResult>,
    }
    write_json(
        &sidecar_path(out),
        &provenance(
            scenario,
            ContourSidecar {
                optimum: optimum.as_ref().ok().cloned(),
            },
        ),
    )?;
    optimum
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateReport {
    pub result: SimResult,
    pub bounds: CostBounds,
    /// Simulated cost inside `[lower, upper]` widened by three CI
    /// halfwidths; `None` when a bound diverges.
    pub within_bounds: Option<bool>,
}

pub fn cmd_simulate(scenario: &Scenario, out: &Path) -> Result<SimulateReport> {
    let cfg = scenario.sim_config()?;
    let result = estimate_average_cost(&cfg)?;
    let bounds = cost_bounds_closed(&cfg.plant, &cfg.code, &cfg.quantizer.zoom());
    let within_bounds = match (bounds.lower.value(), bounds.upper.value()) {
        (Some(lo), Some(hi)) => {
            let slack = 3.0 * result.ci95_halfwidth;
            let m = result.mean_cost_downsampled;
            Some(m >= lo - slack && m <= hi + slack)
        }
        _ => None,
    };
    let report = SimulateReport {
        result,
        bounds,
        within_bounds,
    };
    write_json(out, &provenance(scenario, &report))?;
    Ok(report)
}

pub fn cmd_optimize(scenario: &Scenario, out: &Path) -> Result<OptimizationResult> {
    let zoom = require_fixed_scale(scenario)?;
    let result = minimize_upper_bound(&scenario.plant()?, &scenario.channel()?, &zoom, &scenario.axes()?)?;
    write_json(out, &provenance(scenario, &result))?;
    Ok(result)
}

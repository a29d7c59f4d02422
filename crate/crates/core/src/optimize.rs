//! Exhaustive grid search for the `(n, R)` minimizing the closed-form
//! upper cost bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, CodePoint};
use crate::cost::{convergence_check, cost_upper_closed, Bound};
use crate::error::{Error, Result};
use crate::plant::PlantParams;
use crate::quantizer::{existence_condition, ZoomParams};
use crate::stability::{practical_sufficient_code, GridAxes};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub n_star: u32,
    pub r_star: f64,
    pub cost_star: f64,
    pub feasible_count: usize,
    pub grid_spec: GridAxes,
}

/// Upper bound at every grid cell, row-major over `n`. Cells that fail the
/// practical sufficient condition, admit no quantizer or whose bound
/// diverges are `Bound::Diverged`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSurface {
    pub axes: GridAxes,
    pub cells: Vec<Bound>,
}

impl CostSurface {
    pub fn at(&self, i: usize, j: usize) -> Bound {
        self.cells[i * self.axes.r_values.len() + j]
    }
}

/// Upper bound at one `(n, R)`, or `Diverged` when the cell is infeasible.
pub fn feasible_upper_bound(
    plant: &PlantParams,
    channel: &ChannelParams,
    zoom: &ZoomParams,
    n: u32,
    rate: f64,
) -> Result<Bound> {
    let code = CodePoint::derive(n, rate, channel)?;
    let feasible = practical_sufficient_code(&code, plant.a)?
        && existence_condition(n, rate, plant.a)?
        && convergence_check(plant, &code, zoom.scale_l).sufficient;
    Ok(if feasible {
        cost_upper_closed(plant, &code, zoom)
    } else {
        Bound::Diverged
    })
}

pub fn cost_surface(
    plant: &PlantParams,
    channel: &ChannelParams,
    zoom: &ZoomParams,
    axes: &GridAxes,
) -> Result<CostSurface> {
    let rows: Vec<Vec<Bound>> = axes
        .n_values
        .par_iter()
        .map(|&n| {
            axes.r_values
                .iter()
                .map(|&r| feasible_upper_bound(plant, channel, zoom, n, r))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CostSurface {
        axes: axes.clone(),
        cells: rows.into_iter().flatten().collect(),
    })
}

/// Smallest finite cell of the surface; ties go to the smaller `n`, then
/// the smaller `R`.
pub fn surface_minimum(surface: &CostSurface) -> Result<OptimizationResult> {
    let width = surface.axes.r_values.len();
    let mut best: Option<(usize, f64)> = None;
    let mut feasible_count = 0;
    for (idx, cell) in surface.cells.iter().enumerate() {
        if let Bound::Finite(c) = cell {
            feasible_count += 1;
            if best.map_or(true, |(_, b)| *c < b) {
                best = Some((idx, *c));
            }
        }
    }
    let (idx, cost_star) = best.ok_or(Error::EmptyRegion)?;
    Ok(OptimizationResult {
        n_star: surface.axes.n_values[idx / width],
        r_star: surface.axes.r_values[idx % width],
        cost_star,
        feasible_count,
        grid_spec: surface.axes.clone(),
    })
}

pub fn minimize_upper_bound(
    plant: &PlantParams,
    channel: &ChannelParams,
    zoom: &ZoomParams,
    axes: &GridAxes,
) -> Result<OptimizationResult> {
    surface_minimum(&cost_surface(plant, channel, zoom, axes)?)
}

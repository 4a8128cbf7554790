//! (alpha, beta) grid sweeps and cross-dyad aggregation.

use rayon::prelude::*;

use crate::error::Result;
use crate::social::UtilityParams;

use super::config::ExperimentConfig;
use super::dyad::{run_dyad, DyadSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

/// All dyads of one (alpha, beta) cell, in dyad-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub utility: UtilityParams,
    pub dyads: Vec<DyadSeries>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub cells: Vec<CellResult>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub alpha: f64,
    pub beta: f64,
    pub episode: u32,
    pub fairness_mean: f64,
    pub fairness_std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatmapRow {
    pub alpha: f64,
    pub beta: f64,
    pub final_fairness_mean: f64,
    pub late_window_fairness_mean: f64,
}

/// Population mean and standard deviation.
pub fn mean_std(xs: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let xs: Vec<f64> = xs.into_iter().collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl CellResult {
    pub fn final_fairness(&self) -> Vec<f64> {
        self.dyads.iter().map(|d| d.final_counts.fairness()).collect()
    }

    pub fn late_fairness(&self) -> Vec<f64> {
        self.dyads.iter().map(|d| d.late_counts.fairness()).collect()
    }

    pub fn final_fairness_mean(&self) -> f64 {
        mean_std(self.final_fairness()).0
    }

    /// Mean fairness curve across dyads, one row per sample point.
    pub fn curve(&self) -> Vec<CurveRow> {
        let points = self.dyads[0].samples.len();
        (0..points)
            .map(|i| {
                let (fairness_mean, fairness_std) = mean_std(self.dyads.iter().map(|d| d.samples[i].fairness()));
                CurveRow {
                    alpha: self.utility.alpha,
                    beta: self.utility.beta,
                    episode: self.dyads[0].samples[i].episode,
                    fairness_mean,
                    fairness_std,
                }
            })
            .collect()
    }

    pub fn heatmap_row(&self) -> HeatmapRow {
        HeatmapRow {
            alpha: self.utility.alpha,
            beta: self.utility.beta,
            final_fairness_mean: self.final_fairness_mean(),
            late_window_fairness_mean: mean_std(self.late_fairness()).0,
        }
    }
}

impl SweepResult {
    pub fn curves(&self) -> Vec<CurveRow> {
        self.cells.iter().flat_map(CellResult::curve).collect()
    }

    pub fn heatmap(&self) -> Vec<HeatmapRow> {
        self.cells.iter().map(CellResult::heatmap_row).collect()
    }

    pub fn cell(&self, alpha: f64, beta: f64) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.utility.alpha == alpha && c.utility.beta == beta)
    }
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    run_sweep_with(cfg, Execution::Parallel)
}

/// Runs every (cell, dyad) pair. Results are collected in job order, so
/// serial and parallel execution yield identical output.
pub fn run_sweep_with(cfg: &ExperimentConfig, exec: Execution) -> Result<SweepResult> {
    cfg.validate()?;
    let cells = cfg.utility.cells();
    let jobs: Vec<(usize, u32)> = (0..cells.len())
        .flat_map(|c| (0..cfg.dyads).map(move |d| (c, d)))
        .collect();
    let run = |&(c, d): &(usize, u32)| run_dyad(cfg, cells[c], d);
    let series: Vec<DyadSeries> = match exec {
        Execution::Serial => jobs.iter().map(run).collect::<Result<_>>()?,
        Execution::Parallel => jobs.par_iter().map(run).collect::<Result<_>>()?,
    };

    let mut series = series.into_iter();
    let cells = cells
        .into_iter()
        .map(|utility| CellResult {
            utility,
            dyads: series.by_ref().take(cfg.dyads as usize).collect(),
        })
        .collect();
    Ok(SweepResult {
        config: cfg.clone(),
        cells,
    })
}

use modwave_core::fixedpoint::{contraction_probe, phi_eps, picard_iterate, probe_trajectory, xt_norm, ProfileTrajectory, TimeGrid};
use modwave_core::profile::make_final_data;
use modwave_core::{ModwaveError, Sign, SpectralGrid};
use rayon::prelude::*;
use serde::Serialize;

use super::{Campaign, RunContext};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::at_most;

/// Contraction behaviour across a grid of (λ, T, ε₀) cells.
pub struct Sweep;

/// Relative size of the probe trajectory against ε₀.
const PROBE_SCALE: f64 = 1e-2;

/// Grid and start times of the `Φ_ε` start-time exponent check.
const EXPONENT_GRID: (usize, f64) = (32768, 16000.0);
const EXPONENT_TIMES: [f64; 2] = [10.0, 40.0];

#[derive(Clone, Debug, Serialize)]
struct Cell {
    lambda: f64,
    start_time: f64,
    eps0: f64,
    status: &'static str,
    iterates: usize,
    max_contraction_ratio: f64,
    phi_eps_norm: f64,
    probe_ratio: f64,
    final_step: f64,
}

fn run_cell(cfg: &ExperimentConfig, lambda: Sign, start_time: f64, eps0: f64) -> Result<Cell> {
    let mut params = cfg.params.clone().with_times(start_time, cfg.params.t_max);
    params.lambda = lambda;
    params.eps0 = eps0;
    let mut cell = Cell {
        lambda: lambda.value(),
        start_time,
        eps0,
        status: "converged",
        iterates: 0,
        max_contraction_ratio: f64::NAN,
        phi_eps_norm: f64::NAN,
        probe_ratio: f64::NAN,
        final_step: f64::NAN,
    };
    let w = make_final_data(&cfg.data_kind, &params, cfg.seed)?;
    match picard_iterate(&w, &params, cfg.picard_max_iter, cfg.picard_tol) {
        Ok((_, rep)) => {
            cell.iterates = rep.iterates;
            cell.max_contraction_ratio = rep.contraction_ratios.iter().copied().fold(0.0, f64::max);
            cell.phi_eps_norm = rep.phi_eps_norm;
            cell.final_step = rep.step_distances.last().copied().unwrap_or(0.0);
            if !rep.converged {
                cell.status = "not_converged";
            }
        }
        Err(ModwaveError::BlowUp(_)) => cell.status = "blow_up",
        Err(e) => return Err(e.into()),
    }
    let tg = TimeGrid::from_params(&params)?;
    let radius = PROBE_SCALE * eps0.max(f64::MIN_POSITIVE);
    let g1 = probe_trajectory(&tg, &params.grid, radius, params.alpha, 1.0)?;
    let g2 = ProfileTrajectory::zeros(&tg, &params.grid);
    cell.probe_ratio = contraction_probe(&g1, &g2, &w, &params)?;
    log::info!("cell λ={} T={start_time} ε₀={eps0}: {}", lambda, cell.status);
    Ok(cell)
}

/// `‖Φ_ε‖_{X_T}` for bump data at each start time in [`EXPONENT_TIMES`].
fn phi_eps_by_start_time(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let grid = SpectralGrid::new(EXPONENT_GRID.0, EXPONENT_GRID.1)?;
    EXPONENT_TIMES
        .iter()
        .map(|&t0| {
            let mut params = cfg.params.clone();
            params.grid = grid.clone();
            let params = params.with_times(t0, 100.0 * t0);
            let w = make_final_data("bump", &params, cfg.seed)?;
            let tg = TimeGrid::from_params(&params)?;
            Ok(xt_norm(&phi_eps(&w, &params, &tg)?.trajectory, params.alpha)?)
        })
        .collect()
}

impl Campaign for Sweep {
    fn name(&self) -> &'static str {
        "sweep"
    }

    fn summary(&self) -> &'static str {
        "Picard contraction across sign, start time and data size"
    }

    fn run(&self, ctx: &mut RunContext<'_>) -> Result<()> {
        let cfg = ctx.config;
        let keys: Vec<(Sign, f64, f64)> = cfg
            .sweep_lambdas
            .iter()
            .flat_map(|&l| {
                cfg.sweep_start_times
                    .iter()
                    .flat_map(move |&t| cfg.sweep_eps0.iter().map(move |&e| (l, t, e)))
            })
            .collect();
        // `collect` keeps the key order, so the merge is deterministic.
        let cells = keys
            .par_iter()
            .map(|&(l, t, e)| run_cell(cfg, l, t, e))
            .collect::<Result<Vec<_>>>()?;

        let t_lo = cfg.sweep_start_times.iter().copied().fold(f64::INFINITY, f64::min);
        let t_hi = cfg.sweep_start_times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut monotone: f64 = 0.0;
        let mut scaling: f64 = 0.0;
        for a in &cells {
            if a.start_time == t_hi && t_hi > t_lo {
                if let Some(b) = cells
                    .iter()
                    .find(|b| b.lambda == a.lambda && b.eps0 == a.eps0 && b.start_time == t_lo)
                {
                    monotone = monotone.max(a.probe_ratio - b.probe_ratio);
                }
            }
            if let Some(b) = cells
                .iter()
                .find(|b| b.lambda == a.lambda && b.start_time == a.start_time && b.eps0 == 2.0 * a.eps0)
            {
                if a.probe_ratio > 0.0 {
                    scaling = scaling.max((b.probe_ratio / a.probe_ratio / 4.0 - 1.0).abs());
                }
            }
        }
        ctx.report.check("sweep.probe_monotone_in_start_time", None, monotone, at_most(0.0));
        ctx.report.check("sweep.probe_eps0_squared_scaling", None, scaling, at_most(0.3));

        let norms = phi_eps_by_start_time(cfg)?;
        let ratio = norms[1] / norms[0];
        let p = &cfg.params;
        let limit = (EXPONENT_TIMES[1] / EXPONENT_TIMES[0]).powf(p.alpha - p.delta) * 1.25;
        ctx.report.check("sweep.phi_eps_start_time_ratio", None, ratio, at_most(limit));
        ctx.report.value("sweep.phi_eps_by_start_time", &norms);

        let converged = cells.iter().filter(|c| c.status == "converged").count();
        ctx.report.value("sweep.converged_cells", converged);
        ctx.report.value("sweep.cells", &cells);
        ctx.out.write_csv("sweep.csv", &cells)?;
        Ok(())
    }
}

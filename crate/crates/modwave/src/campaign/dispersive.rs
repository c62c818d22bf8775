use std::f64::consts::PI;

use modwave_core::evolve::{dispersive_ratio, stationary_phase_error};
use modwave_core::profile::check_box_coverage;
use modwave_core::{FinalData, FrequencyField, SpectralGrid};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

use super::{derived_seed, final_data, sample_times, windowed_fit, Campaign, RunContext};
use crate::error::Result;
use crate::report::at_most;

/// Dispersive decay estimate and stationary-phase asymptotics of free waves.
pub struct VerifyDispersive;

pub const DISPERSIVE_TIMES: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];

#[derive(Serialize)]
struct Row {
    seed: u64,
    profile: usize,
    t: f64,
    ratio: f64,
}

fn monte_carlo(grid: &Arc<SpectralGrid>, seed: u64, count: usize) -> Result<Vec<Row>> {
    let per_profile = (0..count)
        .into_par_iter()
        .map(|k| -> Result<Vec<Row>> {
            let data = FinalData::from_shape("random_bandlimited", grid, 1.0, derived_seed(seed, k as u64))?;
            check_box_coverage(&data, DISPERSIVE_TIMES[3])?;
            DISPERSIVE_TIMES
                .iter()
                .map(|&t| Ok(Row { seed, profile: k, t, ratio: dispersive_ratio(&data.w, t)? }))
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_profile.into_iter().flatten().collect())
}

impl Campaign for VerifyDispersive {
    fn name(&self) -> &'static str {
        "verify-dispersive"
    }

    fn summary(&self) -> &'static str {
        "Monte Carlo sup of the dispersive ratio and stationary-phase error decay"
    }

    fn run(&self, ctx: &mut RunContext<'_>) -> Result<()> {
        let cfg = ctx.config;
        let grid = &cfg.params.grid;

        let rows_a = monte_carlo(grid, cfg.seed, cfg.mc_profiles)?;
        let rows_b = monte_carlo(grid, cfg.mc_seed_b, cfg.mc_profiles)?;
        let sup = |rows: &[Row]| rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
        let (sup_a, sup_b) = (sup(&rows_a), sup(&rows_b));
        ctx.report.check("dispersive.sup_seed_a", Some(2), sup_a, at_most(1.0));
        ctx.report.check("dispersive.sup_seed_b", Some(2), sup_b, at_most(1.0));
        let spread = (sup_a - sup_b).abs() / sup_a.max(sup_b);
        ctx.report.check("dispersive.sup_stability", Some(2), spread, at_most(0.1));
        ctx.report.value("dispersive.profiles_per_seed", cfg.mc_profiles);

        // ĥ = √(2π) e^{-ξ²/2}: ‖U(t)h‖_∞ = (1+t²)^{-1/4}.
        let hhat = FrequencyField::from_fn(grid, |xi| Complex64::new((2.0 * PI).sqrt() * (-xi * xi / 2.0).exp(), 0.0));
        let linf = (2.0 * PI).sqrt();
        let dxi = (2.0 * PI).sqrt() * (PI.sqrt() / 2.0).sqrt();
        let mut closed: f64 = 0.0;
        for t in DISPERSIVE_TIMES {
            let expected = (1.0 + t * t).powf(-0.25) / (t.powf(-0.5) * linf + t.powf(-0.75) * dxi);
            closed = closed.max((dispersive_ratio(&hhat, t)? - expected).abs() / expected);
        }
        ctx.report.check("dispersive.gaussian_closed_form", Some(2), closed, at_most(1e-6));

        let w = final_data(cfg, &cfg.params)?;
        let samples = sample_times(cfg)
            .into_iter()
            .map(|t| Ok((t, stationary_phase_error(&w.w, t)?)))
            .collect::<Result<Vec<_>>>()?;
        let fit = windowed_fit(cfg, &samples, 0)?;
        ctx.report.check("dispersive.stationary_phase_slope", Some(2), fit.slope, at_most(-0.7));
        ctx.report.fit("stationary_phase_error", fit);

        let mut rows = rows_a;
        rows.extend(rows_b);
        ctx.out.write_csv("dispersive.csv", &rows)?;
        Ok(())
    }
}

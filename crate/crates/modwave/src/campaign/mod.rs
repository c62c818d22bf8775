//! Verification campaigns, registered by subcommand name.

use std::fs;
use std::path::Path;

use modwave_core::fit::{fit_decay, log_times};
use modwave_core::profile::{check_box_coverage, make_final_data};
use modwave_core::{DecayFit, FinalData, SolverParams};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::report::{OutputDir, Report, Status};

mod construct;
mod dispersive;
mod forcing;
mod roundtrip;
mod spectral;
mod sweep;

pub use construct::Construct;
pub use dispersive::VerifyDispersive;
pub use forcing::VerifyForcing;
pub use roundtrip::Roundtrip;
pub use spectral::VerifySpectral;
pub use sweep::Sweep;

/// State shared by a campaign while it runs.
pub struct RunContext<'a> {
    pub config: &'a ExperimentConfig,
    pub report: Report,
    pub out: OutputDir,
}

pub trait Campaign: Send + Sync {
    fn name(&self) -> &'static str;

    fn summary(&self) -> &'static str;

    fn run(&self, ctx: &mut RunContext<'_>) -> Result<()>;
}

static CAMPAIGNS: [&dyn Campaign; 6] = [
    &VerifySpectral,
    &VerifyDispersive,
    &VerifyForcing,
    &Construct,
    &Roundtrip,
    &Sweep,
];

pub fn campaigns() -> &'static [&'static dyn Campaign] {
    &CAMPAIGNS
}

pub fn lookup(name: &str) -> Result<&'static dyn Campaign> {
    CAMPAIGNS
        .iter()
        .copied()
        .find(|c| c.name() == name)
        .ok_or_else(|| Error::UnknownCampaign(name.to_string()))
}

/// Runs a campaign and writes `results.json` into `out` when given.
///
/// Runtime errors are recorded in the report with status `error` before
/// being returned.
pub fn run_campaign(name: &str, config: &ExperimentConfig, out: Option<&Path>) -> Result<Report> {
    let campaign = lookup(name)?;
    let mut ctx = RunContext {
        config,
        report: Report::new(name, config),
        out: OutputDir::new(out)?,
    };
    log::info!("running {name}");
    let outcome = campaign.run(&mut ctx);
    if let Err(e) = &outcome {
        ctx.report.status = Status::Error;
        ctx.report.reason = Some(e.to_string());
    }
    ctx.report.finalize();
    ctx.out.write_report(&ctx.report)?;
    outcome.map(|_| ctx.report)
}

/// Final data from `data_file` if set, otherwise generated from the kind.
pub(crate) fn final_data(cfg: &ExperimentConfig, params: &SolverParams) -> Result<FinalData> {
    match &cfg.data_file {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            let data = FinalData::from_csv(&params.grid, &text)?;
            check_box_coverage(&data, params.t_max)?;
            Ok(data)
        }
        None => Ok(make_final_data(&cfg.data_kind, params, cfg.seed)?),
    }
}

/// Log-spaced sample times across the fit window.
pub(crate) fn sample_times(cfg: &ExperimentConfig) -> Vec<f64> {
    log_times(cfg.fit_window.0, cfg.fit_window.1, cfg.sample_count)
}

/// Fit over `(t, value)` pairs restricted to the fit window.
pub(crate) fn windowed_fit(cfg: &ExperimentConfig, samples: &[(f64, f64)], power: u32) -> Result<DecayFit> {
    let (lo, hi) = cfg.fit_window;
    let inside: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|&(t, _)| t >= lo * (1.0 - 1e-12) && t <= hi * (1.0 + 1e-12))
        .collect();
    Ok(fit_decay(&inside, power)?)
}

/// `max / min` of a series; infinite when the minimum vanishes.
pub(crate) fn max_min_ratio(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else if max == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// Well-mixed per-item seed derived from a base seed.
pub(crate) fn derived_seed(seed: u64, k: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17) ^ k.wrapping_mul(0xBF58_476D_1CE4_E5B9)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names_are_unique() {
        let mut names: Vec<_> = campaigns().iter().map(|c| c.name()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), campaigns().len());
        assert!(lookup("construct").is_ok());
        assert!(matches!(lookup("plot"), Err(Error::UnknownCampaign(_))));
    }

    #[test]
    fn ratio_edge_cases() {
        assert_eq!(max_min_ratio(&[2.0, 1.0, 4.0]), 4.0);
        assert_eq!(max_min_ratio(&[0.0, 0.0]), 1.0);
        assert!(max_min_ratio(&[0.0, 1.0]).is_infinite());
    }

    #[test]
    fn derived_seeds_differ_across_bases() {
        let a: Vec<_> = (0..100).map(|k| derived_seed(7, k)).collect();
        let b: Vec<_> = (0..100).map(|k| derived_seed(8, k)).collect();
        assert!(a.iter().all(|s| !b.contains(s)));
    }
}

//! `key = value` experiment configuration.

use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use modwave_core::profile::{lookup_shape, nodes_for, DEFAULT_NODES_PER_DECADE};
use modwave_core::{Sign, SolverParams, SpectralGrid};
use serde::Serialize;

use crate::error::{Error, Result};

/// Fully validated experiment settings.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub params: SolverParams,
    pub data_kind: String,
    pub seed: u64,
    /// Final data read from a CSV file instead of generated.
    pub data_file: Option<PathBuf>,
    /// Time range used by slope fits.
    pub fit_window: (f64, f64),
    pub picard_max_iter: usize,
    pub picard_tol: f64,
    /// Step bound of the forward solver; `None` uses `min(0.1, dx²/2)`.
    pub dt_max: Option<f64>,
    /// Number of log-spaced sample times in decay and evolution series.
    pub sample_count: usize,
    /// Random profiles per seed in the dispersive campaign.
    pub mc_profiles: usize,
    /// Second seed of the dispersive stability check.
    pub mc_seed_b: u64,
    pub sweep_eps0: Vec<f64>,
    pub sweep_start_times: Vec<f64>,
    pub sweep_lambdas: Vec<Sign>,
    pub output_dir: PathBuf,
}

/// Echo of the scalar settings written into `results.json`.
#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub lambda: f64,
    pub delta: f64,
    pub alpha: f64,
    pub eps0: f64,
    pub start_time: f64,
    pub t_max: f64,
    pub num_points: usize,
    pub box_length: f64,
    pub time_grid_points: usize,
    pub data_kind: String,
    pub seed: u64,
    pub fit_window: (f64, f64),
    pub picard_max_iter: usize,
    pub picard_tol: f64,
    pub dt_max: Option<f64>,
    pub sample_count: usize,
}

impl ExperimentConfig {
    pub fn defaults() -> Result<Self> {
        parse_config("")
    }

    pub fn echo(&self) -> ConfigEcho {
        let p = &self.params;
        ConfigEcho {
            lambda: p.lambda.value(),
            delta: p.delta,
            alpha: p.alpha,
            eps0: p.eps0,
            start_time: p.start_time,
            t_max: p.t_max,
            num_points: p.grid.num_points(),
            box_length: p.grid.box_length(),
            time_grid_points: p.time_grid_points,
            data_kind: self.data_kind.clone(),
            seed: self.seed,
            fit_window: self.fit_window,
            picard_max_iter: self.picard_max_iter,
            picard_tol: self.picard_tol,
            dt_max: self.dt_max,
            sample_count: self.sample_count,
        }
    }

    /// Copy with other physical parameters on the same grid.
    pub fn with_params(&self, params: SolverParams) -> Self {
        Self { params, ..self.clone() }
    }

    /// Copy with another base seed; the second Monte Carlo seed keeps its offset.
    pub fn with_seed(&self, seed: u64) -> Self {
        let offset = self.mc_seed_b.wrapping_sub(self.seed);
        Self { seed, mc_seed_b: seed.wrapping_add(offset), ..self.clone() }
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(line, format!("cannot parse '{value}' for {key}")))
}

fn parse_list<T: FromStr>(line: usize, key: &str, value: &str) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(|s| parse_value(line, key, s.trim()))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::config(line, format!("{key} needs at least one value")));
    }
    Ok(items)
}

/// Parses `key = value` lines; `#` starts a comment, unknown keys are errors.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut lambda = Sign::Plus;
    let mut delta = 0.2;
    let mut alpha = 0.1;
    let mut eps0 = 0.05;
    let mut start_time = 10.0;
    let mut t_max = 1000.0;
    let mut num_points = modwave_core::profile::DEFAULT_NUM_POINTS;
    let mut box_length = modwave_core::profile::DEFAULT_BOX_LENGTH;
    let mut time_grid_points: Option<usize> = None;
    let mut data_kind = "gaussian".to_string();
    let mut seed = 0u64;
    let mut data_file = None;
    let mut fit_t_min: Option<f64> = None;
    let mut fit_t_max: Option<f64> = None;
    let mut picard_max_iter = 15;
    let mut picard_tol = 1e-9;
    let mut dt_max = None;
    let mut sample_count = 21;
    let mut mc_profiles = 100;
    let mut mc_seed_b: Option<u64> = None;
    let mut sweep_eps0 = vec![0.01, 0.05, 0.1, 0.2];
    let mut sweep_start_times = vec![10.0, 40.0];
    let mut sweep_lambdas = vec![Sign::Plus];
    let mut output_dir = PathBuf::from("out");

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::config(line, format!("expected 'key = value', got '{content}'")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "lambda" => lambda = value.parse().map_err(|e| Error::config(line, format!("{e}")))?,
            "delta" => delta = parse_value(line, key, value)?,
            "alpha" => alpha = parse_value(line, key, value)?,
            "eps0" => eps0 = parse_value(line, key, value)?,
            "T" | "start_time" => start_time = parse_value(line, key, value)?,
            "t_max" => t_max = parse_value(line, key, value)?,
            "num_points" => num_points = parse_value(line, key, value)?,
            "box_length" => box_length = parse_value(line, key, value)?,
            "time_grid_points" => time_grid_points = Some(parse_value(line, key, value)?),
            "data_kind" => {
                lookup_shape(value).map_err(|e| Error::config(line, e.to_string()))?;
                data_kind = value.to_string();
            }
            "seed" => seed = parse_value(line, key, value)?,
            "data_file" => data_file = Some(PathBuf::from(value)),
            "fit_t_min" => fit_t_min = Some(parse_value(line, key, value)?),
            "fit_t_max" => fit_t_max = Some(parse_value(line, key, value)?),
            "picard_max_iter" => picard_max_iter = parse_value(line, key, value)?,
            "picard_tol" => picard_tol = parse_value(line, key, value)?,
            "dt_max" => dt_max = Some(parse_value(line, key, value)?),
            "sample_count" => sample_count = parse_value(line, key, value)?,
            "mc_profiles" => mc_profiles = parse_value(line, key, value)?,
            "mc_seed_b" => mc_seed_b = Some(parse_value(line, key, value)?),
            "sweep_eps0" => sweep_eps0 = parse_list(line, key, value)?,
            "sweep_T" => sweep_start_times = parse_list(line, key, value)?,
            "sweep_lambda" => {
                sweep_lambdas = value
                    .split(',')
                    .map(|s| s.parse::<Sign>().map_err(|e| Error::config(line, e.to_string())))
                    .collect::<Result<_>>()?
            }
            "output_dir" => output_dir = PathBuf::from(value),
            other => return Err(Error::config(line, format!("unknown key '{other}'"))),
        }
    }

    let grid = SpectralGrid::new(num_points, box_length).map_err(|e| Error::config(0, e.to_string()))?;
    let params = SolverParams {
        lambda,
        delta,
        alpha,
        eps0,
        start_time,
        t_max,
        grid: Arc::clone(&grid),
        time_grid_points: time_grid_points
            .unwrap_or_else(|| nodes_for(start_time, t_max, DEFAULT_NODES_PER_DECADE)),
    };
    params.validate().map_err(|e| Error::config(0, e.to_string()))?;

    let fit_window = (fit_t_min.unwrap_or(start_time), fit_t_max.unwrap_or(t_max));
    if !(fit_window.0 >= start_time && fit_window.1 <= t_max && fit_window.0 < fit_window.1) {
        return Err(Error::config(
            0,
            format!("fit window [{}, {}] must lie inside [T, t_max] = [{start_time}, {t_max}]", fit_window.0, fit_window.1),
        ));
    }
    if !(picard_tol > 0.0) {
        return Err(Error::config(0, "picard_tol must be positive"));
    }
    if dt_max.is_some_and(|d: f64| !(d > 0.0)) {
        return Err(Error::config(0, "dt_max must be positive"));
    }
    if sample_count < 3 {
        return Err(Error::config(0, "sample_count must be at least 3 for slope fits"));
    }
    if mc_profiles == 0 {
        return Err(Error::config(0, "mc_profiles must be positive"));
    }
    Ok(ExperimentConfig {
        params,
        data_kind,
        seed,
        data_file,
        fit_window,
        picard_max_iter,
        picard_tol,
        dt_max,
        sample_count,
        mc_profiles,
        mc_seed_b: mc_seed_b.unwrap_or(seed.wrapping_add(1)),
        sweep_eps0,
        sweep_start_times,
        sweep_lambdas,
        output_dir,
    })
}

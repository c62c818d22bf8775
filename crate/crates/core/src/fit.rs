//! Least-squares power-law fits in log-log coordinates.

use serde::Serialize;

use crate::error::{ModwaveError, Result};

/// Fit of `log value − p·log(1 + log t) = slope·log t + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub log_correction_power: u32,
}

pub fn fit_decay(samples: &[(f64, f64)], log_correction_power: u32) -> Result<DecayFit> {
    if samples.len() < 3 {
        return Err(ModwaveError::Fit(format!("need at least 3 samples, got {}", samples.len())));
    }
    let mut pts = Vec::with_capacity(samples.len());
    for (i, &(t, v)) in samples.iter().enumerate() {
        if !(t > 0.0 && t.is_finite()) {
            return Err(ModwaveError::Fit(format!("sample {i}: time {t} is not positive")));
        }
        if !(v > 0.0 && v.is_finite()) {
            return Err(ModwaveError::Fit(format!("sample {i}: value {v} is not positive")));
        }
        if i > 0 && t <= samples[i - 1].0 {
            return Err(ModwaveError::Fit(format!("sample {i}: times must increase")));
        }
        let correction = if log_correction_power == 0 {
            0.0
        } else if 1.0 + t.ln() > 0.0 {
            f64::from(log_correction_power) * (1.0 + t.ln()).ln()
        } else {
            return Err(ModwaveError::Fit(format!("sample {i}: 1 + log t <= 0 at t = {t}")));
        };
        let y = v.ln() - correction;
        pts.push((t.ln(), y));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(DecayFit {
        slope,
        intercept,
        r_squared,
        n_points: pts.len(),
        log_correction_power,
    })
}

/// Log-spaced times `t0 · (t1/t0)^{k/(n−1)}`.
pub fn log_times(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![t0];
    }
    let r = (t1 / t0).ln();
    (0..n)
        .map(|k| if k + 1 == n { t1 } else { t0 * (r * k as f64 / (n - 1) as f64).exp() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let s: Vec<_> = log_times(10.0, 1e3, 9).into_iter().map(|t| (t, t.powf(-1.25))).collect();
        let fit = fit_decay(&s, 0).unwrap();
        assert!((fit.slope + 1.25).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.n_points, 9);
    }

    #[test]
    fn log_corrected_power_law() {
        let s: Vec<_> = log_times(10.0, 1e3, 9)
            .into_iter()
            .map(|t| (t, t.powf(-1.2) * (1.0 + t.ln()).powi(6)))
            .collect();
        let fit = fit_decay(&s, 6).unwrap();
        assert!((fit.slope + 1.2).abs() < 1e-10);
    }

    #[test]
    fn constant_values() {
        let s = [(1.0, 3.0), (2.0, 3.0), (5.0, 3.0)];
        let fit = fit_decay(&s, 0).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(fit_decay(&[(1.0, 1.0), (2.0, 1.0)], 0).is_err());
        assert!(fit_decay(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)], 0).is_err());
        assert!(fit_decay(&[(1.0, 1.0), (2.0, -1.0), (3.0, 1.0)], 0).is_err());
        assert!(fit_decay(&[(2.0, 1.0), (1.0, 1.0), (3.0, 1.0)], 0).is_err());
    }

    #[test]
    fn small_times_without_correction() {
        let s: Vec<_> = [0.01, 0.02, 0.04].iter().map(|&t: &f64| (t, t * t)).collect();
        assert!((fit_decay(&s, 0).unwrap().slope - 2.0).abs() < 1e-12);
        assert!(fit_decay(&s, 1).is_err());
    }

    #[test]
    fn log_times_endpoints() {
        let t = log_times(10.0, 1000.0, 5);
        assert_eq!(t[0], 10.0);
        assert_eq!(t[4], 1000.0);
        assert!((t[2] - 100.0).abs() < 1e-9);
    }
}

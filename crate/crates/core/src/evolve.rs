//! Split-step forward solver, interaction-picture profiles and
//! modified-scattering diagnostics.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{ModwaveError, Result};
use crate::fit::{fit_decay, DecayFit};
use crate::profile::{asymptotic_profile, FinalData, Sign, SolverParams, RESONANT_COEFFICIENT};
use crate::spectral::{FrequencyField, NormBundle, PhysicalField};

/// Relative mass drift at which a run is aborted.
pub const MASS_ABORT: f64 = 1e-6;
/// Largest time step used by [`evolve`].
pub const DT_CAP: f64 = 0.1;
/// Amplitude above which a grid point counts as carrying the solution.
pub const MASS_THRESHOLD: f64 = 1e-10;

/// Solution snapshot with its conserved quantities.
#[derive(Clone, Debug)]
pub struct EvolutionState {
    pub t: f64,
    pub u: PhysicalField,
    /// `∫ |u|² dx`.
    pub mass: f64,
    /// `∫ ½|u_x|² + (λ/2)|u|⁴ dx`.
    pub energy: f64,
    pub step_count: usize,
}

impl EvolutionState {
    pub fn new(t: f64, u: PhysicalField, lambda: Sign) -> Self {
        let mass = u.l2().powi(2);
        let energy = energy(&u, lambda);
        Self { t, u, mass, energy, step_count: 0 }
    }
}

/// Hamiltonian of `i u_t + ½u_xx = λ|u|²u`.
pub fn energy(u: &PhysicalField, lambda: Sign) -> f64 {
    let uhat = u.forward();
    let g = u.grid();
    let kinetic: f64 = g
        .frequencies()
        .iter()
        .zip(uhat.values())
        .map(|(xi, z)| xi * xi * z.norm_sqr())
        .sum::<f64>()
        * g.dxi()
        / (2.0 * PI);
    let quartic: f64 = u.values().iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() * g.dx();
    0.5 * kinetic + 0.5 * lambda.value() * quartic
}

/// `u ↦ e^{−iλ|u|² τ} u`, which leaves `|u|` unchanged.
pub fn nonlinear_phase(u: &PhysicalField, tau: f64, lambda: Sign) -> PhysicalField {
    let c = -lambda.value() * tau;
    u.map(|z| z * Complex64::cis(c * z.norm_sqr()))
}

fn strang_raw(u: &PhysicalField, dt: f64, lambda: Sign) -> PhysicalField {
    let half = nonlinear_phase(u, 0.5 * dt, lambda);
    let flown = half.forward().propagate(dt).inverse();
    nonlinear_phase(&flown, 0.5 * dt, lambda)
}

/// One Strang step: half nonlinear phase, exact free flight, half phase.
pub fn strang_step(state: &EvolutionState, dt: f64, lambda: Sign) -> Result<EvolutionState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(ModwaveError::InvalidParams(format!("time step must be positive, got {dt}")));
    }
    let mut next = EvolutionState::new(state.t + dt, strang_raw(&state.u, dt, lambda), lambda);
    next.step_count = state.step_count + 1;
    Ok(next)
}

/// Default step bound `min(0.1, dx²/2)`.
pub fn default_dt(params: &SolverParams) -> f64 {
    DT_CAP.min(0.5 * params.grid.dx().powi(2))
}

/// Evolves `u0` from `t0` and records the state at every sample time.
pub fn evolve(u0: &PhysicalField, t0: f64, sample_times: &[f64], params: &SolverParams) -> Result<Vec<EvolutionState>> {
    evolve_with_step(u0, t0, sample_times, params.lambda, default_dt(params))
}

/// [`evolve`] with an explicit step bound. Steps are shortened so that every
/// sample time is hit exactly.
pub fn evolve_with_step(
    u0: &PhysicalField,
    t0: f64,
    sample_times: &[f64],
    lambda: Sign,
    dt_max: f64,
) -> Result<Vec<EvolutionState>> {
    if !(dt_max > 0.0) {
        return Err(ModwaveError::InvalidParams(format!("dt_max must be positive, got {dt_max}")));
    }
    if sample_times.first().is_some_and(|&t| t < t0) || sample_times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ModwaveError::InvalidParams("sample times must increase and start at or after t0".into()));
    }
    let initial = EvolutionState::new(t0, u0.clone(), lambda);
    let m0 = initial.mass;
    let mut u = u0.clone();
    let mut t = t0;
    let mut steps = 0usize;
    let mut out = Vec::with_capacity(sample_times.len());
    for &target in sample_times {
        let span = target - t;
        if span > 0.0 {
            let n = (span / dt_max).ceil() as usize;
            let dt = span / n as f64;
            for _ in 0..n {
                u = strang_raw(&u, dt, lambda);
            }
            steps += n;
            t = target;
            if !u.is_finite() {
                return Err(ModwaveError::NonFinite("solution"));
            }
        }
        let mut state = EvolutionState::new(t, u.clone(), lambda);
        state.step_count = steps;
        let drift = if m0 > 0.0 { (state.mass - m0).abs() / m0 } else { state.mass };
        if drift > MASS_ABORT {
            return Err(ModwaveError::Conservation(format!("mass drift {drift:.3e} at t = {t}")));
        }
        log::trace!("t = {t}: mass drift {drift:.2e}, {steps} steps");
        out.push(state);
    }
    Ok(out)
}

/// Self-convergence order of the Strang scheme on `[0, t_end]`.
///
/// Each step size in `dts` (increasing) is compared against a run at
/// `dts[0] / 8`; the slope of the log-log error fit is the observed order.
pub fn strang_order(u0: &PhysicalField, lambda: Sign, t_end: f64, dts: &[f64]) -> Result<DecayFit> {
    let run = |dt: f64| -> Result<PhysicalField> {
        let mut out = evolve_with_step(u0, 0.0, &[t_end], lambda, dt)?;
        Ok(out.pop().map(|s| s.u).unwrap_or_else(|| u0.clone()))
    };
    let first = *dts.first().ok_or_else(|| ModwaveError::InvalidParams("no step sizes".into()))?;
    let reference = run(first / 8.0)?;
    let errs = dts
        .iter()
        .map(|&dt| Ok((dt, run(dt)?.max_abs_diff(&reference)?)))
        .collect::<Result<Vec<_>>>()?;
    fit_decay(&errs, 0)
}

/// Interaction-picture profile `f̂(t) = e^{itξ²/2} û(t)`.
pub fn extract_profile(state: &EvolutionState) -> FrequencyField {
    state.u.forward().propagate(-state.t)
}

/// Norms of `f̂(t) − v(t)`.
pub fn scattering_deviation(state: &EvolutionState, w: &FinalData, params: &SolverParams) -> Result<NormBundle> {
    let v = asymptotic_profile(w, state.t, params.lambda)?;
    Ok(extract_profile(state).sub(&v)?.norms())
}

/// Four-point Lagrange interpolation of a frequency field at `xi`; `None`
/// outside the grid.
pub fn interpolate(field: &FrequencyField, xi: f64) -> Option<Complex64> {
    let g = field.grid();
    let freqs = g.frequencies();
    let pos = (xi - freqs[0]) / g.dxi();
    let n = freqs.len();
    if !(pos >= 0.0 && pos <= (n - 1) as f64) {
        return None;
    }
    let i = (pos.floor() as usize).clamp(1, n.saturating_sub(3));
    let s = pos - i as f64;
    let v = field.values();
    let w = [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ];
    Some(w[0] * v[i - 1] + w[1] * v[i] + w[2] * v[i + 1] + w[3] * v[i + 2])
}

/// `(2π)^{-1/2} (it)^{-1/2} e^{ix²/2t} p(x/t)` for a frequency profile `p`
/// given pointwise.
fn stationary_phase_wave(
    grid_of: &PhysicalField,
    t: f64,
    profile_at: impl Fn(f64) -> Option<Complex64>,
) -> Result<PhysicalField> {
    let amp = Complex64::from_polar((2.0 * PI * t).powf(-0.5), -FRAC_PI_4);
    let g = grid_of.grid();
    let mut values = Vec::with_capacity(g.num_points());
    for (&x, u) in g.xs().iter().zip(grid_of.values()) {
        let value = match profile_at(x / t) {
            Some(p) => amp * Complex64::cis(x * x / (2.0 * t)) * p,
            None if u.norm() > MASS_THRESHOLD => {
                return Err(ModwaveError::BandLimit(format!(
                    "x/t = {:.3} leaves the frequency grid where the solution is not negligible",
                    x / t
                )))
            }
            None => Complex64::new(0.0, 0.0),
        };
        values.push(value);
    }
    PhysicalField::new(g.clone(), values)
}

/// `‖u(t) − (2π)^{-1/2}(it)^{-1/2} e^{ix²/2t} v(t, x/t)‖_∞`.
pub fn asymptotic_error(state: &EvolutionState, w: &FinalData, params: &SolverParams) -> Result<f64> {
    let t = state.t;
    if !(t > 0.0) {
        return Err(ModwaveError::InvalidTime { t, reason: "time must be positive" });
    }
    let rate = params.lambda.value() * RESONANT_COEFFICIENT * t.ln();
    let at = |xi: f64| interpolate(&w.w, xi).map(|z| z * Complex64::cis(-rate * z.norm_sqr()));
    let lead = stationary_phase_wave(&state.u, t, at)?;
    state.u.max_abs_diff(&lead)
}

/// `‖U(t)h − (2π)^{-1/2}(it)^{-1/2} e^{ix²/2t} ĥ(x/t)‖_∞` for a free wave.
pub fn stationary_phase_error(hhat: &FrequencyField, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(ModwaveError::InvalidTime { t, reason: "time must be positive" });
    }
    let u = hhat.propagate(t).inverse();
    let lead = stationary_phase_wave(&u, t, |xi| interpolate(hhat, xi))?;
    u.max_abs_diff(&lead)
}

/// `‖U(t)h‖_∞ / (t^{-1/2}‖ĥ‖_∞ + t^{-3/4}‖∂_ξĥ‖_2)`, zero for `h = 0`.
pub fn dispersive_ratio(hhat: &FrequencyField, t: f64) -> Result<f64> {
    if !(t >= 1.0) {
        return Err(ModwaveError::InvalidTime { t, reason: "dispersive ratio needs t >= 1" });
    }
    let nb = hhat.norms();
    let den = t.powf(-0.5) * nb.linf + t.powf(-0.75) * nb.dxi_l2;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(hhat.propagate(t).inverse().linf() / den)
}

/// One row of an evolution diagnostic series.
#[derive(Clone, Debug, Serialize)]
pub struct EvolutionSample {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub deviation: NormBundle,
    /// `t^α (‖·‖_∞ + ‖·‖_2 + ‖∂_ξ·‖_2/(1+log t))` of `f̂ − v`.
    pub weighted_sup: f64,
    pub asymptotic_error: f64,
    /// `‖u − u_app‖_∞`.
    pub correction_linf: f64,
}

/// Diagnostics of one state against the final data.
pub fn diagnose(state: &EvolutionState, w: &FinalData, params: &SolverParams) -> Result<EvolutionSample> {
    let deviation = scattering_deviation(state, w, params)?;
    let u_app = asymptotic_profile(w, state.t, params.lambda)?.propagate(state.t).inverse();
    Ok(EvolutionSample {
        t: state.t,
        mass: state.mass,
        energy: state.energy,
        weighted_sup: state.t.powf(params.alpha) * deviation.weighted_sum(state.t),
        deviation,
        asymptotic_error: asymptotic_error(state, w, params)?,
        correction_linf: state.u.max_abs_diff(&u_app)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::log_times;
    use crate::spectral::SpectralGrid;
    use std::sync::Arc;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn packet(g: &Arc<SpectralGrid>, amp: f64) -> PhysicalField {
        PhysicalField::from_fn(g, |x| Complex64::new(amp * (-x * x / 2.0).exp(), 0.0) * Complex64::cis(0.5 * x))
    }

    #[test]
    fn phase_substep_preserves_modulus() {
        let g = SpectralGrid::new(256, 40.0).unwrap();
        let u = packet(&g, 2.0);
        let v = nonlinear_phase(&u, 0.37, Sign::Minus);
        for (a, b) in u.values().iter().zip(v.values()) {
            assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_steps() {
        let g = SpectralGrid::new(64, 40.0).unwrap();
        let s = EvolutionState::new(0.0, packet(&g, 1.0), Sign::Plus);
        assert!(strang_step(&s, 0.0, Sign::Plus).is_err());
        assert!(evolve_with_step(&s.u, 1.0, &[0.5], Sign::Plus, 0.1).is_err());
    }

    #[test]
    fn linear_limit_is_free_flight() {
        let g = SpectralGrid::new(256, 40.0).unwrap();
        let u = packet(&g, 1e-8);
        let s = EvolutionState::new(0.0, u.clone(), Sign::Plus);
        let next = strang_step(&s, 0.1, Sign::Plus).unwrap();
        let free = u.forward().propagate(0.1).inverse();
        assert!(next.u.max_abs_diff(&free).unwrap() <= 1e-12 * free.linf());
        assert_eq!(next.step_count, 1);
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = SpectralGrid::new(64, 40.0).unwrap();
        let out = evolve_with_step(&PhysicalField::zeros(&g), 0.0, &[1.0, 2.0], Sign::Plus, 0.1).unwrap();
        assert!(out.iter().all(|s| s.u.linf() == 0.0 && s.mass == 0.0));
    }

    #[test]
    fn strang_is_second_order() {
        let g = SpectralGrid::new(512, 60.0).unwrap();
        let u0 = packet(&g, 1.0);
        for lambda in [Sign::Plus, Sign::Minus] {
            let fit = strang_order(&u0, lambda, 1.0, &[0.025, 0.05, 0.1]).unwrap();
            assert!((fit.slope - 2.0).abs() <= 0.1, "order {}", fit.slope);
        }
    }

    #[test]
    fn conservation_on_a_short_run() {
        let g = SpectralGrid::new(1024, 200.0).unwrap();
        for lambda in [Sign::Plus, Sign::Minus] {
            let u0 = packet(&g, 0.5);
            let out = evolve_with_step(&u0, 0.0, &[5.0, 10.0], lambda, 0.005).unwrap();
            let s0 = EvolutionState::new(0.0, u0, lambda);
            let last = out.last().unwrap();
            assert!((last.mass - s0.mass).abs() <= 1e-12 * s0.mass);
            let drift = (last.energy - s0.energy).abs() / s0.energy.abs();
            assert!(drift <= 1e-6, "energy drift {drift:e}");
            assert_eq!(last.t, 10.0);
            assert_eq!(last.step_count, 2000);
        }
    }

    #[test]
    fn energy_of_gaussian() {
        // u = e^{-x²/2}: ∫½|u_x|² = √π/4, ∫|u|⁴ = √(π/2).
        let g = SpectralGrid::new(1024, 60.0).unwrap();
        let u = PhysicalField::from_fn(&g, |x| c((-x * x / 2.0).exp()));
        let expected = PI.sqrt() / 4.0 + 0.5 * (PI / 2.0).sqrt();
        assert!((energy(&u, Sign::Plus) - expected).abs() < 1e-12);
    }

    #[test]
    fn profile_is_invariant_under_free_flow() {
        let g = SpectralGrid::new(1024, 400.0).unwrap();
        let u0 = packet(&g, 1.0);
        let f0 = u0.forward();
        for &t in &[0.0, 3.0, 40.0] {
            let s = EvolutionState::new(t, u0.forward().propagate(t).inverse(), Sign::Plus);
            assert!(extract_profile(&s).max_abs_diff(&f0).unwrap() < 1e-12);
        }
    }

    #[test]
    fn deviation_of_u_app_is_zero() {
        let p = SolverParams::on_grid(SpectralGrid::new(4096, 2000.0).unwrap()).with_times(10.0, 100.0);
        let w = FinalData::from_shape("gaussian", &p.grid, 0.05, 0).unwrap();
        let t = 20.0;
        let u = asymptotic_profile(&w, t, p.lambda).unwrap().propagate(t).inverse();
        let dev = scattering_deviation(&EvolutionState::new(t, u, p.lambda), &w, &p).unwrap();
        // Differencing amplifies rounding by 1/dξ² in the H² part.
        let scale = w.w.norms().h2;
        assert!(dev.linf < 1e-15 && dev.h2 < 1e-9 * scale, "{dev:?}");
    }

    #[test]
    fn interpolation_is_exact_on_cubics() {
        let g = SpectralGrid::new(64, 20.0).unwrap();
        let p = |xi: f64| Complex64::new(xi * xi * xi - 2.0 * xi, 0.5 * xi * xi);
        let f = FrequencyField::from_fn(&g, p);
        for &xi in &[-3.01, 0.0, 0.123, 4.4] {
            assert!((interpolate(&f, xi).unwrap() - p(xi)).norm() < 1e-10);
        }
        assert!(interpolate(&f, 100.0).is_none());
    }

    #[test]
    fn dispersive_ratio_of_gaussian_matches_closed_form() {
        // ĥ = √(2π) e^{-ξ²/2}, ‖U(t)h‖_∞ = (1+t²)^{-1/4}.
        let g = SpectralGrid::new(8192, 4000.0).unwrap();
        let hhat = FrequencyField::from_fn(&g, |xi| c((2.0 * PI).sqrt() * (-xi * xi / 2.0).exp()));
        let linf = (2.0 * PI).sqrt();
        let dxi = (2.0 * PI).sqrt() * (PI.sqrt() / 2.0).sqrt();
        for t in [1.0f64, 10.0, 100.0] {
            let expected = (1.0 + t * t).powf(-0.25) / (t.powf(-0.5) * linf + t.powf(-0.75) * dxi);
            let got = dispersive_ratio(&hhat, t).unwrap();
            assert!((got - expected).abs() < 1e-6 * expected, "t = {t}");
        }
        assert_eq!(dispersive_ratio(&FrequencyField::zeros(&g), 5.0).unwrap(), 0.0);
        assert!(dispersive_ratio(&hhat, 0.5).is_err());
    }

    #[test]
    fn stationary_phase_error_decays() {
        let g = SpectralGrid::new(8192, 4000.0).unwrap();
        let hhat = FrequencyField::from_fn(&g, |xi| Complex64::new((-xi * xi).exp(), 0.3 * xi * (-xi * xi).exp()));
        let samples: Vec<(f64, f64)> = log_times(10.0, 1000.0, 7)
            .into_iter()
            .map(|t| (t, stationary_phase_error(&hhat, t).unwrap()))
            .collect();
        let fit = fit_decay(&samples, 0).unwrap();
        assert!(fit.slope <= -0.7, "slope {}", fit.slope);
    }

    #[test]
    fn asymptotic_error_flags_escaping_mass() {
        let g = SpectralGrid::new(256, 400.0).unwrap();
        let p = SolverParams::on_grid(Arc::clone(&g));
        let w = FinalData::measure(FrequencyField::zeros(&g));
        // A wide packet at t = 1 reaches x/t beyond ξ_max ≈ 2.
        let s = EvolutionState::new(1.0, packet(&g, 1.0).map(|z| z * 0.0 + 1e-3), p.lambda);
        assert!(asymptotic_error(&s, &w, &p).is_err());
        let zero = EvolutionState::new(1.0, PhysicalField::zeros(&g), p.lambda);
        assert_eq!(asymptotic_error(&zero, &w, &p).unwrap(), 0.0);
    }
}

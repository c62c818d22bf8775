//! Backward Duhamel integrals on a log-spaced time grid and Picard iteration
//! of the fixed-point map for the correction profile `g = U(−t)w`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ModwaveError, Result};
use crate::fit::fit_decay;
use crate::profile::{asymptotic_profile, FinalData, SolverParams};
use crate::spectral::{xt_weight, FrequencyField, SpectralGrid};
use crate::trilinear::{cubic_difference, pulled_back_forcing};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Norm above which an iteration is declared divergent.
pub const BLOW_UP_THRESHOLD: f64 = 1e6;

/// Log-spaced nodes `T = s_0 < … < s_{n−1} = t_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    pub fn log_spaced(start: f64, end: f64, count: usize) -> Result<Arc<Self>> {
        if !(start >= 2.0 && end > start && end.is_finite()) {
            return Err(ModwaveError::InvalidParams(format!(
                "time grid needs 2 <= start < end, got [{start}, {end}]"
            )));
        }
        if count < 2 {
            return Err(ModwaveError::InvalidParams("time grid needs at least 2 nodes".into()));
        }
        let h = (end / start).ln() / (count - 1) as f64;
        let mut nodes: Vec<f64> = (0..count).map(|k| start * (h * k as f64).exp()).collect();
        nodes[count - 1] = end;
        Ok(Arc::new(Self { nodes }))
    }

    pub fn from_params(params: &SolverParams) -> Result<Arc<Self>> {
        Self::log_spaced(params.start_time, params.t_max, params.time_grid_points)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Spacing in `log s`.
    pub fn log_step(&self) -> f64 {
        (self.nodes[self.len() - 1] / self.nodes[0]).ln() / (self.len() - 1) as f64
    }
}

/// Samples of a frequency-space profile at every node of a time grid.
#[derive(Clone, Debug)]
pub struct ProfileTrajectory {
    time_grid: Arc<TimeGrid>,
    fields: Vec<FrequencyField>,
}

impl ProfileTrajectory {
    pub fn new(time_grid: Arc<TimeGrid>, fields: Vec<FrequencyField>) -> Result<Self> {
        if fields.len() != time_grid.len() {
            return Err(ModwaveError::GridMismatch(format!(
                "{} fields for {} time nodes",
                fields.len(),
                time_grid.len()
            )));
        }
        if let Some(first) = fields.first() {
            for f in &fields[1..] {
                first.grid().ensure_same(f.grid())?;
            }
        }
        Ok(Self { time_grid, fields })
    }

    pub fn zeros(time_grid: &Arc<TimeGrid>, grid: &Arc<SpectralGrid>) -> Self {
        let fields = (0..time_grid.len()).map(|_| FrequencyField::zeros(grid)).collect();
        Self { time_grid: Arc::clone(time_grid), fields }
    }

    /// Builds each node from `f(t_k)`.
    pub fn from_fn(time_grid: &Arc<TimeGrid>, f: impl Fn(f64) -> FrequencyField) -> Result<Self> {
        let fields = time_grid.nodes().iter().map(|&t| f(t)).collect();
        Self::new(Arc::clone(time_grid), fields)
    }

    pub fn time_grid(&self) -> &Arc<TimeGrid> {
        &self.time_grid
    }

    pub fn fields(&self) -> &[FrequencyField] {
        &self.fields
    }

    pub fn field(&self, k: usize) -> &FrequencyField {
        &self.fields[k]
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        self.fields[0].grid()
    }

    fn ensure_compatible(&self, other: &Self) -> Result<()> {
        if self.time_grid.nodes() != other.time_grid.nodes() {
            return Err(ModwaveError::GridMismatch("trajectories use different time grids".into()));
        }
        self.grid().ensure_same(other.grid())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.ensure_compatible(other)?;
        let fields = self.fields.iter().zip(&other.fields).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        Ok(Self { time_grid: Arc::clone(&self.time_grid), fields })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.ensure_compatible(other)?;
        let fields = self.fields.iter().zip(&other.fields).map(|(a, b)| a.sub(b)).collect::<Result<_>>()?;
        Ok(Self { time_grid: Arc::clone(&self.time_grid), fields })
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            time_grid: Arc::clone(&self.time_grid),
            fields: self.fields.iter().map(|f| f.scaled(c)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.fields.iter().all(|f| f.is_finite())
    }
}

/// `‖g‖_{X_T} = max_k t_k^α (‖ĝ‖_∞ + ‖ĝ‖_2 + ‖∂_ξĝ‖_2 / (1 + log t_k))`.
pub fn xt_norm(g: &ProfileTrajectory, alpha: f64) -> Result<f64> {
    g.time_grid
        .nodes()
        .par_iter()
        .zip(g.fields.par_iter())
        .map(|(&t, f)| xt_weight(t, f, alpha))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// A backward integral together with its truncation-tail estimate.
#[derive(Clone, Debug)]
pub struct DuhamelTerm {
    pub trajectory: ProfileTrajectory,
    /// Estimated `‖∫_{t_max}^∞ (…) ds‖_∞`, reported and never added.
    pub tail_estimate: f64,
}

/// `∫_{t_k}^{t_max} F(s) ds` for every node `k`, by the trapezoid rule in
/// `τ = log s` applied to `s·F(s)`, accumulated from the top node.
pub fn backward_integrals(integrand: &ProfileTrajectory) -> Result<DuhamelTerm> {
    let tg = &integrand.time_grid;
    let n = tg.len();
    let h = tg.log_step();
    let grid = Arc::clone(integrand.grid());
    let weighted: Vec<Vec<Complex64>> = tg
        .nodes()
        .iter()
        .zip(&integrand.fields)
        .map(|(&s, f)| f.values().iter().map(|z| z * s).collect())
        .collect();
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.num_points()];
    let mut out = vec![FrequencyField::zeros(&grid); n];
    for k in (0..n - 1).rev() {
        for ((a, hi), lo) in acc.iter_mut().zip(&weighted[k + 1]).zip(&weighted[k]) {
            *a += 0.5 * h * (hi + lo);
        }
        out[k] = FrequencyField::new(Arc::clone(&grid), acc.clone())?;
    }
    let tail_estimate = tail_estimate(integrand)?;
    Ok(DuhamelTerm {
        trajectory: ProfileTrajectory { time_grid: Arc::clone(tg), fields: out },
        tail_estimate,
    })
}

/// Single-node form of [`backward_integrals`].
pub fn backward_integral(integrand: &ProfileTrajectory, k: usize) -> Result<FrequencyField> {
    if k >= integrand.time_grid.len() {
        return Err(ModwaveError::InvalidParams(format!("node index {k} out of range")));
    }
    Ok(backward_integrals(integrand)?.trajectory.fields[k].clone())
}

/// Fits `A s^{−1−β}` to `‖F(s)‖_∞` over the last decade and returns
/// `A t_max^{−β} / β`, or infinity when `β ≤ 0`.
fn tail_estimate(integrand: &ProfileTrajectory) -> Result<f64> {
    let nodes = integrand.time_grid.nodes();
    let t_max = nodes[nodes.len() - 1];
    let samples: Vec<(f64, f64)> = nodes
        .iter()
        .zip(&integrand.fields)
        .filter(|(&s, _)| s >= t_max / 10.0 * (1.0 - 1e-12))
        .map(|(&s, f)| (s, f.linf()))
        .collect();
    let positive: Vec<(f64, f64)> = samples.iter().copied().filter(|&(_, v)| v > 0.0).collect();
    if positive.is_empty() {
        return Ok(0.0);
    }
    if positive.len() < 3 {
        return Err(ModwaveError::TailFit("fewer than 3 nonzero samples in the last decade".into()));
    }
    let fit = fit_decay(&positive, 0)?;
    if fit.slope >= 0.0 {
        return Err(ModwaveError::TailFit(format!(
            "integrand norm is not decreasing over the last decade (slope {:.3})",
            fit.slope
        )));
    }
    let beta = -1.0 - fit.slope;
    // Decreasing but not integrable: the neglected tail is unbounded.
    if beta <= 0.0 {
        log::warn!("integrand decays like s^{:.3} over the last decade; tail estimate is infinite", fit.slope);
        return Ok(f64::INFINITY);
    }
    Ok(fit.intercept.exp() * t_max.powf(fit.slope) * t_max / beta)
}

/// `Φ_ε(t) = −i ∫_t^∞ Û(−s) ε(s) ds`, truncated at `t_max`.
pub fn phi_eps(w: &FinalData, params: &SolverParams, tg: &Arc<TimeGrid>) -> Result<DuhamelTerm> {
    let fields = tg
        .nodes()
        .par_iter()
        .map(|&s| Ok(pulled_back_forcing(w, s, params)?.scaled(-I)))
        .collect::<Result<Vec<_>>>()?;
    backward_integrals(&ProfileTrajectory::new(Arc::clone(tg), fields)?)
}

/// `Φ_nl(g)(t) = iλ ∫_t^∞ Û(−s)(|u|²u − |u_app|²u_app)(s) ds` with `u = u_app + U(s)g`.
pub fn phi_nl(g: &ProfileTrajectory, w: &FinalData, params: &SolverParams) -> Result<DuhamelTerm> {
    let tg = g.time_grid();
    let c = I * params.lambda.value();
    let fields = tg
        .nodes()
        .par_iter()
        .zip(g.fields.par_iter())
        .map(|(&s, gk)| {
            let u_app = asymptotic_profile(w, s, params.lambda)?.propagate(s).inverse();
            let corr = gk.propagate(s).inverse();
            Ok(cubic_difference(&u_app, &corr)?.forward().propagate(-s).scaled(c))
        })
        .collect::<Result<Vec<_>>>()?;
    backward_integrals(&ProfileTrajectory::new(Arc::clone(tg), fields)?)
}

/// `Φ(g) = Φ_nl(g) + Φ_ε`.
pub fn apply_phi(
    g: &ProfileTrajectory,
    w: &FinalData,
    params: &SolverParams,
    phi_eps_cached: &DuhamelTerm,
) -> Result<DuhamelTerm> {
    let nl = phi_nl(g, w, params)?;
    Ok(DuhamelTerm {
        trajectory: nl.trajectory.add(&phi_eps_cached.trajectory)?,
        tail_estimate: nl.tail_estimate + phi_eps_cached.tail_estimate,
    })
}

/// Progress of a Picard iteration.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PicardReport {
    pub iterates: usize,
    /// `‖g_n‖_{X_T}` for `n = 1, 2, …`.
    pub xt_norms: Vec<f64>,
    /// `‖g_{n+1} − g_n‖_{X_T}`.
    pub step_distances: Vec<f64>,
    /// Quotients of successive step distances.
    pub contraction_ratios: Vec<f64>,
    pub converged: bool,
    pub tail_estimate: f64,
    pub phi_eps_norm: f64,
    /// Ball radius `M = 2‖Φ_ε‖_{X_T}`.
    pub ball_radius: f64,
    /// `‖Φ(g*) − g*‖_{X_T}` for the returned iterate.
    pub fixed_point_residual: f64,
}

fn guard(value: f64, what: &str) -> Result<()> {
    if !value.is_finite() || value > BLOW_UP_THRESHOLD {
        return Err(ModwaveError::BlowUp(format!("{what} reached {value:e}")));
    }
    Ok(())
}

/// Picard iteration from `g_0 = 0`.
pub fn picard_iterate(
    w: &FinalData,
    params: &SolverParams,
    max_iter: usize,
    tol: f64,
) -> Result<(ProfileTrajectory, PicardReport)> {
    params.validate()?;
    let tg = TimeGrid::from_params(params)?;
    let cached = phi_eps(w, params, &tg)?;
    let start = ProfileTrajectory::zeros(&tg, &params.grid);
    picard_from(start, w, params, &cached, max_iter, tol)
}

/// Picard iteration from a given start with a precomputed `Φ_ε`.
pub fn picard_from(
    start: ProfileTrajectory,
    w: &FinalData,
    params: &SolverParams,
    phi_eps_cached: &DuhamelTerm,
    max_iter: usize,
    tol: f64,
) -> Result<(ProfileTrajectory, PicardReport)> {
    if !(tol > 0.0) {
        return Err(ModwaveError::InvalidParams(format!("tolerance must be positive, got {tol}")));
    }
    let phi_eps_norm = xt_norm(&phi_eps_cached.trajectory, params.alpha)?;
    let mut report = PicardReport {
        phi_eps_norm,
        ball_radius: 2.0 * phi_eps_norm,
        ..PicardReport::default()
    };
    let mut g = start;
    let mut next = apply_phi(&g, w, params, phi_eps_cached)?;
    for _ in 0..max_iter {
        let dist = xt_norm(&next.trajectory.sub(&g)?, params.alpha)?;
        let norm = xt_norm(&next.trajectory, params.alpha)?;
        guard(norm, "iterate norm")?;
        guard(dist, "step distance")?;
        if let Some(&prev) = report.step_distances.last() {
            report.contraction_ratios.push(if prev > 0.0 { dist / prev } else { 0.0 });
        }
        report.iterates += 1;
        report.xt_norms.push(norm);
        report.step_distances.push(dist);
        report.tail_estimate = next.tail_estimate;
        g = next.trajectory;
        log::debug!("picard {}: |g| = {norm:.3e}, step = {dist:.3e}", report.iterates);
        next = apply_phi(&g, w, params, phi_eps_cached)?;
        if dist <= tol {
            report.converged = true;
            break;
        }
    }
    report.fixed_point_residual = xt_norm(&next.trajectory.sub(&g)?, params.alpha)?;
    Ok((g, report))
}

/// `‖Φ(g₁) − Φ(g₂)‖_{X_T} / ‖g₁ − g₂‖_{X_T}`.
pub fn contraction_probe(
    g1: &ProfileTrajectory,
    g2: &ProfileTrajectory,
    w: &FinalData,
    params: &SolverParams,
) -> Result<f64> {
    let den = xt_norm(&g1.sub(g2)?, params.alpha)?;
    if den == 0.0 {
        return Err(ModwaveError::InvalidParams("contraction probe needs g1 != g2".into()));
    }
    let a = phi_nl(g1, w, params)?.trajectory;
    let b = phi_nl(g2, w, params)?.trajectory;
    Ok(xt_norm(&a.sub(&b)?, params.alpha)? / den)
}

/// Smooth test trajectory `r · t^{−α'} · bump(ξ)` scaled to X_T norm `radius`.
pub fn probe_trajectory(
    tg: &Arc<TimeGrid>,
    grid: &Arc<SpectralGrid>,
    radius: f64,
    alpha: f64,
    phase: f64,
) -> Result<ProfileTrajectory> {
    let shape = FrequencyField::from_fn(grid, |xi| {
        Complex64::new((-(xi - 0.3) * (xi - 0.3)).exp(), 0.5 * (-(xi + 0.4) * (xi + 0.4) * 2.0).exp())
            * Complex64::cis(phase * xi)
    });
    let raw = ProfileTrajectory::from_fn(tg, |t| shape.scaled(Complex64::new(t.powf(-2.0 * alpha), 0.0)))?;
    let norm = xt_norm(&raw, alpha)?;
    Ok(raw.scaled(Complex64::new(radius / norm, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{make_final_data, Sign};

    fn small_params() -> SolverParams {
        let grid = SpectralGrid::new(4096, 2500.0).unwrap();
        SolverParams::on_grid(grid).with_times(10.0, 100.0)
    }

    #[test]
    fn time_grid_is_geometric() {
        let tg = TimeGrid::log_spaced(10.0, 1000.0, 129).unwrap();
        assert_eq!(tg.nodes()[0], 10.0);
        assert_eq!(tg.nodes()[128], 1000.0);
        let r0 = tg.nodes()[1] / tg.nodes()[0];
        for w in tg.nodes().windows(2) {
            assert!((w[1] / w[0] - r0).abs() < 1e-12);
        }
        assert!(TimeGrid::log_spaced(1.0, 10.0, 5).is_err());
        assert!(TimeGrid::log_spaced(10.0, 100.0, 1).is_err());
    }

    fn power_law(tg: &Arc<TimeGrid>, grid: &Arc<SpectralGrid>, alpha: f64) -> ProfileTrajectory {
        ProfileTrajectory::from_fn(tg, |s| FrequencyField::from_fn(grid, |_| Complex64::new(s.powf(-1.0 - alpha), 0.0)))
            .unwrap()
    }

    #[test]
    fn zero_integrand() {
        let grid = SpectralGrid::new(8, 1.0).unwrap();
        let tg = TimeGrid::log_spaced(10.0, 1000.0, 20).unwrap();
        let z = ProfileTrajectory::zeros(&tg, &grid);
        let d = backward_integrals(&z).unwrap();
        assert_eq!(d.tail_estimate, 0.0);
        assert!(d.trajectory.fields().iter().all(|f| f.linf() == 0.0));
        assert_eq!(backward_integral(&z, 3).unwrap().linf(), 0.0);
    }

    #[test]
    fn power_law_quadrature() {
        let grid = SpectralGrid::new(8, 1.0).unwrap();
        let alpha = 0.1;
        let (t0, t1) = (10.0, 1000.0);
        let tg = TimeGrid::log_spaced(t0, t1, 201).unwrap();
        let d = backward_integrals(&power_law(&tg, &grid, alpha)).unwrap();
        for (k, &t) in tg.nodes().iter().enumerate().step_by(20) {
            let exact = (t.powf(-alpha) - t1.powf(-alpha)) / alpha;
            let got = d.trajectory.field(k).values()[0].re;
            if exact > 0.0 {
                assert!((got - exact).abs() <= 5e-3 * exact, "t = {t}");
            }
        }
        let tail = t1.powf(-alpha) / alpha;
        assert!((d.tail_estimate - tail).abs() < 1e-6 * tail);
    }

    #[test]
    fn quadrature_is_second_order() {
        let grid = SpectralGrid::new(8, 1.0).unwrap();
        let alpha = 0.3;
        let exact = (10f64.powf(-alpha) - 1000f64.powf(-alpha)) / alpha;
        let err = |n: usize| {
            let tg = TimeGrid::log_spaced(10.0, 1000.0, n).unwrap();
            let d = backward_integrals(&power_law(&tg, &grid, alpha)).unwrap();
            (d.trajectory.field(0).values()[0].re - exact).abs()
        };
        let ratio = err(21) / err(41);
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn non_decaying_integrand_is_rejected() {
        let grid = SpectralGrid::new(8, 1.0).unwrap();
        let tg = TimeGrid::log_spaced(10.0, 1000.0, 30).unwrap();
        let grow = ProfileTrajectory::from_fn(&tg, |s| FrequencyField::from_fn(&grid, |_| Complex64::new(s, 0.0))).unwrap();
        assert!(matches!(backward_integrals(&grow), Err(ModwaveError::TailFit(_))));
    }

    #[test]
    fn slowly_decaying_integrand_has_infinite_tail() {
        let grid = SpectralGrid::new(8, 1.0).unwrap();
        let tg = TimeGrid::log_spaced(10.0, 1000.0, 30).unwrap();
        let slow =
            ProfileTrajectory::from_fn(&tg, |s| FrequencyField::from_fn(&grid, |_| Complex64::new(s.powf(-0.5), 0.0)))
                .unwrap();
        let d = backward_integrals(&slow).unwrap();
        assert!(d.tail_estimate.is_infinite());
        assert!(d.trajectory.field(0).is_finite());
    }

    #[test]
    fn xt_norm_cases() {
        let grid = SpectralGrid::new(256, 40.0).unwrap();
        let tg = TimeGrid::log_spaced(10.0, 100.0, 11).unwrap();
        assert_eq!(xt_norm(&ProfileTrajectory::zeros(&tg, &grid), 0.1).unwrap(), 0.0);

        let bump = FrequencyField::from_fn(&grid, |xi| Complex64::new((-xi * xi).exp(), 0.0));
        let mut single = ProfileTrajectory::zeros(&tg, &grid);
        single.fields[4] = bump.clone();
        let t4 = tg.nodes()[4];
        assert_eq!(xt_norm(&single, 0.1).unwrap(), xt_weight(t4, &bump, 0.1).unwrap());

        // ĝ(t) = t^{−α} bump: the weight cancels apart from the log factor,
        // which is maximal at the first node.
        let alpha = 0.1;
        let g = ProfileTrajectory::from_fn(&tg, |t| bump.scaled(Complex64::new(t.powf(-alpha), 0.0))).unwrap();
        let nb = bump.norms();
        let expected = nb.linf + nb.l2 + nb.dxi_l2 / (1.0 + 10f64.ln());
        assert!((xt_norm(&g, alpha).unwrap() - expected).abs() < 1e-10 * expected);
    }

    #[test]
    fn trajectory_shape_checks() {
        let grid = SpectralGrid::new(8, 1.0).unwrap();
        let other = SpectralGrid::new(16, 1.0).unwrap();
        let tg = TimeGrid::log_spaced(10.0, 100.0, 3).unwrap();
        assert!(ProfileTrajectory::new(Arc::clone(&tg), vec![FrequencyField::zeros(&grid)]).is_err());
        let mixed = vec![FrequencyField::zeros(&grid), FrequencyField::zeros(&other), FrequencyField::zeros(&grid)];
        assert!(ProfileTrajectory::new(tg, mixed).is_err());
    }

    #[test]
    fn zero_data_fixed_point() {
        let mut p = small_params();
        p.eps0 = 0.0;
        let w = make_final_data("gaussian", &p, 0).unwrap();
        let (g, rep) = picard_iterate(&w, &p, 10, 1e-12).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterates, 1);
        assert_eq!(xt_norm(&g, p.alpha).unwrap(), 0.0);
    }

    #[test]
    fn phi_of_zero_is_phi_eps() {
        let p = small_params();
        let w = make_final_data("gaussian", &p, 0).unwrap();
        let tg = TimeGrid::from_params(&p).unwrap();
        let cached = phi_eps(&w, &p, &tg).unwrap();
        let z = ProfileTrajectory::zeros(&tg, &p.grid);
        let out = apply_phi(&z, &w, &p, &cached).unwrap();
        for (a, b) in out.trajectory.fields().iter().zip(cached.trajectory.fields()) {
            assert_eq!(a.values(), b.values());
        }
    }

    #[test]
    fn phi_eps_is_cubic_in_eps0() {
        let mut p = small_params();
        let tg = TimeGrid::from_params(&p).unwrap();
        let w1 = make_final_data("gaussian", &p, 0).unwrap();
        p.eps0 /= 2.0;
        let w2 = make_final_data("gaussian", &p, 0).unwrap();
        let n1 = xt_norm(&phi_eps(&w1, &p, &tg).unwrap().trajectory, p.alpha).unwrap();
        let n2 = xt_norm(&phi_eps(&w2, &p, &tg).unwrap().trajectory, p.alpha).unwrap();
        assert!((n1 / n2 / 8.0 - 1.0).abs() < 0.1, "ratio {}", n1 / n2);
    }

    #[test]
    fn difference_of_images_ignores_the_cache() {
        let p = small_params();
        let w = make_final_data("gaussian", &p, 0).unwrap();
        let tg = TimeGrid::from_params(&p).unwrap();
        let cached = phi_eps(&w, &p, &tg).unwrap();
        let mut perturbed = cached.clone();
        perturbed.trajectory = cached.trajectory.add(&probe_trajectory(&tg, &p.grid, 1e-3, p.alpha, 1.0).unwrap()).unwrap();
        let g1 = probe_trajectory(&tg, &p.grid, 1e-6, p.alpha, 0.0).unwrap();
        let g2 = probe_trajectory(&tg, &p.grid, 3e-6, p.alpha, 2.0).unwrap();
        let d = |c: &DuhamelTerm| {
            apply_phi(&g1, &w, &p, c).unwrap().trajectory.sub(&apply_phi(&g2, &w, &p, c).unwrap().trajectory).unwrap()
        };
        let (a, b) = (d(&cached), d(&perturbed));
        // Only rounding of the added cache survives the difference.
        let scale = xt_norm(&perturbed.trajectory, p.alpha).unwrap();
        assert!(xt_norm(&a, p.alpha).unwrap() > 1e3 * f64::EPSILON * scale);
        assert!(xt_norm(&a.sub(&b).unwrap(), p.alpha).unwrap() <= 1e-13 * scale);
    }

    #[test]
    fn picard_contracts_for_both_signs() {
        for lambda in [Sign::Plus, Sign::Minus] {
            let mut p = small_params();
            p.lambda = lambda;
            let w = make_final_data("gaussian", &p, 0).unwrap();
            let (_, rep) = picard_iterate(&w, &p, 15, 1e-12).unwrap();
            assert!(rep.converged, "{rep:?}");
            assert!(rep.contraction_ratios.iter().all(|&r| r <= 0.5), "{rep:?}");
            assert!(rep.fixed_point_residual <= 2e-12);
        }
    }

    #[test]
    fn contraction_probe_rejects_equal_inputs() {
        let p = small_params();
        let w = make_final_data("gaussian", &p, 0).unwrap();
        let tg = TimeGrid::from_params(&p).unwrap();
        let g = probe_trajectory(&tg, &p.grid, 1e-6, p.alpha, 0.0).unwrap();
        assert!(contraction_probe(&g, &g, &w, &p).is_err());
    }
}

//! Periodic-box discretization of the line.
//!
//! The transform pair follows the continuum convention
//! `f̂(ξ) = ∫ e^{-ixξ} f(x) dx`, `f(x) = (2π)^{-1} ∫ e^{ixξ} f̂(ξ) dξ`,
//! so `dx` and `dξ / 2π` are folded into the discrete transforms and the
//! Plancherel constant `(2π)^{-1/2}` appears literally. Frequency samples
//! are stored in monotone order `ξ_k = k·dξ`, `k = -N/2 .. N/2-1`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{ModwaveError, Result};

/// Spatial grid on `[-L/2, L/2)` together with its matched frequency grid.
pub struct SpectralGrid {
    num_points: usize,
    box_length: f64,
    dx: f64,
    dxi: f64,
    xs: Vec<f64>,
    frequencies: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("num_points", &self.num_points)
            .field("box_length", &self.box_length)
            .finish()
    }
}

impl SpectralGrid {
    pub fn new(num_points: usize, box_length: f64) -> Result<Arc<Self>> {
        if num_points < 8 || !num_points.is_power_of_two() {
            return Err(ModwaveError::InvalidGrid(format!(
                "num_points must be a power of two >= 8, got {num_points}"
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(ModwaveError::InvalidGrid(format!(
                "box_length must be positive, got {box_length}"
            )));
        }
        let dx = box_length / num_points as f64;
        let dxi = 2.0 * PI / box_length;
        let half = (num_points / 2) as isize;
        let xs = (0..num_points)
            .map(|j| -0.5 * box_length + j as f64 * dx)
            .collect();
        let frequencies = (0..num_points as isize)
            .map(|i| (i - half) as f64 * dxi)
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(num_points);
        let ifft = planner.plan_fft_inverse(num_points);
        Ok(Arc::new(Self {
            num_points,
            box_length,
            dx,
            dxi,
            xs,
            frequencies,
            fft,
            ifft,
        }))
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dxi(&self) -> f64 {
        self.dxi
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    /// Monotone frequency samples.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// Largest |ξ| on the grid, `π N / L`.
    pub fn xi_max(&self) -> f64 {
        PI * self.num_points as f64 / self.box_length
    }

    pub fn same_as(&self, other: &SpectralGrid) -> bool {
        self.num_points == other.num_points && self.box_length == other.box_length
    }

    pub(crate) fn ensure_same(&self, other: &SpectralGrid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(ModwaveError::GridMismatch(format!(
                "({}, {}) vs ({}, {})",
                self.num_points, self.box_length, other.num_points, other.box_length
            )))
        }
    }

    /// Index into the transform-natural ordering for monotone index `i`,
    /// plus the `(-1)^k` phase that accounts for the box offset `-L/2`.
    #[inline]
    fn natural_index(&self, i: usize) -> (usize, f64) {
        let n = self.num_points as isize;
        let k = i as isize - n / 2;
        let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        (k.rem_euclid(n) as usize, sign)
    }

    /// Nearest grid index (monotone ordering) to the frequency `xi`, if any.
    pub fn nearest_frequency_index(&self, xi: f64) -> Option<usize> {
        let pos = xi / self.dxi + (self.num_points / 2) as f64;
        let i = pos.round();
        if i < 0.0 || i >= self.num_points as f64 {
            None
        } else {
            Some(i as usize)
        }
    }
}

macro_rules! field_common {
    ($name:ident, $what:literal) => {
        impl $name {
            pub fn new(grid: Arc<SpectralGrid>, values: Vec<Complex64>) -> Result<Self> {
                if values.len() != grid.num_points() {
                    return Err(ModwaveError::GridMismatch(format!(
                        "{} values for a {}-point grid",
                        values.len(),
                        grid.num_points()
                    )));
                }
                if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                    return Err(ModwaveError::NonFinite($what));
                }
                Ok(Self { grid, values })
            }

            pub(crate) fn from_parts(grid: Arc<SpectralGrid>, values: Vec<Complex64>) -> Self {
                debug_assert_eq!(values.len(), grid.num_points());
                Self { grid, values }
            }

            pub fn zeros(grid: &Arc<SpectralGrid>) -> Self {
                let n = grid.num_points();
                Self {
                    grid: Arc::clone(grid),
                    values: vec![Complex64::new(0.0, 0.0); n],
                }
            }

            pub fn grid(&self) -> &Arc<SpectralGrid> {
                &self.grid
            }

            pub fn values(&self) -> &[Complex64] {
                &self.values
            }

            pub fn into_values(self) -> Vec<Complex64> {
                self.values
            }

            pub fn is_finite(&self) -> bool {
                self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
            }

            pub fn linf(&self) -> f64 {
                self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
            }

            pub fn scaled(&self, c: Complex64) -> Self {
                self.map(|z| z * c)
            }

            pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
                Self {
                    grid: Arc::clone(&self.grid),
                    values: self.values.iter().map(|&z| f(z)).collect(),
                }
            }

            pub fn zip_map(
                &self,
                other: &Self,
                f: impl Fn(Complex64, Complex64) -> Complex64,
            ) -> Result<Self> {
                self.grid.ensure_same(&other.grid)?;
                Ok(Self {
                    grid: Arc::clone(&self.grid),
                    values: self
                        .values
                        .iter()
                        .zip(&other.values)
                        .map(|(&a, &b)| f(a, b))
                        .collect(),
                })
            }

            pub fn add(&self, other: &Self) -> Result<Self> {
                self.zip_map(other, |a, b| a + b)
            }

            pub fn sub(&self, other: &Self) -> Result<Self> {
                self.zip_map(other, |a, b| a - b)
            }

            /// Largest pointwise modulus of `self - other`.
            pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
                self.grid.ensure_same(&other.grid)?;
                Ok(self
                    .values
                    .iter()
                    .zip(&other.values)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max))
            }
        }
    };
}

/// Samples of a function of `x`.
#[derive(Clone, Debug)]
pub struct PhysicalField {
    grid: Arc<SpectralGrid>,
    values: Vec<Complex64>,
}

/// Samples of a function of `ξ`, monotone ordering.
#[derive(Clone, Debug)]
pub struct FrequencyField {
    grid: Arc<SpectralGrid>,
    values: Vec<Complex64>,
}

field_common!(PhysicalField, "physical field");
field_common!(FrequencyField, "frequency field");

impl PhysicalField {
    pub fn from_fn(grid: &Arc<SpectralGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.xs().iter().map(|&x| f(x)).collect();
        Self::from_parts(Arc::clone(grid), values)
    }

    /// `sqrt(dx Σ |f|²)`.
    pub fn l2(&self) -> f64 {
        (self.grid.dx() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn forward(&self) -> FrequencyField {
        forward_transform(self)
    }
}

impl FrequencyField {
    pub fn from_fn(grid: &Arc<SpectralGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.frequencies().iter().map(|&xi| f(xi)).collect();
        Self::from_parts(Arc::clone(grid), values)
    }

    /// Pointwise multiplier depending on `ξ`.
    pub fn map_with_xi(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let values = self
            .grid
            .frequencies()
            .iter()
            .zip(&self.values)
            .map(|(&xi, &z)| f(xi, z))
            .collect();
        Self::from_parts(Arc::clone(&self.grid), values)
    }

    /// `sqrt(dξ Σ |F|²)`.
    pub fn l2(&self) -> f64 {
        l2_xi(&self.values, self.grid.dxi())
    }

    pub fn inverse(&self) -> PhysicalField {
        inverse_transform(self)
    }

    pub fn propagate(&self, t: f64) -> FrequencyField {
        free_propagate(self, t)
    }

    pub fn xi_derivative(&self) -> XiDerivative {
        xi_derivative(self)
    }

    pub fn norms(&self) -> NormBundle {
        norms(self)
    }

    /// Fraction of `Σ|F|²` carried by the outer 10% of frequencies on each side.
    pub fn outer_band_fraction(&self) -> f64 {
        let cut = 0.9 * self.grid.xi_max();
        let mut outer = 0.0;
        let mut total = 0.0;
        for (&xi, z) in self.grid.frequencies().iter().zip(&self.values) {
            let m = z.norm_sqr();
            total += m;
            if xi.abs() > cut {
                outer += m;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outer / total
        }
    }
}

fn l2_xi(values: &[Complex64], dxi: f64) -> f64 {
    (dxi * values.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}

/// Continuum-normalized transform `f̂(ξ_k) = dx Σ_j e^{-i x_j ξ_k} f(x_j)`.
pub fn forward_transform(f: &PhysicalField) -> FrequencyField {
    let grid = f.grid();
    let n = grid.num_points();
    let mut buf = f.values().to_vec();
    grid.fft.process(&mut buf);
    let dx = grid.dx();
    let values = (0..n)
        .map(|i| {
            let (idx, sign) = grid.natural_index(i);
            buf[idx] * (sign * dx)
        })
        .collect();
    FrequencyField::from_parts(Arc::clone(grid), values)
}

/// Inverse of [`forward_transform`]: `f(x_j) = (dξ/2π) Σ_k e^{i x_j ξ_k} f̂(ξ_k)`.
pub fn inverse_transform(fhat: &FrequencyField) -> PhysicalField {
    let grid = fhat.grid();
    let n = grid.num_points();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (i, &z) in fhat.values().iter().enumerate() {
        let (idx, sign) = grid.natural_index(i);
        buf[idx] = z * sign;
    }
    grid.ifft.process(&mut buf);
    let scale = 1.0 / grid.box_length();
    for z in &mut buf {
        *z *= scale;
    }
    PhysicalField::from_parts(Arc::clone(grid), buf)
}

/// Free Schrödinger flow in frequency space: multiplication by `e^{-itξ²/2}`.
pub fn free_propagate(fhat: &FrequencyField, t: f64) -> FrequencyField {
    fhat.map_with_xi(|xi, z| z * Complex64::cis(-0.5 * t * xi * xi))
}

/// Spectral `∂_xx` of a physical field.
pub fn spectral_dxx(u: &PhysicalField) -> PhysicalField {
    forward_transform(u)
        .map_with_xi(|xi, z| -xi * xi * z)
        .inverse()
}

/// Result of a ξ-derivative together with a reliability flag.
#[derive(Clone, Debug)]
pub struct XiDerivative {
    pub field: FrequencyField,
    /// Set when the outer-band mass exceeds `1e-8` of the total, i.e. the
    /// input is not well band-limited and the stencil may be inaccurate.
    pub unreliable: bool,
}

/// Outer-band mass fraction above which derivatives are flagged.
pub const OUTER_BAND_TOLERANCE: f64 = 1e-8;

/// Fourth-order finite difference in `ξ`, one-sided at both ends.
pub fn xi_derivative(fhat: &FrequencyField) -> XiDerivative {
    let values = first_difference(fhat.values(), fhat.grid().dxi());
    XiDerivative {
        field: FrequencyField::from_parts(Arc::clone(fhat.grid()), values),
        unreliable: fhat.outer_band_fraction() > OUTER_BAND_TOLERANCE,
    }
}

/// Second ξ-derivative with the same stencil order.
pub fn xi_second_derivative(fhat: &FrequencyField) -> FrequencyField {
    let values = second_difference(fhat.values(), fhat.grid().dxi());
    FrequencyField::from_parts(Arc::clone(fhat.grid()), values)
}

fn first_difference(f: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = f.len();
    let c = 1.0 / (12.0 * h);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 2..n - 2 {
        out[i] = (f[i - 2] - f[i - 1] * 8.0 + f[i + 1] * 8.0 - f[i + 2]) * c;
    }
    out[0] = (f[0] * -25.0 + f[1] * 48.0 - f[2] * 36.0 + f[3] * 16.0 - f[4] * 3.0) * c;
    out[1] = (f[0] * -3.0 - f[1] * 10.0 + f[2] * 18.0 - f[3] * 6.0 + f[4]) * c;
    let m = n - 1;
    out[m] = -(f[m] * -25.0 + f[m - 1] * 48.0 - f[m - 2] * 36.0 + f[m - 3] * 16.0 - f[m - 4] * 3.0) * c;
    out[m - 1] = -(f[m] * -3.0 - f[m - 1] * 10.0 + f[m - 2] * 18.0 - f[m - 3] * 6.0 + f[m - 4]) * c;
    out
}

fn second_difference(f: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = f.len();
    let c = 1.0 / (12.0 * h * h);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 2..n - 2 {
        out[i] = (-f[i - 2] + f[i - 1] * 16.0 - f[i] * 30.0 + f[i + 1] * 16.0 - f[i + 2]) * c;
    }
    let one_sided = |g: [Complex64; 6]| {
        (
            (g[0] * 45.0 - g[1] * 154.0 + g[2] * 214.0 - g[3] * 156.0 + g[4] * 61.0 - g[5] * 10.0) * c,
            (g[0] * 10.0 - g[1] * 15.0 - g[2] * 4.0 + g[3] * 14.0 - g[4] * 6.0 + g[5]) * c,
        )
    };
    let (d0, d1) = one_sided([f[0], f[1], f[2], f[3], f[4], f[5]]);
    out[0] = d0;
    out[1] = d1;
    let m = n - 1;
    let (e0, e1) = one_sided([f[m], f[m - 1], f[m - 2], f[m - 3], f[m - 4], f[m - 5]]);
    out[m] = e0;
    out[m - 1] = e1;
    out
}

/// Norms used throughout: sup, L², L² of the ξ-derivative and the H² norm.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct NormBundle {
    pub linf: f64,
    pub l2: f64,
    pub dxi_l2: f64,
    pub h2: f64,
}

impl NormBundle {
    /// `linf + l2 + dxi_l2 / (1 + log t)`, the bracket of the time-weighted norm.
    pub fn weighted_sum(&self, t: f64) -> f64 {
        self.linf + self.l2 + self.dxi_l2 / (1.0 + t.ln())
    }
}

pub fn norms(fhat: &FrequencyField) -> NormBundle {
    let dxi = fhat.grid().dxi();
    let l2 = fhat.l2();
    let d1 = first_difference(fhat.values(), dxi);
    let d2 = second_difference(fhat.values(), dxi);
    let dxi_l2 = l2_xi(&d1, dxi);
    let d2_l2 = l2_xi(&d2, dxi);
    NormBundle {
        linf: fhat.linf(),
        l2,
        dxi_l2,
        h2: (l2 * l2 + dxi_l2 * dxi_l2 + d2_l2 * d2_l2).sqrt(),
    }
}

/// `t^α (‖F‖_∞ + ‖F‖_2 + (1 + log t)^{-1} ‖∂_ξ F‖_2)` for `t ≥ 2`.
pub fn xt_weight(t: f64, fhat: &FrequencyField, alpha: f64) -> Result<f64> {
    if !(t >= 2.0) {
        return Err(ModwaveError::InvalidTime {
            t,
            reason: "time-weighted norm requires t >= 2",
        });
    }
    Ok(t.powf(alpha) * norms(fhat).weighted_sum(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn grid_invariants() {
        let g = SpectralGrid::new(256, 40.0).unwrap();
        assert!((g.dx() * g.dxi() * 256.0 - 2.0 * PI).abs() < 1e-12);
        let max = g.frequencies().iter().map(|x| x.abs()).fold(0.0, f64::max);
        assert!((max - g.xi_max()).abs() < 1e-12);
        assert!(g.frequencies().windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g.xs()[128], 0.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SpectralGrid::new(100, 1.0).is_err());
        assert!(SpectralGrid::new(64, 0.0).is_err());
        assert!(SpectralGrid::new(64, f64::NAN).is_err());
    }

    #[test]
    fn rejects_wrong_length_and_nan() {
        let g = SpectralGrid::new(16, 4.0).unwrap();
        assert!(PhysicalField::new(g.clone(), vec![c(0.0); 8]).is_err());
        let mut v = vec![c(0.0); 16];
        v[3] = Complex64::new(f64::NAN, 0.0);
        assert!(FrequencyField::new(g, v).is_err());
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = SpectralGrid::new(64, 10.0).unwrap();
        assert_eq!(forward_transform(&PhysicalField::zeros(&g)).linf(), 0.0);
        assert_eq!(inverse_transform(&FrequencyField::zeros(&g)).linf(), 0.0);
        assert_eq!(norms(&FrequencyField::zeros(&g)), NormBundle::default());
    }

    #[test]
    fn gaussian_pair() {
        let g = SpectralGrid::new(1024, 40.0).unwrap();
        let f = PhysicalField::from_fn(&g, |x| c((-0.5 * x * x).exp()));
        let fhat = f.forward();
        let exact = FrequencyField::from_fn(&g, |xi| c((2.0 * PI).sqrt() * (-0.5 * xi * xi).exp()));
        assert!(fhat.max_abs_diff(&exact).unwrap() < 1e-10);
        let back = exact.inverse();
        assert!(back.max_abs_diff(&f).unwrap() < 1e-10);
    }

    #[test]
    fn plane_wave_matches_direct_sum() {
        let n = 64;
        let g = SpectralGrid::new(n, 20.0).unwrap();
        let xi0 = 1.37;
        let f = PhysicalField::from_fn(&g, |x| Complex64::cis(xi0 * x));
        let fhat = f.forward();
        // Direct summation of the discretized continuum transform.
        for (k, &xi) in g.frequencies().iter().enumerate() {
            let direct: Complex64 = g
                .xs()
                .iter()
                .zip(f.values())
                .map(|(&x, &v)| v * Complex64::cis(-x * xi) * g.dx())
                .sum();
            assert!((direct - fhat.values()[k]).norm() < 1e-10);
        }
        let peak = fhat
            .values()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap()
            .0;
        assert_eq!(Some(peak), g.nearest_frequency_index(xi0));
    }

    #[test]
    fn propagation_group_law_and_isometry() {
        let g = SpectralGrid::new(512, 50.0).unwrap();
        let f = FrequencyField::from_fn(&g, |xi| Complex64::new((-xi * xi).exp(), xi.sin()));
        // Phase rounding is about one ulp of t·ξ_max²/2.
        let tol = |t: f64| 4.0 * f64::EPSILON * (1.0 + 0.5 * t * g.xi_max().powi(2));
        let back = f.propagate(3.7).propagate(-3.7);
        assert!(back.max_abs_diff(&f).unwrap() < tol(3.7));
        assert_eq!(f.propagate(0.0).max_abs_diff(&f).unwrap(), 0.0);
        let composed = f.propagate(1.5).propagate(2.25);
        assert!(composed.max_abs_diff(&f.propagate(3.75)).unwrap() < tol(3.75));
        for (a, b) in f.propagate(11.0).values().iter().zip(f.values()) {
            assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn free_gaussian_closed_form() {
        let g = SpectralGrid::new(2048, 200.0).unwrap();
        let u0 = PhysicalField::from_fn(&g, |x| c((-0.5 * x * x).exp()));
        for &t in &[0.5, 2.0, 10.0] {
            let ut = u0.forward().propagate(t).inverse();
            let exact = PhysicalField::from_fn(&g, |x| {
                let z = Complex64::new(1.0, t);
                (-(x * x) / (z * 2.0)).exp() / z.sqrt()
            });
            assert!(ut.max_abs_diff(&exact).unwrap() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn derivative_stencil_exact_on_quartics() {
        let g = SpectralGrid::new(64, 200.0).unwrap();
        let p = |x: f64| 0.3 - 1.1 * x + 0.7 * x * x - 0.2 * x.powi(3) + 0.05 * x.powi(4);
        let dp = |x: f64| -1.1 + 1.4 * x - 0.6 * x * x + 0.2 * x.powi(3);
        let d2p = |x: f64| 1.4 - 1.2 * x + 0.6 * x * x;
        let f = FrequencyField::from_fn(&g, |xi| c(p(xi)));
        let d = xi_derivative(&f).field;
        let d2 = xi_second_derivative(&f);
        for (k, &xi) in g.frequencies().iter().enumerate() {
            let scale = 1.0 + dp(xi).abs();
            assert!((d.values()[k].re - dp(xi)).abs() < 1e-9 * scale, "d1 at {k}");
            let scale2 = 1.0 + d2p(xi).abs();
            assert!((d2.values()[k].re - d2p(xi)).abs() < 1e-8 * scale2, "d2 at {k}");
        }
    }

    #[test]
    fn derivative_of_constant_and_ramp() {
        let g = SpectralGrid::new(128, 100.0).unwrap();
        let one = FrequencyField::from_fn(&g, |_| c(2.5));
        assert!(xi_derivative(&one).field.linf() < 1e-12);
        let ramp = FrequencyField::from_fn(&g, c);
        let d = xi_derivative(&ramp).field;
        assert!(d.values().iter().all(|z| (z.re - 1.0).abs() < 1e-12 && z.im.abs() < 1e-12));
    }

    #[test]
    fn derivative_of_gaussian() {
        let g = SpectralGrid::new(1024, 200.0).unwrap();
        assert!(g.dxi() <= 0.05);
        let f = FrequencyField::from_fn(&g, |xi| c((-0.5 * xi * xi).exp()));
        let d = xi_derivative(&f);
        assert!(!d.unreliable);
        let exact = FrequencyField::from_fn(&g, |xi| c(-xi * (-0.5 * xi * xi).exp()));
        assert!(d.field.max_abs_diff(&exact).unwrap() < 1e-6);
    }

    #[test]
    fn derivative_flags_outer_band_mass() {
        let g = SpectralGrid::new(64, 10.0).unwrap();
        let f = FrequencyField::from_fn(&g, |_| c(1.0));
        assert!(xi_derivative(&f).unreliable);
    }

    #[test]
    fn plancherel_constant() {
        let g = SpectralGrid::new(2048, 60.0).unwrap();
        let f = PhysicalField::from_fn(&g, |x| Complex64::new((-x * x / 3.0).exp(), x * (-x * x).exp()));
        let lhs = f.forward().l2() / (2.0 * PI).sqrt();
        assert!((lhs - f.l2()).abs() < 1e-10);
    }

    #[test]
    fn bump_norms_against_dense_quadrature() {
        // Smooth plateau of height h and width about 1 around ξ = 0.
        let h = 0.7;
        let bump = |xi: f64| h * 0.5 * (1.0 - ((xi.abs() - 0.5) / 0.05).tanh());
        let g = SpectralGrid::new(4096, 400.0).unwrap();
        let f = FrequencyField::from_fn(&g, |xi| c(bump(xi)));
        let nb = norms(&f);
        // Dense midpoint quadrature on [-2, 2].
        let m = 400_000;
        let step = 4.0 / m as f64;
        let dense: f64 = (0..m)
            .map(|i| bump(-2.0 + (i as f64 + 0.5) * step).powi(2) * step)
            .sum();
        assert!((nb.linf - h).abs() < 1e-6);
        assert!((nb.l2 - dense.sqrt()).abs() < 1e-6);
        assert!((nb.l2 - h).abs() < 0.05 * h);
        assert!(nb.l2 <= (1.2f64).sqrt() * nb.linf);
    }

    #[test]
    fn xt_weight_domain_and_homogeneity() {
        let g = SpectralGrid::new(64, 20.0).unwrap();
        let zero = FrequencyField::zeros(&g);
        assert_eq!(xt_weight(5.0, &zero, 0.1).unwrap(), 0.0);
        assert!(xt_weight(1.0, &zero, 0.1).is_err());
        let constant = FrequencyField::from_fn(&g, |_| c(0.3));
        let a = xt_weight(4.0, &constant, 0.1).unwrap();
        let b = xt_weight(8.0, &constant, 0.1).unwrap();
        // Constant field: derivative vanishes, only t^α changes.
        assert!((b / a - 2f64.powf(0.1)).abs() < 1e-12);
    }
}

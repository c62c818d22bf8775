//! Direct-quadrature evaluation of the trilinear remainder.
//!
//! With `f` the physical profile, the remainder of the pulled-back cubic is
//!
//! ```text
//! R(s, ξ) = (i / 2πs) ∬ (e^{-iyz/s} − 1) e^{iξ(y+z)} C(y, z, ξ) dy dz,
//! C(y, z, ξ) = ∫ e^{-iξb} f(b − y) conj(f(b)) f(b − z) db.
//! ```
//!
//! The sums run over lattice shifts of the coarse grid with `f` extended by
//! zero, and cost `O(N⁴)`. The FFT route is compared on an embedding grid with
//! the same spacing and a box `m` times longer so that the dispersed wave
//! stays inside the period.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ModwaveError, Result};
use crate::profile::{asymptotic_profile, FinalData, SolverParams};
use crate::spectral::{FrequencyField, PhysicalField, SpectralGrid};
use crate::trilinear::{expected_forcing, pulled_back_forcing, trilinear_split};

/// Largest grid accepted by the quadrature.
pub const ORACLE_MAX_POINTS: usize = 64;
/// Box-length factor of the embedding grid used by the FFT route.
pub const EMBEDDING_FACTOR: usize = 32;
/// Relative cut on the triple correlation below which `(y, z)` is skipped.
pub const CORRELATION_CUTOFF: f64 = 1e-12;

fn check_coarse(grid: &SpectralGrid) -> Result<()> {
    if grid.num_points() > ORACLE_MAX_POINTS {
        return Err(ModwaveError::OracleGridTooLarge {
            num_points: grid.num_points(),
            limit: ORACLE_MAX_POINTS,
        });
    }
    Ok(())
}

/// `f(x_j) = (1/2π) Σ_k f̂_k e^{iξ_k x_j} dξ` by direct summation.
fn physical_by_summation(fhat: &FrequencyField) -> Vec<Complex64> {
    let g = fhat.grid();
    let dxi = g.dxi();
    g.xs()
        .iter()
        .map(|&x| {
            g.frequencies()
                .iter()
                .zip(fhat.values())
                .map(|(&xi, &z)| z * Complex64::cis(xi * x))
                .sum::<Complex64>()
                * (dxi / (2.0 * PI))
        })
        .collect()
}

/// Remainder `R(s, ·)` of the pulled-back cubic by direct quadrature.
pub fn remainder_oracle(fhat: &FrequencyField, s: f64) -> Result<FrequencyField> {
    let grid = Arc::clone(fhat.grid());
    check_coarse(&grid)?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(ModwaveError::InvalidTime { t: s, reason: "time must be positive" });
    }
    let n = grid.num_points() as isize;
    let dx = grid.dx();
    let f = physical_by_summation(fhat);
    let at = |j: isize| -> Complex64 {
        if (0..n).contains(&j) {
            f[j as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    };

    // Products P_{p,q}(b) = f(b − y_p) conj f(b) f(b − z_q) over lattice shifts.
    struct Shift {
        y: f64,
        z: f64,
        kernel: Complex64,
        product: Vec<(f64, Complex64)>,
    }
    let fmax = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let cut = CORRELATION_CUTOFF * fmax.powi(3);
    let mut shifts = Vec::new();
    for p in -(n - 1)..n {
        for q in -(n - 1)..n {
            let (y, z) = (p as f64 * dx, q as f64 * dx);
            let kernel = Complex64::cis(-y * z / s) - 1.0;
            let product: Vec<(f64, Complex64)> = (0..n)
                .filter_map(|b| {
                    let v = at(b - p) * f[b as usize].conj() * at(b - q);
                    (v != Complex64::new(0.0, 0.0)).then(|| (grid.xs()[b as usize], v))
                })
                .collect();
            let weight: f64 = product.iter().map(|(_, v)| v.norm()).sum::<f64>();
            if weight > cut && kernel.norm() > 0.0 {
                shifts.push(Shift { y, z, kernel, product });
            }
        }
    }

    let prefactor = Complex64::new(0.0, 1.0 / (2.0 * PI * s)) * dx * dx * dx;
    let values: Vec<Complex64> = grid
        .frequencies()
        .par_iter()
        .map(|&xi| {
            let total: Complex64 = shifts
                .iter()
                .map(|sh| {
                    let c: Complex64 = sh.product.iter().map(|&(b, v)| v * Complex64::cis(-xi * b)).sum();
                    sh.kernel * Complex64::cis(xi * (sh.y + sh.z)) * c
                })
                .sum();
            prefactor * total
        })
        .collect();
    FrequencyField::new(grid, values)
}

/// Grid with the same spacing and `factor` times the box.
pub fn embedding_grid(coarse: &SpectralGrid, factor: usize) -> Result<Arc<SpectralGrid>> {
    if !factor.is_power_of_two() {
        return Err(ModwaveError::InvalidGrid(format!("embedding factor {factor} is not a power of two")));
    }
    SpectralGrid::new(coarse.num_points() * factor, coarse.box_length() * factor as f64)
}

/// Zero-extends the physical profile of `fhat` onto the embedding grid.
pub fn embed(fhat: &FrequencyField, factor: usize) -> Result<FrequencyField> {
    let coarse = fhat.grid();
    let fine = embedding_grid(coarse, factor)?;
    let f = fhat.inverse();
    let offset = (fine.num_points() - coarse.num_points()) / 2;
    let mut values = vec![Complex64::new(0.0, 0.0); fine.num_points()];
    values[offset..offset + coarse.num_points()].copy_from_slice(f.values());
    Ok(PhysicalField::new(fine, values)?.forward())
}

/// Samples a fine-grid field at the frequencies of `coarse`.
pub fn restrict(fine: &FrequencyField, coarse: &Arc<SpectralGrid>) -> Result<FrequencyField> {
    let fg = fine.grid();
    let ratio = fg.num_points() / coarse.num_points();
    if ratio * coarse.num_points() != fg.num_points()
        || (fg.dx() - coarse.dx()).abs() > 1e-12 * coarse.dx()
    {
        return Err(ModwaveError::GridMismatch("fine grid does not embed the coarse grid".into()));
    }
    // ξ_i = (i − N_c/2) dξ_c sits at fine index (i − N_c/2)·ratio + N_f/2 = i·ratio.
    let values = (0..coarse.num_points()).map(|i| fine.values()[i * ratio]).collect();
    FrequencyField::new(Arc::clone(coarse), values)
}

/// FFT-route remainder at time `s`, computed on the embedding grid and
/// sampled back on the coarse frequencies.
pub fn remainder_fft_embedded(fhat: &FrequencyField, s: f64, factor: usize) -> Result<FrequencyField> {
    let fine = embed(fhat, factor)?;
    let r = trilinear_split(&fine, s)?.remainder;
    restrict(&r, fhat.grid())
}

/// Result of comparing two routes to the same field.
#[derive(Clone, Debug, Serialize)]
pub struct RouteComparison {
    pub s: f64,
    /// `‖oracle − fft‖_∞ / ‖fft‖_∞`.
    pub relative_error: f64,
    /// Least-squares constant `c` minimizing `‖c·oracle − fft‖_2`, reported only.
    pub calibration_re: f64,
    pub calibration_im: f64,
    pub reference_linf: f64,
}

fn compare(oracle: &FrequencyField, reference: &FrequencyField, s: f64) -> Result<RouteComparison> {
    let reference_linf = reference.linf();
    let diff = oracle.max_abs_diff(reference)?;
    let (num, den) = oracle
        .values()
        .iter()
        .zip(reference.values())
        .fold((Complex64::new(0.0, 0.0), 0.0), |(num, den), (o, r)| (num + o.conj() * r, den + o.norm_sqr()));
    let calibration = if den > 0.0 { num / den } else { Complex64::new(1.0, 0.0) };
    Ok(RouteComparison {
        s,
        relative_error: if reference_linf > 0.0 { diff / reference_linf } else { diff },
        calibration_re: calibration.re,
        calibration_im: calibration.im,
        reference_linf,
    })
}

/// Compares the quadrature remainder of `fhat` against the FFT split.
pub fn compare_remainder(fhat: &FrequencyField, s: f64) -> Result<RouteComparison> {
    let oracle = remainder_oracle(fhat, s)?;
    let fft = remainder_fft_embedded(fhat, s, EMBEDDING_FACTOR)?;
    compare(&oracle, &fft, s)
}

/// Forcing identity with the remainder taken from the quadrature.
///
/// `w` lives on a coarse grid; the forcing itself is evaluated on the
/// embedding grid. Returns `‖Û(−t)ε − iλR_oracle‖_∞ / ‖Û(−t)ε‖_∞`.
pub fn forcing_identity_residual_oracle(w: &FinalData, t: f64, params: &SolverParams) -> Result<RouteComparison> {
    check_coarse(w.w.grid())?;
    let v = asymptotic_profile(w, t, params.lambda)?;
    let r = remainder_oracle(&v, t)?;
    let fine_w = FinalData::measure(embed(&w.w, EMBEDDING_FACTOR)?);
    let mut fine_params = params.clone();
    fine_params.grid = Arc::clone(fine_w.w.grid());
    let lhs = restrict(&pulled_back_forcing(&fine_w, t, &fine_params)?, w.w.grid())?;
    compare(&expected_forcing(&r, params.lambda), &lhs, t)
}

/// Coarse grid used for quadrature comparisons: 64 points on a box of 24.
pub fn default_coarse_grid() -> Arc<SpectralGrid> {
    SpectralGrid::new(ORACLE_MAX_POINTS, 24.0).expect("static grid")
}

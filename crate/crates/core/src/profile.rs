//! Final data, the explicit asymptotic profile and the approximate solution.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{ModwaveError, Result};
use crate::spectral::{FrequencyField, PhysicalField, SpectralGrid};

/// Coefficient of the resonant cubic interaction `κ |f̂|² f̂ / t`.
///
/// With the transform `f̂(ξ) = ∫ e^{-ixξ} f dx` a free wave satisfies
/// `|U(t)f(x)|² ≈ |f̂(x/t)|² / (2π t)`, so the long-range phase of the
/// profile rotates at rate `λ κ |W|² / t` with `κ = 1/(2π)`.
pub const RESONANT_COEFFICIENT: f64 = 1.0 / (2.0 * PI);

/// Sign of the cubic nonlinearity: `+1` defocusing, `-1` focusing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Plus => write!(f, "+1"),
            Sign::Minus => write!(f, "-1"),
        }
    }
}

impl FromStr for Sign {
    type Err = ModwaveError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" | "+1" | "+" => Ok(Sign::Plus),
            "-1" | "-" => Ok(Sign::Minus),
            other => Err(ModwaveError::Parse(format!("lambda must be +1 or -1, got '{other}'"))),
        }
    }
}

/// Log-spaced nodes per decade used when the node count is not given.
pub const DEFAULT_NODES_PER_DECADE: f64 = 64.0;

/// Node count giving `per_decade` log-spaced nodes between `t0` and `t1`.
pub fn nodes_for(t0: f64, t1: f64, per_decade: f64) -> usize {
    ((t1 / t0).log10() * per_decade).round().max(1.0) as usize + 1
}

/// Physical and numerical parameters of a construction run.
#[derive(Clone, Debug)]
pub struct SolverParams {
    pub lambda: Sign,
    pub delta: f64,
    pub alpha: f64,
    /// Size of the final data, `‖W‖_∞ + ‖W‖_{H²}`.
    pub eps0: f64,
    /// Construction start time `T`.
    pub start_time: f64,
    /// Numerical replacement for `t = ∞`.
    pub t_max: f64,
    pub grid: Arc<SpectralGrid>,
    pub time_grid_points: usize,
}

pub const DEFAULT_NUM_POINTS: usize = 16384;
pub const DEFAULT_BOX_LENGTH: f64 = 10_000.0;

impl SolverParams {
    /// Defaults: λ = +1, δ = 0.2, α = 0.1, ε₀ = 0.05, T = 10, t_max = 1000.
    pub fn defaults() -> Result<Self> {
        let grid = SpectralGrid::new(DEFAULT_NUM_POINTS, DEFAULT_BOX_LENGTH)?;
        Ok(Self::on_grid(grid))
    }

    pub fn on_grid(grid: Arc<SpectralGrid>) -> Self {
        Self {
            lambda: Sign::Plus,
            delta: 0.2,
            alpha: 0.1,
            eps0: 0.05,
            start_time: 10.0,
            t_max: 1000.0,
            grid,
            time_grid_points: nodes_for(10.0, 1000.0, DEFAULT_NODES_PER_DECADE),
        }
    }

    /// Sets `T` and `t_max` and re-derives the node count at the default density.
    pub fn with_times(mut self, start_time: f64, t_max: f64) -> Self {
        self.start_time = start_time;
        self.t_max = t_max;
        self.time_grid_points = nodes_for(start_time, t_max, DEFAULT_NODES_PER_DECADE);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(ModwaveError::InvalidParams(m));
        if !(self.delta > 0.0 && self.delta < 0.25) {
            return bad(format!("constraint 0 < delta < 1/4 violated (delta = {})", self.delta));
        }
        if !(self.alpha > 0.0 && self.alpha < self.delta) {
            return bad(format!(
                "constraint 0 < alpha < delta violated (alpha = {}, delta = {})",
                self.alpha, self.delta
            ));
        }
        if !(self.eps0 >= 0.0 && self.eps0.is_finite()) {
            return bad(format!("eps0 must be finite and >= 0, got {}", self.eps0));
        }
        if !(self.start_time >= 2.0) {
            return bad(format!("start time T must be >= 2, got {}", self.start_time));
        }
        if !(self.t_max >= 10.0 * self.start_time && self.t_max.is_finite()) {
            return bad(format!(
                "t_max must be >= 10 T (T = {}, t_max = {})",
                self.start_time, self.t_max
            ));
        }
        if self.time_grid_points < 2 {
            return bad("time_grid_points must be >= 2".into());
        }
        Ok(())
    }
}

/// A family of final-data shapes, selected by name.
pub trait ProfileShape: Send + Sync {
    fn name(&self) -> &'static str;

    /// Unnormalized shape sampled on the frequency grid.
    fn sample(&self, grid: &Arc<SpectralGrid>, seed: u64) -> FrequencyField;
}

struct GaussianShape;

impl ProfileShape for GaussianShape {
    fn name(&self) -> &'static str {
        "gaussian"
    }

    fn sample(&self, grid: &Arc<SpectralGrid>, _seed: u64) -> FrequencyField {
        FrequencyField::from_fn(grid, |xi| Complex64::new((-xi * xi).exp(), 0.0))
    }
}

/// Compactly supported C^∞ bump on `|ξ| < 1.5`.
struct BumpShape;

const BUMP_HALF_WIDTH: f64 = 1.5;

impl ProfileShape for BumpShape {
    fn name(&self) -> &'static str {
        "bump"
    }

    fn sample(&self, grid: &Arc<SpectralGrid>, _seed: u64) -> FrequencyField {
        FrequencyField::from_fn(grid, |xi| {
            let r = xi / BUMP_HALF_WIDTH;
            let v = if r.abs() < 1.0 {
                (1.0 - 1.0 / (1.0 - r * r)).exp()
            } else {
                0.0
            };
            Complex64::new(v, 0.0)
        })
    }
}

/// Random superposition of Gaussian packets times a smooth cutoff supported
/// in `|ξ| ≤ 2.5`.
struct RandomBandlimitedShape;

const RANDOM_PACKETS: usize = 6;
const RANDOM_CUTOFF: f64 = 2.5;
const RANDOM_RAMP: f64 = 0.8;

fn smooth_step(s: f64) -> f64 {
    let psi = |y: f64| if y > 0.0 { (-1.0 / y).exp() } else { 0.0 };
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        psi(s) / (psi(s) + psi(1.0 - s))
    }
}

impl ProfileShape for RandomBandlimitedShape {
    fn name(&self) -> &'static str {
        "random_bandlimited"
    }

    fn sample(&self, grid: &Arc<SpectralGrid>, seed: u64) -> FrequencyField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let packets: Vec<(f64, f64, Complex64)> = (0..RANDOM_PACKETS)
            .map(|_| {
                let center = rng.random_range(-1.2..1.2);
                let width = rng.random_range(0.35..0.7);
                let amp = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                (center, width, amp)
            })
            .collect();
        FrequencyField::from_fn(grid, |xi| {
            let cutoff = smooth_step((RANDOM_CUTOFF - xi.abs()) / RANDOM_RAMP);
            if cutoff == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let sum: Complex64 = packets
                .iter()
                .map(|&(c, w, a)| a * (-(xi - c) * (xi - c) / (2.0 * w * w)).exp())
                .sum();
            sum * cutoff
        })
    }
}

static SHAPES: [&dyn ProfileShape; 3] = [&GaussianShape, &BumpShape, &RandomBandlimitedShape];

/// All registered final-data shapes.
pub fn shapes() -> &'static [&'static dyn ProfileShape] {
    &SHAPES
}

pub fn lookup_shape(name: &str) -> Result<&'static dyn ProfileShape> {
    SHAPES
        .iter()
        .copied()
        .find(|s| s.name() == name)
        .ok_or_else(|| {
            let known: Vec<_> = SHAPES.iter().map(|s| s.name()).collect();
            ModwaveError::Parse(format!("unknown data kind '{name}' (known: {})", known.join(", ")))
        })
}

/// Final data `W` with its measured size `‖W‖_∞ + ‖W‖_{H²}`.
#[derive(Clone, Debug)]
pub struct FinalData {
    pub w: FrequencyField,
    pub eps0_actual: f64,
}

/// Mass fraction allowed outside the inner 80% of the frequency grid.
pub const BAND_TOLERANCE: f64 = 1e-12;
/// Relative amplitude below which `W` counts as vanished for support checks.
pub const SUPPORT_THRESHOLD: f64 = 1e-10;

impl FinalData {
    /// Measures an arbitrary field as final data.
    pub fn measure(w: FrequencyField) -> Self {
        let nb = w.norms();
        Self {
            eps0_actual: nb.linf + nb.h2,
            w,
        }
    }

    /// Samples the named shape on `grid` and scales it to size `eps0`.
    pub fn from_shape(kind: &str, grid: &Arc<SpectralGrid>, eps0: f64, seed: u64) -> Result<Self> {
        let shape = lookup_shape(kind)?.sample(grid, seed);
        check_band(&shape)?;
        let size = {
            let nb = shape.norms();
            nb.linf + nb.h2
        };
        let w = if eps0 == 0.0 || size == 0.0 {
            FrequencyField::zeros(grid)
        } else {
            shape.scaled(Complex64::new(eps0 / size, 0.0))
        };
        Ok(Self::measure(w))
    }

    /// Largest `|ξ|` at which `|W|` exceeds `1e-10 · ‖W‖_∞`.
    pub fn xi_support(&self) -> f64 {
        let cut = SUPPORT_THRESHOLD * self.w.linf();
        self.w
            .grid()
            .frequencies()
            .iter()
            .zip(self.w.values())
            .filter(|(_, z)| z.norm() > cut && cut > 0.0)
            .map(|(xi, _)| xi.abs())
            .fold(0.0, f64::max)
    }

    /// Serializes as `xi,re,im` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("xi,re,im\n");
        for (xi, z) in self.w.grid().frequencies().iter().zip(self.w.values()) {
            out.push_str(&format!("{xi},{},{}\n", z.re, z.im));
        }
        out
    }

    pub fn from_csv(grid: &Arc<SpectralGrid>, text: &str) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.num_points());
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with("xi") {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| ModwaveError::Parse(format!("line {}: {e}", lineno + 1)))?;
            if cols.len() != 3 {
                return Err(ModwaveError::Parse(format!("line {}: expected 3 columns", lineno + 1)));
            }
            let k = values.len();
            let expected = grid
                .frequencies()
                .get(k)
                .copied()
                .ok_or_else(|| ModwaveError::Parse("more rows than grid points".into()))?;
            if (cols[0] - expected).abs() > 1e-9 * (1.0 + expected.abs()) {
                return Err(ModwaveError::Parse(format!(
                    "line {}: xi = {} does not match grid frequency {expected}",
                    lineno + 1,
                    cols[0]
                )));
            }
            values.push(Complex64::new(cols[1], cols[2]));
        }
        let w = FrequencyField::new(Arc::clone(grid), values)?;
        Ok(Self::measure(w))
    }
}

fn check_band(w: &FrequencyField) -> Result<()> {
    let cut = 0.8 * w.grid().xi_max();
    let mut outside = 0.0;
    let mut total = 0.0;
    for (xi, z) in w.grid().frequencies().iter().zip(w.values()) {
        total += z.norm_sqr();
        if xi.abs() > cut {
            outside += z.norm_sqr();
        }
    }
    if total > 0.0 && outside > BAND_TOLERANCE * total {
        return Err(ModwaveError::BandLimit(format!(
            "{:.3e} of the mass lies outside |xi| < {cut:.3}",
            outside / total
        )));
    }
    Ok(())
}

/// Builds final data of the requested kind for a construction run.
///
/// Besides the band check this enforces that the box holds the physical
/// spreading `x ≈ ξ t` up to `t_max`: `L ≥ 2 t_max · supp(W)`.
pub fn make_final_data(kind: &str, params: &SolverParams, seed: u64) -> Result<FinalData> {
    params.validate()?;
    let data = FinalData::from_shape(kind, &params.grid, params.eps0, seed)?;
    check_box_coverage(&data, params.t_max)?;
    Ok(data)
}

pub fn check_box_coverage(data: &FinalData, t_max: f64) -> Result<()> {
    let needed = 2.0 * t_max * data.xi_support();
    let have = data.w.grid().box_length();
    if needed > have {
        return Err(ModwaveError::BandLimit(format!(
            "box_length {have} cannot hold the solution up to t = {t_max}: need >= {needed:.1}"
        )));
    }
    Ok(())
}

fn require_positive_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(ModwaveError::InvalidTime { t, reason: "time must be positive" })
    }
}

/// `v(t, ξ) = W(ξ) exp(-i λ κ |W(ξ)|² log t)`.
pub fn asymptotic_profile(w: &FinalData, t: f64, lambda: Sign) -> Result<FrequencyField> {
    require_positive_time(t)?;
    let rate = lambda.value() * RESONANT_COEFFICIENT * t.ln();
    Ok(w.w.map(|z| z * Complex64::cis(-rate * z.norm_sqr())))
}

/// `∂_t v = -(i λ κ / t) |v|² v`.
pub fn profile_time_derivative(v: &FrequencyField, t: f64, lambda: Sign) -> Result<FrequencyField> {
    require_positive_time(t)?;
    let c = Complex64::new(0.0, -lambda.value() * RESONANT_COEFFICIENT / t);
    Ok(v.map(|z| c * z.norm_sqr() * z))
}

/// `u_app(t) = U(t) φ(t)` with `φ̂(t) = v(t)`.
pub fn approximate_solution(w: &FinalData, t: f64, params: &SolverParams) -> Result<PhysicalField> {
    let v = asymptotic_profile(w, t, params.lambda)?;
    Ok(v.propagate(t).inverse())
}

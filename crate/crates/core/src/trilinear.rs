//! Pulled-back cubic nonlinearity, its resonant/remainder split, the forcing
//! term of the approximate solution and the cubic-difference expansion.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{ModwaveError, Result};
use crate::profile::{
    asymptotic_profile, profile_time_derivative, FinalData, Sign, SolverParams,
    RESONANT_COEFFICIENT,
};
use crate::spectral::{FrequencyField, PhysicalField};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn require_positive_time(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(ModwaveError::InvalidTime { t: s, reason: "time must be positive" })
    }
}

/// Pointwise `|u|² u`.
pub fn cubic(u: &PhysicalField) -> PhysicalField {
    u.map(|z| z.norm_sqr() * z)
}

/// `𝒯̂(s) = i e^{isξ²/2} F(|U(s)f|² U(s)f)`.
pub fn pulled_back_cubic(fhat: &FrequencyField, s: f64) -> Result<FrequencyField> {
    require_positive_time(s)?;
    let u = fhat.propagate(s).inverse();
    Ok(cubic(&u).forward().propagate(-s).scaled(I))
}

/// Resonant term and remainder of the pulled-back cubic at time `s`.
#[derive(Clone, Debug)]
pub struct TrilinearSplit {
    /// `(iκ/s) |f̂|² f̂`.
    pub leading: FrequencyField,
    /// Full pulled-back cubic minus `leading`.
    pub remainder: FrequencyField,
    pub s: f64,
}

pub fn leading_term(fhat: &FrequencyField, s: f64) -> Result<FrequencyField> {
    require_positive_time(s)?;
    let c = I * (RESONANT_COEFFICIENT / s);
    Ok(fhat.map(|z| c * z.norm_sqr() * z))
}

pub fn trilinear_split(fhat: &FrequencyField, s: f64) -> Result<TrilinearSplit> {
    let full = pulled_back_cubic(fhat, s)?;
    let leading = leading_term(fhat, s)?;
    let remainder = full.sub(&leading)?;
    Ok(TrilinearSplit { leading, remainder, s })
}

/// `|a+b|²(a+b) − |a|²a` through its five-term expansion in `b`.
pub fn cubic_difference(a: &PhysicalField, b: &PhysicalField) -> Result<PhysicalField> {
    a.zip_map(b, |a, b| {
        let bb = b.norm_sqr();
        2.0 * a.norm_sqr() * b + a * a * b.conj() + 2.0 * a * bb + a.conj() * b * b + bb * b
    })
}

/// `ε(t) = i U(t) ∂_t φ(t) − λ |u_app(t)|² u_app(t)`.
pub fn forcing(w: &FinalData, t: f64, params: &SolverParams) -> Result<PhysicalField> {
    let v = asymptotic_profile(w, t, params.lambda)?;
    let dv = profile_time_derivative(&v, t, params.lambda)?;
    let lin = dv.propagate(t).inverse().scaled(I);
    let u = v.propagate(t).inverse();
    let nl = cubic(&u).scaled(Complex64::new(params.lambda.value(), 0.0));
    lin.sub(&nl)
}

/// `Û(−t) ε(t)` in frequency space.
pub fn pulled_back_forcing(w: &FinalData, t: f64, params: &SolverParams) -> Result<FrequencyField> {
    Ok(forcing(w, t, params)?.forward().propagate(-t))
}

/// `‖Û(−t)ε(t) − iλ R[v](t)‖_∞` with `R` from the FFT split.
///
/// In this transform convention the pulled-back forcing equals `+iλR`.
pub fn forcing_identity_residual(w: &FinalData, t: f64, params: &SolverParams) -> Result<f64> {
    let lhs = pulled_back_forcing(w, t, params)?;
    let v = asymptotic_profile(w, t, params.lambda)?;
    let r = trilinear_split(&v, t)?.remainder;
    lhs.max_abs_diff(&expected_forcing(&r, params.lambda))
}

/// `iλ R`.
pub fn expected_forcing(remainder: &FrequencyField, lambda: Sign) -> FrequencyField {
    remainder.scaled(I * lambda.value())
}

/// Sample of a decay experiment: time and a norm.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormSample {
    pub t: f64,
    pub value: f64,
}

/// `‖R[v](t)‖_∞` and `‖∂_ξ R[v](t)‖_2` at each requested time.
pub fn remainder_norms(w: &FinalData, times: &[f64], lambda: Sign) -> Result<(Vec<NormSample>, Vec<NormSample>)> {
    let mut linf = Vec::with_capacity(times.len());
    let mut dxi = Vec::with_capacity(times.len());
    for &t in times {
        let v = asymptotic_profile(w, t, lambda)?;
        let r = trilinear_split(&v, t)?.remainder;
        linf.push(NormSample { t, value: r.linf() });
        dxi.push(NormSample { t, value: r.xi_derivative().field.l2() });
    }
    Ok((linf, dxi))
}

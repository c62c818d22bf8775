use modwave_core::fixedpoint::{phi_eps, xt_norm, TimeGrid};
use modwave_core::oracle::{compare_remainder, default_coarse_grid, forcing_identity_residual_oracle};
use modwave_core::profile::{approximate_solution, asymptotic_profile};
use modwave_core::trilinear::{forcing_identity_residual, pulled_back_forcing, remainder_norms};
use modwave_core::FinalData;
use num_complex::Complex64;
use serde::Serialize;

use super::{final_data, sample_times, windowed_fit, Campaign, RunContext};
use crate::error::Result;
use crate::report::{at_most, Bound};

/// Remainder oracle, forcing identity and decay of the forcing term.
pub struct VerifyForcing;

/// Times at which the quadrature remainder is compared with the FFT route.
pub const ORACLE_TIMES: [f64; 2] = [5.0, 50.0];

#[derive(Serialize)]
struct Row {
    t: f64,
    forcing_linf: f64,
    remainder_linf: f64,
    remainder_dxi_l2: f64,
    identity_residual: f64,
    u_app_linf: f64,
}

fn scaled(w: &FinalData, c: f64) -> FinalData {
    FinalData::measure(w.w.scaled(Complex64::new(c, 0.0)))
}

impl Campaign for VerifyForcing {
    fn name(&self) -> &'static str {
        "verify-forcing"
    }

    fn summary(&self) -> &'static str {
        "trilinear remainder oracle, forcing identity, forcing and u_app decay"
    }

    fn run(&self, ctx: &mut RunContext<'_>) -> Result<()> {
        let cfg = ctx.config;
        let p = &cfg.params;
        let w = final_data(cfg, p)?;
        let times = sample_times(cfg);
        let slope_limit = -(1.0 + p.delta) + 0.15;

        let coarse = default_coarse_grid();
        let wc = FinalData::from_shape(&cfg.data_kind, &coarse, p.eps0, cfg.seed)?;
        let mut worst: f64 = 0.0;
        for s in ORACLE_TIMES {
            let v = asymptotic_profile(&wc, s, p.lambda)?;
            let cmp = compare_remainder(&v, s)?;
            worst = worst.max(cmp.relative_error);
            ctx.report.value(&format!("forcing.oracle_remainder_s{s}"), &cmp);
        }
        ctx.report.check("forcing.oracle_remainder", Some(3), worst, at_most(1e-3));

        let (r_linf, r_dxi) = remainder_norms(&w, &times, p.lambda)?;
        let pairs = |s: &[modwave_core::trilinear::NormSample]| s.iter().map(|n| (n.t, n.value)).collect::<Vec<_>>();
        let fit = windowed_fit(cfg, &pairs(&r_linf), 0)?;
        ctx.report.check("forcing.remainder_slope", Some(3), fit.slope, at_most(slope_limit));
        ctx.report.fit("remainder_linf", fit);
        let fit = windowed_fit(cfg, &pairs(&r_dxi), 0)?;
        ctx.report.check("forcing.remainder_dxi_slope", None, fit.slope, at_most(slope_limit));
        ctx.report.fit("remainder_dxi_l2", fit);

        let (r2_linf, _) = remainder_norms(&scaled(&w, 2.0), &times, p.lambda)?;
        let cubic = r_linf
            .iter()
            .zip(&r2_linf)
            .map(|(a, b)| (b.value / a.value / 8.0 - 1.0).abs())
            .fold(0.0, f64::max);
        ctx.report.check("forcing.remainder_cubic_scaling", None, cubic, at_most(0.05));

        let mut residual: f64 = 0.0;
        let mut rows = Vec::with_capacity(times.len());
        let half = scaled(&w, 0.5);
        let mut forcing_scaling: f64 = 0.0;
        for (k, &t) in times.iter().enumerate() {
            let res = forcing_identity_residual(&w, t, p)?;
            residual = residual.max(res);
            let forcing_linf = pulled_back_forcing(&w, t, p)?.linf();
            let half_linf = pulled_back_forcing(&half, t, p)?.linf();
            if forcing_linf > 0.0 {
                forcing_scaling = forcing_scaling.max((forcing_linf / half_linf / 8.0 - 1.0).abs());
            }
            rows.push(Row {
                t,
                forcing_linf,
                remainder_linf: r_linf[k].value,
                remainder_dxi_l2: r_dxi[k].value,
                identity_residual: res,
                u_app_linf: approximate_solution(&w, t, p)?.linf(),
            });
        }
        ctx.report.check("forcing.identity_fft", Some(4), residual, at_most(1e-10));

        let oracle = forcing_identity_residual_oracle(&wc, p.start_time, p)?;
        ctx.report.check("forcing.identity_oracle", Some(4), oracle.relative_error, at_most(1e-3));
        ctx.report.value("forcing.identity_oracle", &oracle);

        let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.forcing_linf)).collect();
        let fit = windowed_fit(cfg, &samples, 6)?;
        ctx.report.check("forcing.decay_slope", Some(5), fit.slope, at_most(slope_limit));
        ctx.report.fit("forcing_linf_log6", fit);
        ctx.report.fit("forcing_linf", windowed_fit(cfg, &samples, 0)?);
        ctx.report.check("forcing.cubic_scaling", Some(5), forcing_scaling, at_most(0.1));

        let tg = TimeGrid::from_params(p)?;
        let full = xt_norm(&phi_eps(&w, p, &tg)?.trajectory, p.alpha)?;
        let halved = xt_norm(&phi_eps(&half, p, &tg)?.trajectory, p.alpha)?;
        let phi_scaling = (full / halved / 8.0 - 1.0).abs();
        ctx.report.check("forcing.phi_eps_cubic_scaling", Some(5), phi_scaling, at_most(0.1));
        ctx.report.value("forcing.phi_eps_xt_norm", full);

        let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.u_app_linf)).collect();
        let fit = windowed_fit(cfg, &samples, 0)?;
        ctx.report.check(
            "forcing.u_app_slope",
            Some(6),
            fit.slope,
            Bound::Between { low: -0.55, high: -0.45 },
        );
        ctx.report.fit("u_app_linf", fit);

        ctx.out.write_csv("forcing.csv", &rows)?;
        Ok(())
    }
}

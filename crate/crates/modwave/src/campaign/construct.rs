use modwave_core::fixedpoint::{
    apply_phi, contraction_probe, phi_eps, picard_from, picard_iterate, probe_trajectory, xt_norm,
    ProfileTrajectory, TimeGrid,
};
use modwave_core::spectral::xt_weight;
use modwave_core::{FinalData, SolverParams};
use serde::Serialize;

use super::{final_data, Campaign, RunContext};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{at_most, OutputDir, Report};

/// Picard construction of the correction profile.
pub struct Construct;

/// Radius of the probe trajectory when the ball radius vanishes.
const FALLBACK_RADIUS: f64 = 1e-6;

#[derive(Serialize)]
struct PicardRow {
    iterate: usize,
    xt_norm: f64,
    step_distance: f64,
    contraction_ratio: Option<f64>,
}

#[derive(Serialize)]
struct NodeRow {
    t: f64,
    linf: f64,
    l2: f64,
    dxi_l2: f64,
    xt_weight: f64,
}

/// Output of a construction shared with the round-trip campaign.
pub(crate) struct Constructed {
    pub w: FinalData,
    pub g: ProfileTrajectory,
}

/// Runs the Picard iteration and records the fixed-point checks.
pub(crate) fn construct(
    cfg: &ExperimentConfig,
    params: &SolverParams,
    report: &mut Report,
    out: &OutputDir,
) -> Result<Constructed> {
    let w = final_data(cfg, params)?;
    let (g, picard) = picard_iterate(&w, params, cfg.picard_max_iter, cfg.picard_tol)?;

    let max_ratio = picard.contraction_ratios.iter().copied().fold(0.0, f64::max);
    report.check("construct.max_contraction_ratio", Some(7), max_ratio, at_most(0.5));
    let iterations = if picard.converged { picard.iterates as f64 } else { f64::INFINITY };
    report.check("construct.iterations", Some(7), iterations, at_most(cfg.picard_max_iter as f64));
    let last = picard.step_distances.last().copied().unwrap_or(0.0);
    report.check("construct.final_step", Some(7), last, at_most(cfg.picard_tol));
    report.check(
        "construct.fixed_point_residual",
        Some(7),
        picard.fixed_point_residual,
        at_most(2.0 * cfg.picard_tol),
    );

    let tg = TimeGrid::from_params(params)?;
    let cached = phi_eps(&w, params, &tg)?;
    let m = picard.ball_radius;
    let radius = if m > 0.0 { m } else { FALLBACK_RADIUS };
    let start = probe_trajectory(&tg, &params.grid, 0.5 * radius, params.alpha, 1.0)?;
    let (g2, second) = picard_from(start, &w, params, &cached, cfg.picard_max_iter, cfg.picard_tol)?;
    let uniqueness = xt_norm(&g.sub(&g2)?, params.alpha)?;
    report.check("construct.uniqueness", Some(7), uniqueness, at_most(1e-8));
    report.value("construct.second_start_iterates", second.iterates);

    let inside = probe_trajectory(&tg, &params.grid, radius, params.alpha, 2.0)?;
    let image = xt_norm(&apply_phi(&inside, &w, params, &cached)?.trajectory, params.alpha)?;
    report.check("construct.self_map", None, image, at_most(radius));

    let zero = ProfileTrajectory::zeros(&tg, &params.grid);
    let probe = contraction_probe(&inside, &zero, &w, params)?;
    report.check("construct.contraction_probe", None, probe, at_most(0.5));

    let mut nodes = Vec::with_capacity(tg.len());
    let mut decay: f64 = 0.0;
    for (&t, f) in tg.nodes().iter().zip(g.fields()) {
        let nb = f.norms();
        decay = decay.max(t.powf(params.alpha) * nb.linf);
        nodes.push(NodeRow { t, linf: nb.linf, l2: nb.l2, dxi_l2: nb.dxi_l2, xt_weight: xt_weight(t, f, params.alpha)? });
    }
    report.value("construct.sup_weighted_linf", decay);
    report.value("construct.fixed_point_xt_norm", xt_norm(&g, params.alpha)?);
    report.value("construct.picard", &picard);
    report.value("construct.eps0_actual", w.eps0_actual);

    let rows: Vec<PicardRow> = (0..picard.iterates)
        .map(|k| PicardRow {
            iterate: k + 1,
            xt_norm: picard.xt_norms[k],
            step_distance: picard.step_distances[k],
            contraction_ratio: k.checked_sub(1).map(|j| picard.contraction_ratios[j]),
        })
        .collect();
    out.write_csv("picard.csv", &rows)?;
    out.write_csv("fixed_point.csv", &nodes)?;
    out.write_text("final_data.csv", &w.to_csv())?;
    Ok(Constructed { w, g })
}

impl Campaign for Construct {
    fn name(&self) -> &'static str {
        "construct"
    }

    fn summary(&self) -> &'static str {
        "Picard iteration for the correction profile, contraction and uniqueness"
    }

    fn run(&self, ctx: &mut RunContext<'_>) -> Result<()> {
        construct(ctx.config, &ctx.config.params, &mut ctx.report, &ctx.out)?;
        Ok(())
    }
}

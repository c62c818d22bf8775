use std::f64::consts::PI;

use modwave_core::{FinalData, FrequencyField, PhysicalField};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Campaign, RunContext};
use crate::error::Result;
use crate::report::at_most;

/// Transform identities on the configured grid.
pub struct VerifySpectral;

const GAUSSIAN_WIDTH: f64 = 2.0;

impl Campaign for VerifySpectral {
    fn name(&self) -> &'static str {
        "verify-spectral"
    }

    fn summary(&self) -> &'static str {
        "round trip, Plancherel, free Gaussian and propagator group law"
    }

    fn run(&self, ctx: &mut RunContext<'_>) -> Result<()> {
        let grid = &ctx.config.params.grid;
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.seed);
        let noise: Vec<Complex64> = (0..grid.num_points())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let f = PhysicalField::new(grid.clone(), noise)?;
        let fhat = f.forward();

        let round_trip = fhat.inverse().max_abs_diff(&f)? / f.linf();
        ctx.report.check("spectral.round_trip", Some(1), round_trip, at_most(1e-12));

        let plancherel = (f.l2() - fhat.l2() / (2.0 * PI).sqrt()).abs() / f.l2();
        ctx.report.check("spectral.plancherel", Some(1), plancherel, at_most(1e-10));

        // e^{-x²/2σ²} evolves into (σ²/(σ²+it))^{1/2} e^{-x²/(2(σ²+it))}.
        let s2 = GAUSSIAN_WIDTH * GAUSSIAN_WIDTH;
        let u0 = PhysicalField::from_fn(grid, |x| Complex64::new((-x * x / (2.0 * s2)).exp(), 0.0));
        let mut gaussian_err: f64 = 0.0;
        for t in [1.0, 10.0, 100.0] {
            let numeric = u0.forward().propagate(t).inverse();
            let z = Complex64::new(s2, t);
            let exact = PhysicalField::from_fn(grid, |x| (s2 / z).sqrt() * (-x * x / (2.0 * z)).exp());
            gaussian_err = gaussian_err.max(numeric.max_abs_diff(&exact)?);
        }
        ctx.report.check("spectral.free_gaussian", Some(1), gaussian_err, at_most(1e-8));

        let profile = FinalData::from_shape("random_bandlimited", grid, 1.0, ctx.config.seed)?.w;
        let mut group: f64 = 0.0;
        for (a, b) in [(1.5, 2.25), (37.0, -12.5), (400.0, 600.0)] {
            let composed = profile.propagate(a).propagate(b);
            group = group.max(composed.max_abs_diff(&profile.propagate(a + b))?);
        }
        let inverse = profile.propagate(250.0).propagate(-250.0).max_abs_diff(&profile)?;
        let group = group.max(inverse) / profile.linf();
        ctx.report.check("spectral.group_law", Some(1), group, at_most(1e-12));

        let zero = FrequencyField::zeros(grid).propagate(3.0).inverse().linf();
        ctx.report.value("spectral.zero_maps_to_zero", zero == 0.0);
        Ok(())
    }
}

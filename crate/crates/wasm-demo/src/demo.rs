//! Plain Rust side of the browser demo. Everything here runs natively so it
//! can be tested without a JS host.

use kinetic_flock::diagnostics::{support_tolerance, support_widths, velocity_marginal};
use kinetic_flock::flocking::apply_limiter;
use kinetic_flock::grid::{DGState, LegendreBasis, PhaseGrid};
use kinetic_flock::{flock_diameter, preset, total_mass, InfluenceFunction, ScenarioConfig, Simulation};

#[derive(Debug)]
pub struct LiveRun {
    sim: Simulation,
    t_end: f64,
    mass_tol: f64,
}

impl LiveRun {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self, String> {
        let sim = Simulation::from_config(cfg).map_err(|e| e.to_string())?;
        let grid = sim.grid();
        let mass_tol = support_tolerance(total_mass(sim.state(), grid), grid, cfg.output.support_threshold);
        Ok(Self {
            sim,
            t_end: cfg.integrator.t_end,
            mass_tol,
        })
    }

    pub fn from_preset(name: &str) -> Result<Self, String> {
        Self::from_config(&preset(name).map_err(|e| e.to_string())?)
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        Self::from_config(&ScenarioConfig::from_toml(text).map_err(|e| e.to_string())?)
    }

    pub fn time(&self) -> f64 {
        self.sim.time()
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn grid(&self) -> &PhaseGrid {
        self.sim.grid()
    }

    /// Advances by `span`, never past the configured end time.
    pub fn advance(&mut self, span: f64) -> Result<f64, String> {
        let target = (self.sim.time() + span).min(self.t_end);
        self.sim.advance_to(target).map_err(|e| e.to_string())?;
        Ok(self.sim.time())
    }

    pub fn mass(&self) -> f64 {
        total_mass(self.sim.state(), self.sim.grid())
    }

    /// `[S, V]` support widths.
    pub fn widths(&self) -> [f64; 2] {
        let (s, v) = support_widths(self.sim.state(), self.sim.grid(), self.mass_tol);
        [s, v]
    }

    /// Cell averages, row-major in `x` (index `i * v_cells + j`).
    pub fn averages(&self) -> Vec<f64> {
        let n = self.sim.grid().n_moments();
        self.sim.state().coeffs().chunks(n).map(|c| c[0]).collect()
    }

    /// The velocity marginal sampled at `samples` equispaced points.
    pub fn marginal_samples(&self, samples: usize) -> Vec<f64> {
        let grid = self.sim.grid();
        let marginal = velocity_marginal(self.sim.state(), grid);
        sample_points(grid.v_min(), grid.v_max(), samples)
            .map(|v| marginal.eval(v))
            .collect()
    }
}

/// Interior sample points, half a spacing off each end.
fn sample_points(a: f64, b: f64, samples: usize) -> impl Iterator<Item = f64> {
    let dv = (b - a) / samples as f64;
    (0..samples).map(move |s| a + (s as f64 + 0.5) * dv)
}

/// One unit-width cell with moments `(f0, f1, f2)`, sampled before and after
/// the positivity limiter. Returns `2 * samples` values, raw first.
pub fn limiter_profile(f0: f64, f1: f64, f2: f64, samples: usize) -> Result<Vec<f64>, String> {
    let grid = PhaseGrid::new((0.0, 1.0), 1, (-0.5, 0.5), 1, 2).map_err(|e| e.to_string())?;
    let raw = DGState::from_coeffs(&grid, vec![f0, f1, f2]).map_err(|e| e.to_string())?;
    let limited = apply_limiter(&raw, &grid, 1e-13).map_err(|e| e.to_string())?;
    let basis = LegendreBasis::new(2, 1.0);
    let mut out = Vec::with_capacity(2 * samples);
    for s in [&raw, &limited] {
        out.extend(sample_points(-0.5, 0.5, samples).map(|xi| basis.eval(s.cell(0, 0), xi)));
    }
    Ok(out)
}

/// Flock diameter for `phi(r) = (1 + r)^(-exponent)`. Returns
/// `[D, phi(D)]` followed by the decay envelope at `samples` times in
/// `[0, t_max]`.
pub fn flock_bound(exponent: f64, s0: f64, v0: f64, t_max: f64, samples: usize) -> Result<Vec<f64>, String> {
    let phi = InfluenceFunction::PowerLaw { exponent };
    let bound = flock_diameter(&phi, s0, v0).map_err(|e| e.to_string())?;
    let mut out = vec![bound.diameter, bound.decay_rate];
    let last = samples.saturating_sub(1).max(1) as f64;
    out.extend((0..samples).map(|s| bound.envelope(t_max * s as f64 / last)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn live_run_stops_at_the_end_time() {
        let text = kinetic_flock::preset("clusters-weak")
            .unwrap()
            .to_toml()
            .replace("t_end = 6.0", "t_end = 0.02");
        let mut run = LiveRun::from_toml(&text).unwrap();
        let m0 = run.mass();
        assert_eq!(run.advance(1.0).unwrap(), 0.02);
        assert_eq!(run.advance(1.0).unwrap(), 0.02);
        assert!(((run.mass() - m0) / m0).abs() < 1e-12);
        let g = run.grid();
        assert_eq!(run.averages().len(), g.x_cells() * g.v_cells());
        assert_eq!(run.marginal_samples(50).len(), 50);
        assert!(run.widths()[1] > 0.0);
    }

    #[test]
    fn bad_inputs_surface_as_messages() {
        assert!(LiveRun::from_preset("nope").unwrap_err().contains("nope"));
        assert!(LiveRun::from_toml("grid = 3").is_err());
    }

    #[test]
    fn limiter_profile_is_nonnegative_after_limiting() {
        // average 1 with a steep slope: negative at the left end
        let out = limiter_profile(1.0, 0.2, 0.0, 21).unwrap();
        let (raw, limited) = out.split_at(21);
        assert!(raw[0] < 0.0);
        assert!(limited.iter().all(|&x| x >= -1e-12));
        let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
        assert!((mean(raw) - mean(limited)).abs() < 1e-12);
    }

    #[test]
    fn flock_bound_reports_diameter_and_envelope() {
        let out = flock_bound(0.5, 1.0, 1.0, 4.0, 5).unwrap();
        let d = out[0];
        // 2 sqrt(1 + D) - 2 sqrt(1 + S0) = V0
        let exact = (2f64.sqrt() + 0.5).powi(2) - 1.0;
        assert!((d - exact).abs() < 1e-9, "{d} vs {exact}");
        assert!((out[1] - 1.0 / (1.0 + d).sqrt()).abs() < 1e-12);
        assert_eq!(out[2], 1.0);
        assert!((out[6] - (-4.0 * out[1]).exp()).abs() < 1e-12);
        assert!(flock_bound(2.0, 1.0, 5.0, 1.0, 3).is_err());
    }
}

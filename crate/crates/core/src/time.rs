//! Forward Euler and strong-stability-preserving Runge-Kutta drivers.
//!
//! The SSP schemes are written as convex combinations of forward-Euler
//! substages, so any property the substage preserves (here: nonnegativity at
//! the Gauss-Lobatto points, enforced by the limiter inside each substage)
//! carries over to the full step.

use crate::error::Result;
use crate::flocking::{CflMode, FlockingOperator};
use crate::grid::{lerp, DGState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ForwardEuler,
    SspRk2,
    SspRk3,
}

impl Scheme {
    /// Time order matched to the DG degree: FE for k = 0, RK2 for k = 1,
    /// RK3 for k = 2.
    pub fn for_degree(degree: usize) -> Self {
        match degree {
            0 => Scheme::ForwardEuler,
            1 => Scheme::SspRk2,
            _ => Scheme::SspRk3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::ForwardEuler => "fe",
            Scheme::SspRk2 => "ssp-rk2",
            Scheme::SspRk3 => "ssp-rk3",
        }
    }
}

/// How the step size is picked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    Fixed(f64),
    Cfl(CflMode),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub step: StepControl,
    pub safety: f64,
    pub t_end: f64,
    /// Spacing of output times; `None` outputs only the start and the end.
    pub cadence: Option<f64>,
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(format!("safety factor {} must lie in (0, 1]", self.safety));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(format!("t_end {} must be finite and >= 0", self.t_end));
        }
        if let StepControl::Fixed(dt) = self.step {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(format!("fixed dt {dt} must be positive"));
            }
        }
        if let Some(c) = self.cadence {
            if !(c > 0.0 && c.is_finite()) {
                return Err(format!("output cadence {c} must be positive"));
            }
        }
        Ok(())
    }

    /// Output times `0, c, 2c, ...` up to and including `t_end`.
    pub fn output_times(&self) -> Vec<f64> {
        let mut times = vec![0.0];
        if let Some(c) = self.cadence {
            let mut n = 1usize;
            loop {
                let t = round_time(n as f64 * c);
                if t >= self.t_end - 1e-12 * c {
                    break;
                }
                times.push(t);
                n += 1;
            }
        }
        if self.t_end > 0.0 {
            times.push(self.t_end);
        }
        times
    }
}

/// Snaps accumulated multiples like `0.30000000000000004` to `0.3`.
pub fn round_time(t: f64) -> f64 {
    (t * 1e12).round() / 1e12
}

/// States that can be combined linearly, as the SSP stages require.
pub trait Blend: Sized {
    fn blend(&self, wa: f64, other: &Self, wb: f64) -> Self;
}

impl Blend for f64 {
    fn blend(&self, wa: f64, other: &Self, wb: f64) -> Self {
        lerp(*self, wa, *other, wb)
    }
}

impl Blend for Vec<f64> {
    fn blend(&self, wa: f64, other: &Self, wb: f64) -> Self {
        self.iter()
            .zip(other)
            .map(|(&a, &b)| lerp(a, wa, b, wb))
            .collect()
    }
}

impl Blend for DGState {
    fn blend(&self, wa: f64, other: &Self, wb: f64) -> Self {
        DGState::blend(self, wa, other, wb)
    }
}

/// `u1 = FE(u, dt); u(t + dt) = u/2 + FE(u1, dt)/2`.
pub fn ssp_rk2_step<S, E, F>(state: &S, dt: f64, mut euler: F) -> Result<S, E>
where
    S: Blend,
    F: FnMut(&S, f64) -> Result<S, E>,
{
    let u1 = euler(state, dt)?;
    let u2 = euler(&u1, dt)?;
    Ok(state.blend(0.5, &u2, 0.5))
}

/// `u1 = FE(u, dt); u2 = 3u/4 + FE(u1, dt)/4; u(t + dt) = u/3 + 2 FE(u2, dt)/3`.
pub fn ssp_rk3_step<S, E, F>(state: &S, dt: f64, mut euler: F) -> Result<S, E>
where
    S: Blend,
    F: FnMut(&S, f64) -> Result<S, E>,
{
    let u1 = euler(state, dt)?;
    let u2 = state.blend(0.75, &euler(&u1, dt)?, 0.25);
    Ok(state.blend(1.0 / 3.0, &euler(&u2, dt)?, 2.0 / 3.0))
}

pub fn step_with<S, E, F>(scheme: Scheme, state: &S, dt: f64, mut euler: F) -> Result<S, E>
where
    S: Blend,
    F: FnMut(&S, f64) -> Result<S, E>,
{
    match scheme {
        Scheme::ForwardEuler => euler(state, dt),
        Scheme::SspRk2 => ssp_rk2_step(state, dt, euler),
        Scheme::SspRk3 => ssp_rk3_step(state, dt, euler),
    }
}

impl FlockingOperator {
    /// One step of `scheme` for the alignment subsystem.
    pub fn step(&self, state: &DGState, dt: f64, scheme: Scheme) -> Result<DGState> {
        step_with(scheme, state, dt, |s, h| self.euler_substage(s, h))
    }

    /// Advances the alignment subsystem alone to `t_end`, shortening the
    /// final step to land exactly.
    pub fn integrate(
        &self,
        state: &DGState,
        t_end: f64,
        step: StepControl,
        scheme: Scheme,
        safety: f64,
    ) -> Result<DGState> {
        let mut s = state.clone();
        while s.time < t_end {
            let dt_nominal = match step {
                StepControl::Fixed(dt) => dt,
                StepControl::Cfl(mode) => self.stable_dt(&s, mode, safety),
            };
            let (dt, last) = clip_step(s.time, t_end, dt_nominal);
            s = self.step(&s, dt, scheme)?;
            if last {
                s.time = t_end;
            }
        }
        Ok(s)
    }
}

/// Step size that does not overshoot `target`; the flag is set when the step
/// lands on it.
pub fn clip_step(t: f64, target: f64, dt: f64) -> (f64, bool) {
    let remaining = target - t;
    if remaining <= dt * (1.0 + 1e-9) {
        (remaining, true)
    } else {
        (dt, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_fe(lambda: f64) -> impl FnMut(&f64, f64) -> Result<f64, ()> {
        move |u: &f64, dt: f64| Ok(u + dt * lambda * u)
    }

    #[test]
    fn rk_steps_match_taylor_polynomials() {
        let lambda = -1.7;
        for &dt in &[0.1, 0.01, 0.37] {
            let z: f64 = lambda * dt;
            let rk2 = ssp_rk2_step(&1.0, dt, linear_fe(lambda)).unwrap();
            assert!((rk2 - (1.0 + z + z * z / 2.0)).abs() < 1e-15);
            let rk3 = ssp_rk3_step(&1.0, dt, linear_fe(lambda)).unwrap();
            assert!((rk3 - (1.0 + z + z * z / 2.0 + z * z * z / 6.0)).abs() < 1e-15);
            let fe = step_with(Scheme::ForwardEuler, &1.0, dt, linear_fe(lambda)).unwrap();
            assert!((fe - (1.0 + z)).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_operator_is_identity() {
        let state = vec![1.0, 2.0, 3.5];
        let id = |u: &Vec<f64>, _dt: f64| -> Result<Vec<f64>, ()> { Ok(u.clone()) };
        assert_eq!(ssp_rk2_step(&state, 0.3, id).unwrap(), state);
        assert_eq!(ssp_rk3_step(&state, 0.3, id).unwrap(), state);
    }

    #[test]
    fn stage_weights_are_convex() {
        // a constant "state" is preserved only if every combination sums to 1
        let fe = |u: &f64, _dt: f64| -> Result<f64, ()> { Ok(*u) };
        assert_eq!(ssp_rk3_step(&4.0, 0.1, fe).unwrap(), 4.0);
        assert_eq!(ssp_rk2_step(&4.0, 0.1, fe).unwrap(), 4.0);
    }

    #[test]
    fn output_times_and_clipping() {
        let cfg = IntegratorConfig {
            scheme: Scheme::SspRk3,
            step: StepControl::Fixed(0.004),
            safety: 0.9,
            t_end: 4.0,
            cadence: Some(1.0),
        };
        assert_eq!(cfg.output_times(), vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        let cfg2 = IntegratorConfig {
            t_end: 0.0,
            ..cfg.clone()
        };
        assert_eq!(cfg2.output_times(), vec![0.0]);
        let cfg3 = IntegratorConfig {
            cadence: Some(0.1),
            t_end: 0.35,
            ..cfg.clone()
        };
        assert_eq!(cfg3.output_times(), vec![0.0, 0.1, 0.2, 0.3, 0.35]);
        assert_eq!(clip_step(0.0, 1.0, 0.3), (0.3, false));
        let (dt, last) = clip_step(0.9, 1.0, 0.3);
        assert!(last && (dt - 0.1).abs() < 1e-15);
        assert!(IntegratorConfig {
            safety: 1.5,
            ..cfg.clone()
        }
        .validate()
        .is_err());
        assert!(IntegratorConfig { t_end: -1.0, ..cfg }.validate().is_err());
    }
}

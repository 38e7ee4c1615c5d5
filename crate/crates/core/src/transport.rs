//! Free transport `df/dt + v df/dx = 0` by finite volumes in position, and
//! its splitting with the alignment subsystem.
//!
//! Each velocity row is advected with the speed of its cell center; all
//! stored moments of the row move together.

use crate::error::Result;
use crate::flocking::limit_in_place;
use crate::grid::{DGState, PhaseGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reconstruction {
    FirstOrderUpwind,
    /// Piecewise-linear MUSCL with minmod slopes and SSP-RK2 in time.
    MinmodMuscl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XBoundary {
    /// Empty exterior: nothing flows in, mass leaving the domain is lost.
    Outflow,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Splitting {
    /// transport(dt), then alignment(dt).
    Lie,
    /// transport(dt/2), alignment(dt), transport(dt/2).
    Strang,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransportConfig {
    pub reconstruction: Reconstruction,
    pub boundary: XBoundary,
    pub splitting: Splitting,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self {
            reconstruction: Reconstruction::MinmodMuscl,
            boundary: XBoundary::Outflow,
            splitting: Splitting::Strang,
        }
    }
}

impl Reconstruction {
    /// Largest Courant number per forward-Euler stage that keeps the scheme
    /// monotone.
    pub fn max_courant(&self) -> f64 {
        match self {
            Reconstruction::FirstOrderUpwind => 1.0,
            Reconstruction::MinmodMuscl => 0.5,
        }
    }
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// One forward-Euler stage of `u_t + c u_x = 0` with signed Courant number
/// `nu = c dt / dx`, written into `out`.
fn advect_stage(
    u: &[f64],
    nu: f64,
    recon: Reconstruction,
    boundary: XBoundary,
    out: &mut [f64],
    flux: &mut [f64],
) {
    let m = u.len();
    let at = |i: isize| -> f64 {
        if i >= 0 && (i as usize) < m {
            u[i as usize]
        } else {
            match boundary {
                XBoundary::Outflow => 0.0,
                XBoundary::Periodic => u[i.rem_euclid(m as isize) as usize],
            }
        }
    };
    let slope = |i: isize| -> f64 {
        match recon {
            Reconstruction::FirstOrderUpwind => 0.0,
            Reconstruction::MinmodMuscl => minmod(at(i) - at(i - 1), at(i + 1) - at(i)),
        }
    };
    // flux[q] sits at the left edge of cell q
    for (q, f) in flux.iter_mut().enumerate().take(m + 1) {
        let q = q as isize;
        let face = if nu >= 0.0 {
            at(q - 1) + 0.5 * slope(q - 1)
        } else {
            at(q) - 0.5 * slope(q)
        };
        *f = nu * face;
    }
    if boundary == XBoundary::Periodic {
        // both domain ends are the same face
        flux[m] = flux[0];
    }
    for i in 0..m {
        out[i] = u[i] - (flux[i + 1] - flux[i]);
    }
}

/// Advects a single row `u` for time `dt` at speed `speed`.
pub fn advect_row(u: &mut [f64], speed: f64, dt: f64, dx: f64, recon: Reconstruction, boundary: XBoundary) {
    if speed == 0.0 || dt == 0.0 || u.is_empty() {
        return;
    }
    let courant = speed.abs() * dt / dx;
    let substeps = ((courant / recon.max_courant()) - 1e-12).ceil().max(1.0) as usize;
    let nu = speed * dt / dx / substeps as f64;
    let m = u.len();
    let mut stage = vec![0.0; m];
    let mut stage2 = vec![0.0; m];
    let mut flux = vec![0.0; m + 1];
    for _ in 0..substeps {
        match recon {
            Reconstruction::FirstOrderUpwind => {
                advect_stage(u, nu, recon, boundary, &mut stage, &mut flux);
                u.copy_from_slice(&stage);
            }
            Reconstruction::MinmodMuscl => {
                advect_stage(u, nu, recon, boundary, &mut stage, &mut flux);
                advect_stage(&stage, nu, recon, boundary, &mut stage2, &mut flux);
                for (a, b) in u.iter_mut().zip(&stage2) {
                    *a = 0.5 * *a + 0.5 * b;
                }
            }
        }
    }
}

/// Free transport over `dt`: every velocity row `j` and each of its moment
/// arrays is advected in `x` with speed `v_j`.
pub fn transport_step(state: &DGState, grid: &PhaseGrid, dt: f64, cfg: &TransportConfig) -> DGState {
    let mut out = state.clone();
    out.time = state.time + dt;
    let m = grid.x_cells();
    let dx = grid.dx();
    let mut row = vec![0.0; m];
    for j in 0..grid.v_cells() {
        let speed = grid.v_center(j);
        if speed == 0.0 {
            continue;
        }
        for l in 0..grid.n_moments() {
            for (i, r) in row.iter_mut().enumerate() {
                *r = state.get(i, j, l);
            }
            if row.iter().all(|&r| r == 0.0) {
                continue;
            }
            advect_row(&mut row, speed, dt, dx, cfg.reconstruction, cfg.boundary);
            for (i, &r) in row.iter().enumerate() {
                out.set(i, j, l, r);
            }
        }
    }
    out
}

/// One split step of the full system. `flocking` advances the alignment
/// subsystem; transport substeps are followed by the positivity limiter in
/// velocity.
pub fn split_step<F>(
    state: &DGState,
    grid: &PhaseGrid,
    dt: f64,
    cfg: &TransportConfig,
    limiter_epsilon: f64,
    mut flocking: F,
) -> Result<DGState>
where
    F: FnMut(&DGState, f64) -> Result<DGState>,
{
    let transport = |s: &DGState, tau: f64| -> Result<DGState> {
        let mut t = transport_step(s, grid, tau, cfg);
        limit_in_place(&mut t, grid, limiter_epsilon)?;
        Ok(t)
    };
    let t0 = state.time;
    let mut out = match cfg.splitting {
        Splitting::Lie => {
            let mut a = transport(state, dt)?;
            a.time = t0;
            flocking(&a, dt)?
        }
        Splitting::Strang => {
            let mut a = transport(state, 0.5 * dt)?;
            a.time = t0;
            let mut b = flocking(&a, dt)?;
            b.time = t0;
            transport(&b, 0.5 * dt)?
        }
    };
    out.time = t0 + dt;
    Ok(out)
}

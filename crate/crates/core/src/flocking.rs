//! Semi-discrete DG operator for the velocity-alignment subsystem
//! `df/dt + d/dv (f L[f]) = 0`, the positivity limiter and step-size bounds.

use crate::error::{FlockError, Result};
use crate::grid::{gauss_lobatto, lobatto_points_for_degree, DGState, LegendreBasis, PhaseGrid};
use crate::interaction::{compute_g_moments, GMoments, InfluenceKernel, InteractionModel};

/// The positivity threshold used by the limiter, `min(1e-13, average)`.
pub const DEFAULT_LIMITER_EPSILON: f64 = 1e-13;

/// Default fraction of the CFL bound used when the step is chosen from it.
pub const DEFAULT_SAFETY: f64 = 0.9;

/// Upwind interface value: the left trace when `L >= 0`, else the right one.
#[inline]
pub fn upwind_value(f_left: f64, f_right: f64, l: f64) -> f64 {
    if l >= 0.0 {
        f_left
    } else {
        f_right
    }
}

/// Interface fluxes `f_hat * L` for every position cell. Index `q` of a row is
/// the velocity interface between cells `q - 1` and `q`; the two domain ends
/// carry zero flux.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxSet {
    v_interfaces: usize,
    flux: Vec<f64>,
}

impl FluxSet {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.flux[i * self.v_interfaces..(i + 1) * self.v_interfaces]
    }
}

fn fill_fluxes(state: &DGState, basis: &LegendreBasis, g: &GMoments, i: usize, h: f64, out: &mut [f64]) {
    let n = state.v_cells();
    let sums = g.sums(i);
    out[0] = 0.0;
    out[n] = 0.0;
    for q in 1..n {
        let l = sums.interface_velocity(q, h);
        let left = basis.right_trace(state.cell(i, q - 1));
        let right = basis.left_trace(state.cell(i, q));
        out[q] = upwind_value(left, right, l) * l;
    }
}

pub fn interface_fluxes(state: &DGState, g: &GMoments, grid: &PhaseGrid) -> FluxSet {
    let n = grid.v_cells();
    let basis = grid.basis();
    let mut flux = vec![0.0; grid.x_cells() * (n + 1)];
    for (i, row) in flux.chunks_mut(n + 1).enumerate() {
        fill_fluxes(state, &basis, g, i, grid.h(), row);
    }
    FluxSet {
        v_interfaces: n + 1,
        flux,
    }
}

/// Time derivative of every moment under the alignment operator, given the
/// `G` moments of the same state. The returned state has `time = 1`, the
/// derivative of time itself.
pub fn flocking_rhs(state: &DGState, g: &GMoments, grid: &PhaseGrid) -> DGState {
    let n = grid.v_cells();
    let k = grid.degree();
    let h = grid.h();
    let basis = grid.basis();
    let mut rhs = DGState::zeros(grid);
    rhs.time = 1.0;
    let mut flux = vec![0.0; n + 1];

    for i in 0..grid.x_cells() {
        fill_fluxes(state, &basis, g, i, h, &mut flux);
        let sums = g.sums(i);
        for j in 0..n {
            let (fl, fr) = (flux[j], flux[j + 1]);
            let c = state.cell(i, j);
            let out = rhs.cell_mut(i, j);
            out[0] = (fl - fr) / h;
            if k >= 1 {
                let slope = sums.centered(j);
                out[1] = -(fl + fr) / (2.0 * h) + h * (c[0] * slope - c[1] * sums.sum0);
                if k >= 2 {
                    out[2] =
                        (fl - fr) / (6.0 * h) + 2.0 * h * (c[1] * slope - (c[0] / 12.0 + c[2]) * sums.sum0);
                }
            }
        }
    }
    rhs
}

/// Weight of the first Gauss-Lobatto point for degree `k`: 1/2 for `k <= 1`,
/// 1/6 for `k = 2`.
pub fn lobatto_alpha1(degree: usize) -> f64 {
    let (_, weights) =
        gauss_lobatto(lobatto_points_for_degree(degree)).expect("supported degrees use 2 or 3 points");
    weights[0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CflMode {
    /// `dt < alpha_1 h / max |L|` from the current interface velocities.
    Dynamic,
    /// `dt < alpha_1 h / (v_max - v_min)`, valid for all times.
    Static,
}

/// Largest positivity-preserving forward-Euler step, scaled by `safety`.
pub fn max_stable_dt(g: &GMoments, grid: &PhaseGrid, mode: CflMode, safety: f64) -> f64 {
    let alpha1 = lobatto_alpha1(grid.degree());
    let h = grid.h();
    let static_dt = safety * alpha1 * h / grid.v_span();
    match mode {
        CflMode::Static => static_dt,
        CflMode::Dynamic => {
            let mut lmax: f64 = 0.0;
            for i in 0..g.x_cells() {
                let sums = g.sums(i);
                // L is affine in q, so the extremes sit at the end interfaces
                lmax = lmax
                    .max(sums.interface_velocity(0, h).abs())
                    .max(sums.interface_velocity(grid.v_cells(), h).abs());
            }
            if lmax > 0.0 {
                safety * alpha1 * h / lmax
            } else {
                static_dt
            }
        }
    }
}

/// Smallest reconstructed value over all Gauss-Lobatto points of all cells.
pub fn min_lobatto_value(state: &DGState, grid: &PhaseGrid) -> f64 {
    let basis = grid.basis();
    let (points, _) = gauss_lobatto(lobatto_points_for_degree(grid.degree())).unwrap();
    let h = grid.h();
    let mut min = f64::INFINITY;
    for i in 0..grid.x_cells() {
        for j in 0..grid.v_cells() {
            let c = state.cell(i, j);
            for &p in &points {
                min = min.min(basis.eval(c, p * h));
            }
        }
    }
    min
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LimiterStats {
    /// Cells whose higher moments were scaled down.
    pub limited: usize,
    /// Cells whose roundoff-negative average was reset to zero.
    pub cleared: usize,
}

/// Scales the higher moments of each cell by `theta` so that the
/// reconstruction is nonnegative at the Gauss-Lobatto points; cell averages
/// are untouched.
pub fn limit_in_place(state: &mut DGState, grid: &PhaseGrid, epsilon: f64) -> Result<LimiterStats> {
    let basis = grid.basis();
    let k = grid.degree();
    let h = grid.h();
    let (unit_points, _) = gauss_lobatto(lobatto_points_for_degree(k))?;
    let points: Vec<f64> = unit_points.iter().map(|p| p * h).collect();
    let scale = state
        .coeffs()
        .chunks(grid.n_moments())
        .fold(0.0f64, |a, c| a.max(c[0].abs()));
    let negative_floor = -64.0 * f64::EPSILON * scale;
    let time = state.time;
    let mut stats = LimiterStats::default();

    let min_at = |c: &[f64]| {
        points
            .iter()
            .map(|&xi| basis.eval(c, xi))
            .fold(f64::INFINITY, f64::min)
    };

    for i in 0..grid.x_cells() {
        for j in 0..grid.v_cells() {
            let c = state.cell_mut(i, j);
            let avg = c[0];
            if !avg.is_finite() {
                return Err(FlockError::NonFinite { time });
            }
            if avg < 0.0 {
                if avg < negative_floor {
                    return Err(FlockError::NegativeAverage {
                        time,
                        x_cell: i,
                        v_cell: j,
                        value: avg,
                    });
                }
                c.iter_mut().for_each(|v| *v = 0.0);
                stats.cleared += 1;
                continue;
            }
            if k == 0 {
                continue;
            }
            let m = min_at(c);
            let eps = epsilon.min(avg);
            if m >= eps {
                continue;
            }
            // a cell limited in an earlier pass lands here with m equal to eps
            // up to roundoff; leave it alone so that limiting is idempotent
            let slack = 16.0 * f64::EPSILON * (avg + (avg - m).abs());
            if m >= 0.0 && eps - m <= slack {
                continue;
            }
            let theta = (avg - eps) / (avg - m);
            c[1..].iter_mut().for_each(|v| *v *= theta);
            stats.limited += 1;

            // roundoff at large averages can leave a value a few ulps below zero
            let mut tries = 0;
            loop {
                let m2 = min_at(c);
                if m2 >= 0.0 {
                    break;
                }
                if tries == 3 || avg == 0.0 {
                    c[1..].iter_mut().for_each(|v| *v = 0.0);
                    break;
                }
                let shrink = avg / (avg - m2) * (1.0 - 4.0 * f64::EPSILON);
                c[1..].iter_mut().for_each(|v| *v *= shrink);
                tries += 1;
            }
        }
    }
    Ok(stats)
}

/// Returns a limited copy of `state`; see [`limit_in_place`].
pub fn apply_limiter(state: &DGState, grid: &PhaseGrid, epsilon: f64) -> Result<DGState> {
    let mut out = state.clone();
    limit_in_place(&mut out, grid, epsilon)?;
    Ok(out)
}

/// The alignment operator bound to a grid and interaction model.
#[derive(Debug, Clone)]
pub struct FlockingOperator {
    grid: PhaseGrid,
    model: InteractionModel,
    kernel: InfluenceKernel,
    limiter_epsilon: f64,
}

impl FlockingOperator {
    pub fn new(grid: PhaseGrid, model: InteractionModel) -> Self {
        let kernel = InfluenceKernel::new(&model.phi, &grid);
        Self {
            grid,
            model,
            kernel,
            limiter_epsilon: DEFAULT_LIMITER_EPSILON,
        }
    }

    pub fn with_limiter_epsilon(mut self, epsilon: f64) -> Self {
        self.limiter_epsilon = epsilon;
        self
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn model(&self) -> &InteractionModel {
        &self.model
    }

    pub fn kernel(&self) -> &InfluenceKernel {
        &self.kernel
    }

    pub fn limiter_epsilon(&self) -> f64 {
        self.limiter_epsilon
    }

    pub fn g_moments(&self, state: &DGState) -> GMoments {
        compute_g_moments(state, &self.model, &self.kernel, &self.grid)
    }

    pub fn rhs(&self, state: &DGState) -> DGState {
        let g = self.g_moments(state);
        flocking_rhs(state, &g, &self.grid)
    }

    /// `limit(state + dt * rhs(state))`.
    pub fn euler_substage(&self, state: &DGState, dt: f64) -> Result<DGState> {
        if dt == 0.0 {
            return Ok(state.clone());
        }
        let rhs = self.rhs(state);
        let mut next = DGState::blend(state, 1.0, &rhs, dt);
        limit_in_place(&mut next, &self.grid, self.limiter_epsilon)?;
        Ok(next)
    }

    pub fn stable_dt(&self, state: &DGState, mode: CflMode, safety: f64) -> f64 {
        match mode {
            CflMode::Static => {
                lobatto_alpha1(self.grid.degree()) * safety * self.grid.h() / self.grid.v_span()
            }
            CflMode::Dynamic => max_stable_dt(&self.g_moments(state), &self.grid, mode, safety),
        }
    }

    pub fn limit(&self, state: &mut DGState) -> Result<LimiterStats> {
        limit_in_place(state, &self.grid, self.limiter_epsilon)
    }
}

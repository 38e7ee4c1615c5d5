//! Flocking observables and error measures.

use std::ops::Range;

use crate::error::{FlockError, Result};
use crate::grid::{DGState, LegendreBasis, PhaseGrid, GAUSS_LEGENDRE_5};
use crate::interaction::InfluenceFunction;

/// Default relative support threshold: a row counts as empty when it holds
/// less than `1e-10 * m / (M N)`.
pub const DEFAULT_SUPPORT_THRESHOLD: f64 = 1e-10;

/// Fraction of the marginal maximum a local peak must exceed to count as a
/// cluster.
pub const DEFAULT_CLUSTER_FRACTION: f64 = 0.05;

/// `sum_{i,j} f_{i,j}^(0) h dx`.
pub fn total_mass(state: &DGState, grid: &PhaseGrid) -> f64 {
    let nm = grid.n_moments();
    let sum: f64 = state.coeffs().iter().step_by(nm).sum();
    sum * grid.h() * grid.dx()
}

/// Velocity marginal `F(v) = integral f dx`, in the DG moment representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    v_min: f64,
    v_max: f64,
    degree: usize,
    moments: Vec<f64>,
}

impl Marginal {
    pub fn new(v_bounds: (f64, f64), degree: usize, moments: Vec<f64>) -> Self {
        assert_eq!(moments.len() % (degree + 1), 0);
        Self {
            v_min: v_bounds.0,
            v_max: v_bounds.1,
            degree,
            moments,
        }
    }

    pub fn v_cells(&self) -> usize {
        self.moments.len() / (self.degree + 1)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn h(&self) -> f64 {
        (self.v_max - self.v_min) / self.v_cells() as f64
    }

    pub fn v_bounds(&self) -> (f64, f64) {
        (self.v_min, self.v_max)
    }

    pub fn v_center(&self, j: usize) -> f64 {
        self.v_min + (j as f64 + 0.5) * self.h()
    }

    pub fn cell(&self, j: usize) -> &[f64] {
        let nm = self.degree + 1;
        &self.moments[j * nm..(j + 1) * nm]
    }

    /// Cell averages `F_j^(0)`.
    pub fn averages(&self) -> Vec<f64> {
        self.moments.iter().step_by(self.degree + 1).copied().collect()
    }

    pub fn basis(&self) -> LegendreBasis {
        LegendreBasis::new(self.degree, self.h())
    }

    /// Reconstruction at velocity `v`.
    pub fn eval(&self, v: f64) -> f64 {
        let h = self.h();
        let j = (((v - self.v_min) / h).floor().max(0.0) as usize).min(self.v_cells() - 1);
        self.basis().eval(self.cell(j), v - self.v_center(j))
    }

    pub fn mass(&self) -> f64 {
        self.h() * self.averages().iter().sum::<f64>()
    }

    /// Largest cell average.
    pub fn peak(&self) -> f64 {
        self.averages().into_iter().fold(0.0, f64::max)
    }
}

/// `F_j^(l) = sum_i f_{i,j}^(l) dx`.
pub fn velocity_marginal(state: &DGState, grid: &PhaseGrid) -> Marginal {
    velocity_marginal_in(state, grid, 0..grid.x_cells())
}

/// Velocity marginal over a subset of position cells.
pub fn velocity_marginal_in(state: &DGState, grid: &PhaseGrid, x_range: Range<usize>) -> Marginal {
    let nm = grid.n_moments();
    let dx = grid.dx();
    let mut moments = vec![0.0; grid.v_cells() * nm];
    for i in x_range {
        for (acc, &c) in moments.iter_mut().zip(state.column(i)) {
            *acc += c * dx;
        }
    }
    Marginal::new((grid.v_min(), grid.v_max()), grid.degree(), moments)
}

/// `threshold * m / (M N)`.
pub fn support_tolerance(mass: f64, grid: &PhaseGrid, threshold: f64) -> f64 {
    threshold * mass / (grid.x_cells() * grid.v_cells()) as f64
}

/// Widths `(S, V)` of the smallest blocks of position / velocity cells
/// outside of which every row holds less than `mass_tol`.
pub fn support_widths(state: &DGState, grid: &PhaseGrid, mass_tol: f64) -> (f64, f64) {
    support_widths_in(state, grid, mass_tol, 0..grid.x_cells())
}

/// [`support_widths`] restricted to the position cells in `x_range`.
pub fn support_widths_in(
    state: &DGState,
    grid: &PhaseGrid,
    mass_tol: f64,
    x_range: Range<usize>,
) -> (f64, f64) {
    let cell_mass = grid.h() * grid.dx();
    let mut x_mass = vec![0.0; grid.x_cells()];
    let mut v_mass = vec![0.0; grid.v_cells()];
    for i in x_range {
        for j in 0..grid.v_cells() {
            let m = state.get(i, j, 0) * cell_mass;
            x_mass[i] += m;
            v_mass[j] += m;
        }
    }
    let extent = |rows: &[f64]| -> Option<usize> {
        let first = rows.iter().position(|&m| m > 0.0 && m >= mass_tol)?;
        let last = rows.iter().rposition(|&m| m > 0.0 && m >= mass_tol)?;
        Some(last - first + 1)
    };
    match (extent(&x_mass), extent(&v_mass)) {
        (Some(nx), Some(nv)) => (nx as f64 * grid.dx(), nv as f64 * grid.h()),
        _ => (0.0, 0.0),
    }
}

/// Local maxima of the marginal's cell averages above `fraction` of the
/// largest one; runs of equal values count once.
pub fn cluster_count(marginal: &Marginal, fraction: f64) -> usize {
    let avg = marginal.averages();
    let max = avg.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return 0;
    }
    let floor = fraction * max;
    let mut count = 0;
    let mut j = 0;
    while j < avg.len() {
        let mut end = j;
        while end + 1 < avg.len() && avg[end + 1] == avg[j] {
            end += 1;
        }
        let left_lower = j == 0 || avg[j - 1] < avg[j];
        let right_lower = end + 1 == avg.len() || avg[end + 1] < avg[j];
        if left_lower && right_lower && avg[j] > floor {
            count += 1;
        }
        j = end + 1;
    }
    count
}

/// A priori flock diameter and alignment rate from the initial support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlockBound {
    pub s0: f64,
    pub v0: f64,
    /// `D` with `psi(D) = V0 + psi(S0)`, `psi` the antiderivative of `phi`.
    pub diameter: f64,
    /// `phi(D)`.
    pub decay_rate: f64,
}

impl FlockBound {
    pub fn envelope(&self, t: f64) -> f64 {
        decay_envelope(self, self.v0, t)
    }
}

fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, a, m);
    let right = simpson(fm, frm, fb, m, b);
    let delta = left + right - whole;
    // force a few levels so that kinks and jumps cannot hide between the
    // first five samples
    if depth >= 8 && (depth >= 48 || delta.abs() <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
        + adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
}

/// `integral_a^b f` by adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    adaptive_simpson(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 0)
}

const PSI_TOL: f64 = 1e-12;
const BRACKET_CUTOFF: f64 = 1e12;

/// Solves `integral_{S0}^{D} phi = V0` for the flock diameter `D`.
///
/// Returns [`FlockError::NoFlockBound`] when the integral of `phi` beyond
/// `S0` does not exceed `V0` before the search cutoff.
pub fn flock_diameter(phi: &InfluenceFunction, s0: f64, v0: f64) -> Result<FlockBound> {
    let f = |r: f64| phi.eval(r);
    if v0 <= 0.0 {
        return Ok(FlockBound {
            s0,
            v0,
            diameter: s0,
            decay_rate: phi.eval(s0),
        });
    }
    // march outwards in doubling segments until the accumulated integral
    // passes V0
    let mut seg_lo = s0;
    let mut width = s0.max(1.0);
    let mut acc = 0.0;
    let (seg_lo, acc_lo) = loop {
        let seg_hi = seg_lo + width;
        let piece = integrate(&f, seg_lo, seg_hi, PSI_TOL);
        if acc + piece >= v0 {
            break (seg_lo, acc);
        }
        acc += piece;
        seg_lo = seg_hi;
        width *= 2.0;
        if seg_lo > BRACKET_CUTOFF {
            return Err(FlockError::NoFlockBound { s0, v0 });
        }
    };
    let residual = |d: f64| acc_lo + integrate(&f, seg_lo, d, PSI_TOL) - v0;
    let (mut lo, mut hi) = (seg_lo, seg_lo + width);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let diameter = 0.5 * (lo + hi);
    Ok(FlockBound {
        s0,
        v0,
        diameter,
        decay_rate: phi.eval(diameter),
    })
}

/// `V0 exp(-phi(D) t)`.
pub fn decay_envelope(bound: &FlockBound, v0: f64, t: f64) -> f64 {
    v0 * (-bound.decay_rate * t).exp()
}

/// `|| Fa - Fb ||_{L^1}` for marginals on nested velocity grids, integrated
/// exactly cell by cell on the finer grid: each cell is split where the
/// difference changes sign and the pieces use 5-point Gauss quadrature.
pub fn l1_error(a: &Marginal, b: &Marginal) -> Result<f64> {
    let (coarse, fine) = if a.v_cells() <= b.v_cells() {
        (a, b)
    } else {
        (b, a)
    };
    let (c0, c1) = coarse.v_bounds();
    let (f0, f1) = fine.v_bounds();
    let span = (c1 - c0).abs().max(1e-300);
    if (c0 - f0).abs() > 1e-12 * span || (c1 - f1).abs() > 1e-12 * span {
        return Err(FlockError::NonNestedGrids(format!(
            "velocity bounds differ: [{c0}, {c1}] vs [{f0}, {f1}]"
        )));
    }
    if fine.v_cells() % coarse.v_cells() != 0 {
        return Err(FlockError::NonNestedGrids(format!(
            "{} cells do not refine {} cells",
            fine.v_cells(),
            coarse.v_cells()
        )));
    }
    let ratio = fine.v_cells() / coarse.v_cells();
    let hf = fine.h();
    let cb = coarse.basis();
    let fb = fine.basis();
    let (nodes, weights) = GAUSS_LEGENDRE_5;
    let mut total = 0.0;
    for jf in 0..fine.v_cells() {
        let jc = jf / ratio;
        let shift = fine.v_center(jf) - coarse.v_center(jc);
        let diff = |xi: f64| cb.eval(coarse.cell(jc), shift + xi) - fb.eval(fine.cell(jf), xi);
        // the difference is a polynomial of degree <= 2; split the cell at
        // its sign changes so that each piece is integrated exactly
        let mut cuts = vec![-0.5 * hf];
        cuts.extend(quadratic_roots(diff(-0.5 * hf), diff(0.0), diff(0.5 * hf), hf));
        cuts.push(0.5 * hf);
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let piece: f64 = (0..5)
                .map(|q| {
                    let xi = 0.5 * (a + b) + 0.5 * (b - a) * nodes[q];
                    0.5 * (b - a) * weights[q] * diff(xi)
                })
                .sum();
            total += piece.abs();
        }
    }
    Ok(total)
}

/// Roots strictly inside `(-h/2, h/2)` of the quadratic through the values
/// at `-h/2`, `0`, `h/2`, in increasing order.
fn quadratic_roots(left: f64, mid: f64, right: f64, h: f64) -> Vec<f64> {
    let half = 0.5 * h;
    // p(xi) = c0 + c1 xi + c2 xi^2
    let c0 = mid;
    let c1 = (right - left) / h;
    let c2 = (right + left - 2.0 * mid) / (2.0 * half * half);
    let scale = left.abs().max(mid.abs()).max(right.abs());
    let mut roots = Vec::new();
    if c2.abs() * half * half <= 1e-14 * scale {
        if c1 != 0.0 {
            roots.push(-c0 / c1);
        }
    } else {
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc > 0.0 {
            let sq = disc.sqrt();
            // numerically stable pair
            let q = -0.5 * (c1 + c1.signum() * sq);
            let (r1, r2) = if q != 0.0 {
                (q / c2, c0 / q)
            } else {
                (sq / (2.0 * c2), -sq / (2.0 * c2))
            };
            roots.push(r1.min(r2));
            roots.push(r1.max(r2));
        }
    }
    roots.retain(|r| r.is_finite() && *r > -half && *r < half);
    roots
}

/// `r_s = -log2(e_{s+1} / e_s)` for consecutive errors.
pub fn convergence_rates(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| -(w[1] / w[0]).log2()).collect()
}

/// Observables at one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub total_mass: f64,
    pub s_width: f64,
    pub v_width: f64,
    pub marginal: Marginal,
    pub cluster_count: usize,
}

impl DiagnosticsRecord {
    pub fn measure(state: &DGState, grid: &PhaseGrid, mass_tol: f64, cluster_fraction: f64) -> Self {
        let marginal = velocity_marginal(state, grid);
        let (s_width, v_width) = support_widths(state, grid, mass_tol);
        Self {
            time: state.time,
            total_mass: total_mass(state, grid),
            s_width,
            v_width,
            cluster_count: cluster_count(&marginal, cluster_fraction),
            marginal,
        }
    }
}

//! Phase-space grid, the Legendre modal basis on velocity cells and the
//! quadrature rules used for projection and positivity enforcement.
//!
//! Positions are discretized by `M` finite-volume cells, velocities by `N`
//! DG cells carrying a polynomial of degree `k <= 2`. On velocity cell `j`
//! the density is stored through its scaled Legendre moments
//!
//! ```text
//! f^(l) = h^-(l+1) * integral over I_j of f(v) p^(l)(v - v_j) dv
//! ```
//!
//! with `p^(0) = 1`, `p^(1) = xi`, `p^(2) = xi^2 - h^2/12`, and reconstructed as
//! `f(v) = sum_l a_l f^(l) p^(l)(v - v_j)` with `a = (1, 12/h, 180/h^2)`.

use crate::error::{FlockError, Result};

/// Highest supported polynomial degree in velocity.
pub const MAX_DEGREE: usize = 2;

/// Uniform grid in position (finite volumes) times velocity (DG cells).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    x_min: f64,
    x_max: f64,
    x_cells: usize,
    v_min: f64,
    v_max: f64,
    v_cells: usize,
    degree: usize,
}

impl PhaseGrid {
    pub fn new(
        x_bounds: (f64, f64),
        x_cells: usize,
        v_bounds: (f64, f64),
        v_cells: usize,
        degree: usize,
    ) -> Result<Self> {
        let (x_min, x_max) = x_bounds;
        let (v_min, v_max) = v_bounds;
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(FlockError::InvalidGrid(format!(
                "x bounds [{x_min}, {x_max}] must be finite with x_max > x_min"
            )));
        }
        if !(v_min.is_finite() && v_max.is_finite() && v_max > v_min) {
            return Err(FlockError::InvalidGrid(format!(
                "v bounds [{v_min}, {v_max}] must be finite with v_max > v_min"
            )));
        }
        if x_cells == 0 || v_cells == 0 {
            return Err(FlockError::InvalidGrid("cell counts must be at least 1".into()));
        }
        if degree > MAX_DEGREE {
            return Err(FlockError::InvalidGrid(format!(
                "polynomial degree {degree} not supported (max {MAX_DEGREE})"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            x_cells,
            v_min,
            v_max,
            v_cells,
            degree,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn v_min(&self) -> f64 {
        self.v_min
    }
    pub fn v_max(&self) -> f64 {
        self.v_max
    }
    /// Number of position cells `M`.
    pub fn x_cells(&self) -> usize {
        self.x_cells
    }
    /// Number of velocity cells `N`.
    pub fn v_cells(&self) -> usize {
        self.v_cells
    }
    /// DG polynomial degree `k`.
    pub fn degree(&self) -> usize {
        self.degree
    }
    /// Moments stored per cell, `k + 1`.
    pub fn n_moments(&self) -> usize {
        self.degree + 1
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.x_cells as f64
    }

    /// Velocity mesh size `h`.
    pub fn h(&self) -> f64 {
        (self.v_max - self.v_min) / self.v_cells as f64
    }

    pub fn x_span(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn v_span(&self) -> f64 {
        self.v_max - self.v_min
    }

    pub fn x_center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx()
    }

    pub fn v_center(&self, j: usize) -> f64 {
        self.v_min + (j as f64 + 0.5) * self.h()
    }

    /// Velocity interface `q` for `q = 0..=N`; interface `q` is the right
    /// edge of cell `q - 1` and the left edge of cell `q`. Both neighbours
    /// read this one value.
    pub fn v_interface(&self, q: usize) -> f64 {
        if q == self.v_cells {
            self.v_max
        } else {
            self.v_min + q as f64 * self.h()
        }
    }

    pub fn x_interface(&self, i: usize) -> f64 {
        if i == self.x_cells {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx()
        }
    }

    /// Index of the velocity cell containing `v` (half-open cells, clamped).
    pub fn v_cell_of(&self, v: f64) -> usize {
        locate(v, self.v_min, self.h(), self.v_cells)
    }

    /// Index of the position cell containing `x` (half-open cells, clamped).
    pub fn x_cell_of(&self, x: f64) -> usize {
        locate(x, self.x_min, self.dx(), self.x_cells)
    }

    pub fn basis(&self) -> LegendreBasis {
        LegendreBasis::new(self.degree, self.h())
    }

    /// Same grid with a different polynomial degree.
    pub fn with_degree(&self, degree: usize) -> Result<Self> {
        Self::new(
            (self.x_min, self.x_max),
            self.x_cells,
            (self.v_min, self.v_max),
            self.v_cells,
            degree,
        )
    }
}

fn locate(y: f64, lo: f64, width: f64, cells: usize) -> usize {
    let idx = ((y - lo) / width).floor();
    if idx <= 0.0 {
        0
    } else {
        (idx as usize).min(cells - 1)
    }
}

/// Scaled Legendre polynomials on a velocity cell of width `h`, in the local
/// coordinate `xi = v - v_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreBasis {
    degree: usize,
    h: f64,
    normalizers: [f64; MAX_DEGREE + 1],
}

impl LegendreBasis {
    pub fn new(degree: usize, h: f64) -> Self {
        assert!(degree <= MAX_DEGREE, "degree {degree} > {MAX_DEGREE}");
        Self {
            degree,
            h,
            normalizers: [1.0, 12.0 / h, 180.0 / (h * h)],
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// `a_l`, the factor turning moment `l` into an expansion coefficient.
    pub fn normalizer(&self, l: usize) -> f64 {
        self.normalizers[l]
    }

    /// `p^(l)(xi)`.
    pub fn poly(&self, l: usize, xi: f64) -> f64 {
        match l {
            0 => 1.0,
            1 => xi,
            2 => xi * xi - self.h * self.h / 12.0,
            _ => panic!("Legendre degree {l} not supported"),
        }
    }

    /// Reconstructed density at local offset `xi` from the cell center.
    pub fn eval(&self, moments: &[f64], xi: f64) -> f64 {
        moments
            .iter()
            .take(self.degree + 1)
            .enumerate()
            .map(|(l, &m)| self.normalizers[l] * m * self.poly(l, xi))
            .sum()
    }

    /// Value at the right edge of the cell, `f(v_{j+1/2}^-)`.
    pub fn right_trace(&self, moments: &[f64]) -> f64 {
        self.eval(moments, 0.5 * self.h)
    }

    /// Value at the left edge of the cell, `f(v_{j-1/2}^+)`.
    pub fn left_trace(&self, moments: &[f64]) -> f64 {
        self.eval(moments, -0.5 * self.h)
    }
}

/// Evaluates the cell expansion `sum_l a_l f^(l) p^(l)(v_local)`.
pub fn eval_cell(moments: &[f64], basis: &LegendreBasis, v_local: f64) -> f64 {
    basis.eval(moments, v_local)
}

/// Gauss-Lobatto rule on `[-1/2, 1/2]` with weights summing to one.
pub fn gauss_lobatto(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    match n {
        2 => Ok((vec![-0.5, 0.5], vec![0.5, 0.5])),
        3 => Ok((vec![-0.5, 0.0, 0.5], vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0])),
        4 => {
            let p = 0.5 / 5f64.sqrt();
            Ok((
                vec![-0.5, -p, p, 0.5],
                vec![1.0 / 12.0, 5.0 / 12.0, 5.0 / 12.0, 1.0 / 12.0],
            ))
        }
        _ => Err(FlockError::UnsupportedQuadrature(n)),
    }
}

/// Number of Gauss-Lobatto points needed for positivity at degree `k`
/// (the rule must be exact to degree `k <= 2n - 3`).
pub fn lobatto_points_for_degree(degree: usize) -> usize {
    match degree {
        0 | 1 => 2,
        _ => 3,
    }
}

/// Five-point Gauss-Legendre nodes and weights on `[-1, 1]`.
pub const GAUSS_LEGENDRE_5: ([f64; 5], [f64; 5]) = (
    [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ],
    [
        0.236_926_885_056_189_1,
        0.478_628_670_499_366_5,
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
    ],
);

/// Moments `f^(0..=k)` of one velocity cell for the density `g(xi)`, where
/// `xi` is the offset from the cell center, using 5-point Gauss-Legendre.
pub fn project_cell(g: impl Fn(f64) -> f64, basis: &LegendreBasis, out: &mut [f64]) {
    let h = basis.h();
    let (nodes, weights) = GAUSS_LEGENDRE_5;
    let samples: [(f64, f64); 5] = std::array::from_fn(|q| (0.5 * h * nodes[q], 0.5 * h * weights[q]));
    for (l, slot) in out.iter_mut().enumerate().take(basis.degree() + 1) {
        let integral: f64 = samples.iter().map(|&(xi, w)| w * g(xi) * basis.poly(l, xi)).sum();
        *slot = integral / h.powi(l as i32 + 1);
    }
}

/// DG solution: moments `f_{i,j}^(l)` for every position cell `i`, velocity
/// cell `j` and moment `l`, plus the current time.
#[derive(Debug, Clone, PartialEq)]
pub struct DGState {
    x_cells: usize,
    v_cells: usize,
    n_moments: usize,
    coeffs: Vec<f64>,
    pub time: f64,
}

impl DGState {
    pub fn zeros(grid: &PhaseGrid) -> Self {
        Self {
            x_cells: grid.x_cells(),
            v_cells: grid.v_cells(),
            n_moments: grid.n_moments(),
            coeffs: vec![0.0; grid.x_cells() * grid.v_cells() * grid.n_moments()],
            time: 0.0,
        }
    }

    /// Wraps a flat coefficient array laid out as `[i][j][l]`.
    pub fn from_coeffs(grid: &PhaseGrid, coeffs: Vec<f64>) -> Result<Self> {
        let expected = grid.x_cells() * grid.v_cells() * grid.n_moments();
        if coeffs.len() != expected {
            return Err(FlockError::InvalidGrid(format!(
                "coefficient array has length {}, grid needs {expected}",
                coeffs.len()
            )));
        }
        Ok(Self {
            x_cells: grid.x_cells(),
            v_cells: grid.v_cells(),
            n_moments: grid.n_moments(),
            coeffs,
            time: 0.0,
        })
    }

    pub fn x_cells(&self) -> usize {
        self.x_cells
    }
    pub fn v_cells(&self) -> usize {
        self.v_cells
    }
    pub fn n_moments(&self) -> usize {
        self.n_moments
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        (i * self.v_cells + j) * self.n_moments
    }

    #[inline]
    pub fn cell(&self, i: usize, j: usize) -> &[f64] {
        let o = self.offset(i, j);
        &self.coeffs[o..o + self.n_moments]
    }

    #[inline]
    pub fn cell_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let o = self.offset(i, j);
        &mut self.coeffs[o..o + self.n_moments]
    }

    /// All moments of position cell `i`, laid out as `[j][l]`.
    pub fn column(&self, i: usize) -> &[f64] {
        let stride = self.v_cells * self.n_moments;
        &self.coeffs[i * stride..(i + 1) * stride]
    }

    pub fn column_mut(&mut self, i: usize) -> &mut [f64] {
        let stride = self.v_cells * self.n_moments;
        &mut self.coeffs[i * stride..(i + 1) * stride]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, l: usize) -> f64 {
        self.coeffs[self.offset(i, j) + l]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, l: usize, value: f64) {
        let o = self.offset(i, j);
        self.coeffs[o + l] = value;
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite()) && self.time.is_finite()
    }

    /// `wa * a + wb * b`, including the time stamp. Convex weights are
    /// evaluated as `a + wb * (b - a)` so that blending equal states is exact.
    pub fn blend(a: &DGState, wa: f64, b: &DGState, wb: f64) -> DGState {
        debug_assert_eq!(a.coeffs.len(), b.coeffs.len());
        DGState {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(&x, &y)| lerp(x, wa, y, wb))
                .collect(),
            time: lerp(a.time, wa, b.time, wb),
            x_cells: a.x_cells,
            v_cells: a.v_cells,
            n_moments: a.n_moments,
        }
    }

    /// Copy of this state truncated or zero-padded to `n_moments` per cell.
    pub fn with_moments(&self, n_moments: usize) -> DGState {
        let mut coeffs = vec![0.0; self.x_cells * self.v_cells * n_moments];
        let keep = n_moments.min(self.n_moments);
        for c in 0..self.x_cells * self.v_cells {
            coeffs[c * n_moments..c * n_moments + keep]
                .copy_from_slice(&self.coeffs[c * self.n_moments..c * self.n_moments + keep]);
        }
        DGState {
            x_cells: self.x_cells,
            v_cells: self.v_cells,
            n_moments,
            coeffs,
            time: self.time,
        }
    }
}

#[inline]
pub fn lerp(x: f64, wa: f64, y: f64, wb: f64) -> f64 {
    if wa + wb == 1.0 {
        x + wb * (y - x)
    } else {
        wa * x + wb * y
    }
}

/// Projects `f0(x, v)` onto the DG space: positions are sampled at cell
/// centers, velocity moments use 5-point Gauss-Legendre per cell.
pub fn project(f0: impl Fn(f64, f64) -> f64, grid: &PhaseGrid) -> DGState {
    let basis = grid.basis();
    let mut state = DGState::zeros(grid);
    for i in 0..grid.x_cells() {
        let x = grid.x_center(i);
        for j in 0..grid.v_cells() {
            let vj = grid.v_center(j);
            project_cell(|xi| f0(x, vj + xi), &basis, state.cell_mut(i, j));
        }
    }
    state
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(k: usize) -> PhaseGrid {
        PhaseGrid::new((-1.0, 1.0), 4, (-1.0, 1.0), 8, k).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(PhaseGrid::new((1.0, 1.0), 4, (-1.0, 1.0), 4, 0).is_err());
        assert!(PhaseGrid::new((0.0, 1.0), 0, (-1.0, 1.0), 4, 0).is_err());
        assert!(PhaseGrid::new((0.0, 1.0), 4, (1.0, -1.0), 4, 0).is_err());
        assert!(PhaseGrid::new((0.0, 1.0), 4, (-1.0, 1.0), 4, 3).is_err());
    }

    #[test]
    fn interfaces_are_shared_and_centers_consistent() {
        let g = PhaseGrid::new((-2.5, 2.5), 40, (-0.5, 0.5), 40, 2).unwrap();
        assert_eq!(g.v_interface(0), -0.5);
        assert_eq!(g.v_interface(40), 0.5);
        for j in 0..40 {
            let c = g.v_center(j);
            assert!((c - 0.5 * (g.v_interface(j) + g.v_interface(j + 1))).abs() < 1e-15);
        }
        assert_eq!(g.v_cell_of(0.0), 20);
        assert_eq!(g.v_cell_of(-10.0), 0);
        assert_eq!(g.v_cell_of(10.0), 39);
    }

    #[test]
    fn eval_constant_and_hand_values() {
        let h = 0.3;
        let b0 = LegendreBasis::new(0, h);
        assert_eq!(eval_cell(&[2.5], &b0, 0.1), 2.5);

        let b1 = LegendreBasis::new(1, h);
        let v = eval_cell(&[1.0, h / 36.0], &b1, h / 2.0);
        assert!((v - (1.0 + h / 6.0)).abs() < 1e-15);

        let b2 = LegendreBasis::new(2, h);
        let f2 = 0.01;
        let v = eval_cell(&[1.0, 0.0, f2], &b2, 0.0);
        assert!((v - (1.0 - 15.0 * f2)).abs() < 1e-14);
    }

    #[test]
    fn lobatto_rules() {
        let (p, w) = gauss_lobatto(2).unwrap();
        assert_eq!(p, vec![-0.5, 0.5]);
        assert_eq!(w, vec![0.5, 0.5]);
        let (p, w) = gauss_lobatto(3).unwrap();
        assert_eq!(p, vec![-0.5, 0.0, 0.5]);
        assert_eq!(w, vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]);
        let q: f64 = p.iter().zip(&w).map(|(x, a)| a * x * x).sum();
        assert!((q - 1.0 / 12.0).abs() < 1e-16);
        assert!(matches!(
            gauss_lobatto(7),
            Err(FlockError::UnsupportedQuadrature(7))
        ));
        for n in 2..=4 {
            let (p, w) = gauss_lobatto(n).unwrap();
            assert_eq!(p[0], -0.5);
            assert_eq!(p[n - 1], 0.5);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            for i in 0..n {
                assert!(w[i] > 0.0);
                assert_eq!(w[i], w[n - 1 - i]);
            }
            // exact up to degree 2n - 3
            for deg in 0..=(2 * n - 3) {
                let quad: f64 = p.iter().zip(&w).map(|(x, a)| a * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 * 0.5f64.powi(deg as i32 + 1) / (deg as f64 + 1.0)
                };
                assert!((quad - exact).abs() < 1e-15, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn orthogonality() {
        for &h in &[1.0, 0.1, 0.013] {
            let basis = LegendreBasis::new(2, h);
            let (nodes, weights) = GAUSS_LEGENDRE_5;
            for l in 0..3 {
                for m in 0..3 {
                    let ip: f64 = (0..5)
                        .map(|q| {
                            let xi = 0.5 * h * nodes[q];
                            0.5 * h * weights[q] * basis.poly(l, xi) * basis.poly(m, xi)
                        })
                        .sum();
                    if l != m {
                        assert!(ip.abs() <= 1e-14 * h.powi((l + m + 1) as i32), "{l} {m} {ip}");
                    }
                }
            }
        }
    }

    #[test]
    fn project_constant_linear_and_indicator() {
        let g = grid(2);
        let s = project(|_, _| 3.0, &g);
        for i in 0..4 {
            for j in 0..8 {
                let c = s.cell(i, j);
                assert!((c[0] - 3.0).abs() < 1e-14);
                assert!(c[1].abs() < 1e-14 && c[2].abs() < 1e-14);
            }
        }

        let single = PhaseGrid::new((0.0, 1.0), 1, (-0.25, 0.25), 1, 1).unwrap();
        let s = project(|_, v| v, &single);
        let h = single.h();
        assert!(s.get(0, 0, 0).abs() < 1e-16);
        assert!((s.get(0, 0, 1) - h / 12.0).abs() < 1e-15);

        let ind = PhaseGrid::new((-1.0, 1.0), 2, (-1.0, 1.0), 8, 2).unwrap();
        let s = project(|_, v| if v.abs() < 0.5 { 1.0 } else { 0.0 }, &ind);
        for j in 0..8 {
            let inside = (2..6).contains(&j);
            let c = s.cell(0, j);
            assert_eq!(c[0], if inside { 1.0 } else { 0.0 });
            assert!(c[1].abs() < 1e-15 && c[2].abs() < 1e-15);
        }
    }

    #[test]
    fn cell_average_is_zeroth_moment() {
        let g = grid(2);
        let s = project(|x, v| (1.0 + x * x) * (v * v * v + 2.0 * v + 1.5), &g);
        let basis = g.basis();
        let (nodes, weights) = GAUSS_LEGENDRE_5;
        for j in 0..g.v_cells() {
            let c = s.cell(1, j);
            let avg: f64 = (0..5)
                .map(|q| 0.5 * weights[q] * basis.eval(c, 0.5 * g.h() * nodes[q]))
                .sum();
            assert!((avg - c[0]).abs() < 1e-13);
        }
    }

    #[test]
    fn with_moments_truncates() {
        let g = grid(2);
        let s = project(|_, v| v * v, &g);
        let t = s.with_moments(1);
        assert_eq!(t.n_moments(), 1);
        assert_eq!(t.get(2, 3, 0), s.get(2, 3, 0));
    }
}

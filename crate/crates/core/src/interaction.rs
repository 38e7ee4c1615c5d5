//! Nonlocal alignment: influence functions, the Cucker-Smale / Motsch-Tadmor
//! normalization and the influence-weighted velocity density `G`.
//!
//! The alignment velocity is `L[f](x, v) = integral (v* - v) G(x, v*) dv*`
//! with `G(x, v) = Phi(x)^-1 integral phi(|x - y|) f(y, v) dy`. `G` is kept in
//! the same moment representation as the solution, so `L` at the velocity
//! interfaces reduces to three sums over cells.

use std::fmt;
use std::sync::Arc;

use crate::grid::{DGState, PhaseGrid};

/// Nonincreasing weight `phi(r)` with `phi(0) = 1`.
#[derive(Clone)]
pub enum InfluenceFunction {
    /// `(1 + r)^-exponent`.
    PowerLaw { exponent: f64 },
    /// `1` for `r < radius`, else `0`.
    Indicator { radius: f64 },
    /// `(1 - r/radius)^2` for `r < radius`, else `0`.
    PolynomialCutoff { radius: f64 },
    /// `phi = 1` everywhere.
    Constant,
    Custom {
        name: String,
        support: Option<f64>,
        eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl InfluenceFunction {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            InfluenceFunction::PowerLaw { exponent } => (1.0 + r).powf(-exponent),
            InfluenceFunction::Indicator { radius } => {
                if r < *radius {
                    1.0
                } else {
                    0.0
                }
            }
            InfluenceFunction::PolynomialCutoff { radius } => {
                if r < *radius {
                    let s = 1.0 - r / radius;
                    s * s
                } else {
                    0.0
                }
            }
            InfluenceFunction::Constant => 1.0,
            InfluenceFunction::Custom { eval, .. } => eval(r),
        }
    }

    pub fn tag(&self) -> &str {
        match self {
            InfluenceFunction::PowerLaw { .. } => "power-law",
            InfluenceFunction::Indicator { .. } => "indicator",
            InfluenceFunction::PolynomialCutoff { .. } => "polynomial-cutoff",
            InfluenceFunction::Constant => "constant",
            InfluenceFunction::Custom { name, .. } => name,
        }
    }

    /// Radius beyond which `phi` vanishes, if compactly supported.
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            InfluenceFunction::Indicator { radius } | InfluenceFunction::PolynomialCutoff { radius } => {
                Some(*radius)
            }
            InfluenceFunction::Custom { support, .. } => *support,
            _ => None,
        }
    }

    /// Checks `phi(0) = 1`, `0 <= phi <= 1` and monotonicity on a sample grid
    /// over `[0, r_max]`.
    pub fn check_admissible(&self, r_max: f64, samples: usize) -> Result<(), String> {
        let phi0 = self.eval(0.0);
        if (phi0 - 1.0).abs() > 1e-12 {
            return Err(format!("phi(0) = {phi0}, expected 1"));
        }
        let mut prev = phi0;
        for s in 1..=samples {
            let r = r_max * s as f64 / samples as f64;
            let v = self.eval(r);
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("phi({r}) = {v} outside [0, 1]"));
            }
            if v > prev + 1e-15 {
                return Err(format!("phi increases at r = {r}"));
            }
            prev = v;
        }
        Ok(())
    }
}

impl fmt::Debug for InfluenceFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfluenceFunction::PowerLaw { exponent } => {
                write!(f, "PowerLaw {{ exponent: {exponent} }}")
            }
            InfluenceFunction::Indicator { radius } => write!(f, "Indicator {{ radius: {radius} }}"),
            InfluenceFunction::PolynomialCutoff { radius } => {
                write!(f, "PolynomialCutoff {{ radius: {radius} }}")
            }
            InfluenceFunction::Constant => write!(f, "Constant"),
            InfluenceFunction::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Divide by the total mass `m`.
    CuckerSmale,
    /// Divide by the local total influence `Phi(x)`.
    MotschTadmor,
}

#[derive(Debug, Clone)]
pub struct InteractionModel {
    pub normalization: Normalization,
    pub phi: InfluenceFunction,
    /// Total mass, fixed from the initial state.
    pub mass: f64,
}

impl InteractionModel {
    pub fn new(normalization: Normalization, phi: InfluenceFunction, mass: f64) -> Self {
        Self {
            normalization,
            phi,
            mass,
        }
    }

    /// MT rows whose normalization falls below this value get `G = 0`.
    pub fn degenerate_threshold(&self) -> f64 {
        1e-14 * self.mass
    }
}

/// `phi(d * dx)` for every position-cell offset `d`, computed once per grid.
/// Offsets past the support of `phi` are dropped.
#[derive(Debug, Clone)]
pub struct InfluenceKernel {
    weights: Vec<f64>,
}

impl InfluenceKernel {
    pub fn new(phi: &InfluenceFunction, grid: &PhaseGrid) -> Self {
        let dx = grid.dx();
        let mut weights: Vec<f64> = (0..grid.x_cells()).map(|d| phi.eval(d as f64 * dx)).collect();
        while weights.len() > 1 && weights.last() == Some(&0.0) {
            weights.pop();
        }
        Self { weights }
    }

    /// `phi(|x_i - x_p|)`.
    #[inline]
    pub fn weight(&self, i: usize, p: usize) -> f64 {
        let d = i.abs_diff(p);
        self.weights.get(d).copied().unwrap_or(0.0)
    }

    /// Largest offset with a nonzero weight.
    pub fn reach(&self) -> usize {
        self.weights.len() - 1
    }
}

/// `Phi(x_i)`: `m` for CS, the midpoint-rule influence sum for MT.
pub fn normalization(
    state: &DGState,
    model: &InteractionModel,
    kernel: &InfluenceKernel,
    grid: &PhaseGrid,
    i: usize,
) -> f64 {
    match model.normalization {
        Normalization::CuckerSmale => model.mass,
        Normalization::MotschTadmor => {
            let h = grid.h();
            let dx = grid.dx();
            (0..grid.x_cells())
                .map(|p| {
                    let rho: f64 = h * (0..grid.v_cells()).map(|j| state.get(p, j, 0)).sum::<f64>();
                    kernel.weight(i, p) * rho * dx
                })
                .sum()
        }
    }
}

/// Moments `G_j^(0)`, `G_j^(1)` of `G(x_i, .)` on every velocity cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GMoments {
    x_cells: usize,
    v_cells: usize,
    g0: Vec<f64>,
    g1: Vec<f64>,
}

impl GMoments {
    pub fn zeros(x_cells: usize, v_cells: usize) -> Self {
        Self {
            x_cells,
            v_cells,
            g0: vec![0.0; x_cells * v_cells],
            g1: vec![0.0; x_cells * v_cells],
        }
    }

    pub fn x_cells(&self) -> usize {
        self.x_cells
    }
    pub fn v_cells(&self) -> usize {
        self.v_cells
    }

    pub fn g0(&self, i: usize) -> &[f64] {
        &self.g0[i * self.v_cells..(i + 1) * self.v_cells]
    }
    pub fn g1(&self, i: usize) -> &[f64] {
        &self.g1[i * self.v_cells..(i + 1) * self.v_cells]
    }
    pub fn g0_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.g0[i * self.v_cells..(i + 1) * self.v_cells]
    }
    pub fn g1_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.g1[i * self.v_cells..(i + 1) * self.v_cells]
    }

    /// Sums over velocity cells that determine the alignment velocity at
    /// position cell `i`.
    pub fn sums(&self, i: usize) -> AlignmentSums {
        let mut sum0 = 0.0;
        let mut weighted0 = 0.0;
        let mut sum1 = 0.0;
        for (c, (&a, &b)) in self.g0(i).iter().zip(self.g1(i)).enumerate() {
            sum0 += a;
            weighted0 += c as f64 * a;
            sum1 += b;
        }
        AlignmentSums {
            sum0,
            weighted0,
            sum1,
        }
    }
}

/// `sum_c G_c^(0)`, `sum_c c G_c^(0)` and `sum_c G_c^(1)` over velocity cells
/// `c = 0..N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentSums {
    pub sum0: f64,
    pub weighted0: f64,
    pub sum1: f64,
}

impl AlignmentSums {
    /// `L` at velocity interface `q` (left edge of cell `q`):
    /// `h^2 sum_c [(c + 1/2 - q) G_c^(0) + G_c^(1)]`.
    #[inline]
    pub fn interface_velocity(&self, q: usize, h: f64) -> f64 {
        h * h * (self.weighted0 + (0.5 - q as f64) * self.sum0 + self.sum1)
    }

    /// `sum_c [(c - j) G_c^(0) + G_c^(1)]`, the cell-center slope term.
    #[inline]
    pub fn centered(&self, j: usize) -> f64 {
        self.weighted0 - j as f64 * self.sum0 + self.sum1
    }
}

/// `G_j^(m)(x_i) = Phi_i^-1 sum_p phi(|x_i - x_p|) f_{p,j}^(m) dx` for
/// `m = 0, 1`. Rows with a degenerate MT normalization are zero.
pub fn compute_g_moments(
    state: &DGState,
    model: &InteractionModel,
    kernel: &InfluenceKernel,
    grid: &PhaseGrid,
) -> GMoments {
    let m_cells = grid.x_cells();
    let n = grid.v_cells();
    let nm = grid.n_moments();
    let h = grid.h();
    let dx = grid.dx();
    let mut g = GMoments::zeros(m_cells, n);
    if model.mass <= 0.0 {
        return g;
    }

    let occupied: Vec<bool> = (0..m_cells)
        .map(|p| state.column(p).iter().any(|&c| c != 0.0))
        .collect();
    let reach = kernel.reach();
    let mut acc0 = vec![0.0; n];
    let mut acc1 = vec![0.0; n];

    for i in 0..m_cells {
        acc0.iter_mut().for_each(|a| *a = 0.0);
        acc1.iter_mut().for_each(|a| *a = 0.0);
        let lo = i.saturating_sub(reach);
        let hi = (i + reach).min(m_cells - 1);
        for p in lo..=hi {
            if !occupied[p] {
                continue;
            }
            let w = kernel.weight(i, p);
            if w == 0.0 {
                continue;
            }
            let col = state.column(p);
            for j in 0..n {
                acc0[j] += w * col[j * nm];
            }
            if nm > 1 {
                for j in 0..n {
                    acc1[j] += w * col[j * nm + 1];
                }
            }
        }
        let phi_i = match model.normalization {
            Normalization::CuckerSmale => model.mass,
            Normalization::MotschTadmor => h * dx * acc0.iter().sum::<f64>(),
        };
        if model.normalization == Normalization::MotschTadmor && phi_i < model.degenerate_threshold() {
            continue;
        }
        let scale = dx / phi_i;
        for (dst, &a) in g.g0_mut(i).iter_mut().zip(&acc0) {
            *dst = scale * a;
        }
        if nm > 1 {
            for (dst, &a) in g.g1_mut(i).iter_mut().zip(&acc1) {
                *dst = scale * a;
            }
        }
    }
    g
}

/// `L_{q}` at the `N + 1` velocity interfaces of position cell `i`.
pub fn interface_velocities(g: &GMoments, grid: &PhaseGrid, i: usize) -> Vec<f64> {
    let sums = g.sums(i);
    let h = grid.h();
    (0..=grid.v_cells())
        .map(|q| sums.interface_velocity(q, h))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::project;

    fn power_law() -> InfluenceFunction {
        InfluenceFunction::PowerLaw { exponent: 0.5 }
    }

    #[test]
    fn builtin_influences_are_admissible() {
        for phi in [
            power_law(),
            InfluenceFunction::Indicator { radius: 0.8 },
            InfluenceFunction::Indicator { radius: 0.4 },
            InfluenceFunction::PolynomialCutoff { radius: 1.0 },
            InfluenceFunction::Constant,
        ] {
            phi.check_admissible(10.0, 1000).unwrap();
        }
        let weak = InfluenceFunction::Indicator { radius: 0.4 };
        assert_eq!(weak.eval(0.39), 1.0);
        assert_eq!(weak.eval(0.41), 0.0);
        let bad = InfluenceFunction::Custom {
            name: "growing".into(),
            support: None,
            eval: Arc::new(|r| (1.0 + r).min(1.0) * 0.5),
        };
        assert!(bad.check_admissible(1.0, 10).is_err());
    }

    #[test]
    fn kernel_truncates_at_support() {
        let grid = PhaseGrid::new((0.0, 1.0), 20, (-1.0, 1.0), 4, 0).unwrap();
        let k = InfluenceKernel::new(&InfluenceFunction::Indicator { radius: 0.12 }, &grid);
        // offsets 0, 1, 2 have r = 0, 0.05, 0.1
        assert_eq!(k.reach(), 2);
        assert_eq!(k.weight(5, 8), 0.0);
        assert_eq!(k.weight(5, 7), 1.0);
    }

    #[test]
    fn cs_normalization_is_mass() {
        let grid = PhaseGrid::new((0.0, 1.0), 5, (-1.0, 1.0), 4, 1).unwrap();
        let state = project(|x, v| 1.0 + x * v, &grid);
        let model = InteractionModel::new(Normalization::CuckerSmale, power_law(), 3.7);
        let kernel = InfluenceKernel::new(&model.phi, &grid);
        assert_eq!(normalization(&state, &model, &kernel, &grid, 2), 3.7);
    }

    #[test]
    fn mt_normalization_with_full_support_is_total_mass() {
        let grid = PhaseGrid::new((0.0, 1.0), 5, (-1.0, 1.0), 4, 1).unwrap();
        let state = project(|x, v| 1.0 + 0.5 * x * v, &grid);
        let mass = crate::diagnostics::total_mass(&state, &grid);
        let model = InteractionModel::new(Normalization::MotschTadmor, InfluenceFunction::Constant, mass);
        let kernel = InfluenceKernel::new(&model.phi, &grid);
        for i in 0..5 {
            let phi = normalization(&state, &model, &kernel, &grid, i);
            assert!((phi - mass).abs() < 1e-14 * mass);
        }
    }

    #[test]
    fn mt_normalization_single_column() {
        let grid = PhaseGrid::new((0.0, 1.0), 6, (-1.0, 1.0), 4, 0).unwrap();
        let mut state = DGState::zeros(&grid);
        let pstar = 4;
        for j in 0..4 {
            state.set(pstar, j, 0, 1.0 + j as f64);
        }
        let m = crate::diagnostics::total_mass(&state, &grid);
        let model = InteractionModel::new(Normalization::MotschTadmor, power_law(), m);
        let kernel = InfluenceKernel::new(&model.phi, &grid);
        for i in 0..6 {
            let expected = (1.0 + (grid.x_center(i) - grid.x_center(pstar)).abs()).powf(-0.5) * m;
            let got = normalization(&state, &model, &kernel, &grid, i);
            assert!((got - expected).abs() < 1e-14, "{i}: {got} vs {expected}");
        }
    }

    #[test]
    fn single_column_mt_g_is_normalized_density() {
        let grid = PhaseGrid::new((0.0, 0.5), 1, (-1.0, 1.0), 8, 1).unwrap();
        let state = project(|_, v| (1.0 - v * v).max(0.0) + 0.3, &grid);
        let model = InteractionModel::new(Normalization::MotschTadmor, power_law(), 1.0);
        let kernel = InfluenceKernel::new(&model.phi, &grid);
        let g = compute_g_moments(&state, &model, &kernel, &grid);
        let h = grid.h();
        let total: f64 = (0..8).map(|j| state.get(0, j, 0)).sum();
        for j in 0..8 {
            assert!((g.g0(0)[j] - state.get(0, j, 0) / (h * total)).abs() < 1e-14);
            assert!((g.g1(0)[j] - state.get(0, j, 1) / (h * total)).abs() < 1e-14);
        }
        let mass: f64 = h * g.g0(0).iter().sum::<f64>();
        assert!((mass - 1.0).abs() < 1e-13);
    }

    #[test]
    fn single_cell_cs_g() {
        let grid = PhaseGrid::new((0.0, 0.5), 1, (-1.0, 1.0), 8, 0).unwrap();
        let mut state = DGState::zeros(&grid);
        let c = 2.0;
        state.set(0, 3, 0, c);
        let m = c * grid.h() * grid.dx();
        let model = InteractionModel::new(Normalization::CuckerSmale, power_law(), m);
        let kernel = InfluenceKernel::new(&model.phi, &grid);
        let g = compute_g_moments(&state, &model, &kernel, &grid);
        for j in 0..8 {
            let expected = if j == 3 { c * grid.dx() / m } else { 0.0 };
            assert!((g.g0(0)[j] - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_kernel_cs_is_x_independent_and_matches_mt() {
        let grid = PhaseGrid::new((-1.0, 1.0), 6, (-1.0, 1.0), 8, 2).unwrap();
        let state = project(|x, v| (1.5 + x).powi(2) * (1.2 - v * v), &grid);
        let m = crate::diagnostics::total_mass(&state, &grid);
        let cs = InteractionModel::new(Normalization::CuckerSmale, InfluenceFunction::Constant, m);
        let mt = InteractionModel::new(Normalization::MotschTadmor, InfluenceFunction::Constant, m);
        let kernel = InfluenceKernel::new(&cs.phi, &grid);
        let gcs = compute_g_moments(&state, &cs, &kernel, &grid);
        let gmt = compute_g_moments(&state, &mt, &kernel, &grid);
        for i in 0..6 {
            assert_eq!(gcs.g0(i), gcs.g0(0));
            assert_eq!(gcs.g1(i), gcs.g1(0));
            for j in 0..8 {
                assert!((gcs.g0(i)[j] - gmt.g0(i)[j]).abs() < 1e-13);
                assert!((gcs.g1(i)[j] - gmt.g1(i)[j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn degenerate_mt_rows_are_zero() {
        let grid = PhaseGrid::new((0.0, 1.0), 10, (-1.0, 1.0), 4, 0).unwrap();
        let mut state = DGState::zeros(&grid);
        state.set(0, 1, 0, 1.0);
        let m = crate::diagnostics::total_mass(&state, &grid);
        let model = InteractionModel::new(
            Normalization::MotschTadmor,
            InfluenceFunction::Indicator { radius: 0.15 },
            m,
        );
        let kernel = InfluenceKernel::new(&model.phi, &grid);
        let g = compute_g_moments(&state, &model, &kernel, &grid);
        assert!(g.g0(1)[1] > 0.0);
        assert!(g.g0(5).iter().all(|&v| v == 0.0));
        assert!(interface_velocities(&g, &grid, 5).iter().all(|&l| l == 0.0));
    }

    #[test]
    fn zero_g_gives_zero_velocities() {
        let grid = PhaseGrid::new((0.0, 1.0), 2, (-1.0, 1.0), 5, 1).unwrap();
        let g = GMoments::zeros(2, 5);
        assert!(interface_velocities(&g, &grid, 1).iter().all(|&l| l == 0.0));
    }
}

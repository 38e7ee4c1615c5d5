//! Observed orders of the time integrators and of the splitting.

use kinetic_flock::diagnostics::{support_tolerance, support_widths};
use kinetic_flock::flocking::{lobatto_alpha1, FlockingOperator};
use kinetic_flock::grid::{project, DGState, PhaseGrid};
use kinetic_flock::interaction::{InfluenceFunction, InteractionModel, Normalization};
use kinetic_flock::time::{ssp_rk2_step, ssp_rk3_step};
use kinetic_flock::total_mass;
use kinetic_flock::transport::{split_step, Splitting, TransportConfig, XBoundary};
use kinetic_flock::Scheme;

/// Least-squares slope of `log2(error)` against `log2(dt)`.
fn fitted_slope(dts: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = dts.iter().map(|d| d.log2()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.log2()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

#[test]
fn one_step_errors_have_the_expected_order() {
    // local error of one step is O(dt^3) for RK2, O(dt^4) for RK3
    let lambda = -0.8;
    let fe = |u: &f64, h: f64| -> Result<f64, ()> { Ok(u + h * lambda * u) };
    let dts: Vec<f64> = (3..=8).map(|p| 2f64.powi(-p)).collect();
    let e2: Vec<f64> = dts
        .iter()
        .map(|&dt| (ssp_rk2_step(&1.0, dt, fe).unwrap() - (lambda * dt).exp()).abs())
        .collect();
    let e3: Vec<f64> = dts
        .iter()
        .map(|&dt| (ssp_rk3_step(&1.0, dt, fe).unwrap() - (lambda * dt).exp()).abs())
        .collect();
    let (s2, s3) = (fitted_slope(&dts, &e2), fitted_slope(&dts, &e3));
    assert!((s2 - 3.0).abs() <= 0.1, "RK2 local slope {s2}");
    assert!((s3 - 4.0).abs() <= 0.1, "RK3 local slope {s3}");
}

#[test]
fn dg_trajectory_conserves_mass_and_positivity() {
    let grid = PhaseGrid::new((-1.0, 1.0), 6, (-1.0, 1.0), 24, 2).unwrap();
    let box_data = project(|x, v| if v.abs() < 0.6 { 1.0 + 0.5 * x } else { 0.0 }, &grid);
    // the box edge cuts a cell, so the raw projection dips below zero
    assert!(kinetic_flock::flocking::min_lobatto_value(&box_data, &grid) < 0.0);
    let mut s = kinetic_flock::flocking::apply_limiter(&box_data, &grid, 1e-13).unwrap();
    let m0 = total_mass(&s, &grid);
    let model = InteractionModel::new(
        Normalization::MotschTadmor,
        InfluenceFunction::PowerLaw { exponent: 0.5 },
        m0,
    );
    let op = FlockingOperator::new(grid.clone(), model);
    let dt = 0.9 * lobatto_alpha1(2) * grid.h() / grid.v_span();
    let tol = support_tolerance(m0, &grid, 1e-10);
    let mut v_prev = support_widths(&s, &grid, tol).1;
    for step in 0..1000 {
        s = op.step(&s, dt, Scheme::SspRk3).unwrap();
        let lo = kinetic_flock::flocking::min_lobatto_value(&s, &grid);
        assert!(lo >= 0.0, "step {step}: {lo:e}");
        if step % 100 == 99 {
            let v = support_widths(&s, &grid, tol).1;
            assert!(v <= v_prev + grid.h());
            v_prev = v;
        }
    }
    assert!(((total_mass(&s, &grid) - m0) / m0).abs() <= 1e-11);
}

/// Smooth bump in `v` that stays clear of the velocity walls.
fn bump(v: f64) -> f64 {
    let r = 0.2025 - (v - 0.05).powi(2);
    if r > 0.0 {
        (-0.1 / r).exp()
    } else {
        0.0
    }
}

fn split_run(splitting: Splitting, dt: f64, t_end: f64) -> DGState {
    // h = 0.05: the flocking CFL allows dt < 0.5 * 0.05 / 1.2 = 0.0208
    let grid = PhaseGrid::new((-1.0, 1.0), 32, (-0.6, 0.6), 24, 1).unwrap();
    let raw = project(
        |x, v| (1.0 + 0.5 * (std::f64::consts::PI * x).sin()) * bump(v),
        &grid,
    );
    let mut s = kinetic_flock::flocking::apply_limiter(&raw, &grid, 1e-13).unwrap();
    let model = InteractionModel::new(
        Normalization::CuckerSmale,
        InfluenceFunction::PowerLaw { exponent: 0.5 },
        total_mass(&s, &grid),
    );
    let op = FlockingOperator::new(grid.clone(), model);
    let cfg = TransportConfig {
        boundary: XBoundary::Periodic,
        splitting,
        ..TransportConfig::default()
    };
    let steps = (t_end / dt).round() as usize;
    for _ in 0..steps {
        s = split_step(&s, &grid, dt, &cfg, 1e-13, |st, tau| {
            op.step(st, tau, Scheme::SspRk2)
        })
        .unwrap();
    }
    s
}

#[test]
fn strang_is_one_order_above_lie() {
    let t_end = 0.4;
    let reference = split_run(Splitting::Strang, t_end / 1024.0, t_end);
    // mean absolute coefficient error; the max norm is dominated by limiter
    // activity at the edge of the support
    let err = |a: &DGState| -> f64 {
        let n = a.coeffs().len() as f64;
        a.coeffs()
            .iter()
            .zip(reference.coeffs())
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>()
            / n
    };
    let dts = [t_end / 32.0, t_end / 64.0, t_end / 128.0];
    let lie: Vec<f64> = dts
        .iter()
        .map(|&dt| err(&split_run(Splitting::Lie, dt, t_end)))
        .collect();
    let strang: Vec<f64> = dts
        .iter()
        .map(|&dt| err(&split_run(Splitting::Strang, dt, t_end)))
        .collect();
    let (sl, ss) = (fitted_slope(&dts, &lie), fitted_slope(&dts, &strang));
    assert!((0.7..=1.5).contains(&sl), "Lie slope {sl}");
    assert!(ss >= 1.8 && ss - sl >= 0.6, "Strang slope {ss} vs Lie {sl}");
}

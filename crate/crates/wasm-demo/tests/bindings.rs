use kinetic_flock_wasm::{flock_bound_js, limiter_profile_js, preset_config, Scenario};

#[test]
fn scenario_wrapper_reports_consistent_shapes() {
    let mut s = Scenario::from_preset("flocking-cs").unwrap();
    assert_eq!(s.time(), 0.0);
    assert_eq!(s.end_time(), 4.0);
    let t = s.advance(0.01).unwrap();
    assert!((t - 0.01).abs() < 1e-15);
    assert_eq!(s.averages().len(), s.x_cells() * s.v_cells());
    assert_eq!(s.bounds(), vec![-2.5, 2.5, -0.5, 0.5]);
    assert_eq!(s.widths().len(), 2);
    let marginal = s.marginal(64);
    assert_eq!(marginal.len(), 64);
    assert!(marginal.iter().all(|&f| f >= -1e-12));
}

#[test]
fn free_functions_return_flat_arrays() {
    assert_eq!(limiter_profile_js(1.0, 0.0, 0.0, 8).unwrap(), vec![1.0; 16]);
    let b = flock_bound_js(0.5, 1.0, 1.0, 2.0, 3).unwrap();
    assert_eq!(b.len(), 5);
}

#[test]
fn preset_text_rebuilds_the_same_scenario() {
    let text = preset_config("clusters-weak").unwrap();
    let a = Scenario::from_toml(&text).unwrap();
    let b = Scenario::from_preset("clusters-weak").unwrap();
    assert_eq!(a.averages(), b.averages());
}

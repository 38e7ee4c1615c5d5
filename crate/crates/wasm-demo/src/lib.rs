//! wasm-bindgen bindings for the browser demo in `www/`.

mod demo;

pub use demo::{flock_bound, limiter_profile, LiveRun};

use wasm_bindgen::prelude::*;

fn js(msg: String) -> JsError {
    JsError::new(&msg)
}

/// A running scenario owned by the page.
#[wasm_bindgen]
pub struct Scenario {
    run: LiveRun,
}

#[wasm_bindgen]
impl Scenario {
    /// Builds one of the named presets.
    #[wasm_bindgen(js_name = fromPreset)]
    pub fn from_preset(name: &str) -> Result<Scenario, JsError> {
        LiveRun::from_preset(name).map(|run| Scenario { run }).map_err(js)
    }

    /// Builds a scenario from TOML text in the CLI config format.
    #[wasm_bindgen(js_name = fromToml)]
    pub fn from_toml(text: &str) -> Result<Scenario, JsError> {
        LiveRun::from_toml(text).map(|run| Scenario { run }).map_err(js)
    }

    /// Advances by `span` (clipped at the end time); returns the new time.
    pub fn advance(&mut self, span: f64) -> Result<f64, JsError> {
        self.run.advance(span).map_err(js)
    }

    pub fn time(&self) -> f64 {
        self.run.time()
    }

    #[wasm_bindgen(js_name = endTime)]
    pub fn end_time(&self) -> f64 {
        self.run.t_end()
    }

    pub fn mass(&self) -> f64 {
        self.run.mass()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.run.widths().to_vec()
    }

    #[wasm_bindgen(js_name = xCells)]
    pub fn x_cells(&self) -> usize {
        self.run.grid().x_cells()
    }

    #[wasm_bindgen(js_name = vCells)]
    pub fn v_cells(&self) -> usize {
        self.run.grid().v_cells()
    }

    /// `[x_min, x_max, v_min, v_max]`.
    pub fn bounds(&self) -> Vec<f64> {
        let g = self.run.grid();
        vec![g.x_min(), g.x_max(), g.v_min(), g.v_max()]
    }

    pub fn averages(&self) -> Vec<f64> {
        self.run.averages()
    }

    pub fn marginal(&self, samples: usize) -> Vec<f64> {
        self.run.marginal_samples(samples)
    }
}

/// The TOML text of a preset, for editing in the page.
#[wasm_bindgen(js_name = presetConfig)]
pub fn preset_config(name: &str) -> Result<String, JsError> {
    kinetic_flock::preset(name)
        .map(|c| c.to_toml())
        .map_err(|e| js(e.to_string()))
}

#[wasm_bindgen(js_name = limiterProfile)]
pub fn limiter_profile_js(f0: f64, f1: f64, f2: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    limiter_profile(f0, f1, f2, samples).map_err(js)
}

#[wasm_bindgen(js_name = flockBound)]
pub fn flock_bound_js(
    exponent: f64,
    s0: f64,
    v0: f64,
    t_max: f64,
    samples: usize,
) -> Result<Vec<f64>, JsError> {
    flock_bound(exponent, s0, v0, t_max, samples).map_err(js)
}

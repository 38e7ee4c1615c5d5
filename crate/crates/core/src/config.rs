//! Scenario configuration files.
//!
//! Configs are TOML documents with one table per concern:
//!
//! ```toml
//! name = "flocking-cs"
//!
//! [model]
//! normalization = "cs"            # cs | mt
//!
//! [influence]
//! kind = "power-law"              # power-law | indicator | polynomial-cutoff | constant
//! exponent = 0.5
//!
//! [[initial.components]]
//! kind = "box"                    # box | bump | point | constant
//! x = [-1.0, 1.0]
//! v = [-0.5, 0.5]
//! amplitude = 1.0
//!
//! [grid]
//! x = [-2.5, 2.5]
//! x_cells = 40
//! v = [-0.5, 0.5]
//! v_cells = 40
//! degree = 2
//!
//! [integrator]
//! scheme = "ssp-rk3"              # fe | ssp-rk2 | ssp-rk3
//! step = "fixed"                  # fixed | static-cfl | dynamic-cfl
//! dt = 0.004
//! safety = 0.9
//! t_end = 4.0
//! cadence = 1.0
//!
//! [transport]
//! enabled = true
//! reconstruction = "minmod"       # minmod | upwind
//! boundary = "outflow"            # outflow | periodic
//! splitting = "strang"            # strang | lie
//!
//! [limiter]
//! epsilon = 1e-13
//!
//! [output]
//! support_threshold = 1e-10
//! cluster_fraction = 0.05
//! ```
//!
//! An optional `[study]` table turns the file into a convergence study for
//! the `rates` command. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{DEFAULT_CLUSTER_FRACTION, DEFAULT_SUPPORT_THRESHOLD};
use crate::error::{FlockError, Result};
use crate::flocking::{lobatto_alpha1, CflMode, DEFAULT_LIMITER_EPSILON, DEFAULT_SAFETY};
use crate::grid::PhaseGrid;
use crate::initial::{Component, InitialCondition};
use crate::interaction::{InfluenceFunction, Normalization};
use crate::time::{IntegratorConfig, Scheme, StepControl};
use crate::transport::{Reconstruction, Splitting, TransportConfig, XBoundary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub model: ModelSection,
    pub influence: InfluenceSpec,
    pub initial: InitialSection,
    pub grid: GridSection,
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub transport: TransportSection,
    #[serde(default)]
    pub limiter: LimiterSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudySection>,
}

fn default_name() -> String {
    "custom".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationSpec {
    Cs,
    Mt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub normalization: NormalizationSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InfluenceSpec {
    PowerLaw { exponent: f64 },
    Indicator { radius: f64 },
    PolynomialCutoff { radius: f64 },
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub components: Vec<ComponentSpec>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ComponentSpec {
    Box {
        x: [f64; 2],
        v: [f64; 2],
        #[serde(default = "one")]
        amplitude: f64,
    },
    Bump {
        radius_sq: f64,
    },
    Point {
        x: f64,
        v: f64,
        mass: f64,
    },
    Constant {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x: [f64; 2],
    pub x_cells: usize,
    pub v: [f64; 2],
    pub v_cells: usize,
    pub degree: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeSpec {
    Fe,
    SspRk2,
    SspRk3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepSpec {
    Fixed,
    StaticCfl,
    DynamicCfl,
}

fn default_safety() -> f64 {
    DEFAULT_SAFETY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub scheme: SchemeSpec,
    pub step: StepSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_safety")]
    pub safety: f64,
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cadence: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReconstructionSpec {
    Minmod,
    Upwind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundarySpec {
    Outflow,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplittingSpec {
    Strang,
    Lie,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransportSection {
    pub enabled: bool,
    pub reconstruction: ReconstructionSpec,
    pub boundary: BoundarySpec,
    pub splitting: SplittingSpec,
}

impl Default for TransportSection {
    fn default() -> Self {
        Self {
            enabled: true,
            reconstruction: ReconstructionSpec::Minmod,
            boundary: BoundarySpec::Outflow,
            splitting: SplittingSpec::Strang,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimiterSection {
    pub epsilon: f64,
}

impl Default for LimiterSection {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_LIMITER_EPSILON,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Rows holding less than `support_threshold * m / (M N)` count as
    /// empty when measuring S and V.
    pub support_threshold: f64,
    pub cluster_fraction: f64,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            support_threshold: DEFAULT_SUPPORT_THRESHOLD,
            cluster_fraction: DEFAULT_CLUSTER_FRACTION,
        }
    }
}

/// Refinement study: level `s` uses `base_v_cells * 2^s` velocity cells and
/// `dt = dt_scale * 2^-s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub degrees: Vec<usize>,
    pub dt_scales: Vec<f64>,
    pub levels: Vec<u32>,
    pub reference_level: u32,
    pub base_v_cells: usize,
    pub times: Vec<f64>,
}

impl StudySection {
    pub fn v_cells(&self, level: u32) -> usize {
        self.base_v_cells << level
    }

    pub fn dt(&self, degree_index: usize, level: u32) -> f64 {
        self.dt_scales[degree_index] * 0.5f64.powi(level as i32)
    }
}

fn config_err(msg: impl Into<String>) -> FlockError {
    FlockError::Config(msg.into())
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The resolved config with every default spelled out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario configs always serialize")
    }

    pub fn phase_grid(&self) -> Result<PhaseGrid> {
        let g = &self.grid;
        PhaseGrid::new((g.x[0], g.x[1]), g.x_cells, (g.v[0], g.v[1]), g.v_cells, g.degree)
    }

    pub fn normalization(&self) -> Normalization {
        match self.model.normalization {
            NormalizationSpec::Cs => Normalization::CuckerSmale,
            NormalizationSpec::Mt => Normalization::MotschTadmor,
        }
    }

    pub fn influence(&self) -> InfluenceFunction {
        match self.influence {
            InfluenceSpec::PowerLaw { exponent } => InfluenceFunction::PowerLaw { exponent },
            InfluenceSpec::Indicator { radius } => InfluenceFunction::Indicator { radius },
            InfluenceSpec::PolynomialCutoff { radius } => InfluenceFunction::PolynomialCutoff { radius },
            InfluenceSpec::Constant => InfluenceFunction::Constant,
        }
    }

    pub fn initial_condition(&self) -> InitialCondition {
        InitialCondition::new(
            self.initial
                .components
                .iter()
                .map(|c| match *c {
                    ComponentSpec::Box { x, v, amplitude } => Component::Box {
                        x: (x[0], x[1]),
                        v: (v[0], v[1]),
                        amplitude,
                    },
                    ComponentSpec::Bump { radius_sq } => Component::Bump { radius_sq },
                    ComponentSpec::Point { x, v, mass } => Component::Point { x, v, mass },
                    ComponentSpec::Constant { value } => Component::Constant { value },
                })
                .collect(),
        )
    }

    pub fn scheme(&self) -> Scheme {
        match self.integrator.scheme {
            SchemeSpec::Fe => Scheme::ForwardEuler,
            SchemeSpec::SspRk2 => Scheme::SspRk2,
            SchemeSpec::SspRk3 => Scheme::SspRk3,
        }
    }

    pub fn integrator_config(&self) -> Result<IntegratorConfig> {
        let it = &self.integrator;
        let step = match it.step {
            StepSpec::Fixed => StepControl::Fixed(
                it.dt
                    .ok_or_else(|| config_err("integrator.step = \"fixed\" requires integrator.dt"))?,
            ),
            StepSpec::StaticCfl => StepControl::Cfl(CflMode::Static),
            StepSpec::DynamicCfl => StepControl::Cfl(CflMode::Dynamic),
        };
        Ok(IntegratorConfig {
            scheme: self.scheme(),
            step,
            safety: it.safety,
            t_end: it.t_end,
            cadence: it.cadence,
        })
    }

    pub fn transport_config(&self) -> Option<TransportConfig> {
        let t = &self.transport;
        t.enabled.then_some(TransportConfig {
            reconstruction: match t.reconstruction {
                ReconstructionSpec::Minmod => Reconstruction::MinmodMuscl,
                ReconstructionSpec::Upwind => Reconstruction::FirstOrderUpwind,
            },
            boundary: match t.boundary {
                BoundarySpec::Outflow => XBoundary::Outflow,
                BoundarySpec::Periodic => XBoundary::Periodic,
            },
            splitting: match t.splitting {
                SplittingSpec::Strang => Splitting::Strang,
                SplittingSpec::Lie => Splitting::Lie,
            },
        })
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.phase_grid().map_err(|e| config_err(e.to_string()))?;
        let phi = self.influence();
        let reach = 10.0 * (grid.x_span() + 1.0);
        phi.check_admissible(reach, 10_000)
            .map_err(|e| config_err(format!("influence function: {e}")))?;
        let integ = self.integrator_config()?;
        integ.validate().map_err(config_err)?;
        if let StepControl::Fixed(dt) = integ.step {
            check_cfl(dt, &grid)?;
        }
        if self.limiter.epsilon.is_nan() || self.limiter.epsilon < 0.0 {
            return Err(config_err("limiter.epsilon must be >= 0"));
        }
        let out = &self.output;
        if out.support_threshold.is_nan()
            || out.support_threshold < 0.0
            || !(0.0..1.0).contains(&out.cluster_fraction)
        {
            return Err(config_err(
                "output.support_threshold must be >= 0 and output.cluster_fraction in [0, 1)",
            ));
        }
        for c in &self.initial.components {
            let ok = match *c {
                ComponentSpec::Box { x, v, amplitude } => x[0] < x[1] && v[0] < v[1] && amplitude >= 0.0,
                ComponentSpec::Bump { radius_sq } => radius_sq > 0.0,
                ComponentSpec::Point { mass, .. } => mass >= 0.0,
                ComponentSpec::Constant { value } => value >= 0.0,
            };
            if !ok {
                return Err(config_err(format!("invalid initial component {c:?}")));
            }
        }
        if let Some(study) = &self.study {
            validate_study(study, &grid)?;
        }
        Ok(())
    }
}

/// Rejects `dt` unless `dt / h < alpha_1 / (v_max - v_min)`.
pub fn check_cfl(dt: f64, grid: &PhaseGrid) -> Result<()> {
    let alpha1 = lobatto_alpha1(grid.degree());
    let bound = alpha1 * grid.h() / grid.v_span();
    if dt < bound {
        Ok(())
    } else {
        Err(config_err(format!(
            "dt = {dt} violates the positivity CFL bound dt < alpha_1 h / (v_max - v_min) = \
             {alpha1} * {} / {} = {bound}",
            grid.h(),
            grid.v_span()
        )))
    }
}

fn validate_study(study: &StudySection, grid: &PhaseGrid) -> Result<()> {
    let total = study.levels.len() + 1;
    if study.levels.len() < 2 {
        return Err(FlockError::TooFewLevels(total));
    }
    if study.degrees.is_empty() || study.degrees.len() != study.dt_scales.len() {
        return Err(config_err(
            "study.degrees and study.dt_scales must be non-empty and of equal length",
        ));
    }
    if study.base_v_cells == 0 {
        return Err(config_err("study.base_v_cells must be >= 1"));
    }
    if study.times.iter().any(|t| t.is_nan() || *t < 0.0) {
        return Err(config_err("study.times must be >= 0"));
    }
    if study.levels.iter().any(|&s| s > study.reference_level) {
        return Err(config_err("study levels must not exceed the reference level"));
    }
    for (di, &degree) in study.degrees.iter().enumerate() {
        for &s in study.levels.iter().chain(std::iter::once(&study.reference_level)) {
            let g = PhaseGrid::new(
                (grid.x_min(), grid.x_max()),
                grid.x_cells(),
                (grid.v_min(), grid.v_max()),
                study.v_cells(s),
                degree,
            )
            .map_err(|e| config_err(e.to_string()))?;
            check_cfl(study.dt(di, s), &g)?;
        }
    }
    Ok(())
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    ScenarioConfig::from_toml(&text)
}

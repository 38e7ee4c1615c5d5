//! Built-in scenarios.

use crate::config::*;
use crate::diagnostics::{DEFAULT_CLUSTER_FRACTION, DEFAULT_SUPPORT_THRESHOLD};
use crate::error::{FlockError, Result};
use crate::flocking::{DEFAULT_LIMITER_EPSILON, DEFAULT_SAFETY};

pub const PRESET_NAMES: &[&str] = &[
    "convergence",
    "flocking-cs",
    "clusters-strong",
    "clusters-weak",
    "cs-vs-mt",
    "cs-vs-mt:cs",
    "cs-vs-mt:mt",
];

fn transport_on() -> TransportSection {
    TransportSection::default()
}

fn output(support_threshold: f64) -> OutputSection {
    OutputSection {
        support_threshold,
        cluster_fraction: DEFAULT_CLUSTER_FRACTION,
    }
}

fn fixed(scheme: SchemeSpec, dt: f64, t_end: f64, cadence: Option<f64>) -> IntegratorSection {
    IntegratorSection {
        scheme,
        step: StepSpec::Fixed,
        dt: Some(dt),
        safety: DEFAULT_SAFETY,
        t_end,
        cadence,
    }
}

/// Smooth bump under a global power-law kernel, alignment only.
pub fn convergence() -> ScenarioConfig {
    ScenarioConfig {
        name: "convergence".into(),
        model: ModelSection {
            normalization: NormalizationSpec::Cs,
        },
        influence: InfluenceSpec::PowerLaw { exponent: 0.5 },
        initial: InitialSection {
            components: vec![ComponentSpec::Bump { radius_sq: 0.9 }],
        },
        grid: GridSection {
            x: [-1.0, 1.0],
            x_cells: 10,
            v: [-1.0, 1.0],
            v_cells: 8,
            degree: 1,
        },
        integrator: fixed(SchemeSpec::SspRk2, 0.05, 3.0, Some(0.5)),
        transport: TransportSection {
            enabled: false,
            ..transport_on()
        },
        limiter: LimiterSection {
            epsilon: DEFAULT_LIMITER_EPSILON,
        },
        output: output(DEFAULT_SUPPORT_THRESHOLD),
        study: Some(StudySection {
            degrees: vec![1, 2],
            dt_scales: vec![0.1, 0.04],
            levels: vec![1, 2, 3, 4, 5, 6],
            reference_level: 7,
            base_v_cells: 4,
            times: vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
        }),
    }
}

/// The convergence study at desk scale: levels 1..5 against level 6.
pub fn convergence_desk() -> ScenarioConfig {
    let mut cfg = convergence();
    if let Some(study) = cfg.study.as_mut() {
        study.levels = vec![1, 2, 3, 4, 5];
        study.reference_level = 6;
    }
    cfg
}

/// Indicator box under a slowly decaying kernel: unconditional flocking.
pub fn flocking_cs() -> ScenarioConfig {
    ScenarioConfig {
        name: "flocking-cs".into(),
        model: ModelSection {
            normalization: NormalizationSpec::Cs,
        },
        influence: InfluenceSpec::PowerLaw { exponent: 0.5 },
        initial: InitialSection {
            components: vec![ComponentSpec::Box {
                x: [-1.0, 1.0],
                v: [-0.5, 0.5],
                amplitude: 1.0,
            }],
        },
        grid: GridSection {
            x: [-2.5, 2.5],
            x_cells: 40,
            v: [-0.5, 0.5],
            v_cells: 40,
            degree: 2,
        },
        integrator: fixed(SchemeSpec::SspRk3, 0.004, 4.0, Some(1.0)),
        transport: transport_on(),
        limiter: LimiterSection {
            epsilon: DEFAULT_LIMITER_EPSILON,
        },
        output: output(1e-4),
        study: None,
    }
}

fn clusters(name: &str, radius: f64) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        model: ModelSection {
            normalization: NormalizationSpec::Cs,
        },
        influence: InfluenceSpec::Indicator { radius },
        initial: InitialSection {
            components: vec![
                ComponentSpec::Box {
                    x: [-0.5, -0.4],
                    v: [0.4, 0.5],
                    amplitude: 1.0,
                },
                ComponentSpec::Box {
                    x: [0.4, 0.5],
                    v: [-0.5, -0.4],
                    amplitude: 1.0,
                },
            ],
        },
        grid: GridSection {
            x: [-1.5, 1.5],
            x_cells: 140,
            v: [-0.6, 0.6],
            v_cells: 60,
            degree: 1,
        },
        integrator: fixed(SchemeSpec::SspRk2, 0.008, 6.0, Some(1.0)),
        transport: transport_on(),
        limiter: LimiterSection {
            epsilon: DEFAULT_LIMITER_EPSILON,
        },
        output: output(DEFAULT_SUPPORT_THRESHOLD),
        study: None,
    }
}

/// Two opposing groups under `chi(r < 0.8)`.
pub fn clusters_strong() -> ScenarioConfig {
    clusters("clusters-strong", 0.8)
}

/// Two opposing groups under `chi(r < 0.4)`.
pub fn clusters_weak() -> ScenarioConfig {
    clusters("clusters-weak", 0.4)
}

/// A small group next to a far, heavy point flock. The grid puts the point
/// mass at a cell center and the group's edges on cell interfaces.
pub fn cs_vs_mt(normalization: NormalizationSpec) -> ScenarioConfig {
    let tag = match normalization {
        NormalizationSpec::Cs => "cs",
        NormalizationSpec::Mt => "mt",
    };
    ScenarioConfig {
        name: format!("cs-vs-mt:{tag}"),
        model: ModelSection { normalization },
        influence: InfluenceSpec::PolynomialCutoff { radius: 1.0 },
        initial: InitialSection {
            components: vec![
                ComponentSpec::Box {
                    x: [-0.1, 0.1],
                    v: [-0.05, 0.05],
                    amplitude: 1.0,
                },
                ComponentSpec::Point {
                    x: 5.0,
                    v: 1.0,
                    mass: 0.98,
                },
            ],
        },
        grid: GridSection {
            x: [-1.02, 6.98],
            x_cells: 200,
            v: [-0.25, 1.25],
            v_cells: 75,
            degree: 2,
        },
        integrator: fixed(SchemeSpec::SspRk3, 0.002, 3.0, Some(0.5)),
        transport: transport_on(),
        limiter: LimiterSection {
            epsilon: DEFAULT_LIMITER_EPSILON,
        },
        output: output(10.0),
        study: None,
    }
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let cfg = match name {
        "convergence" => convergence(),
        "flocking-cs" => flocking_cs(),
        "clusters-strong" => clusters_strong(),
        "clusters-weak" => clusters_weak(),
        "cs-vs-mt" | "cs-vs-mt:cs" => cs_vs_mt(NormalizationSpec::Cs),
        "cs-vs-mt:mt" => cs_vs_mt(NormalizationSpec::Mt),
        _ => return Err(FlockError::UnknownPreset(name.into())),
    };
    cfg.validate()?;
    Ok(cfg)
}

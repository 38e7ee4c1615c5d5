//! Scenario execution, convergence studies and CSV output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::config::{check_cfl, ScenarioConfig, StudySection};
use crate::diagnostics::{
    convergence_rates, flock_diameter, l1_error, support_tolerance, total_mass, velocity_marginal,
    DiagnosticsRecord, FlockBound, Marginal,
};
use crate::error::{FlockError, Result};
use crate::flocking::{limit_in_place, FlockingOperator};
use crate::grid::{DGState, PhaseGrid};
use crate::interaction::InteractionModel;
use crate::time::{clip_step, round_time, Scheme, StepControl};
use crate::transport::{split_step, TransportConfig};

/// A solver instance: alignment operator, optional free transport and the
/// current state.
#[derive(Debug, Clone)]
pub struct Simulation {
    operator: FlockingOperator,
    scheme: Scheme,
    step: StepControl,
    safety: f64,
    transport: Option<TransportConfig>,
    state: DGState,
}

impl Simulation {
    pub fn new(
        operator: FlockingOperator,
        initial: DGState,
        scheme: Scheme,
        step: StepControl,
        safety: f64,
        transport: Option<TransportConfig>,
    ) -> Self {
        Self {
            operator,
            scheme,
            step,
            safety,
            transport,
            state: initial,
        }
    }

    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        let grid = cfg.phase_grid()?;
        Self::from_config_on(cfg, grid, cfg.integrator_config()?.step)
    }

    fn from_config_on(cfg: &ScenarioConfig, grid: PhaseGrid, step: StepControl) -> Result<Self> {
        // projections of discontinuous data can dip below zero inside a cell
        let mut state = cfg.initial_condition().project(&grid);
        limit_in_place(&mut state, &grid, cfg.limiter.epsilon)?;
        let mass = total_mass(&state, &grid);
        let model = InteractionModel::new(cfg.normalization(), cfg.influence(), mass);
        let operator = FlockingOperator::new(grid, model).with_limiter_epsilon(cfg.limiter.epsilon);
        Ok(Self::new(
            operator,
            state,
            cfg.scheme(),
            step,
            cfg.integrator.safety,
            cfg.transport_config(),
        ))
    }

    pub fn grid(&self) -> &PhaseGrid {
        self.operator.grid()
    }

    pub fn operator(&self) -> &FlockingOperator {
        &self.operator
    }

    pub fn state(&self) -> &DGState {
        &self.state
    }

    pub fn into_state(self) -> DGState {
        self.state
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }

    pub fn step_once(&mut self, dt: f64) -> Result<()> {
        let op = &self.operator;
        let next = match &self.transport {
            None => op.step(&self.state, dt, self.scheme)?,
            Some(tc) => split_step(&self.state, op.grid(), dt, tc, op.limiter_epsilon(), |s, tau| {
                op.step(s, tau, self.scheme)
            })?,
        };
        if !next.is_finite() {
            return Err(FlockError::NonFinite {
                time: self.state.time,
            });
        }
        self.state = next;
        Ok(())
    }

    /// Steps until `target`, shortening the last step to land on it.
    pub fn advance_to(&mut self, target: f64) -> Result<()> {
        while self.state.time < target {
            let nominal = match self.step {
                StepControl::Fixed(dt) => dt,
                StepControl::Cfl(mode) => self.operator.stable_dt(&self.state, mode, self.safety),
            };
            let (dt, last) = clip_step(self.state.time, target, nominal);
            self.step_once(dt)?;
            if last {
                self.state.time = target;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub grid: PhaseGrid,
    pub records: Vec<DiagnosticsRecord>,
    /// `None` when the influence function decays too fast for a flock bound.
    pub bound: Option<FlockBound>,
    pub final_state: DGState,
}

impl RunSummary {
    pub fn envelope(&self, t: f64) -> f64 {
        self.bound.map_or(f64::NAN, |b| b.envelope(t))
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn diagnostics_csv(summary: &RunSummary) -> String {
    let mut out = String::from("t,mass,S,V,envelope,clusters\n");
    for r in &summary.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f(r.time),
            fmt_f(r.total_mass),
            fmt_f(r.s_width),
            fmt_f(r.v_width),
            fmt_f(summary.envelope(r.time)),
            r.cluster_count
        );
    }
    out
}

pub fn marginal_csv(marginal: &Marginal) -> String {
    let n = marginal.degree() + 1;
    let mut out = String::from("v");
    for l in 0..n {
        let _ = write!(out, ",F{l}");
    }
    out.push('\n');
    for j in 0..marginal.v_cells() {
        out.push_str(&fmt_f(marginal.v_center(j)));
        for &c in marginal.cell(j) {
            out.push(',');
            out.push_str(&fmt_f(c));
        }
        out.push('\n');
    }
    out
}

pub fn marginal_file_name(t: f64) -> String {
    format!("marginal_t{}.csv", round_time(t))
}

/// Runs `cfg` to its end time, recording diagnostics at every output time.
/// With `out_dir`, writes `diagnostics.csv`, one `marginal_t<t>.csv` per
/// output time and `resolved_config.toml`.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: Option<&Path>) -> Result<RunSummary> {
    let integ = cfg.integrator_config()?;
    let mut sim = Simulation::from_config(cfg)?;
    let grid = sim.grid().clone();
    let mass0 = total_mass(sim.state(), &grid);
    let tol = support_tolerance(mass0, &grid, cfg.output.support_threshold);
    let measure = |s: &DGState| DiagnosticsRecord::measure(s, &grid, tol, cfg.output.cluster_fraction);

    let mut records = Vec::new();
    for t in integ.output_times() {
        sim.advance_to(t)?;
        records.push(measure(sim.state()));
    }
    let first = &records[0];
    let bound = flock_diameter(&cfg.influence(), first.s_width, first.v_width).ok();
    let summary = RunSummary {
        grid,
        records,
        bound,
        final_state: sim.into_state(),
    };
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("diagnostics.csv"), diagnostics_csv(&summary))?;
        for r in &summary.records {
            fs::write(dir.join(marginal_file_name(r.time)), marginal_csv(&r.marginal))?;
        }
        fs::write(dir.join("resolved_config.toml"), cfg.to_toml())?;
    }
    Ok(summary)
}

/// Errors and rates of one degree of a refinement study.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub degree: usize,
    pub scheme: Scheme,
    pub times: Vec<f64>,
    pub levels: Vec<u32>,
    pub reference_level: u32,
    /// `errors[s][t]`: L1 distance of level `levels[s]` to the reference.
    pub errors: Vec<Vec<f64>>,
    /// `rates[s][t]` between `levels[s]` and `levels[s + 1]`.
    pub rates: Vec<Vec<f64>>,
}

impl RateTable {
    pub fn rate(&self, level: u32, t: f64) -> Option<f64> {
        let s = self.levels.iter().position(|&l| l == level)?;
        let k = self.times.iter().position(|&x| (x - t).abs() < 1e-12)?;
        self.rates.get(s).map(|row| row[k])
    }

    /// Plain-text table with one column per time.
    pub fn render(&self) -> String {
        let mut out = format!(
            "degree {} ({}), reference level {}\n{:>6}",
            self.degree,
            self.scheme.name(),
            self.reference_level,
            "t"
        );
        for t in &self.times {
            let _ = write!(out, " {t:>10}");
        }
        out.push('\n');
        for (s, row) in self.errors.iter().enumerate() {
            let _ = write!(out, "{:>6}", format!("e_{}", self.levels[s]));
            for e in row {
                let _ = write!(out, " {e:>10.3e}");
            }
            out.push('\n');
        }
        for (s, row) in self.rates.iter().enumerate() {
            let _ = write!(out, "{:>6}", format!("r_{}", self.levels[s]));
            for r in row {
                let _ = write!(out, " {r:>10.4}");
            }
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,t,error,rate\n");
        for (s, row) in self.errors.iter().enumerate() {
            for (k, e) in row.iter().enumerate() {
                let rate = self.rates.get(s).map_or(f64::NAN, |r| r[k]);
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    self.levels[s],
                    self.times[k],
                    fmt_f(*e),
                    fmt_f(rate)
                );
            }
        }
        out
    }
}

fn level_marginals(
    cfg: &ScenarioConfig,
    study: &StudySection,
    degree_index: usize,
    level: u32,
) -> Result<Vec<Marginal>> {
    let base = cfg.phase_grid()?;
    let degree = study.degrees[degree_index];
    let grid = PhaseGrid::new(
        (base.x_min(), base.x_max()),
        base.x_cells(),
        (base.v_min(), base.v_max()),
        study.v_cells(level),
        degree,
    )?;
    let dt = study.dt(degree_index, level);
    check_cfl(dt, &grid)?;
    let mut sim = Simulation::from_config_on(cfg, grid, StepControl::Fixed(dt))?;
    sim.scheme = Scheme::for_degree(degree);
    let mut out = Vec::with_capacity(study.times.len());
    for &t in &study.times {
        sim.advance_to(t)?;
        out.push(velocity_marginal(sim.state(), sim.grid()));
    }
    Ok(out)
}

/// Runs every level of the study in `cfg` and reports `e_s(t)` and `r_s(t)`
/// per degree.
pub fn run_convergence(cfg: &ScenarioConfig) -> Result<Vec<RateTable>> {
    let study = cfg
        .study
        .as_ref()
        .ok_or_else(|| FlockError::Config("config has no [study] table".into()))?;
    if study.levels.len() < 2 {
        return Err(FlockError::TooFewLevels(study.levels.len() + 1));
    }
    let mut tables = Vec::new();
    for (di, &degree) in study.degrees.iter().enumerate() {
        let reference = level_marginals(cfg, study, di, study.reference_level)?;
        let mut errors = Vec::new();
        for &s in &study.levels {
            let marg = level_marginals(cfg, study, di, s)?;
            let row = marg
                .iter()
                .zip(&reference)
                .map(|(a, b)| l1_error(a, b))
                .collect::<Result<Vec<_>>>()?;
            errors.push(row);
        }
        let rates = (0..errors.len().saturating_sub(1))
            .map(|s| {
                (0..study.times.len())
                    .map(|k| convergence_rates(&[errors[s][k], errors[s + 1][k]])[0])
                    .collect()
            })
            .collect();
        tables.push(RateTable {
            degree,
            scheme: Scheme::for_degree(degree),
            times: study.times.clone(),
            levels: study.levels.clone(),
            reference_level: study.reference_level,
            errors,
            rates,
        });
    }
    Ok(tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ComponentSpec;
    use crate::presets;

    fn small_flocking() -> ScenarioConfig {
        let mut cfg = presets::flocking_cs();
        cfg.grid.x_cells = 10;
        cfg.grid.v_cells = 10;
        cfg.integrator.dt = Some(0.01);
        cfg.integrator.t_end = 0.2;
        cfg.integrator.cadence = Some(0.1);
        cfg
    }

    #[test]
    fn zero_end_time_gives_initial_record_only() {
        let mut cfg = small_flocking();
        cfg.integrator.t_end = 0.0;
        let s = run_scenario(&cfg, None).unwrap();
        assert_eq!(s.records.len(), 1);
        assert_eq!(s.records[0].time, 0.0);
    }

    #[test]
    fn zero_state_gives_zero_diagnostics() {
        let mut cfg = small_flocking();
        cfg.initial.components = vec![ComponentSpec::Constant { value: 0.0 }];
        let s = run_scenario(&cfg, None).unwrap();
        for r in &s.records {
            assert_eq!(
                (r.total_mass, r.s_width, r.v_width, r.cluster_count),
                (0.0, 0.0, 0.0, 0)
            );
            assert_eq!(s.envelope(r.time), 0.0);
        }
    }

    #[test]
    fn outputs_are_byte_identical_across_runs() {
        let cfg = small_flocking();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run_scenario(&cfg, Some(a.path())).unwrap();
        run_scenario(&cfg, Some(b.path())).unwrap();
        let mut names: Vec<_> = fs::read_dir(a.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        assert_eq!(names.len(), 5);
        for n in names {
            assert_eq!(
                fs::read(a.path().join(&n)).unwrap(),
                fs::read(b.path().join(&n)).unwrap()
            );
        }
    }

    #[test]
    fn marginal_file_names() {
        assert_eq!(marginal_file_name(0.0), "marginal_t0.csv");
        assert_eq!(marginal_file_name(3.0), "marginal_t3.csv");
        assert_eq!(marginal_file_name(0.1 + 0.2), "marginal_t0.3.csv");
    }

    #[test]
    fn identical_levels_give_zero_errors() {
        let mut cfg = presets::convergence();
        if let Some(st) = cfg.study.as_mut() {
            st.degrees = vec![1];
            st.dt_scales = vec![0.1];
            st.levels = vec![1, 1];
            st.reference_level = 1;
            st.times = vec![0.0, 0.5];
        }
        let tables = run_convergence(&cfg).unwrap();
        assert!(tables[0].errors.iter().flatten().all(|&e| e == 0.0));
    }

    #[test]
    fn too_few_levels_is_an_error() {
        let mut cfg = presets::convergence();
        cfg.study.as_mut().unwrap().levels = vec![1];
        assert!(matches!(run_convergence(&cfg), Err(FlockError::TooFewLevels(2))));
    }
}

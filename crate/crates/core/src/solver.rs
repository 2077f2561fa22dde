//! Method-of-lines integration with classical RK4 and a fixed step chosen
//! once from the initial CFL condition.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::euler::{max_wave_speed, rhs_with, GasParams, RhsOptions, State, StateVector, DEFAULT_DOMAIN_FLOOR};
use crate::spectral::{dealias, Field, TorusGrid};

/// Exponential filter `exp(-alpha (|k|_inf / k_max)^order)` applied after each step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralFilter {
    pub alpha: f64,
    pub order: u32,
}

impl Default for SpectralFilter {
    fn default() -> Self {
        Self { alpha: 36.0, order: 36 }
    }
}

impl SpectralFilter {
    pub fn apply(&self, f: &Field) -> Field {
        let k_max = f.grid().dealias_cutoff() as f64;
        let (alpha, order) = (self.alpha, self.order as i32);
        let weights = move |kx: i64, ky: i64| {
            let k = kx.abs().max(ky.abs()) as f64 / k_max;
            (-alpha * k.powi(order)).exp()
        };
        crate::spectral::apply_multiplier(f, weights)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    /// Final time `T`.
    pub t_final: f64,
    /// Courant number, used when `dt_fixed` is absent.
    pub cfl: f64,
    pub dt_fixed: Option<f64>,
    /// Record every k-th step (the final step is always recorded).
    pub record_stride: usize,
    pub dealias_enabled: bool,
    pub filter: Option<SpectralFilter>,
    /// Keep full states in the trajectory, not only the norm records.
    pub keep_states: bool,
    /// Sobolev index of the norms written to trajectory records.
    pub norm_index: f64,
    pub domain_floor: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            t_final: 1.0,
            cfl: 0.25,
            dt_fixed: None,
            record_stride: 10,
            dealias_enabled: true,
            filter: None,
            keep_states: false,
            norm_index: 3.0,
            domain_floor: DEFAULT_DOMAIN_FLOOR,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(invalid(format!("final time T = {} must be positive", self.t_final)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(invalid(format!("cfl = {} must lie in (0, 1]", self.cfl)));
        }
        if let Some(dt) = self.dt_fixed {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(invalid(format!("dt_fixed = {dt} must be positive")));
            }
        }
        if self.record_stride == 0 {
            return Err(invalid("record_stride must be positive"));
        }
        Ok(())
    }

    fn rhs_options(&self) -> RhsOptions {
        RhsOptions { dealias: self.dealias_enabled, domain_floor: self.domain_floor }
    }
}

/// Largest stable step `cfl * dx / max_wave_speed`.
pub fn cfl_dt(s: &State, g: &GasParams, cfl: f64, grid: &TorusGrid) -> Result<f64> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(invalid(format!("cfl = {cfl} must lie in (0, 1]")));
    }
    s.check_in_domain(0.0)?;
    let speed = max_wave_speed(s, g);
    if !(speed > 0.0) {
        return Err(invalid("wave speed vanished"));
    }
    Ok(cfl * grid.spacing() / speed)
}

/// Number of steps and the step that lands exactly on `t_final` without
/// exceeding `dt_max`.
pub fn step_plan(t_final: f64, dt_max: f64) -> (usize, f64) {
    let steps = ((t_final / dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (steps, t_final / steps as f64)
}

/// One classical RK4 step with default options.
pub fn step_rk4(s: &State, dt: f64, g: &GasParams) -> Result<State> {
    step_rk4_with(s, dt, g, &SolveConfig::default())
}

pub fn step_rk4_with(s: &State, dt: f64, g: &GasParams, cfg: &SolveConfig) -> Result<State> {
    if !(dt > 0.0) {
        return Err(invalid(format!("time step {dt} must be positive")));
    }
    let opts = cfg.rhs_options();
    let k1 = rhs_with(s, g, opts)?;
    let k2 = rhs_with(&s.advanced(0.5 * dt, &k1)?, g, opts)?;
    let k3 = rhs_with(&s.advanced(0.5 * dt, &k2)?, g, opts)?;
    let k4 = rhs_with(&s.advanced(dt, &k3)?, g, opts)?;
    let slope = combine_stages(&k1, &k2, &k3, &k4)?;
    let mut next = s.advanced(dt, &slope)?;
    if cfg.dealias_enabled {
        next = next.map_deviation(dealias);
    }
    if let Some(filter) = cfg.filter {
        next = next.map_deviation(|f| filter.apply(f));
    }
    Ok(next)
}

fn combine_stages(k1: &StateVector, k2: &StateVector, k3: &StateVector, k4: &StateVector) -> Result<StateVector> {
    let a = k1.linear_combination(1.0 / 6.0, k2, 1.0 / 3.0)?;
    let b = k3.linear_combination(1.0 / 3.0, k4, 1.0 / 6.0)?;
    a.linear_combination(1.0, &b, 1.0)
}

/// Norm record of a recorded step. Norms are of `U - (rho0, 0, 0, h0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub norms: [f64; 4],
    pub min_rho: f64,
    pub min_h: f64,
}

impl StepRecord {
    pub fn of(t: f64, s: &State, g: &GasParams, sigma: f64) -> Self {
        Self {
            t,
            norms: s.tilde(g.rho0, g.h0).component_norms(sigma),
            min_rho: s.min_rho(),
            min_h: s.min_h(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub records: Vec<StepRecord>,
    /// Empty unless `keep_states` was set.
    pub states: Vec<State>,
    pub dt: f64,
    pub steps: usize,
    pub norm_index: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> Option<&State> {
        self.states.last()
    }

    /// CSV with header `t,rho_tilde_norm,u_norm,v_norm,h_tilde_norm,min_rho,min_h`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,rho_tilde_norm,u_norm,v_norm,h_tilde_norm,min_rho,min_h")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.t, r.norms[0], r.norms[1], r.norms[2], r.norms[3], r.min_rho, r.min_h
            )?;
        }
        Ok(())
    }
}

/// Integrates to `cfg.t_final`, calling `observe(step, t, state)` at t = 0,
/// at every `record_stride`-th step and at the final step. Returns the final
/// state, the step count and the step size.
pub fn evolve_observed(
    s0: &State,
    g: &GasParams,
    cfg: &SolveConfig,
    mut observe: impl FnMut(usize, f64, &State) -> Result<()>,
) -> Result<(State, usize, f64)> {
    cfg.validate()?;
    s0.check_in_domain(cfg.domain_floor)
        .map_err(|e| LabError::Solver { t: 0.0, source: Box::new(e) })?;
    let dt_max = match cfg.dt_fixed {
        Some(dt) => dt,
        None => cfl_dt(s0, g, cfg.cfl, s0.grid())?,
    };
    let (steps, dt) = step_plan(cfg.t_final, dt_max);
    let mut state = s0.clone();
    observe(0, 0.0, &state)?;
    for step in 1..=steps {
        let t_prev = (step - 1) as f64 * dt;
        state = step_rk4_with(&state, dt, g, cfg)
            .map_err(|e| LabError::Solver { t: t_prev, source: Box::new(e) })?;
        let t = if step == steps { cfg.t_final } else { step as f64 * dt };
        if !state.deviation().is_finite() {
            return Err(LabError::Solver {
                t,
                source: Box::new(LabError::NonFinite("state after step".into())),
            });
        }
        if step % cfg.record_stride == 0 || step == steps {
            observe(step, t, &state)?;
        }
    }
    Ok((state, steps, dt))
}

pub fn evolve(s0: &State, g: &GasParams, cfg: &SolveConfig) -> Result<Trajectory> {
    let mut times = Vec::new();
    let mut records = Vec::new();
    let mut states = Vec::new();
    let (_, steps, dt) = evolve_observed(s0, g, cfg, |_, t, s| {
        times.push(t);
        records.push(StepRecord::of(t, s, g, cfg.norm_index));
        if cfg.keep_states {
            states.push(s.clone());
        }
        Ok(())
    })?;
    Ok(Trajectory { times, records, states, dt, steps, norm_index: cfg.norm_index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::PointState;
    use crate::families::{exact_solution, FamilyParams, Omega};

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::new(n).unwrap()
    }

    #[test]
    fn cfl_dt_cases() {
        let g = GasParams::default();
        let s = State::constant(&grid(64), PointState::new(1.0, 0.0, 0.0, 1.0));
        let dt = cfl_dt(&s, &g, 0.5, &grid(64)).unwrap();
        let expected = 0.5 * (2.0 * std::f64::consts::PI / 64.0) / 1.4_f64.sqrt();
        assert!((dt - expected).abs() < 1e-16);

        let s128 = State::constant(&grid(128), PointState::new(1.0, 0.0, 0.0, 1.0));
        let dt128 = cfl_dt(&s128, &g, 0.5, &grid(128)).unwrap();
        assert!((dt / dt128 - 2.0).abs() < 1e-14);

        assert!(cfl_dt(&s, &g, 0.0, &grid(64)).is_err());
    }

    #[test]
    fn step_plan_hits_final_time() {
        let (steps, dt) = step_plan(1.0, 0.3);
        assert_eq!(steps, 4);
        assert!((dt * steps as f64 - 1.0).abs() < 1e-15);
        let (steps, _) = step_plan(1.0, 0.25);
        assert_eq!(steps, 4);
    }

    #[test]
    fn constant_state_step_is_identity() {
        let g = GasParams::default();
        let s = State::constant(&grid(16), PointState::new(1.2, 0.3, -0.1, 0.8));
        let next = step_rk4(&s, 0.01, &g).unwrap();
        assert!(next.difference(&s).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let bad = [
            SolveConfig { t_final: 0.0, ..Default::default() },
            SolveConfig { cfl: 1.5, ..Default::default() },
            SolveConfig { dt_fixed: Some(-1.0), ..Default::default() },
            SolveConfig { record_stride: 0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err());
        }
        assert!(SolveConfig::default().validate().is_ok());
    }

    #[test]
    fn single_step_local_error_is_fifth_order() {
        let g = GasParams::default();
        let gr = grid(32);
        let f = FamilyParams::new(Omega::Plus, 4, 3.0).unwrap();
        let s0 = exact_solution(&f, &g, &gr, 0.0).unwrap();
        let mut errs = Vec::new();
        for dt in [0.2, 0.1] {
            let s1 = step_rk4(&s0, dt, &g).unwrap();
            let exact = exact_solution(&f, &g, &gr, dt).unwrap();
            errs.push(s1.difference(&exact).unwrap().sobolev_norm(0.0));
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 4.7, "local order {order}");
    }

    #[test]
    fn leaving_the_domain_is_reported() {
        let g = GasParams::default();
        let gr = grid(16);
        let rho = Field::from_fn(&gr, |x, _| 1.0 + 0.999 * x.cos());
        let u = Field::from_fn(&gr, |x, _| 3.0 * x.sin());
        let s = State::from_totals(rho, u, Field::zeros(&gr), Field::constant(&gr, 1.0)).unwrap();
        let cfg = SolveConfig { t_final: 5.0, dt_fixed: Some(0.2), ..Default::default() };
        match evolve(&s, &g, &cfg) {
            Err(LabError::Solver { source, .. }) => assert!(matches!(
                *source,
                LabError::OutsideStateSpace { .. } | LabError::NonFinite(_)
            )),
            other => panic!("expected solver failure, got {other:?}"),
        }
    }

    #[test]
    fn trajectory_csv_header() {
        let g = GasParams::default();
        let s = State::constant(&grid(8), PointState::new(1.0, 0.0, 0.0, 1.0));
        let cfg = SolveConfig { t_final: 0.1, dt_fixed: Some(0.05), record_stride: 1, ..Default::default() };
        let traj = evolve(&s, &g, &cfg).unwrap();
        assert_eq!(traj.times, vec![0.0, 0.05, 0.1]);
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,rho_tilde_norm,u_norm,v_norm,h_tilde_norm,min_rho,min_h\n"));
        assert_eq!(text.lines().count(), 4);
    }
}

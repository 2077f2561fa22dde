//! Experiment drivers: configuration, log-log fits, reports and their
//! CSV/JSON serialization.
//!
//! Each `run_*` function takes an [`ExperimentConfig`] and returns a report;
//! [`run`] dispatches on the configured experiment and [`write_outputs`]
//! writes the experiment CSV plus `summary.json`.

mod experiments;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::euler::GasParams;
use crate::inequalities::{CheckRow, SweepConfig};
use crate::solver::SolveConfig;

pub use experiments::{
    fit_error_envelope, run_error_scaling, run_exact_check, run_higher_norm, run_inequalities, run_nonuniform,
    run_residue_scaling, ErrorEnvelope,
};

/// Largest grid an experiment may request.
pub const MAX_GRID_SIZE: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Nonuniform,
    ResidueScaling,
    ErrorScaling,
    ExactCheck,
    HigherNorm,
    Inequalities,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Nonuniform,
        ExperimentKind::ResidueScaling,
        ExperimentKind::ErrorScaling,
        ExperimentKind::ExactCheck,
        ExperimentKind::HigherNorm,
        ExperimentKind::Inequalities,
    ];

    /// Snake-case name, also the stem of the experiment CSV.
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Nonuniform => "nonuniform",
            ExperimentKind::ResidueScaling => "residue_scaling",
            ExperimentKind::ErrorScaling => "error_scaling",
            ExperimentKind::ExactCheck => "exact_check",
            ExperimentKind::HigherNorm => "higher_norm",
            ExperimentKind::Inequalities => "inequalities",
        }
    }

    pub fn default_n_list(self) -> Vec<u32> {
        match self {
            ExperimentKind::Nonuniform => vec![4, 8, 16, 32],
            ExperimentKind::ResidueScaling => vec![4, 8, 16, 32, 64],
            ExperimentKind::ErrorScaling | ExperimentKind::HigherNorm => vec![8, 16, 32],
            ExperimentKind::ExactCheck => vec![8, 12, 16],
            ExperimentKind::Inequalities => vec![],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Family indices; `None` selects the experiment's default list.
    pub n_list: Option<Vec<u32>>,
    pub s: f64,
    pub sigma: f64,
    pub gas: GasParams,
    pub solve: SolveConfig,
    /// Grid multiplier `m`, `N = m n`.
    pub grid_rule: u32,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
    /// Index of the higher-norm experiment; defaults to `floor(s) + 1`.
    pub tau: Option<f64>,
    /// Floor factor of the nonuniform experiment: `d_final(T) >= floor_factor * approx_d(T)`.
    pub floor_factor: f64,
    /// Smallest `n` the floor is asserted for.
    pub floor_min_n: u32,
    /// Deviation allowed in the exact-family check.
    pub exact_tolerance: f64,
    pub inequalities: SweepConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::for_experiment(ExperimentKind::Nonuniform)
    }
}

impl ExperimentConfig {
    pub fn for_experiment(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            n_list: None,
            s: 3.0,
            sigma: 1.5,
            gas: GasParams::default(),
            solve: SolveConfig::default(),
            grid_rule: 8,
            output_dir: None,
            seed: SweepConfig::default().seed,
            tau: None,
            floor_factor: 0.75,
            floor_min_n: 16,
            exact_tolerance: 1e-8,
            inequalities: SweepConfig::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| LabError::Io { path: path.to_owned(), source })?;
        Self::from_json(&text)
    }

    pub fn n_list(&self) -> Vec<u32> {
        self.n_list.clone().unwrap_or_else(|| self.experiment.default_n_list())
    }

    pub fn grid_size(&self, n: u32) -> usize {
        self.grid_rule as usize * n as usize
    }

    pub fn tau(&self) -> f64 {
        self.tau.unwrap_or(self.s.floor() + 1.0)
    }

    /// `beta = max(2 sigma - 3s + 2, sigma - 2s)`.
    pub fn beta(&self) -> f64 {
        (2.0 * self.sigma - 3.0 * self.s + 2.0).max(self.sigma - 2.0 * self.s)
    }

    pub fn validate(&self) -> Result<()> {
        use ExperimentKind::*;
        self.gas.validate()?;
        self.solve.validate()?;
        if !(self.s > 2.0) {
            return Err(invalid(format!("s = {} must exceed 2", self.s)));
        }
        let sigma_ok = match self.experiment {
            ResidueScaling => self.sigma > 1.0 && self.sigma <= self.s - 1.0,
            ErrorScaling | Nonuniform => self.sigma > 1.0 && self.sigma < self.s - 1.0,
            _ => true,
        };
        if !sigma_ok {
            return Err(invalid(format!(
                "sigma = {} outside the admissible range for {} with s = {}",
                self.sigma,
                self.experiment.name(),
                self.s
            )));
        }
        if self.experiment == HigherNorm {
            let tau = self.tau();
            if !(tau > self.s && tau <= self.s.floor() + 1.0) {
                return Err(invalid(format!("tau = {tau} must lie in (s, floor(s) + 1]")));
            }
        }
        if self.experiment == Nonuniform && !(self.floor_factor > 0.0 && self.floor_factor <= 1.0) {
            return Err(invalid("floor_factor must lie in (0, 1]"));
        }
        if !(self.exact_tolerance > 0.0) {
            return Err(invalid("exact_tolerance must be positive"));
        }
        if self.experiment == Inequalities {
            return Ok(());
        }
        let ns = self.n_list();
        if ns.is_empty() {
            return Err(invalid("n_list is empty"));
        }
        if ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("n_list must be strictly increasing"));
        }
        if ns[0] < 2 {
            return Err(invalid("n_list entries must be at least 2"));
        }
        let min_points = match self.experiment {
            ResidueScaling | ErrorScaling | HigherNorm => 3,
            _ => 1,
        };
        if ns.len() < min_points {
            return Err(invalid(format!("{} needs at least {min_points} values of n", self.experiment.name())));
        }
        if self.grid_rule == 0 || self.grid_rule % 2 == 1 && ns.iter().any(|n| n % 2 == 1) {
            return Err(invalid(format!("grid_rule = {} must give even grid sizes", self.grid_rule)));
        }
        let largest = self.grid_size(*ns.last().expect("non-empty"));
        let control = if self.experiment == ErrorScaling { 2 * largest } else { largest };
        if control > MAX_GRID_SIZE {
            return Err(invalid(format!("grid size {control} exceeds {MAX_GRID_SIZE}")));
        }
        Ok(())
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(invalid(format!("slope fit needs at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(invalid("slope fit needs positive finite points"));
    }
    let m = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 1e-24 * m {
        return Err(invalid("degenerate x-range in slope fit"));
    }
    Ok(sxy / sxx)
}

/// One named pass/fail assertion of a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value <= threshold }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value >= threshold }
    }
}

/// How a fitted slope is compared with its prediction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeRule {
    /// `|fitted - predicted| <= tolerance`.
    Within,
    /// `fitted <= predicted + tolerance`.
    AtMost,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeTarget {
    pub predicted: f64,
    pub tolerance: f64,
    pub rule: SlopeRule,
}

impl SlopeTarget {
    pub fn check(&self, fitted: f64) -> Check {
        match self.rule {
            SlopeRule::Within => Check::at_most("slope_deviation", (fitted - self.predicted).abs(), self.tolerance),
            SlopeRule::AtMost => Check::at_most("fitted_slope", fitted, self.predicted + self.tolerance),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: u32,
    pub grid_size: usize,
    pub steps: Option<usize>,
    pub dt: Option<f64>,
    pub measured: f64,
    pub envelope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub experiment: ExperimentKind,
    pub rows: Vec<ScalingRow>,
    pub fitted_slope: Option<f64>,
    pub target: Option<SlopeTarget>,
    pub checks: Vec<Check>,
    /// False when the run could not certify its own numerics.
    pub valid: bool,
    pub notes: Vec<String>,
}

impl ScalingReport {
    pub fn pass(&self) -> bool {
        self.valid && self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,grid_size,steps,dt,measured,envelope")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.n,
                r.grid_size,
                opt(r.steps),
                opt(r.dt),
                r.measured,
                opt(r.envelope)
            )?;
        }
        Ok(())
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// One recorded time of one `n` in the nonuniform experiment. Distances
/// between the two branches are in `H^s`; errors against the approximate
/// solutions are reported in both `H^sigma` and `H^s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonuniformRow {
    pub n: u32,
    pub t: f64,
    pub d0: f64,
    pub d_final: f64,
    pub approx_d: f64,
    pub err_plus: f64,
    pub err_minus: f64,
    pub err_plus_s: f64,
    pub err_minus_s: f64,
}

impl NonuniformRow {
    /// `d_final >= approx_d - err_plus_s - err_minus_s`, up to round-off.
    pub fn triangle_holds(&self) -> bool {
        let slack = 1e-12 * self.approx_d.max(self.d_final);
        self.d_final + slack >= self.approx_d - self.err_plus_s - self.err_minus_s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonuniformReport {
    pub rows: Vec<NonuniformRow>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl NonuniformReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Rows of index `n`.
    pub fn rows_for(&self, n: u32) -> impl Iterator<Item = &NonuniformRow> {
        self.rows.iter().filter(move |r| r.n == n)
    }

    pub fn final_row(&self, n: u32) -> Option<&NonuniformRow> {
        self.rows.iter().rfind(|r| r.n == n)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,t,d0,d_final,approx_d,err_plus,err_minus,err_plus_s,err_minus_s")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.n, r.t, r.d0, r.d_final, r.approx_d, r.err_plus, r.err_minus, r.err_plus_s, r.err_minus_s
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub rows: Vec<CheckRow>,
    pub checks: Vec<Check>,
}

impl InequalityReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        crate::inequalities::write_report(&self.rows, out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Nonuniform(NonuniformReport),
    Scaling(ScalingReport),
    Inequalities(InequalityReport),
}

impl Outcome {
    pub fn pass(&self) -> bool {
        match self {
            Outcome::Nonuniform(r) => r.pass(),
            Outcome::Scaling(r) => r.pass(),
            Outcome::Inequalities(r) => r.pass(),
        }
    }

    pub fn checks(&self) -> &[Check] {
        match self {
            Outcome::Nonuniform(r) => &r.checks,
            Outcome::Scaling(r) => &r.checks,
            Outcome::Inequalities(r) => &r.checks,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        match self {
            Outcome::Nonuniform(r) => r.write_csv(out),
            Outcome::Scaling(r) => r.write_csv(out),
            Outcome::Inequalities(r) => r.write_csv(out),
        }
    }

    pub fn summary(&self, cfg: &ExperimentConfig) -> Summary {
        let (fitted_slope, target, valid, notes) = match self {
            Outcome::Scaling(r) => (r.fitted_slope, r.target, r.valid, r.notes.clone()),
            Outcome::Nonuniform(r) => (None, None, true, r.notes.clone()),
            Outcome::Inequalities(_) => (None, None, true, Vec::new()),
        };
        let mut params = cfg.clone();
        if params.experiment != ExperimentKind::Inequalities {
            params.n_list = Some(cfg.n_list());
        }
        Summary {
            experiment: cfg.experiment,
            params,
            pass: self.pass(),
            fitted_slope,
            predicted_slope: target.map(|t| t.predicted),
            tolerance: target.map(|t| t.tolerance),
            slope_rule: target.map(|t| t.rule),
            valid,
            checks: self.checks().to_vec(),
            notes,
        }
    }
}

/// Contents of `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: ExperimentKind,
    pub params: ExperimentConfig,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_rule: Option<SlopeRule>,
    pub valid: bool,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

/// Validates `cfg` and runs its experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    Ok(match cfg.experiment {
        ExperimentKind::Nonuniform => Outcome::Nonuniform(run_nonuniform(cfg)?),
        ExperimentKind::ResidueScaling => Outcome::Scaling(run_residue_scaling(cfg)?),
        ExperimentKind::ErrorScaling => Outcome::Scaling(run_error_scaling(cfg)?),
        ExperimentKind::ExactCheck => Outcome::Scaling(run_exact_check(cfg)?),
        ExperimentKind::HigherNorm => Outcome::Scaling(run_higher_norm(cfg)?),
        ExperimentKind::Inequalities => Outcome::Inequalities(run_inequalities(cfg)?),
    })
}

/// Paths written by [`write_outputs`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputFiles {
    pub csv: PathBuf,
    pub summary: PathBuf,
}

/// Writes `<experiment>.csv` and `summary.json` into `dir`, creating it if needed.
pub fn write_outputs(cfg: &ExperimentConfig, outcome: &Outcome, dir: &Path) -> Result<OutputFiles> {
    let io_err = |path: &Path| {
        let path = path.to_owned();
        move |source| LabError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let csv = dir.join(format!("{}.csv", cfg.experiment.name()));
    let file = fs::File::create(&csv).map_err(io_err(&csv))?;
    let mut w = BufWriter::new(file);
    outcome.write_csv(&mut w).map_err(io_err(&csv))?;
    w.flush().map_err(io_err(&csv))?;

    let summary = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&outcome.summary(cfg))?;
    text.push('\n');
    fs::write(&summary, text).map_err(io_err(&summary))?;
    Ok(OutputFiles { csv, summary })
}

use serde::Serialize;

use super::blob::{concentrated_blob, local_spacing};
use super::config::Scenario;
use crate::asymptotics::{limiting_trajectory, trajectory_error, LimitTrajectory};
use crate::diagnostics::{gamma_norm, measure, needs_truncated_center, Cutoff, DiagnosticsRecord, Snapshot};
use crate::error::{LakeError, Result};
use crate::transport::{max_stable_dt, step_simulation, AdvectOptions, LakeModel};

/// Relative circulation drift allowed over a run.
pub const GAMMA_BUDGET: f64 = 1e-3;
/// Relative energy drift allowed over a run.
pub const ENERGY_BUDGET: f64 = 1e-2;
/// Wander allowed in the flat-bottom case, in grid cells.
pub const STATIONARY_CELLS: f64 = 5.0;
/// Samples of the limiting trajectory per run.
const LIMIT_SAMPLES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// Conserved quantities at `t = 0`, used to rescale time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Initial {
    pub energy: f64,
    pub gamma: f64,
    pub omega_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub code_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub grid: [usize; 2],
    /// Grid spacing at the blob's initial center.
    pub cell_size: f64,
    pub steps: usize,
    pub dt: f64,
    pub t_end: f64,
    pub final_time: f64,
    /// Total distance by which characteristic feet were clamped.
    pub clamp_distance: f64,
    /// Whether the truncated center was reported.
    pub truncated_center: bool,
    pub min_depth: f64,
    pub max_depth: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub scenario: Scenario,
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<Snapshot>,
    pub initial: Initial,
    pub summary: RunSummary,
    pub provenance: Provenance,
}

/// Build, step and measure one scenario.
pub fn run(scenario: &Scenario) -> Result<RunOutput> {
    scenario.validate()?;
    let ctx = |e: LakeError| e.context(format!("scenario `{}`", scenario.name));
    let grid_res = scenario.grid_resolution(scenario.run.resolution);
    let model = LakeModel::new(scenario.domain, grid_res, scenario.bathymetry.clone()).map_err(ctx)?;
    let blob = &scenario.blob;
    let omega0 =
        concentrated_blob(blob.profile, blob.center, blob.epsilon, blob.circulation, model.grid()).map_err(ctx)?;
    let state = model.state(0.0, omega0, scenario.islands.circulations.clone()).map_err(ctx)?;
    let eta = Cutoff { delta: scenario.run.cutoff_delta };
    let first = measure(&model, &state, &eta).map_err(ctx)?;
    let initial = Initial { energy: first.energy, gamma: first.gamma, omega_total: first.omega_total };
    if !(initial.energy > 0.0) {
        return Err(ctx(LakeError::Degenerate { quantity: "initial energy", value: initial.energy }));
    }

    let t_end = scenario.run.s_end * initial.gamma / initial.energy;
    let options =
        AdvectOptions { cfl: scenario.run.cfl, monotone: scenario.run.monotone, substeps: scenario.run.substeps };
    let dt_max = scenario.run.dt_safety * max_stable_dt(&model, &state, &options);
    let steps = if dt_max.is_finite() { (t_end.abs() / dt_max).ceil().max(1.0) as usize } else { 1 };
    let dt = t_end / steps as f64;

    let (end, snapshots) =
        step_simulation(&model, state, dt, steps, scenario.run.record_interval, &options, |m, s| measure(m, s, &eta))
            .map_err(ctx)?;
    let truncated = needs_truncated_center(&snapshots);
    let records = snapshots.iter().map(|s| s.record(initial.energy, initial.gamma, truncated)).collect();
    let (min_depth, max_depth) = scenario.bathymetry.range_on(model.grid());
    Ok(RunOutput {
        scenario: scenario.clone(),
        records,
        snapshots,
        initial,
        summary: RunSummary {
            grid: grid_res,
            cell_size: local_spacing(model.grid(), blob.center),
            steps,
            dt,
            t_end,
            final_time: end.time,
            clamp_distance: end.clamp_distance,
            truncated_center: truncated,
            min_depth,
            max_depth,
        },
        provenance: Provenance { config_hash: scenario.config_hash(), code_version: env!("CARGO_PKG_VERSION").into() },
    })
}

impl RunOutput {
    /// `max |Γ(t) − Γ(0)| / |Γ(0)|`.
    pub fn gamma_drift(&self) -> f64 {
        let g0 = self.initial.gamma;
        self.records.iter().map(|r| (r.gamma - g0).abs() / g0.abs()).fold(0.0, f64::max)
    }

    /// `max |E(t) − E(0)| / E(0)`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.initial.energy;
        self.records.iter().map(|r| (r.energy - e0).abs() / e0).fold(0.0, f64::max)
    }

    /// Least-squares slope of `|Ω(t) − Ω(0)|` against `|t|` through the
    /// origin, divided by `|Γ| ‖Γ‖`.
    pub fn omega_slope(&self) -> f64 {
        let o0 = self.initial.omega_total;
        let (num, den) =
            self.records.iter().fold((0.0, 0.0), |(n, d), r| (n + r.t.abs() * (r.omega - o0).abs(), d + r.t * r.t));
        let g = self.initial.gamma;
        let norm = g.abs() * gamma_norm(g, &self.scenario.islands.circulations);
        if den == 0.0 {
            0.0
        } else {
            num / den / norm
        }
    }

    /// Largest distance of the reported center from its initial position.
    pub fn max_wander(&self) -> f64 {
        let q0 = self.records[0].center;
        self.records.iter().map(|r| r.center.dist(q0)).fold(0.0, f64::max)
    }

    /// Solution of the limiting law from the blob's center over the run's
    /// rescaled duration.
    pub fn limit(&self) -> Result<LimitTrajectory> {
        let s = &self.scenario;
        limiting_trajectory(&s.bathymetry, &s.domain, s.blob.center, s.run.s_end, LIMIT_SAMPLES)
    }

    /// `sup_s |q(s) − q*(s)|` over the records.
    pub fn sup_error(&self) -> Result<f64> {
        trajectory_error(&self.records, &self.limit()?)
    }

    pub fn conserves(&self) -> bool {
        self.gamma_drift() <= GAMMA_BUDGET && self.energy_drift() <= ENERGY_BUDGET
    }

    /// Conservation budgets hold and, on a flat bottom, the center stays
    /// within a few cells of where it started.
    pub fn verdict(&self) -> Verdict {
        let stationary =
            !self.scenario.bathymetry.is_constant() || self.max_wander() <= STATIONARY_CELLS * self.summary.cell_size;
        Verdict::from_bool(self.conserves() && stationary)
    }
}

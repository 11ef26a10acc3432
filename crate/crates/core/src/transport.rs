//! Semi-Lagrangian transport of the potential vorticity `ω/b`.
//!
//! Each step traces every node backwards along the velocity frozen at the
//! start of the step, interpolates `ω/b` at the foot and multiplies by the
//! local depth. The stream function and velocity are then rebuilt from the
//! new vorticity with the circulations held fixed.

use std::sync::Arc;

use rayon::prelude::*;

use crate::elliptic::{island_basis, zero_flux_stream, EllipticSolver, IslandBasis, SolverOptions};
use crate::error::{LakeError, Result};
use crate::field::{ScalarField, VelocityField};
use crate::geometry::{build_grid, Bathymetry, DomainSpec, Grid};
use crate::vec2::Vec2;
use crate::velocity::velocity_from_stream;

/// Anything that can report a velocity at a time and place.
pub trait VelocitySource: Sync {
    fn velocity(&self, t: f64, p: Vec2) -> Result<Vec2>;

    /// Largest time step the integrator may take with this source.
    fn max_substep(&self) -> f64 {
        f64::INFINITY
    }
}

/// A gridded field used as a time-independent source.
impl VelocitySource for VelocityField {
    fn velocity(&self, _t: f64, p: Vec2) -> Result<Vec2> {
        Ok(self.at(p))
    }
}

/// A closed-form velocity `f(t, x)`.
pub struct AnalyticVelocity<F> {
    f: F,
    max_substep: f64,
}

impl<F: Fn(f64, Vec2) -> Vec2 + Sync> AnalyticVelocity<F> {
    pub fn new(f: F, max_substep: f64) -> Self {
        AnalyticVelocity { f, max_substep }
    }
}

impl<F: Fn(f64, Vec2) -> Vec2 + Sync> VelocitySource for AnalyticVelocity<F> {
    fn velocity(&self, t: f64, p: Vec2) -> Result<Vec2> {
        let v = (self.f)(t, p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(LakeError::NonFinite("analytic velocity"))
        }
    }

    fn max_substep(&self) -> f64 {
        self.max_substep
    }
}

/// Points transported by the flow, with the total distance by which feet
/// that left the domain were pulled back onto it.
#[derive(Debug, Clone)]
pub struct Mapped {
    pub points: Vec<Vec2>,
    pub clamp_distance: f64,
}

/// Kutta's third-order integrator for `dX/dt = u(t, X)` inside a domain.
pub struct FlowMapper<'a, S: VelocitySource> {
    source: &'a S,
    domain: DomainSpec,
    substeps: usize,
}

impl<'a, S: VelocitySource> FlowMapper<'a, S> {
    pub fn new(source: &'a S, domain: DomainSpec) -> Self {
        FlowMapper { source, domain, substeps: 1 }
    }

    /// Use at least `n` substeps per call.
    pub fn with_substeps(mut self, n: usize) -> Self {
        self.substeps = n.max(1);
        self
    }

    fn step(&self, t: f64, h: f64, x: Vec2) -> Result<Vec2> {
        let k1 = self.source.velocity(t, x)?;
        let k2 = self.source.velocity(t + 0.5 * h, x + 0.5 * h * k1)?;
        let k3 = self.source.velocity(t + h, x + h * (2.0 * k2 - k1))?;
        Ok(x + (h / 6.0) * (k1 + 4.0 * k2 + k3))
    }

    /// Positions at time `t1` of the particles that sit at `points` at `t0`.
    pub fn flow_map(&self, t0: f64, t1: f64, points: &[Vec2]) -> Result<Mapped> {
        let span = t1 - t0;
        let by_cap = (span.abs() / self.source.max_substep()).ceil();
        let n = if by_cap.is_finite() { (by_cap as usize).max(self.substeps) } else { self.substeps };
        let h = span / n as f64;
        let results: Vec<Result<(Vec2, f64)>> = points
            .par_iter()
            .map(|&p0| {
                let mut p = p0;
                let mut clamped = 0.0;
                for s in 0..n {
                    p = self.step(t0 + s as f64 * h, h, p)?;
                    if !self.domain.contains(p) {
                        let q = self.domain.project(p);
                        clamped += p.dist(q);
                        p = q;
                    }
                }
                Ok((p, clamped))
            })
            .collect();
        let mut out = Vec::with_capacity(points.len());
        let mut clamp_distance = 0.0;
        for r in results {
            let (p, c) = r?;
            out.push(p);
            clamp_distance += c;
        }
        Ok(Mapped { points: out, clamp_distance })
    }
}

/// Grid, depth, factorized solver and island basis: everything that stays
/// fixed during a run.
#[derive(Debug)]
pub struct LakeModel {
    grid: Arc<Grid>,
    bathymetry: Bathymetry,
    solver: EllipticSolver,
    basis: IslandBasis,
}

impl LakeModel {
    pub fn new(domain: DomainSpec, resolution: [usize; 2], bathymetry: Bathymetry) -> Result<Self> {
        Self::with_options(domain, resolution, bathymetry, SolverOptions::default())
    }

    pub fn with_options(
        domain: DomainSpec,
        resolution: [usize; 2],
        bathymetry: Bathymetry,
        options: SolverOptions,
    ) -> Result<Self> {
        let grid = Arc::new(build_grid(domain, resolution)?);
        let solver = EllipticSolver::with_options(grid.clone(), &bathymetry, options)?;
        let basis = island_basis(&solver)?;
        Ok(LakeModel { grid, bathymetry, solver, basis })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn bathymetry(&self) -> &Bathymetry {
        &self.bathymetry
    }

    pub fn solver(&self) -> &EllipticSolver {
        &self.solver
    }

    pub fn basis(&self) -> &IslandBasis {
        &self.basis
    }

    pub fn depth(&self) -> &[f64] {
        self.solver.depth()
    }

    /// State at time `time` with stream function and velocity rebuilt from
    /// `omega` and the island circulations.
    pub fn state(&self, time: f64, omega: ScalarField, circulations: Vec<f64>) -> Result<LakeState> {
        if circulations.len() != self.basis.len() {
            return Err(LakeError::LengthMismatch("circulations", circulations.len(), self.basis.len()));
        }
        let zero_flux = zero_flux_stream(&self.solver, &self.basis, &omega)?;
        let mut psi = zero_flux.clone();
        for (g, psi_i) in circulations.iter().zip(&self.basis.psi) {
            psi.axpy(*g, psi_i);
        }
        let velocity = velocity_from_stream(&psi, &self.bathymetry)?;
        Ok(LakeState { time, omega, circulations, zero_flux, psi, velocity, clamp_distance: 0.0 })
    }
}

/// One snapshot of the flow. `psi`, `zero_flux` and `velocity` always
/// correspond to `omega` and `circulations`.
#[derive(Debug, Clone)]
pub struct LakeState {
    pub time: f64,
    pub omega: ScalarField,
    pub circulations: Vec<f64>,
    /// `𝒦ᵦ[ω]`, the part of the stream function with zero island fluxes.
    pub zero_flux: ScalarField,
    pub psi: ScalarField,
    pub velocity: VelocityField,
    /// Accumulated distance by which characteristic feet were clamped back
    /// into the domain since the start of the run.
    pub clamp_distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvectOptions {
    /// Courant number: `dt · max|u| ≤ cfl · h`.
    pub cfl: f64,
    /// Clip interpolated values to the range of the 4×4 stencil.
    pub monotone: bool,
    /// Integrator substeps per time step along each characteristic.
    pub substeps: usize,
}

impl Default for AdvectOptions {
    fn default() -> Self {
        AdvectOptions { cfl: 0.5, monotone: true, substeps: 3 }
    }
}

/// Largest stable time step for `state` under `options`.
pub fn max_stable_dt(model: &LakeModel, state: &LakeState, options: &AdvectOptions) -> f64 {
    let speed = state.velocity.max_speed();
    if speed == 0.0 {
        f64::INFINITY
    } else {
        options.cfl * model.grid.spacing() / speed
    }
}

/// Feet `X(t, t + dt, x)` of every node under the velocity frozen at `state`.
pub fn trace_feet(model: &LakeModel, state: &LakeState, dt: f64, substeps: usize) -> Result<Mapped> {
    FlowMapper::new(&state.velocity, model.grid.domain()).with_substeps(substeps).flow_map(dt, 0.0, model.grid.points())
}

/// Advance `state` by `dt`. Negative steps run the flow backwards.
pub fn advect(model: &LakeModel, state: &LakeState, dt: f64, options: &AdvectOptions) -> Result<LakeState> {
    if !dt.is_finite() {
        return Err(LakeError::NonFinite("time step"));
    }
    let limit = max_stable_dt(model, state, options);
    if dt.abs() > limit * (1.0 + 1e-12) {
        return Err(LakeError::Cfl { dt, required: limit });
    }
    let depth = model.depth();
    let potential: Vec<f64> = state.omega.values().iter().zip(depth).map(|(w, b)| w / b).collect();
    let feet = trace_feet(model, state, dt, options.substeps)?;
    let grid = &model.grid;
    let omega: Vec<f64> = feet
        .points
        .par_iter()
        .zip(depth.par_iter())
        .map(|(foot, b)| {
            let q = if options.monotone {
                grid.interpolate_clipped(&potential, *foot)
            } else {
                grid.interpolate(&potential, *foot)
            };
            b * q
        })
        .collect();
    let omega = ScalarField::new(grid.clone(), omega)?;
    let mut next = model.state(state.time + dt, omega, state.circulations.clone())?;
    next.clamp_distance = state.clamp_distance + feet.clamp_distance;
    Ok(next)
}

/// Run `n_steps` steps of size `dt`, calling `hook` on the initial state,
/// every `record_interval` steps, and on the final state.
pub fn step_simulation<R>(
    model: &LakeModel,
    state: LakeState,
    dt: f64,
    n_steps: usize,
    record_interval: usize,
    options: &AdvectOptions,
    mut hook: impl FnMut(&LakeModel, &LakeState) -> Result<R>,
) -> Result<(LakeState, Vec<R>)> {
    let interval = record_interval.max(1);
    let mut records = vec![hook(model, &state)?];
    let mut state = state;
    for step in 1..=n_steps {
        state = advect(model, &state, dt, options).map_err(|e| e.context(format!("step {step}")))?;
        if step % interval == 0 || step == n_steps {
            records.push(hook(model, &state)?);
        }
    }
    Ok((state, records))
}

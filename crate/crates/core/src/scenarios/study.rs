use rayon::prelude::*;
use serde::Serialize;

use super::blob::cells_across;
use super::config::Scenario;
use super::run::{run, RunOutput, Verdict, STATIONARY_CELLS};
use crate::error::{LakeError, Result};

/// Fewest cells across the blob kept by a study when it refines the grid.
pub const STUDY_CELLS_ACROSS: f64 = 12.0;

/// Machine-readable result of a study, written as `report.json`.
///
/// Entries of the per-ε arrays are `null` for members whose run failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub scenario: String,
    pub epsilons: Vec<f64>,
    pub sup_errors: Vec<Option<f64>>,
    pub gamma_drift: Vec<Option<f64>>,
    pub energy_drift: Vec<Option<f64>>,
    pub omega_slope: Vec<Option<f64>>,
    pub verdict: Verdict,
}

#[derive(Debug)]
pub struct StudyMember {
    pub epsilon: f64,
    /// Cells per unit length used for this member.
    pub resolution: usize,
    pub output: Result<RunOutput>,
}

#[derive(Debug)]
pub struct Study {
    pub report: ConvergenceReport,
    pub members: Vec<StudyMember>,
}

/// Smallest resolution at or above the base one that keeps
/// [`STUDY_CELLS_ACROSS`] cells across the blob of size `epsilon`.
pub fn resolution_for(base: &Scenario, epsilon: f64) -> usize {
    let mut s = base.clone();
    s.blob.epsilon = epsilon;
    let mut n = base.run.resolution;
    while cells_across(&s, n) < STUDY_CELLS_ACROSS {
        n += 1;
    }
    n
}

/// The scenario run for one member of a study.
pub fn member_scenario(base: &Scenario, epsilon: f64) -> Scenario {
    let mut s = base.clone();
    s.blob.epsilon = epsilon;
    s.run.resolution = resolution_for(base, epsilon);
    s.name = format!("{}-eps{epsilon}", base.name);
    s
}

/// Run `base` for each of `epsilons` (at least two, strictly decreasing)
/// and compare the centers with the limiting law.
///
/// The verdict passes when every member succeeds within the conservation
/// budgets and the trajectory errors strictly decrease; on a flat bottom,
/// where the limit is stationary, it instead requires every error to stay
/// within a few grid cells.
pub fn convergence_study(base: &Scenario, epsilons: &[f64]) -> Result<Study> {
    if epsilons.len() < 2 {
        return Err(LakeError::config(
            "epsilons",
            format!("a study needs at least two values, got {}", epsilons.len()),
        ));
    }
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(LakeError::config("epsilons", "values must be strictly decreasing"));
    }
    let scenarios: Vec<Scenario> = epsilons.iter().map(|&e| member_scenario(base, e)).collect();
    for s in &scenarios {
        s.validate()?;
    }
    let members: Vec<StudyMember> = scenarios
        .par_iter()
        .map(|s| StudyMember { epsilon: s.blob.epsilon, resolution: s.run.resolution, output: run(s) })
        .collect();

    let ok = |f: &dyn Fn(&RunOutput) -> f64| -> Vec<Option<f64>> {
        members.iter().map(|m| m.output.as_ref().ok().map(f)).collect()
    };
    let sup_errors: Vec<Option<f64>> =
        members.iter().map(|m| m.output.as_ref().ok().and_then(|o| o.sup_error().ok())).collect();
    let all_ran = sup_errors.iter().all(Option::is_some);
    let conserve = members.iter().all(|m| m.output.as_ref().is_ok_and(RunOutput::conserves));
    let errors: Vec<f64> = sup_errors.iter().flatten().copied().collect();
    let trend = if base.bathymetry.is_constant() {
        members
            .iter()
            .zip(&errors)
            .all(|(m, e)| m.output.as_ref().is_ok_and(|o| *e <= STATIONARY_CELLS * o.summary.cell_size))
    } else {
        errors.windows(2).all(|w| w[1] < w[0])
    };
    let report = ConvergenceReport {
        scenario: base.name.clone(),
        epsilons: epsilons.to_vec(),
        gamma_drift: ok(&RunOutput::gamma_drift),
        energy_drift: ok(&RunOutput::energy_drift),
        omega_slope: ok(&RunOutput::omega_slope),
        sup_errors,
        verdict: Verdict::from_bool(all_ran && conserve && trend),
    };
    Ok(Study { report, members })
}

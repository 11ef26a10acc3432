use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::{Scenario, MIN_CELLS_ACROSS};
use crate::error::{LakeError, Result};
use crate::field::ScalarField;
use crate::geometry::{Grid, Layout};
use crate::vec2::Vec2;

/// Radial profile `f` of the initial vortex, supported in the unit disk.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `exp(−1/(1 − |z|²))`.
    #[default]
    Smooth,
    /// `(1 + cos π|z|)/2`.
    Cosine,
}

impl Profile {
    pub fn eval(self, z: f64) -> f64 {
        if z >= 1.0 {
            return 0.0;
        }
        match self {
            Profile::Smooth => (-1.0 / (1.0 - z * z)).exp(),
            Profile::Cosine => 0.5 * (1.0 + (PI * z).cos()),
        }
    }

    pub fn support_radius(self) -> f64 {
        1.0
    }
}

/// Largest grid spacing near `p`.
pub fn local_spacing(grid: &Grid, p: Vec2) -> f64 {
    match grid.layout() {
        Layout::Cartesian { hx, hy, .. } => hx.max(hy),
        Layout::Polar { dr, dtheta, .. } => dr.max(p.norm() * dtheta),
    }
}

/// Grid cells across the blob diameter at `n` cells per unit length,
/// without building the grid.
pub fn cells_across(scenario: &Scenario, n: usize) -> f64 {
    let [n1, n2] = scenario.grid_resolution(n);
    let h = match scenario.domain {
        crate::geometry::DomainSpec::Rectangle { width, height } => (width / n1 as f64).max(height / n2 as f64),
        crate::geometry::DomainSpec::UnitDisk => {
            (1.0 / n1 as f64).max(scenario.blob.center.norm() * 2.0 * PI / n2 as f64)
        }
        crate::geometry::DomainSpec::Annulus { inner_radius } => {
            ((1.0 - inner_radius) / n1 as f64).max(scenario.blob.center.norm() * 2.0 * PI / n2 as f64)
        }
    };
    2.0 * scenario.blob.epsilon * scenario.blob.profile.support_radius() / h
}

/// `ω₀(x) = (Γ/ε²) f((x − q₀)/ε)`, rescaled so that its grid integral is
/// exactly `Γ`.
pub fn concentrated_blob(
    profile: Profile,
    q0: Vec2,
    epsilon: f64,
    gamma: f64,
    grid: &Arc<Grid>,
) -> Result<ScalarField> {
    let h = local_spacing(grid, q0);
    let cells = 2.0 * epsilon * profile.support_radius() / h;
    if cells < MIN_CELLS_ACROSS {
        return Err(LakeError::UnderResolved { cells, min: MIN_CELLS_ACROSS });
    }
    let mut omega = ScalarField::from_fn(grid.clone(), |p| profile.eval(p.dist(q0) / epsilon) / (epsilon * epsilon));
    let mass = omega.integral();
    if !(mass > 0.0) {
        return Err(LakeError::UnderResolved { cells, min: MIN_CELLS_ACROSS });
    }
    let scale = gamma / mass;
    for w in omega.values_mut() {
        *w *= scale;
    }
    Ok(omega)
}

use std::sync::Arc;

use crate::error::{LakeError, Result};
use crate::geometry::Grid;
use crate::vec2::Vec2;

/// Nodal scalar values on a shared grid.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LakeError::LengthMismatch("field values", values.len(), grid.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LakeError::NonFinite("scalar field"));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        ScalarField { grid, values: vec![0.0; n] }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(Vec2) -> f64) -> Self {
        let values = grid.points().iter().map(|p| f(*p)).collect();
        ScalarField { grid, values }
    }

    pub(crate) fn from_raw(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Bicubic value at `p`.
    pub fn at(&self, p: Vec2) -> f64 {
        self.grid.interpolate(&self.values, p)
    }

    pub fn integral(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self + s·other`, node by node.
    pub fn axpy(&mut self, s: f64, other: &ScalarField) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
    }
}

/// Nodal velocity vectors on a shared grid.
#[derive(Debug, Clone)]
pub struct VelocityField {
    grid: Arc<Grid>,
    values: Vec<Vec2>,
}

impl VelocityField {
    pub fn new(grid: Arc<Grid>, values: Vec<Vec2>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LakeError::LengthMismatch("velocity values", values.len(), grid.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LakeError::NonFinite("velocity field"));
        }
        Ok(VelocityField { grid, values })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        VelocityField { grid, values: vec![Vec2::ZERO; n] }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(Vec2) -> Vec2) -> Self {
        let values = grid.points().iter().map(|p| f(*p)).collect();
        VelocityField { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Vec2] {
        &self.values
    }

    /// Componentwise bicubic value at `p`.
    pub fn at(&self, p: Vec2) -> Vec2 {
        let s = self.grid.stencil(p);
        let mut acc = Vec2::ZERO;
        for k in 0..16 {
            acc += s.w[k] * self.values[s.idx[k]];
        }
        acc
    }

    pub fn max_speed(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

use serde::{Deserialize, Serialize};

use super::Grid;
use crate::error::{LakeError, Result};
use crate::vec2::Vec2;

/// Analytic depth profiles.
///
/// Depths are closed forms so that `∇b` and `∇⊥(1/b)` are exact wherever
/// they are evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Bathymetry {
    /// `b ≡ depth`.
    Constant { depth: f64 },
    /// `b(x) = c0 + slope · x`.
    Affine { c0: f64, slope: Vec2 },
    /// `b(x) = Σ_k coefficients[k] |x|^{2k}`, smooth through the origin.
    Radial { coefficients: Vec<f64> },
    /// `b(x) = base + amplitude · g(|x − center| / width)` with the compactly
    /// supported bump `g(z) = exp(1 − 1/(1 − z²))` for `z < 1`.
    Bump { base: f64, amplitude: f64, center: Vec2, width: f64 },
}

/// Depth, its gradient and `∇⊥(1/b)` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthSample {
    pub depth: f64,
    pub gradient: Vec2,
    pub perp_grad_inv: Vec2,
}

fn bump_profile(z: f64) -> (f64, f64) {
    if z >= 1.0 {
        return (0.0, 0.0);
    }
    let one_minus = 1.0 - z * z;
    let g = (1.0 - 1.0 / one_minus).exp();
    let dg = -2.0 * z / (one_minus * one_minus) * g;
    (g, dg)
}

impl Bathymetry {
    pub fn depth(&self, p: Vec2) -> f64 {
        match self {
            Bathymetry::Constant { depth } => *depth,
            Bathymetry::Affine { c0, slope } => c0 + slope.dot(p),
            Bathymetry::Radial { coefficients } => {
                let r2 = p.norm_sq();
                coefficients.iter().rev().fold(0.0, |acc, c| acc * r2 + c)
            }
            Bathymetry::Bump { base, amplitude, center, width } => {
                base + amplitude * bump_profile((p - *center).norm() / width).0
            }
        }
    }

    pub fn gradient(&self, p: Vec2) -> Vec2 {
        match self {
            Bathymetry::Constant { .. } => Vec2::ZERO,
            Bathymetry::Affine { slope, .. } => *slope,
            Bathymetry::Radial { coefficients } => {
                // d/dr² of the polynomial, times ∇(r²) = 2x
                let r2 = p.norm_sq();
                let dpoly =
                    coefficients.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, c)| acc * r2 + k as f64 * c);
                p * (2.0 * dpoly)
            }
            Bathymetry::Bump { amplitude, center, width, .. } => {
                let d = p - *center;
                let dist = d.norm();
                if dist == 0.0 {
                    return Vec2::ZERO;
                }
                let (_, dg) = bump_profile(dist / width);
                d * (amplitude * dg / (width * dist))
            }
        }
    }

    /// `∇⊥(1/b) = (∂₂(1/b), −∂₁(1/b)) = (−∂₂b, ∂₁b) / b²`.
    pub fn perp_grad_inv(&self, p: Vec2) -> Vec2 {
        let b = self.depth(p);
        let g = self.gradient(p);
        Vec2::new(-g.y, g.x) / (b * b)
    }

    pub fn sample(&self, p: Vec2) -> DepthSample {
        let depth = self.depth(p);
        let gradient = self.gradient(p);
        DepthSample { depth, gradient, perp_grad_inv: Vec2::new(-gradient.y, gradient.x) / (depth * depth) }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Bathymetry::Constant { .. } => true,
            Bathymetry::Affine { slope, .. } => slope.x == 0.0 && slope.y == 0.0,
            Bathymetry::Radial { coefficients } => coefficients.iter().skip(1).all(|c| *c == 0.0),
            Bathymetry::Bump { amplitude, .. } => *amplitude == 0.0,
        }
    }

    /// Fails on the first grid node where the depth is not positive and finite.
    pub fn check_positive(&self, grid: &Grid) -> Result<()> {
        for p in grid.points() {
            let b = self.depth(*p);
            if !(b > 0.0 && b.is_finite()) {
                return Err(LakeError::NonPositiveDepth { depth: b, x: p.x, y: p.y });
            }
        }
        Ok(())
    }

    /// Extreme depths over the grid nodes, `(inf b, sup b)`.
    pub fn range_on(&self, grid: &Grid) -> (f64, f64) {
        grid.points().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            let b = self.depth(*p);
            (lo.min(b), hi.max(b))
        })
    }
}

/// Evaluate the depth triple at `point`, rejecting points outside `grid`'s domain.
pub fn eval_bathymetry(b: &Bathymetry, grid: &Grid, point: Vec2) -> Result<DepthSample> {
    if !grid.domain().contains(point) {
        return Err(LakeError::OutsideDomain { x: point.x, y: point.y });
    }
    Ok(b.sample(point))
}

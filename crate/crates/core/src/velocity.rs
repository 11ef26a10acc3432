//! Velocity reconstruction `u = ∇⊥ψ/b` and the quantities measured on it.
//!
//! Derivatives are centered in the interior and second-order one-sided on
//! boundary rows. On polar grids they are taken in `(r, θ)` and rotated to
//! Cartesian components; the disk centre uses the first angular Fourier mode
//! of the innermost ring.

use crate::error::{LakeError, Result};
use crate::field::{ScalarField, VelocityField};
use crate::geometry::{Bathymetry, Grid, Layout};
use crate::vec2::Vec2;

#[inline]
fn centered(fm: f64, fp: f64, h: f64) -> f64 {
    (fp - fm) / (2.0 * h)
}

#[inline]
fn forward(f0: f64, f1: f64, f2: f64, h: f64) -> f64 {
    (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h)
}

/// Nodal gradient of `values`.
pub fn gradient(grid: &Grid, values: &[f64]) -> Vec<Vec2> {
    let mut out = vec![Vec2::ZERO; grid.len()];
    match grid.layout() {
        Layout::Cartesian { nx, ny, hx, hy, .. } => {
            let f = |i: usize, j: usize| values[i * (ny + 1) + j];
            for i in 0..=nx {
                for j in 0..=ny {
                    let dx = if i == 0 {
                        forward(f(0, j), f(1, j), f(2, j), hx)
                    } else if i == nx {
                        -forward(f(nx, j), f(nx - 1, j), f(nx - 2, j), hx)
                    } else {
                        centered(f(i - 1, j), f(i + 1, j), hx)
                    };
                    let dy = if j == 0 {
                        forward(f(i, 0), f(i, 1), f(i, 2), hy)
                    } else if j == ny {
                        -forward(f(i, ny), f(i, ny - 1), f(i, ny - 2), hy)
                    } else {
                        centered(f(i, j - 1), f(i, j + 1), hy)
                    };
                    out[i * (ny + 1) + j] = Vec2::new(dx, dy);
                }
            }
        }
        Layout::Polar { nr, ntheta, r0, dr, dtheta, center } => {
            let f = |j: usize, k: usize| values[grid.ring_index(j, k)];
            let first = if center { 1 } else { 0 };
            for j in first..=nr {
                let r = if j == nr { 1.0 } else { r0 + j as f64 * dr };
                for k in 0..ntheta {
                    let fr = if j == 0 {
                        forward(f(0, k), f(1, k), f(2, k), dr)
                    } else if j == nr {
                        -forward(f(nr, k), f(nr - 1, k), f(nr - 2, k), dr)
                    } else {
                        centered(f(j - 1, k), f(j + 1, k), dr)
                    };
                    let ft = centered(f(j, k + ntheta - 1), f(j, k + 1), dtheta);
                    let theta = k as f64 * dtheta;
                    let e_r = Vec2::polar(1.0, theta);
                    let e_t = Vec2::new(-e_r.y, e_r.x);
                    out[grid.ring_index(j, k)] = fr * e_r + (ft / r) * e_t;
                }
            }
            if center {
                let mut g = Vec2::ZERO;
                for k in 0..ntheta {
                    g += (f(1, k) - values[0]) * Vec2::polar(1.0, k as f64 * dtheta);
                }
                out[0] = g * (2.0 / (ntheta as f64 * dr));
            }
        }
    }
    out
}

/// `u = (∂₂ψ, −∂₁ψ)/b` at every node.
pub fn velocity_from_stream(psi: &ScalarField, bathymetry: &Bathymetry) -> Result<VelocityField> {
    let grid = psi.grid();
    let g = gradient(grid, psi.values());
    let values = g.iter().zip(grid.points()).map(|(g, p)| g.perp() / bathymetry.depth(*p)).collect();
    VelocityField::new(grid.clone(), values)
}

/// Discrete `∇·(b u)`.
pub fn divergence_weighted(u: &VelocityField, bathymetry: &Bathymetry) -> ScalarField {
    let grid = u.grid();
    let depth: Vec<f64> = grid.points().iter().map(|p| bathymetry.depth(*p)).collect();
    let bx: Vec<f64> = u.values().iter().zip(&depth).map(|(v, b)| b * v.x).collect();
    let by: Vec<f64> = u.values().iter().zip(&depth).map(|(v, b)| b * v.y).collect();
    let (gx, gy) = (gradient(grid, &bx), gradient(grid, &by));
    ScalarField::from_raw(grid.clone(), gx.iter().zip(&gy).map(|(a, b)| a.x + b.y).collect())
}

/// Discrete `∇×u = ∂₁u₂ − ∂₂u₁`.
pub fn curl(u: &VelocityField) -> ScalarField {
    let grid = u.grid();
    let ux: Vec<f64> = u.values().iter().map(|v| v.x).collect();
    let uy: Vec<f64> = u.values().iter().map(|v| v.y).collect();
    let (gx, gy) = (gradient(grid, &ux), gradient(grid, &uy));
    ScalarField::from_raw(grid.clone(), gx.iter().zip(&gy).map(|(a, b)| b.x - a.y).collect())
}

/// Circulation `∮ u·τ ds` around island `island`, counter-clockwise, by the
/// trapezoid rule on the island's boundary nodes.
///
/// With `u = ∇⊥ψ/b` this equals the flux `∫ b⁻¹ ∂ψ/∂ν` through the island,
/// `ν` pointing out of the fluid.
pub fn circulation_island(u: &VelocityField, island: usize) -> Result<f64> {
    let grid = u.grid();
    let contour = grid.island_contour(island)?;
    match grid.layout() {
        Layout::Polar { r0, dtheta, .. } => Ok(contour
            .iter()
            .map(|&i| {
                let p = grid.points()[i];
                let tau = Vec2::new(-p.y, p.x) / p.norm();
                u.values()[i].dot(tau) * r0 * dtheta
            })
            .sum()),
        Layout::Cartesian { .. } => Err(LakeError::IslandIndex { index: island, count: 0 }),
    }
}

/// `max |u·ν|` over boundary nodes.
pub fn max_boundary_flux(u: &VelocityField) -> f64 {
    u.grid().boundary_normals().iter().map(|(i, n)| u.values()[*i].dot(*n).abs()).fold(0.0, f64::max)
}

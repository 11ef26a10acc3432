//! Closed-form Dirichlet Green functions of the Laplacian on the upper
//! half-plane and the unit disk, with the estimates they satisfy.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{LakeError, Result};
use crate::vec2::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticKernel {
    /// `{x₂ > 0}`.
    HalfPlane,
    /// `{|x| < 1}`.
    UnitDisk,
}

fn distinct(x: Vec2, y: Vec2) -> Result<f64> {
    let d2 = (x - y).norm_sq();
    if d2 == 0.0 {
        return Err(LakeError::Singular);
    }
    Ok(d2)
}

/// `G(x, y) = (1/4π) ln(1 + 4x₂y₂/|x − y|²)`.
pub fn green_half_plane(x: Vec2, y: Vec2) -> Result<f64> {
    let d2 = distinct(x, y)?;
    Ok((4.0 * x.y * y.y / d2).ln_1p() / (4.0 * PI))
}

/// `G(x, y) = (1/4π) ln(1 + (1 − |x|²)(1 − |y|²)/|x − y|²)`.
pub fn green_disk(x: Vec2, y: Vec2) -> Result<f64> {
    let d2 = distinct(x, y)?;
    Ok(((1.0 - x.norm_sq()) * (1.0 - y.norm_sq()) / d2).ln_1p() / (4.0 * PI))
}

/// Regular part `H(x, y) = G(x, y) − (1/2π) ln(1/|x − y|)` of the disk kernel,
/// `(1/4π) ln(|x − y|² + (1 − |x|²)(1 − |y|²))`.
pub fn disk_regular_part(x: Vec2, y: Vec2) -> f64 {
    ((x - y).norm_sq() + (1.0 - x.norm_sq()) * (1.0 - y.norm_sq())).ln() / (4.0 * PI)
}

/// `∇ₓH(x, y)` for the disk.
pub fn disk_regular_gradient(x: Vec2, y: Vec2) -> Vec2 {
    let n = (x - y).norm_sq() + (1.0 - x.norm_sq()) * (1.0 - y.norm_sq());
    let dn = 2.0 * (x - y) - 2.0 * (1.0 - y.norm_sq()) * x;
    dn / (4.0 * PI * n)
}

impl AnalyticKernel {
    pub fn contains(self, p: Vec2) -> bool {
        match self {
            AnalyticKernel::HalfPlane => p.y > 0.0,
            AnalyticKernel::UnitDisk => p.norm_sq() < 1.0,
        }
    }

    pub fn distance_to_boundary(self, p: Vec2) -> f64 {
        match self {
            AnalyticKernel::HalfPlane => p.y.max(0.0),
            AnalyticKernel::UnitDisk => (1.0 - p.norm()).max(0.0),
        }
    }

    pub fn diameter(self) -> f64 {
        match self {
            AnalyticKernel::HalfPlane => f64::INFINITY,
            AnalyticKernel::UnitDisk => 2.0,
        }
    }

    pub fn green(self, x: Vec2, y: Vec2) -> Result<f64> {
        match self {
            AnalyticKernel::HalfPlane => green_half_plane(x, y),
            AnalyticKernel::UnitDisk => green_disk(x, y),
        }
    }

    /// Gradient of `G(·, y)` at `x`.
    pub fn gradient(self, x: Vec2, y: Vec2) -> Result<Vec2> {
        let d2 = distinct(x, y)?;
        let singular = (x - y) / d2;
        Ok(match self {
            AnalyticKernel::HalfPlane => {
                let image = Vec2::new(y.x, -y.y);
                ((x - image) / (x - image).norm_sq() - singular) / (2.0 * PI)
            }
            AnalyticKernel::UnitDisk => disk_regular_gradient(x, y) - singular / (2.0 * PI),
        })
    }

    /// `∇ₓG(x, y) + ∇ₓG(y, x)` in closed form.
    pub fn symmetric_gradient_sum(self, x: Vec2, y: Vec2) -> Result<Vec2> {
        let d2 = distinct(x, y)?;
        Ok(match self {
            AnalyticKernel::HalfPlane => Vec2::new(0.0, x.y + y.y) / (PI * (d2 + 4.0 * x.y * y.y)),
            AnalyticKernel::UnitDisk => {
                let (sx, sy) = (1.0 - x.norm_sq(), 1.0 - y.norm_sq());
                -(x * sy + y * sx) / (2.0 * PI * (d2 + sx * sy))
            }
        })
    }
}

/// Margins of the classical Green-function estimates over a sample of pairs.
///
/// The constants in the sharp and gradient bounds are only known to exist;
/// the report gives the smallest constants that make every sampled pair
/// satisfy them.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub kernel: AnalyticKernel,
    pub checked: usize,
    pub skipped: usize,
    /// Smallest `G(x, y)` seen; the lower bound is `G ≥ 0`.
    pub min_value: f64,
    /// Smallest `(1/2π) ln(diam/|x − y|) − G(x, y)`; `None` for unbounded
    /// domains.
    pub log_margin: Option<f64>,
    /// Smallest `C` with `G ≤ (1/4π) ln(1 + C d(x) d(y)/|x − y|²)`.
    pub sharp_constant: f64,
    /// Smallest `C` with `|∇ₓG(x, y)| ≤ C/|x − y|`.
    pub gradient_constant: f64,
}

impl BoundsReport {
    pub fn holds(&self) -> bool {
        self.min_value >= 0.0 && self.log_margin.is_none_or(|m| m >= 0.0)
    }
}

pub fn check_green_bounds(kernel: AnalyticKernel, pairs: &[(Vec2, Vec2)]) -> BoundsReport {
    let mut report = BoundsReport {
        kernel,
        checked: 0,
        skipped: 0,
        min_value: f64::INFINITY,
        log_margin: kernel.diameter().is_finite().then_some(f64::INFINITY),
        sharp_constant: 0.0,
        gradient_constant: 0.0,
    };
    for &(x, y) in pairs {
        if !(kernel.contains(x) && kernel.contains(y)) || x == y {
            report.skipped += 1;
            continue;
        }
        let (Ok(g), Ok(grad)) = (kernel.green(x, y), kernel.gradient(x, y)) else {
            report.skipped += 1;
            continue;
        };
        let d = x.dist(y);
        report.checked += 1;
        report.min_value = report.min_value.min(g);
        if let Some(m) = report.log_margin.as_mut() {
            *m = m.min((kernel.diameter() / d).ln() / (2.0 * PI) - g);
        }
        let dd = kernel.distance_to_boundary(x) * kernel.distance_to_boundary(y);
        let c = (4.0 * PI * g).exp_m1() * d * d / dd;
        report.sharp_constant = report.sharp_constant.max(c);
        report.gradient_constant = report.gradient_constant.max(grad.norm() * d);
    }
    report
}

/// One named self-check with its measured value.
#[derive(Debug, Clone, Serialize)]
pub struct SelfCheck {
    pub name: &'static str,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn check(name: &'static str, value: f64, expected: f64, tolerance: f64) -> SelfCheck {
    SelfCheck { name, value, expected, tolerance, pass: (value - expected).abs() <= tolerance }
}

/// Reference values of both kernels, evaluated against their closed forms.
pub fn selftest() -> Vec<SelfCheck> {
    let a = Vec2::new(0.0, 1.0);
    let b = Vec2::new(0.0, 2.0);
    let hp = AnalyticKernel::HalfPlane;
    let disk = AnalyticKernel::UnitDisk;
    let sym = hp.symmetric_gradient_sum(a, b).unwrap_or(Vec2::new(f64::NAN, f64::NAN));
    let dsym =
        disk.symmetric_gradient_sum(Vec2::new(0.5, 0.0), Vec2::new(-0.5, 0.0)).unwrap_or(Vec2::new(f64::NAN, f64::NAN));
    let nan = f64::NAN;
    vec![
        check("half_plane_green", green_half_plane(a, b).unwrap_or(nan), 9f64.ln() / (4.0 * PI), 1e-10),
        check(
            "half_plane_green_far",
            green_half_plane(a, Vec2::new(5.0, 1.0)).unwrap_or(nan),
            (29.0f64 / 25.0).ln() / (4.0 * PI),
            1e-10,
        ),
        check(
            "disk_green_center",
            green_disk(Vec2::new(0.5, 0.0), Vec2::ZERO).unwrap_or(nan),
            2f64.ln() / (2.0 * PI),
            1e-10,
        ),
        check("half_plane_symmetric_tangential", sym.x, 0.0, 0.0),
        check("half_plane_symmetric_normal", sym.y, 1.0 / (3.0 * PI), 1e-10),
        check("disk_symmetric_antipodal", dsym.norm(), 0.0, 1e-15),
    ]
}

//! The limiting vortex law `q′(s) = −∇⊥(1/b)(q(s))` and comparison of
//! simulated centers against it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{LakeError, Result};
use crate::geometry::{Bathymetry, DomainSpec};
use crate::vec2::Vec2;

/// Sampled solution of the limiting law.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitTrajectory {
    pub q0: Vec2,
    /// `(s, q(s))` at uniform `s`.
    pub samples: Vec<(f64, Vec2)>,
    /// Internal integrator step.
    pub step: f64,
    /// Largest change of a sample when the step is halved.
    pub step_error: f64,
}

/// Target for the step-halving check.
const STEP_TOLERANCE: f64 = 1e-10;

fn rk4(b: &Bathymetry, q: Vec2, h: f64) -> Vec2 {
    let f = |p: Vec2| -b.perp_grad_inv(p);
    let k1 = f(q);
    let k2 = f(q + 0.5 * h * k1);
    let k3 = f(q + 0.5 * h * k2);
    let k4 = f(q + h * k3);
    q + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
}

fn integrate(
    b: &Bathymetry,
    domain: &DomainSpec,
    q0: Vec2,
    s_end: f64,
    n_samples: usize,
    per_sample: usize,
) -> Result<Vec<(f64, Vec2)>> {
    let ds = s_end / n_samples as f64;
    let h = ds / per_sample as f64;
    let mut q = q0;
    let mut out = Vec::with_capacity(n_samples + 1);
    out.push((0.0, q0));
    for i in 0..n_samples {
        for k in 0..per_sample {
            q = rk4(b, q, h);
            if !q.is_finite() || !domain.contains(q) {
                return Err(LakeError::TrajectoryExit { s: i as f64 * ds + (k + 1) as f64 * h });
            }
        }
        out.push(((i + 1) as f64 * ds, q));
    }
    Ok(out)
}

/// Integrate the limiting law from `q0` over `s ∈ [0, s_end]` with classical
/// RK4, halving the step until two successive step sizes agree to 1e-10.
pub fn limiting_trajectory(
    b: &Bathymetry,
    domain: &DomainSpec,
    q0: Vec2,
    s_end: f64,
    n_samples: usize,
) -> Result<LimitTrajectory> {
    if !domain.contains(q0) || domain.distance_to_boundary(q0)? == 0.0 {
        return Err(LakeError::OutsideDomain { x: q0.x, y: q0.y });
    }
    if !(s_end.is_finite() && s_end > 0.0) || n_samples == 0 {
        return Err(LakeError::Degenerate { quantity: "s_end", value: s_end });
    }
    let mut per_sample = ((s_end / n_samples as f64) / 1e-3).ceil().max(1.0) as usize;
    let mut coarse = integrate(b, domain, q0, s_end, n_samples, per_sample)?;
    loop {
        let fine = integrate(b, domain, q0, s_end, n_samples, 2 * per_sample)?;
        let diff = coarse.iter().zip(&fine).map(|(a, c)| a.1.dist(c.1)).fold(0.0, f64::max);
        per_sample *= 2;
        if diff <= STEP_TOLERANCE || per_sample >= 1 << 16 {
            return Ok(LimitTrajectory {
                q0,
                samples: fine,
                step: s_end / (n_samples * per_sample) as f64,
                step_error: diff,
            });
        }
        coarse = fine;
    }
}

impl LimitTrajectory {
    pub fn s_end(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.0)
    }

    /// Linear interpolation of the samples at `s`.
    pub fn at(&self, s: f64) -> Result<Vec2> {
        let (lo, hi) = (self.samples[0].0, self.s_end());
        let slack = 1e-9 * hi.abs().max(1.0);
        if s < lo - slack || s > hi + slack {
            return Err(LakeError::SpanMismatch { rec_lo: s, rec_hi: s, lim_lo: lo, lim_hi: hi });
        }
        let k = self.samples.partition_point(|x| x.0 < s).clamp(1, self.samples.len() - 1);
        let (s0, q0) = self.samples[k - 1];
        let (s1, q1) = self.samples[k];
        let w = ((s - s0) / (s1 - s0)).clamp(0.0, 1.0);
        Ok(q0 + w * (q1 - q0))
    }
}

/// `s = E t / Γ`.
pub fn rescale_time(t: f64, energy: f64, gamma: f64) -> Result<f64> {
    if gamma == 0.0 {
        return Err(LakeError::Degenerate { quantity: "circulation", value: gamma });
    }
    Ok(energy * t / gamma)
}

/// `sup |q(s) − q*(s)|` over the recorded `s`.
pub fn trajectory_error(records: &[DiagnosticsRecord], limit: &LimitTrajectory) -> Result<f64> {
    if records.is_empty() {
        return Err(LakeError::Records("no records".into()));
    }
    let (lim_lo, lim_hi) = (limit.samples[0].0, limit.s_end());
    let slack = 1e-9 * lim_hi.abs().max(1.0);
    let (rec_lo, rec_hi) =
        records.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.s), b.max(r.s)));
    if rec_lo < lim_lo - slack || rec_hi > lim_hi + slack {
        return Err(LakeError::SpanMismatch { rec_lo, rec_hi, lim_lo, lim_hi });
    }
    records.iter().try_fold(0.0f64, |acc, r| Ok(acc.max(r.center.dist(limit.at(r.s)?))))
}

/// Both forms of the formal point-vortex law at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RichardsonVelocity {
    /// `(Γ/4π) ln(1/ε) ∇⊥ln b`.
    pub epsilon_form: Vec2,
    /// `−(E/Γ) ∇⊥(1/b)`.
    pub energy_form: Vec2,
    /// Component of `epsilon_form` along `energy_form`, relative to its
    /// length; equals `b(q)` when `E = (Γ²/4π) ln(1/ε)`. `NaN` when the
    /// energy form vanishes.
    pub ratio: f64,
}

pub fn richardson_velocity(
    b: &Bathymetry,
    q: Vec2,
    gamma: f64,
    epsilon: f64,
    energy: f64,
) -> Result<RichardsonVelocity> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(LakeError::Degenerate { quantity: "epsilon", value: epsilon });
    }
    if gamma == 0.0 {
        return Err(LakeError::Degenerate { quantity: "circulation", value: gamma });
    }
    let s = b.sample(q);
    let grad_ln = s.gradient / s.depth;
    let epsilon_form = (gamma / (4.0 * PI)) * (1.0 / epsilon).ln() * grad_ln.perp();
    let energy_form = -(energy / gamma) * s.perp_grad_inv;
    let n2 = energy_form.norm_sq();
    let ratio = if n2 > 0.0 { epsilon_form.dot(energy_form) / n2 } else { f64::NAN };
    Ok(RichardsonVelocity { epsilon_form, energy_form, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_depth_moves_at_unit_speed() {
        let rect = DomainSpec::Rectangle { width: 3.0, height: 1.0 };
        let b = Bathymetry::Affine { c0: 1.0, slope: Vec2::new(0.0, 1.0) };
        let tr = limiting_trajectory(&b, &rect, Vec2::ZERO, 1.0, 10).unwrap();
        for (s, q) in &tr.samples {
            assert!(q.dist(Vec2::new(*s, 0.0)) < 1e-12);
        }
    }

    #[test]
    fn flat_bottom_is_stationary() {
        let b = Bathymetry::Constant { depth: 2.0 };
        let tr = limiting_trajectory(&b, &DomainSpec::UnitDisk, Vec2::new(0.2, 0.1), 3.0, 5).unwrap();
        assert!(tr.samples.iter().all(|(_, q)| *q == Vec2::new(0.2, 0.1)));
    }

    #[test]
    fn leaving_the_domain_is_reported() {
        let rect = DomainSpec::Rectangle { width: 1.0, height: 1.0 };
        let b = Bathymetry::Affine { c0: 1.0, slope: Vec2::new(0.0, 1.0) };
        match limiting_trajectory(&b, &rect, Vec2::ZERO, 2.0, 20) {
            Err(LakeError::TrajectoryExit { s }) => assert!((s - 0.5).abs() < 1e-2, "{s}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rescaling() {
        assert_eq!(rescale_time(2.0, 0.5, 1.0).unwrap(), 1.0);
        assert_eq!(rescale_time(0.0, 0.5, 1.0).unwrap(), 0.0);
        assert!(rescale_time(1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn richardson_forms_agree() {
        let b = Bathymetry::Affine { c0: 1.0, slope: Vec2::new(0.0, 1.0) };
        let e = 20f64.ln() / (4.0 * PI);
        let v = richardson_velocity(&b, Vec2::ZERO, 1.0, 0.05, e).unwrap();
        assert!((v.epsilon_form.norm() - 0.23840).abs() < 1e-5);
        assert!((v.energy_form.norm() - 0.23840).abs() < 1e-5);
        assert!((v.ratio - 1.0).abs() < 1e-12);
        let flat = richardson_velocity(&Bathymetry::Constant { depth: 1.0 }, Vec2::ZERO, 1.0, 0.05, e).unwrap();
        assert_eq!(flat.epsilon_form.norm(), 0.0);
        assert_eq!(flat.energy_form.norm(), 0.0);
    }
}

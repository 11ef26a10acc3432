use serde::{Deserialize, Serialize};

use crate::error::{LakeError, Result};
use crate::vec2::Vec2;

/// Points this far outside the closed domain still count as inside.
const CONTAINS_SLACK: f64 = 1e-12;

/// The three supported lake shapes. Rectangles are centred on the origin,
/// the annulus is `a < |x| < 1` with the disk `|x| <= a` as its single island.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    #[serde(alias = "disk")]
    UnitDisk,
    Rectangle {
        width: f64,
        height: f64,
    },
    Annulus {
        inner_radius: f64,
    },
}

impl DomainSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DomainSpec::UnitDisk => Ok(()),
            DomainSpec::Rectangle { width, height } => {
                if width.is_finite() && height.is_finite() && width > 0.0 && height > 0.0 {
                    Ok(())
                } else {
                    Err(LakeError::InvalidDomain(format!(
                        "rectangle sides must be positive and finite, got {width} x {height}"
                    )))
                }
            }
            DomainSpec::Annulus { inner_radius } => {
                if inner_radius > 0.0 && inner_radius < 1.0 {
                    Ok(())
                } else {
                    Err(LakeError::InvalidDomain(format!(
                        "annulus inner radius must lie in (0, 1), got {inner_radius}"
                    )))
                }
            }
        }
    }

    /// Number of islands `m`.
    pub fn island_count(&self) -> usize {
        match self {
            DomainSpec::Annulus { .. } => 1,
            _ => 0,
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            DomainSpec::UnitDisk => std::f64::consts::PI,
            DomainSpec::Rectangle { width, height } => width * height,
            DomainSpec::Annulus { inner_radius: a } => std::f64::consts::PI * (1.0 - a * a),
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            DomainSpec::UnitDisk | DomainSpec::Annulus { .. } => 2.0,
            DomainSpec::Rectangle { width, height } => width.hypot(height),
        }
    }

    /// Membership in the closed domain.
    pub fn contains(&self, p: Vec2) -> bool {
        match *self {
            DomainSpec::UnitDisk => p.norm() <= 1.0 + CONTAINS_SLACK,
            DomainSpec::Rectangle { width, height } => {
                p.x.abs() <= 0.5 * width + CONTAINS_SLACK && p.y.abs() <= 0.5 * height + CONTAINS_SLACK
            }
            DomainSpec::Annulus { inner_radius } => {
                let r = p.norm();
                r <= 1.0 + CONTAINS_SLACK && r >= inner_radius - CONTAINS_SLACK
            }
        }
    }

    /// Unsigned distance to the boundary for a point of the closed domain,
    /// clamped at zero for points within round-off of the boundary.
    pub fn distance_to_boundary(&self, p: Vec2) -> Result<f64> {
        if !self.contains(p) {
            return Err(LakeError::OutsideDomain { x: p.x, y: p.y });
        }
        let d = match *self {
            DomainSpec::UnitDisk => 1.0 - p.norm(),
            DomainSpec::Rectangle { width, height } => (0.5 * width - p.x.abs()).min(0.5 * height - p.y.abs()),
            DomainSpec::Annulus { inner_radius } => {
                let r = p.norm();
                (r - inner_radius).min(1.0 - r)
            }
        };
        Ok(d.max(0.0))
    }

    /// Nearest point of the closed domain.
    pub fn project(&self, p: Vec2) -> Vec2 {
        match *self {
            DomainSpec::UnitDisk => {
                let r = p.norm();
                if r > 1.0 {
                    p / r
                } else {
                    p
                }
            }
            DomainSpec::Rectangle { width, height } => {
                Vec2::new(p.x.clamp(-0.5 * width, 0.5 * width), p.y.clamp(-0.5 * height, 0.5 * height))
            }
            DomainSpec::Annulus { inner_radius } => {
                let r = p.norm();
                if r > 1.0 {
                    p / r
                } else if r < inner_radius {
                    if r == 0.0 {
                        Vec2::new(inner_radius, 0.0)
                    } else {
                        p * (inner_radius / r)
                    }
                } else {
                    p
                }
            }
        }
    }
}

/// Free-function form of [`DomainSpec::distance_to_boundary`].
pub fn distance_to_boundary(spec: &DomainSpec, point: Vec2) -> Result<f64> {
    spec.distance_to_boundary(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distance_examples() {
        let disk = DomainSpec::UnitDisk;
        assert_eq!(disk.distance_to_boundary(Vec2::ZERO).unwrap(), 1.0);
        assert!((disk.distance_to_boundary(Vec2::new(0.75, 0.0)).unwrap() - 0.25).abs() < 1e-15);
        let ann = DomainSpec::Annulus { inner_radius: 0.3 };
        assert!((ann.distance_to_boundary(Vec2::new(0.5, 0.0)).unwrap() - 0.2).abs() < 1e-15);
        let rect = DomainSpec::Rectangle { width: 2.0, height: 1.0 };
        assert!((rect.distance_to_boundary(Vec2::new(0.8, 0.1)).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn outside_points_are_rejected() {
        assert!(DomainSpec::UnitDisk.distance_to_boundary(Vec2::new(1.1, 0.0)).is_err());
        let ann = DomainSpec::Annulus { inner_radius: 0.3 };
        assert!(ann.distance_to_boundary(Vec2::new(0.1, 0.0)).is_err());
    }

    #[test]
    fn annulus_radius_is_validated() {
        assert!(DomainSpec::Annulus { inner_radius: 1.2 }.validate().is_err());
        assert!(DomainSpec::Annulus { inner_radius: 0.0 }.validate().is_err());
        assert!(DomainSpec::Annulus { inner_radius: 0.5 }.validate().is_ok());
    }

    fn domains() -> impl Strategy<Value = DomainSpec> {
        prop_oneof![
            Just(DomainSpec::UnitDisk),
            (0.5f64..3.0, 0.5f64..3.0).prop_map(|(w, h)| DomainSpec::Rectangle { width: w, height: h }),
            (0.1f64..0.8).prop_map(|a| DomainSpec::Annulus { inner_radius: a }),
        ]
    }

    proptest! {
        #[test]
        fn distance_is_one_lipschitz(
            d in domains(),
            a in (-1.5f64..1.5, -1.5f64..1.5),
            b in (-1.5f64..1.5, -1.5f64..1.5),
        ) {
            let p = d.project(Vec2::new(a.0, a.1));
            let q = d.project(Vec2::new(b.0, b.1));
            let dp = d.distance_to_boundary(p).unwrap();
            let dq = d.distance_to_boundary(q).unwrap();
            prop_assert!((dp - dq).abs() <= p.dist(q) + 1e-12);
        }

        #[test]
        fn projection_is_idempotent(d in domains(), a in (-2.0f64..2.0, -2.0f64..2.0)) {
            let p = d.project(Vec2::new(a.0, a.1));
            prop_assert!(d.contains(p));
            let q = d.project(p);
            prop_assert!(p.dist(q) < 1e-14);
        }
    }
}

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::blob::{cells_across, Profile};
use crate::error::{LakeError, Result};
use crate::geometry::{build_grid, Bathymetry, DomainSpec, MIN_RESOLUTION};
use crate::vec2::Vec2;

/// Fewest grid cells across the blob diameter accepted by a run.
pub const MIN_CELLS_ACROSS: f64 = 6.0;

/// The initial vortex `ω₀ = (Γ/ε²) f((x − q₀)/ε)`, normalized on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlobSpec {
    #[serde(default)]
    pub profile: Profile,
    pub center: Vec2,
    pub epsilon: f64,
    pub circulation: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IslandSpec {
    /// `Γ₁, …, Γ_m`, one per island of the domain.
    #[serde(default)]
    pub circulations: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSpec {
    /// Grid cells per unit length.
    pub resolution: usize,
    /// Courant number bound on `dt · max|u| / h`.
    pub cfl: f64,
    /// Fraction of the initial CFL step actually used.
    pub dt_safety: f64,
    /// Duration in rescaled time `s = E t / Γ`.
    pub s_end: f64,
    pub record_interval: usize,
    /// Characteristic-tracing substeps per time step.
    pub substeps: usize,
    /// Clip interpolated values to the local stencil range.
    pub monotone: bool,
    /// Width of the boundary band handled by the truncated center.
    pub cutoff_delta: f64,
    /// Recorded for provenance; runs have no stochastic component.
    pub seed: u64,
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec {
            resolution: 128,
            cfl: 0.5,
            dt_safety: 0.8,
            s_end: 1.0,
            record_interval: 10,
            substeps: 3,
            monotone: true,
            cutoff_delta: 0.2,
            seed: 0,
        }
    }
}

fn default_name() -> String {
    "scenario".into()
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    pub domain: DomainSpec,
    pub bathymetry: Bathymetry,
    pub blob: BlobSpec,
    #[serde(default)]
    pub islands: IslandSpec,
    #[serde(default)]
    pub run: RunSpec,
}

fn check(ok: bool, field: &str, message: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(LakeError::config(field, message()))
    }
}

impl Scenario {
    /// Parse and validate a TOML scenario.
    pub fn from_toml_str(text: &str) -> Result<Scenario> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| LakeError::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Canonical TOML form, which parses back to the same scenario.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    /// SHA-256 of the canonical form, in hex.
    pub fn config_hash(&self) -> String {
        Sha256::digest(self.to_toml_string().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Grid resolution `[n₁, n₂]` for `n` cells per unit length: a uniform
    /// spacing `1/n` on rectangles, and radial spacing `1/n` with `2n`
    /// angles on polar grids.
    pub fn grid_resolution(&self, n: usize) -> [usize; 2] {
        let cells = |len: f64| ((n as f64 * len).round() as usize).max(MIN_RESOLUTION);
        match self.domain {
            DomainSpec::Rectangle { width, height } => [cells(width), cells(height)],
            DomainSpec::UnitDisk => [n.max(MIN_RESOLUTION), 2 * n.max(MIN_RESOLUTION)],
            DomainSpec::Annulus { inner_radius } => [cells(1.0 - inner_radius), 2 * n.max(MIN_RESOLUTION)],
        }
    }

    /// Check every invariant, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        self.domain.validate().map_err(|e| LakeError::config("domain", e.to_string()))?;
        let blob = &self.blob;
        check(blob.epsilon.is_finite() && blob.epsilon > 0.0 && blob.epsilon < 0.5, "blob.epsilon", || {
            format!("must lie in (0, 0.5), got {}", blob.epsilon)
        })?;
        check(blob.circulation.is_finite() && blob.circulation != 0.0, "blob.circulation", || {
            format!("must be finite and nonzero, got {}", blob.circulation)
        })?;
        check(blob.center.is_finite(), "blob.center", || "must be finite".into())?;
        let d = self.domain.distance_to_boundary(blob.center).unwrap_or(0.0);
        let support = blob.epsilon * blob.profile.support_radius();
        check(self.domain.contains(blob.center) && d > support, "blob.center", || {
            format!(
                "the blob support B(q0, {support}) must lie inside the domain, but q0 = ({}, {}) is {d} from the boundary",
                blob.center.x, blob.center.y
            )
        })?;
        let m = self.domain.island_count();
        check(self.islands.circulations.len() == m, "islands.circulations", || {
            format!("domain has {m} islands, got {} circulations", self.islands.circulations.len())
        })?;
        check(self.islands.circulations.iter().all(|g| g.is_finite()), "islands.circulations", || {
            "must be finite".into()
        })?;
        self.validate_bathymetry()?;
        let run = &self.run;
        check(run.resolution >= MIN_RESOLUTION, "run.resolution", || {
            format!("must be at least {MIN_RESOLUTION}, got {}", run.resolution)
        })?;
        let cells = cells_across(self, run.resolution);
        check(cells >= MIN_CELLS_ACROSS, "run.resolution", || {
            format!("blob spans {cells:.1} cells, at least {MIN_CELLS_ACROSS} are needed")
        })?;
        check(run.cfl > 0.0 && run.cfl <= 1.0, "run.cfl", || format!("must lie in (0, 1], got {}", run.cfl))?;
        check(run.dt_safety > 0.0 && run.dt_safety <= 1.0, "run.dt_safety", || {
            format!("must lie in (0, 1], got {}", run.dt_safety)
        })?;
        check(run.s_end.is_finite() && run.s_end > 0.0, "run.s_end", || {
            format!("must be positive, got {}", run.s_end)
        })?;
        check(run.record_interval >= 1, "run.record_interval", || "must be at least 1".into())?;
        check(run.substeps >= 1, "run.substeps", || "must be at least 1".into())?;
        check(run.cutoff_delta > 0.0 && run.cutoff_delta.is_finite(), "run.cutoff_delta", || {
            format!("must be positive, got {}", run.cutoff_delta)
        })?;
        Ok(())
    }

    fn validate_bathymetry(&self) -> Result<()> {
        let bad = |m: String| Err(LakeError::config("bathymetry", m));
        match &self.bathymetry {
            Bathymetry::Constant { depth } if !(*depth > 0.0 && depth.is_finite()) => {
                return bad(format!("depth must be positive, got {depth}"));
            }
            Bathymetry::Radial { coefficients } if coefficients.is_empty() => {
                return bad("radial profile needs at least one coefficient".into());
            }
            Bathymetry::Bump { width, .. } if !(*width > 0.0) => {
                return bad(format!("bump width must be positive, got {width}"));
            }
            _ => {}
        }
        let probe = build_grid(self.domain, self.grid_resolution(64))?;
        self.bathymetry.check_positive(&probe).map_err(|e| LakeError::config("bathymetry", e.to_string()))
    }
}

/// Read and validate a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|source| LakeError::Io { path: path.to_path_buf(), source })?;
    Scenario::from_toml_str(&text).map_err(|e| match e {
        LakeError::Parse(m) => LakeError::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

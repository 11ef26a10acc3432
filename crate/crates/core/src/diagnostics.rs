//! Integral functionals of a flow snapshot and the concentration
//! quantities built on them.

use std::f64::consts::PI;
use std::io::{Read, Write};

use crate::elliptic::IslandBasis;
use crate::error::{LakeError, Result};
use crate::field::{ScalarField, VelocityField};
use crate::geometry::Bathymetry;
use crate::transport::{LakeModel, LakeState};
use crate::vec2::Vec2;
use crate::velocity::max_boundary_flux;

/// Multiples of `ρ` at which the mass outside a ball is recorded.
pub const MASS_RADII: [f64; 4] = [2.0, 4.0, 8.0, 16.0];

/// Column order of the records file.
pub const CSV_COLUMNS: [&str; 15] = [
    "t",
    "s",
    "Gamma",
    "Omega",
    "E",
    "rho",
    "lorentz",
    "q_x",
    "q_y",
    "mass_r2",
    "mass_r4",
    "mass_r8",
    "mass_r16",
    "confinement",
    "boundary_flux",
];

/// Relative fraction of vorticity within `δ` of the boundary above which a
/// run switches to the truncated center.
pub const BAND_MASS_THRESHOLD: f64 = 1e-6;

/// `Γ = ∫ω`.
pub fn circulation(omega: &ScalarField) -> f64 {
    omega.integral()
}

/// `Ω = ∫ω b`.
pub fn total_vorticity(omega: &ScalarField, bathymetry: &Bathymetry) -> f64 {
    let grid = omega.grid();
    grid.points().iter().zip(grid.measures()).zip(omega.values()).map(|((p, m), w)| m * w * bathymetry.depth(*p)).sum()
}

/// `∫|ω|`.
pub fn l1_norm(omega: &ScalarField) -> f64 {
    omega.grid().measures().iter().zip(omega.values()).map(|(m, w)| m * w.abs()).sum()
}

/// Kinetic energy `½∫|u|² b` by quadrature.
pub fn energy(u: &VelocityField, bathymetry: &Bathymetry) -> f64 {
    let grid = u.grid();
    0.5 * grid
        .points()
        .iter()
        .zip(grid.measures())
        .zip(u.values())
        .map(|((p, m), v)| m * v.norm_sq() * bathymetry.depth(*p))
        .sum::<f64>()
}

/// Kinetic energy from the vorticity side,
/// `½∫ω𝒦ᵦ[ω] + Σ Γᵢ∫ωψᵢ + ½ Σ ΓᵢΓⱼ ∫∇ψᵢ·∇ψⱼ/b`.
pub fn energy_vortex(
    omega: &ScalarField,
    zero_flux: &ScalarField,
    basis: &IslandBasis,
    circulations: &[f64],
) -> Result<f64> {
    if circulations.len() != basis.len() {
        return Err(LakeError::LengthMismatch("circulations", circulations.len(), basis.len()));
    }
    let grid = omega.grid();
    let pair =
        |f: &[f64]| -> f64 { grid.measures().iter().zip(omega.values()).zip(f).map(|((m, w), k)| m * w * k).sum() };
    let mut e = 0.5 * pair(zero_flux.values());
    for (i, gi) in circulations.iter().enumerate() {
        e += gi * pair(basis.psi[i].values());
        for (j, gj) in circulations.iter().enumerate() {
            e += 0.5 * gi * gj * basis.d_inverse[i][j];
        }
    }
    Ok(e)
}

/// `ρ = exp(−4πE/(ΓΩ))`.
pub fn typical_scale(energy: f64, gamma: f64, omega_total: f64) -> Result<f64> {
    let go = gamma * omega_total;
    if !(go > 0.0) {
        return Err(LakeError::Degenerate { quantity: "Gamma * Omega", value: go });
    }
    Ok((-4.0 * PI * energy / go).exp())
}

/// `∫₀^r s ln(1/s)₊ ds`.
fn log_moment(r: f64) -> f64 {
    if r >= 1.0 {
        0.25
    } else if r <= 0.0 {
        0.0
    } else {
        0.5 * r * r * (-r.ln() + 0.5)
    }
}

/// Lorentz norm of the piecewise-constant function taking value `values[i]`
/// on a set of measure `measures[i]`, after rescaling space by `scale`
/// (level-set measures are divided by `scale²`).
pub fn lorentz_norm_atoms(values: &[f64], measures: &[f64], scale: f64) -> f64 {
    let mut atoms: Vec<(f64, f64)> =
        values.iter().zip(measures).map(|(v, m)| (v.abs(), *m)).filter(|(v, m)| *v > 0.0 && *m > 0.0).collect();
    atoms.sort_by(|a, b| b.0.total_cmp(&a.0));
    let area = PI * scale * scale;
    let mut mu = 0.0;
    let mut total = 0.0;
    for (c, (v, m)) in atoms.iter().enumerate() {
        mu += m;
        let next = atoms.get(c + 1).map_or(0.0, |a| a.0);
        total += (v - next) * log_moment((mu / area).sqrt());
    }
    2.0 * PI * total
}

/// Lorentz norm `sup ∫ ln(1/|x|)₊ ω'` over equimeasurable rearrangements.
pub fn lorentz_norm(omega: &ScalarField) -> f64 {
    lorentz_norm_atoms(omega.values(), omega.grid().measures(), 1.0)
}

/// Lorentz norm of `x ↦ ω(ρx)`.
pub fn lorentz_norm_rescaled(omega: &ScalarField, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(LakeError::Degenerate { quantity: "rho", value: rho });
    }
    Ok(lorentz_norm_atoms(omega.values(), omega.grid().measures(), rho))
}

fn weighted_center(omega: &ScalarField, weight: impl Fn(Vec2) -> f64) -> Result<Vec2> {
    let grid = omega.grid();
    let gamma = circulation(omega);
    if gamma == 0.0 {
        return Err(LakeError::Degenerate { quantity: "circulation", value: gamma });
    }
    let mut q = Vec2::ZERO;
    for ((p, m), w) in grid.points().iter().zip(grid.measures()).zip(omega.values()) {
        q += (m * w * weight(*p)) * *p;
    }
    Ok(q / gamma)
}

/// `q = Γ⁻¹∫xω`.
pub fn center_of_vorticity(omega: &ScalarField) -> Result<Vec2> {
    weighted_center(omega, |_| 1.0)
}

/// Smooth cutoff that vanishes within `δ/3` of the boundary and equals one
/// beyond `2δ/3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub delta: f64,
}

impl Default for Cutoff {
    fn default() -> Self {
        Cutoff { delta: 0.2 }
    }
}

impl Cutoff {
    /// Value at distance `d` from the boundary.
    pub fn eval(&self, d: f64) -> f64 {
        let t = ((d - self.delta / 3.0) / (self.delta / 3.0)).clamp(0.0, 1.0);
        t * t * t * (10.0 + t * (6.0 * t - 15.0))
    }
}

/// `q̃ = Γ⁻¹∫ηxω`.
pub fn truncated_center(omega: &ScalarField, eta: &Cutoff) -> Result<Vec2> {
    let domain = omega.grid().domain();
    weighted_center(omega, |p| eta.eval(domain.distance_to_boundary(p).unwrap_or(0.0)))
}

/// Fraction of `∫|ω|` carried by nodes closer than `δ` to the boundary.
pub fn band_mass(omega: &ScalarField, delta: f64) -> f64 {
    let grid = omega.grid();
    let domain = grid.domain();
    let total = l1_norm(omega);
    if total == 0.0 {
        return 0.0;
    }
    let near: f64 = grid
        .points()
        .iter()
        .zip(grid.measures())
        .zip(omega.values())
        .filter(|((p, _), _)| domain.distance_to_boundary(**p).unwrap_or(0.0) < delta)
        .map(|((_, m), w)| m * w.abs())
        .sum();
    near / total
}

/// `∫_{D∖B(center, radius)} ω`.
pub fn mass_outside(omega: &ScalarField, center: Vec2, radius: f64) -> f64 {
    let grid = omega.grid();
    grid.points()
        .iter()
        .zip(grid.measures())
        .zip(omega.values())
        .filter(|((p, _), _)| p.dist(center) > radius)
        .map(|((_, m), w)| m * w)
        .sum()
}

/// `∫ω ln(1 + diam D/(ρ + d(x, ∂D)))`.
pub fn confinement_functional(omega: &ScalarField, rho: f64) -> f64 {
    let grid = omega.grid();
    let domain = grid.domain();
    let diam = domain.diameter();
    grid.points()
        .iter()
        .zip(grid.measures())
        .zip(omega.values())
        .filter(|(_, w)| **w != 0.0)
        .map(|((p, m), w)| {
            let d = domain.distance_to_boundary(*p).unwrap_or(0.0);
            m * w * (diam / (rho + d)).ln_1p()
        })
        .sum()
}

/// `‖Γ‖ = |Γ| + Σ|Γᵢ|`.
pub fn gamma_norm(gamma: f64, circulations: &[f64]) -> f64 {
    gamma.abs() + circulations.iter().map(|g| g.abs()).sum::<f64>()
}

/// Smallest `C` with
/// `max 𝒦ᵦ[ω] ≤ (1/2π) ln(1/ρ) Ω + (sup b) ρ² ‖ω(ρ·)‖/(2π) + CΓ`.
pub fn stream_bound_constant(
    max_stream: f64,
    rho: f64,
    omega_total: f64,
    sup_depth: f64,
    lorentz_rescaled: f64,
    gamma: f64,
) -> Result<f64> {
    if gamma == 0.0 {
        return Err(LakeError::Degenerate { quantity: "circulation", value: gamma });
    }
    let main = (1.0 / rho).ln() * omega_total / (2.0 * PI) + sup_depth * rho * rho * lorentz_rescaled / (2.0 * PI);
    Ok((max_stream - main) / gamma)
}

/// Every functional of one state, before the run decides which center to
/// report.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub gamma: f64,
    pub omega_total: f64,
    /// Vorticity-side energy.
    pub energy: f64,
    /// `½∫|u|²b` by quadrature.
    pub energy_quadrature: f64,
    pub rho: f64,
    pub lorentz: f64,
    pub lorentz_rescaled: f64,
    pub max_stream: f64,
    pub center_plain: Vec2,
    pub center_truncated: Vec2,
    pub band_mass: f64,
    pub mass_plain: [f64; 4],
    pub mass_truncated: [f64; 4],
    pub confinement: f64,
    pub boundary_flux: f64,
    pub min_omega: f64,
    pub clamp_distance: f64,
}

/// Evaluate every functional on `state`.
pub fn measure(model: &LakeModel, state: &LakeState, eta: &Cutoff) -> Result<Snapshot> {
    let omega = &state.omega;
    let b = model.bathymetry();
    let gamma = circulation(omega);
    let omega_total = total_vorticity(omega, b);
    let energy = energy_vortex(omega, &state.zero_flux, model.basis(), &state.circulations)?;
    let rho = typical_scale(energy, gamma, omega_total)?;
    let center_plain = center_of_vorticity(omega)?;
    let center_truncated = truncated_center(omega, eta)?;
    let masses = |c: Vec2| MASS_RADII.map(|r| mass_outside(omega, c, r * rho));
    Ok(Snapshot {
        t: state.time,
        gamma,
        omega_total,
        energy,
        energy_quadrature: self::energy(&state.velocity, b),
        rho,
        lorentz: lorentz_norm(omega),
        lorentz_rescaled: lorentz_norm_rescaled(omega, rho)?,
        max_stream: state.zero_flux.values().iter().copied().fold(f64::NEG_INFINITY, f64::max),
        center_plain,
        center_truncated,
        band_mass: band_mass(omega, eta.delta),
        mass_plain: masses(center_plain),
        mass_truncated: masses(center_truncated),
        confinement: confinement_functional(omega, rho),
        boundary_flux: max_boundary_flux(&state.velocity),
        min_omega: omega.values().iter().copied().fold(f64::INFINITY, f64::min),
        clamp_distance: state.clamp_distance,
    })
}

impl Snapshot {
    /// Record with rescaled time `s = E₀t/Γ₀` and the chosen center.
    pub fn record(&self, energy0: f64, gamma0: f64, truncated: bool) -> DiagnosticsRecord {
        let (center, mass_outside) =
            if truncated { (self.center_truncated, self.mass_truncated) } else { (self.center_plain, self.mass_plain) };
        DiagnosticsRecord {
            t: self.t,
            s: energy0 * self.t / gamma0,
            gamma: self.gamma,
            omega: self.omega_total,
            energy: self.energy,
            rho: self.rho,
            lorentz: self.lorentz,
            center,
            mass_outside,
            confinement: self.confinement,
            boundary_flux: self.boundary_flux,
        }
    }
}

/// Whether any snapshot of a run has vorticity within `δ` of the boundary.
pub fn needs_truncated_center(snapshots: &[Snapshot]) -> bool {
    snapshots.iter().any(|s| s.band_mass > BAND_MASS_THRESHOLD)
}

/// One row of the records file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub s: f64,
    pub gamma: f64,
    pub omega: f64,
    pub energy: f64,
    pub rho: f64,
    pub lorentz: f64,
    pub center: Vec2,
    /// Mass outside `B(center, Rρ)` for `R` in [`MASS_RADII`].
    pub mass_outside: [f64; 4],
    pub confinement: f64,
    pub boundary_flux: f64,
}

impl DiagnosticsRecord {
    pub fn to_row(&self) -> [f64; 15] {
        let m = self.mass_outside;
        [
            self.t,
            self.s,
            self.gamma,
            self.omega,
            self.energy,
            self.rho,
            self.lorentz,
            self.center.x,
            self.center.y,
            m[0],
            m[1],
            m[2],
            m[3],
            self.confinement,
            self.boundary_flux,
        ]
    }

    pub fn from_row(r: &[f64; 15]) -> Self {
        DiagnosticsRecord {
            t: r[0],
            s: r[1],
            gamma: r[2],
            omega: r[3],
            energy: r[4],
            rho: r[5],
            lorentz: r[6],
            center: Vec2::new(r[7], r[8]),
            mass_outside: [r[9], r[10], r[11], r[12]],
            confinement: r[13],
            boundary_flux: r[14],
        }
    }

    /// `ρ` recomputed from the stored `E`, `Γ` and `Ω` agrees with the
    /// stored value.
    pub fn scale_is_consistent(&self) -> bool {
        typical_scale(self.energy, self.gamma, self.omega).is_ok_and(|r| r == self.rho)
    }

    /// `Ω ≥ (inf b) Γ`, up to rounding of the two quadratures.
    pub fn vorticity_bound_holds(&self, inf_depth: f64) -> bool {
        self.omega >= inf_depth * self.gamma - 1e-12 * self.omega.abs()
    }
}

/// Write records with the fixed header.
pub fn write_records(out: impl Write, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| LakeError::Records(e.to_string());
    w.write_record(CSV_COLUMNS).map_err(err)?;
    for r in records {
        w.write_record(r.to_row().iter().map(|v| v.to_string())).map_err(err)?;
    }
    w.flush().map_err(|e| LakeError::Records(e.to_string()))
}

/// Parse a records file, checking the header.
pub fn read_records(input: impl Read) -> Result<Vec<DiagnosticsRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(|e| LakeError::Records(e.to_string()))?;
    if headers.iter().ne(CSV_COLUMNS) {
        return Err(LakeError::Records(format!(
            "header is `{}`, expected `{}`",
            headers.iter().collect::<Vec<_>>().join(","),
            CSV_COLUMNS.join(",")
        )));
    }
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| LakeError::Records(e.to_string()))?;
        let mut row = [0.0; 15];
        for (k, (cell, name)) in rec.iter().zip(CSV_COLUMNS).enumerate() {
            row[k] = cell.trim().parse().map_err(|_| {
                LakeError::Records(format!("row {}: column {name}: `{cell}` is not a number", line + 1))
            })?;
        }
        if rec.len() != 15 {
            return Err(LakeError::Records(format!("row {}: {} columns, expected 15", line + 1, rec.len())));
        }
        out.push(DiagnosticsRecord::from_row(&row));
    }
    Ok(out)
}

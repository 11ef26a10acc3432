//! Oracles shared by the module tests and the acceptance target.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use lakevortex::diagnostics::{energy, energy_vortex};
use lakevortex::elliptic::{island_basis, EllipticSolver};
use lakevortex::geometry::{build_grid, Bathymetry, DomainSpec, Grid};
use lakevortex::transport::{max_stable_dt, trace_feet, AdvectOptions, LakeModel};
use lakevortex::{ScalarField, Vec2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Value, gradient and Laplacian of a closed-form function at one point.
#[derive(Clone, Copy)]
pub struct Jet {
    pub v: f64,
    pub g: Vec2,
    pub lap: f64,
}

impl Jet {
    pub fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            g: self.g * o.v + o.g * self.v,
            lap: self.lap * o.v + o.lap * self.v + 2.0 * self.g.dot(o.g),
        }
    }
}

/// Slope of the affine depth: `1 + x₂` vanishes at the bottom of the unit
/// circle, so curved domains use `1 + x₂/2`.
pub fn slope(domain: DomainSpec) -> f64 {
    match domain {
        DomainSpec::Rectangle { .. } => 1.0,
        _ => 0.5,
    }
}

/// Depth oracle written out independently of the library's closed forms.
pub fn depth_jet(domain: DomainSpec, kind: usize, p: Vec2) -> (f64, Vec2) {
    match kind {
        0 => (1.0, Vec2::ZERO),
        1 => (1.0 + slope(domain) * p.y, Vec2::new(0.0, slope(domain))),
        _ => (1.0 + p.norm_sq(), 2.0 * p),
    }
}

/// `b ∈ {1, 1 + x₂, 1 + r²}` indexed by `kind`.
pub fn depth_family(domain: DomainSpec, kind: usize) -> Bathymetry {
    match kind {
        0 => Bathymetry::Constant { depth: 1.0 },
        1 => Bathymetry::Affine { c0: 1.0, slope: Vec2::new(0.0, slope(domain)) },
        _ => Bathymetry::Radial { coefficients: vec![1.0, 1.0] },
    }
}

/// Smooth exact solution vanishing on the whole boundary of `domain`.
pub fn exact(domain: DomainSpec, p: Vec2) -> Jet {
    let (x, y) = (p.x, p.y);
    let tilt = Jet { v: 1.0 + 0.3 * x - 0.2 * y, g: Vec2::new(0.3, -0.2), lap: 0.0 };
    let r2 = Jet { v: x * x + y * y, g: Vec2::new(2.0 * x, 2.0 * y), lap: 4.0 };
    let shell = match domain {
        DomainSpec::UnitDisk => Jet { v: 1.0 - r2.v, g: -r2.g, lap: -4.0 },
        DomainSpec::Annulus { inner_radius: a } => {
            let outer = Jet { v: 1.0 - r2.v, g: -r2.g, lap: -4.0 };
            let inner = Jet { v: r2.v - a * a, g: r2.g, lap: 4.0 };
            outer.mul(inner)
        }
        DomainSpec::Rectangle { width, height } => {
            let (kx, ky) = (PI / width, PI / height);
            let cx = Jet { v: (kx * x).cos(), g: Vec2::new(-kx * (kx * x).sin(), 0.0), lap: -kx * kx * (kx * x).cos() };
            let cy = Jet { v: (ky * y).cos(), g: Vec2::new(0.0, -ky * (ky * y).sin()), lap: -ky * ky * (ky * y).cos() };
            cx.mul(cy)
        }
    };
    shell.mul(tilt)
}

/// `−∇·(b⁻¹∇ψ) = −Δψ/b + ∇b·∇ψ/b²`.
pub fn source(domain: DomainSpec, kind: usize, p: Vec2) -> f64 {
    let j = exact(domain, p);
    let (b, gb) = depth_jet(domain, kind, p);
    -j.lap / b + gb.dot(j.g) / (b * b)
}

pub fn grid_for(domain: DomainSpec, n: usize) -> Arc<Grid> {
    let res = match domain {
        DomainSpec::Rectangle { .. } => [n, n / 2],
        _ => [n, 2 * n],
    };
    Arc::new(build_grid(domain, res).unwrap())
}

/// Max node error of the Dirichlet solve against [`exact`].
pub fn manufactured_error(domain: DomainSpec, kind: usize, n: usize) -> f64 {
    let grid = grid_for(domain, n);
    let solver = EllipticSolver::new(grid.clone(), &depth_family(domain, kind)).unwrap();
    let omega = ScalarField::from_fn(grid.clone(), |p| source(domain, kind, p));
    let psi = solver.solve_dirichlet(&omega).unwrap();
    grid.points().iter().zip(psi.values()).map(|(p, v)| (v - exact(domain, *p).v).abs()).fold(0.0, f64::max)
}

/// Max node error of `ψ` for `−Δψ = 1` on the flat disk against `(1 − |x|²)/4`.
pub fn paraboloid_error(n: usize) -> f64 {
    let grid = grid_for(DomainSpec::UnitDisk, n);
    let solver = EllipticSolver::new(grid.clone(), &Bathymetry::Constant { depth: 1.0 }).unwrap();
    let psi = solver.solve_dirichlet(&ScalarField::from_fn(grid.clone(), |_| 1.0)).unwrap();
    grid.points().iter().zip(psi.values()).map(|(p, v)| (v - 0.25 * (1.0 - p.norm_sq())).abs()).fold(0.0, f64::max)
}

/// Max node error of `φ₁` on the flat annulus against `ln(1/r)/ln(1/a)`.
pub fn annulus_phi_error(n: usize) -> f64 {
    let a: f64 = 0.3;
    let grid = grid_for(DomainSpec::Annulus { inner_radius: a }, n);
    let solver = EllipticSolver::new(grid.clone(), &Bathymetry::Constant { depth: 1.0 }).unwrap();
    let basis = island_basis(&solver).unwrap();
    grid.points()
        .iter()
        .zip(basis.phi[0].values())
        .map(|(p, v)| (v - (1.0 / p.norm()).ln() / (1.0 / a).ln()).abs())
        .fold(0.0, f64::max)
}

/// Three Gaussian bumps of random sign and width away from the boundary.
pub fn random_bumps(rng: &mut ChaCha8Rng, domain: DomainSpec) -> Vec<(Vec2, f64, f64)> {
    (0..3)
        .map(|_| {
            let c = loop {
                let c = Vec2::polar(0.65 * rng.random::<f64>().sqrt(), rng.random_range(0.0..2.0 * PI));
                if domain.distance_to_boundary(c).is_ok_and(|d| d > 0.1) {
                    break c;
                }
            };
            (c, rng.random_range(0.15..0.35), rng.random_range(-1.0..2.0))
        })
        .collect()
}

pub fn bumps_field(grid: &Arc<Grid>, bumps: &[(Vec2, f64, f64)]) -> ScalarField {
    ScalarField::from_fn(grid.clone(), |p| {
        bumps.iter().map(|(c, s, a)| a * (-(p - *c).norm_sq() / (2.0 * s * s)).exp()).sum()
    })
}

/// Relative gap between `½∫|u|²b` and the vorticity-side energy, and the latter.
pub fn relative_energy_gap(model: &LakeModel, omega: ScalarField, circulations: Vec<f64>) -> (f64, f64) {
    let state = model.state(0.0, omega, circulations).unwrap();
    let quad = energy(&state.velocity, model.bathymetry());
    let vort = energy_vortex(&state.omega, &state.zero_flux, model.basis(), &state.circulations).unwrap();
    ((quad - vort).abs() / vort.abs(), vort)
}

/// Compactly supported bump of radius 0.2 centred at (0.3, 0.1).
pub fn off_center_blob(model: &LakeModel) -> ScalarField {
    let c = Vec2::new(0.3, 0.1);
    ScalarField::from_fn(model.grid().clone(), |p| {
        let z = (p - c).norm_sq() / 0.04;
        if z < 1.0 {
            10.0 * (-1.0 / (1.0 - z)).exp()
        } else {
            0.0
        }
    })
}

/// One step of the blob flow at `[n, 2n]` on the disk with `b = 1 + r²`:
/// relative change of `∫ f b` when `f` is composed with the step's flow map,
/// together with the cell size and the step.
pub fn measure_defect(n: usize) -> (f64, f64, f64) {
    let b = Bathymetry::Radial { coefficients: vec![1.0, 1.0] };
    let test_fn = |p: Vec2| (1.3 * p.x).exp() * (2.0 * p.y).cos();
    let model = LakeModel::new(DomainSpec::UnitDisk, [n, 2 * n], b).unwrap();
    let state = model.state(0.0, off_center_blob(&model), vec![]).unwrap();
    let dt = max_stable_dt(&model, &state, &AdvectOptions::default());
    let feet = trace_feet(&model, &state, dt, 3).unwrap();
    let g = model.grid();
    let weights = g.measures().iter().zip(model.depth()).map(|(m, d)| m * d);
    let (mut moved, mut still) = (0.0, 0.0);
    for ((w, p), q) in weights.zip(g.points()).zip(&feet.points) {
        moved += w * test_fn(*q);
        still += w * test_fn(*p);
    }
    ((moved - still).abs() / still.abs(), 1.0 / n as f64, dt)
}

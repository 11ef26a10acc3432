//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Run with `cargo test -p lakevortex --test acceptance`; pass criterion
//! numbers as arguments (`-- 1 3 10`) to run a subset.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use lakevortex::diagnostics::{lorentz_norm, lorentz_norm_rescaled};
use lakevortex::elliptic::{assemble_stream, island_basis, EllipticSolver};
use lakevortex::geometry::{build_grid, Bathymetry, DomainSpec, Grid};
use lakevortex::kernels::{green_disk, green_half_plane, AnalyticKernel};
use lakevortex::scenarios::{convergence_study, run, RunOutput, Scenario, STATIONARY_CELLS};
use lakevortex::transport::{AnalyticVelocity, FlowMapper, LakeModel};
use lakevortex::{ScalarField, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod support;
use support::{
    annulus_phi_error, bumps_field, grid_for, manufactured_error, measure_defect, paraboloid_error, random_bumps,
    relative_energy_gap,
};

const KERNEL_TOL: f64 = 1e-10;
const MIN_ORDER: f64 = 1.9;
const PARABOLOID_TOL: f64 = 1e-3;
const GRAM_REL_TOL: f64 = 0.01;
const FLUX_TOL: f64 = 1e-3;
const GAMMA_BUDGET: f64 = 1e-3;
const ENERGY_BUDGET: f64 = 1e-2;
/// Largest ratio between the normalized Ω slopes of the two blob sizes.
const OMEGA_SLOPE_SPREAD: f64 = 4.0;
const ENERGY_IDENTITY_TOL: f64 = 1e-3;
const LORENTZ_GOLDEN_TOL: f64 = 1e-3;
const REARRANGEMENT_BUDGET: f64 = 0.05;
const SCALING_FIELDS: usize = 50;
const RADIUS_TOL: f64 = 0.05;
const RICHARDSON_FACTOR: f64 = 2.0;
const RICHARDSON_SPAN: f64 = 0.2;
const ROTATION_TOL: f64 = 1e-6;
const COMPOSITION_TOL: f64 = 1e-5;

/// Criteria expected to fail, with the reason printed next to them.
const KNOWN_GAPS: &[(u8, &str)] = &[(
    4,
    "monotone bicubic transport gains circulation at the blob's edge; the budgets need far finer grids",
)];

const DISK_BUMP: &str = include_str!("../../../scenarios/disk-bump.toml");
const DISK_RADIAL: &str = include_str!("../../../scenarios/disk-radial.toml");
const FLAT_DISK: &str = include_str!("../../../scenarios/flat-disk.toml");
const CHANNEL: &str = include_str!("../../../scenarios/channel-slope.toml");

struct Check {
    label: String,
    pass: bool,
}

fn check(pass: bool, label: impl Into<String>) -> Check {
    Check { label: label.into(), pass }
}

fn scenario(toml: &str) -> Scenario {
    Scenario::from_toml_str(toml).expect("bundled scenario parses")
}

fn with_epsilon(toml: &str, epsilon: f64) -> Scenario {
    let mut s = scenario(toml);
    s.blob.epsilon = epsilon;
    s
}

/// Runs shared between criteria.
#[derive(Default)]
struct Runs {
    bump: Option<RunOutput>,
}

impl Runs {
    fn bump(&mut self) -> &RunOutput {
        self.bump.get_or_insert_with(|| run(&scenario(DISK_BUMP)).expect("disk-bump run"))
    }
}

fn kernel_goldens(_: &mut Runs) -> Vec<Check> {
    let g = green_half_plane(Vec2::new(0.0, 1.0), Vec2::new(0.0, 2.0)).unwrap();
    let d = green_disk(Vec2::new(0.5, 0.0), Vec2::ZERO).unwrap();
    let s = AnalyticKernel::HalfPlane.symmetric_gradient_sum(Vec2::new(0.0, 1.0), Vec2::new(0.0, 2.0)).unwrap();
    let (eg, ed, es) = (
        (g - 9f64.ln() / (4.0 * PI)).abs(),
        (d - 2f64.ln() / (2.0 * PI)).abs(),
        (s.y - 1.0 / (3.0 * PI)).abs(),
    );
    vec![
        check(eg <= KERNEL_TOL, format!("G_half = {g:.10} (err {eg:.1e})")),
        check(ed <= KERNEL_TOL, format!("G_disk = {d:.10} (err {ed:.1e})")),
        check(es <= KERNEL_TOL, format!("sym sum y = {:.10} (err {es:.1e})", s.y)),
        check(s.x == 0.0, format!("sym sum x = {:e}", s.x)),
    ]
}

fn elliptic_convergence(_: &mut Runs) -> Vec<Check> {
    let domains = [
        DomainSpec::UnitDisk,
        DomainSpec::Rectangle { width: 2.0, height: 1.0 },
        DomainSpec::Annulus { inner_radius: 0.3 },
    ];
    let mut worst = (f64::INFINITY, String::new());
    for domain in domains {
        for kind in 0..3 {
            let e: Vec<f64> = [64, 128, 256].iter().map(|&n| manufactured_error(domain, kind, n)).collect();
            for w in e.windows(2) {
                let order = (w[0] / w[1]).log2();
                if order < worst.0 {
                    worst = (order, format!("{domain:?} b#{kind}"));
                }
            }
        }
    }
    let p = paraboloid_error(128);
    vec![
        check(worst.0 >= MIN_ORDER, format!("min order {:.3} ({}) over 9 cases", worst.0, worst.1)),
        check(p < PARABOLOID_TOL, format!("flat disk ω=1 max error {p:.2e}")),
    ]
}

fn island_machinery(_: &mut Runs) -> Vec<Check> {
    let e: Vec<f64> = [32, 64, 128].iter().map(|&n| annulus_phi_error(n)).collect();
    let order = e.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min);

    let a: f64 = 0.3;
    let grid = grid_for(DomainSpec::Annulus { inner_radius: a }, 128);
    let solver = EllipticSolver::new(grid.clone(), &Bathymetry::Constant { depth: 1.0 }).unwrap();
    let basis = island_basis(&solver).unwrap();
    let d11 = 2.0 * PI / (1.0 / a).ln();
    let gram = (basis.d_matrix[0][0] - d11).abs() / d11;
    let zero = ScalarField::zeros(grid.clone());
    let flux = solver.island_flux(&basis.psi[0], &zero, 0).unwrap();
    let ones = ScalarField::from_fn(grid.clone(), |_| 1.0);
    let psi = assemble_stream(&solver, &basis, &ones, &[0.0]).unwrap();
    let zero_flux = solver.island_flux(&psi, &ones, 0).unwrap();
    vec![
        check(
            order >= MIN_ORDER,
            format!("φ₁ min order {order:.3} (errors {:.2e}, {:.2e}, {:.2e})", e[0], e[1], e[2]),
        ),
        check(gram <= GRAM_REL_TOL, format!("D₁₁ = {:.5} vs {d11:.5}", basis.d_matrix[0][0])),
        check((flux - 1.0).abs() < FLUX_TOL, format!("ψ₁ flux {flux:.6}")),
        check(zero_flux.abs() < FLUX_TOL, format!("Γ₁=0 flux {zero_flux:.1e}")),
    ]
}

fn conservation(runs: &mut Runs) -> Vec<Check> {
    let coarse = run(&with_epsilon(DISK_BUMP, 0.1)).expect("ε = 0.1 run");
    let fine = runs.bump();
    let (dg, de) = (fine.gamma_drift(), fine.energy_drift());
    let slopes = [coarse.omega_slope(), fine.omega_slope()];
    let spread = slopes[0].max(slopes[1]) / slopes[0].min(slopes[1]);
    vec![
        check(dg <= GAMMA_BUDGET, format!("|ΔΓ|/|Γ| = {dg:.3e}")),
        check(de <= ENERGY_BUDGET, format!("|ΔE|/E = {de:.3e}")),
        check(
            slopes.iter().all(|s| s.is_finite()) && spread <= OMEGA_SLOPE_SPREAD,
            format!("Ω slope/(|Γ|‖Γ‖) = {:.3e} (ε=0.1), {:.3e} (ε=0.05)", slopes[0], slopes[1]),
        ),
    ]
}

fn energy_identity(_: &mut Runs) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let disk = LakeModel::new(DomainSpec::UnitDisk, [128, 256], Bathymetry::Constant { depth: 1.0 }).unwrap();
    let random = (0..5)
        .map(|_| {
            relative_energy_gap(&disk, bumps_field(disk.grid(), &random_bumps(&mut rng, DomainSpec::UnitDisk)), vec![])
                .0
        })
        .fold(0.0, f64::max);
    let annulus = DomainSpec::Annulus { inner_radius: 0.3 };
    let model = LakeModel::new(annulus, [128, 256], Bathymetry::Constant { depth: 1.0 }).unwrap();
    let (island, _) =
        relative_energy_gap(&model, bumps_field(model.grid(), &random_bumps(&mut rng, annulus)), vec![1.0]);
    vec![
        check(random < ENERGY_IDENTITY_TOL, format!("5 random ω max gap {random:.2e}")),
        check(island < ENERGY_IDENTITY_TOL, format!("annulus Γ₁=1 gap {island:.2e}")),
    ]
}

fn random_field(grid: &Arc<Grid>, rng: &mut ChaCha8Rng) -> ScalarField {
    let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let k = rng.random_range(1.0..6.0);
    ScalarField::from_fn(grid.clone(), |p| c[0] + c[1] * (k * p.x).sin() + c[2] * (k * p.y + c[3]).cos() * p.norm())
}

fn lorentz_suite(runs: &mut Runs) -> Vec<Check> {
    let g = Arc::new(build_grid(DomainSpec::UnitDisk, [129, 258]).unwrap());
    let ball = |r: f64, v: f64| ScalarField::from_fn(g.clone(), |p| if p.norm() <= r { v } else { 0.0 });
    let unit = lorentz_norm(&ball(1.0, 1.0));
    let half = lorentz_norm(&ball(0.5, 2.0));
    let half_exact = 2.0 * PI / 4.0 * (2f64.ln() + 0.5);

    let out = runs.bump();
    let factor = (out.summary.max_depth / out.summary.min_depth).powi(2);
    let l0 = out.records[0].lorentz;
    let peak = out.records.iter().map(|r| r.lorentz).fold(0.0, f64::max);
    let bound = factor * l0 * (1.0 + REARRANGEMENT_BUDGET);

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let coarse = Arc::new(build_grid(DomainSpec::UnitDisk, [32, 64]).unwrap());
    let mut scaling_ok = 0;
    for _ in 0..SCALING_FIELDS {
        let f = random_field(&coarse, &mut rng);
        let sigma = rng.random_range(-2.3f64..2.3).exp();
        let l1: f64 = f.values().iter().zip(coarse.measures()).map(|(v, m)| v.abs() * m).sum();
        let scaled = lorentz_norm_rescaled(&f, sigma).unwrap();
        let limit = (lorentz_norm(&f) + sigma.ln().max(0.0) * l1) / (sigma * sigma);
        scaling_ok += usize::from(scaled <= limit * (1.0 + 1e-12));
    }
    vec![
        check((unit - PI / 2.0).abs() < LORENTZ_GOLDEN_TOL, format!("unit ball {unit:.5}")),
        check((half - half_exact).abs() < LORENTZ_GOLDEN_TOL, format!("2·1_B(½) {half:.5} vs {half_exact:.5}")),
        check(peak <= bound, format!("max ‖ω(t)‖ {peak:.4} ≤ (M/m)²‖ω(0)‖·1.05 = {bound:.4}")),
        check(scaling_ok == SCALING_FIELDS, format!("scaling {scaling_ok}/{SCALING_FIELDS}")),
    ]
}

fn concentration(runs: &mut Runs) -> Vec<Check> {
    let out = runs.bump();
    let monotone = out.records.iter().all(|r| r.mass_outside.windows(2).all(|w| w[1] <= w[0]));
    let s_last = out.records.last().unwrap().s;
    vec![
        check(monotone, format!("mass outside B(q,Rρ) nonincreasing in R over {} records", out.records.len())),
        check(s_last >= 1.0 - 1e-9, format!("records reach s = {s_last:.4}")),
    ]
}

/// Clockwise angle swept by the records about the origin.
fn swept_angle(out: &RunOutput) -> f64 {
    let angles: Vec<f64> = out.records.iter().map(|r| r.center.y.atan2(r.center.x)).collect();
    angles.windows(2).map(|w| (w[1] - w[0] + PI).rem_euclid(2.0 * PI) - PI).sum()
}

fn limit_convergence(_: &mut Runs) -> Vec<Check> {
    let epsilons = [0.1, 0.05, 0.025];
    let study = convergence_study(&scenario(CHANNEL), &epsilons).expect("study");
    let errs: Vec<f64> = study.report.sup_errors.iter().map(|e| e.unwrap_or(f64::NAN)).collect();
    let decreasing = errs.iter().all(|e| e.is_finite()) && errs.windows(2).all(|w| w[1] < w[0]);

    let radial = run(&scenario(DISK_RADIAL)).expect("disk-radial run");
    let r0 = radial.scenario.blob.center.norm();
    let radius = radial.records.iter().map(|r| (r.center.norm() - r0).abs() / r0).fold(0.0, f64::max);
    let swept = swept_angle(&radial);

    let flat = run(&scenario(FLAT_DISK)).expect("flat-disk run");
    let cells = flat.max_wander() / flat.summary.cell_size;
    vec![
        check(decreasing, format!("sup errors {errs:.4?} for ε = {epsilons:?}")),
        check(radius <= RADIUS_TOL, format!("b=1+r²: max ||q|−|q₀||/|q₀| = {radius:.3e}")),
        check(swept < 0.0, format!("b=1+r²: swept angle {swept:.3} rad (limit −1.28)")),
        check(cells <= STATIONARY_CELLS, format!("flat control wander {cells:.2} cells")),
    ]
}

fn richardson(runs: &mut Runs) -> Vec<Check> {
    let out = runs.bump();
    let q0 = out.records[0].center;
    let at = out.records.iter().find(|r| r.s >= RICHARDSON_SPAN).expect("records reach the span");
    let measured = at.center.dist(q0) / (at.t - out.records[0].t).abs();
    let predicted = out.initial.energy / out.initial.gamma.abs()
        * out.scenario.bathymetry.perp_grad_inv(out.scenario.blob.center).norm();
    let ratio = measured / predicted;
    vec![check(
        (1.0 / RICHARDSON_FACTOR..=RICHARDSON_FACTOR).contains(&ratio),
        format!("speed {measured:.4} vs (E/Γ)|∇⊥(1/b)| {predicted:.4}, ratio {ratio:.3}"),
    )]
}

fn swirl(p: Vec2) -> Vec2 {
    let s = 1.0 - p.norm_sq();
    let tilt = 1.0 + 0.3 * p.x;
    (-4.0 * s * tilt * p + Vec2::new(0.3 * s * s, 0.0)).perp()
}

fn flow_map(_: &mut Runs) -> Vec<Check> {
    let rotation = AnalyticVelocity::new(|_, p: Vec2| Vec2::new(-p.y, p.x), 0.01);
    let wide = DomainSpec::Rectangle { width: 4.0, height: 4.0 };
    let q = FlowMapper::new(&rotation, wide).flow_map(0.0, PI / 2.0, &[Vec2::new(1.0, 0.0)]).unwrap().points[0];
    let turn = q.dist(Vec2::new(0.0, 1.0));

    let src = AnalyticVelocity::new(|_, p| swirl(p), 0.01);
    let mapper = FlowMapper::new(&src, DomainSpec::UnitDisk);
    let pts: Vec<Vec2> = (0..40).map(|k| Vec2::polar(0.05 + 0.02 * k as f64, 0.7 * k as f64)).collect();
    let one = mapper.flow_map(0.0, 1.3, &pts).unwrap();
    let mid = mapper.flow_map(0.0, 0.537, &pts).unwrap();
    let two = mapper.flow_map(0.537, 1.3, &mid.points).unwrap();
    let compose = one.points.iter().zip(&two.points).map(|(a, b)| a.dist(*b)).fold(0.0, f64::max);

    let (defect, h, dt) = measure_defect(128);
    let budget = h * h + dt.powi(3);
    vec![
        check(turn <= ROTATION_TOL, format!("quarter turn error {turn:.1e}")),
        check(compose <= COMPOSITION_TOL, format!("composition error {compose:.1e}")),
        check(defect <= budget, format!("∫f∘X b defect {defect:.2e} ≤ h²+dt³ = {budget:.2e}")),
    ]
}

type Criterion = (u8, &'static str, fn(&mut Runs) -> Vec<Check>);

const CRITERIA: &[Criterion] = &[
    (1, "analytic kernel goldens", kernel_goldens),
    (2, "elliptic convergence", elliptic_convergence),
    (3, "island machinery", island_machinery),
    (4, "conservation", conservation),
    (5, "energy identity", energy_identity),
    (6, "Lorentz suite", lorentz_suite),
    (7, "concentration", concentration),
    (8, "convergence to the limit law", limit_convergence),
    (9, "Richardson cross-check", richardson),
    (10, "flow map", flow_map),
];

fn main() -> ExitCode {
    let only: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut runs = Runs::default();
    let mut unexpected = Vec::new();
    for &(id, name, f) in CRITERIA {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let checks = f(&mut runs);
        let pass = checks.iter().all(|c| c.pass);
        let detail: Vec<String> =
            checks.iter().map(|c| if c.pass { c.label.clone() } else { format!("{} [fail]", c.label) }).collect();
        let gap = KNOWN_GAPS.iter().find(|(g, _)| *g == id);
        println!(
            "{} {id:>2} {name}: {} ({:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            detail.join("; "),
            start.elapsed().as_secs_f64()
        );
        match (pass, gap) {
            (false, Some((_, why))) => println!("        known gap: {why}"),
            (false, None) => unexpected.push(id),
            (true, Some(_)) => println!("        listed as a known gap but passed"),
            (true, None) => {}
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}

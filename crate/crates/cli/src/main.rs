use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lakevortex::diagnostics::{read_records, DiagnosticsRecord};
use lakevortex::kernels::selftest;
use lakevortex::scenarios::{convergence_study, emit_run, emit_study, load_scenario, run, RunOutput, Scenario};
use lakevortex::LakeError;

const PASS: u8 = 0;
const FAIL: u8 = 1;
const USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "lakevortex", version, about = "Vortex dynamics in lakes with varying depth")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write records.csv, report.json and config.echo.
    Run {
        config: PathBuf,
        /// Grid cells per unit length, overriding the scenario.
        #[arg(long)]
        resolution: Option<usize>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Overwrite existing output files.
        #[arg(long)]
        force: bool,
    },
    /// Run a scenario for several blob sizes and compare with the limiting law.
    Study {
        config: PathBuf,
        /// Blob sizes, strictly decreasing.
        #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
        epsilons: Vec<f64>,
        /// Base grid cells per unit length; refined per member as needed.
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Check the closed-form kernels against their reference values.
    Kernels {
        #[arg(long)]
        selftest: bool,
    },
    /// Summarize a records file and check its invariants.
    Diag { records: PathBuf },
}

fn code_for(e: &LakeError) -> u8 {
    match e {
        LakeError::Context { source, .. } => code_for(source),
        LakeError::Config { .. }
        | LakeError::Parse(_)
        | LakeError::Exists(_)
        | LakeError::Io { .. }
        | LakeError::Records(_) => USAGE,
        _ => FAIL,
    }
}

/// Load `config`, overriding its resolution. A study refines each member
/// separately, so only a run checks the base blob against the new grid.
fn scenario(config: &Path, resolution: Option<usize>, check_blob: bool) -> Result<Scenario, LakeError> {
    let mut s = load_scenario(config)?;
    if let Some(n) = resolution {
        if n == 0 {
            return Err(LakeError::config("run.resolution", "must be positive"));
        }
        s.run.resolution = n;
        if check_blob {
            s.validate()?;
        }
    }
    Ok(s)
}

fn show(value: Option<f64>) -> String {
    value.map_or("failed".into(), |v| format!("{v:.4e}"))
}

fn summarize(out: &RunOutput) {
    let s = &out.summary;
    println!("scenario      {}", out.scenario.name);
    println!("grid          {:?}, h = {:.4e}", s.grid, s.cell_size);
    println!("steps         {} of dt = {:.4e}, t_end = {:.4e}", s.steps, s.dt, s.t_end);
    println!("E0, Gamma0    {:.6e}, {:.6e}", out.initial.energy, out.initial.gamma);
    println!("gamma drift   {:.4e}", out.gamma_drift());
    println!("energy drift  {:.4e}", out.energy_drift());
    println!("omega slope   {:.4e}", out.omega_slope());
    println!("sup error     {}", show(out.sup_error().ok()));
    println!("clamp         {:.4e}", s.clamp_distance);
    println!("verdict       {:?}", out.verdict());
}

fn cmd_run(config: &Path, resolution: Option<usize>, out: &Path, force: bool) -> Result<u8, LakeError> {
    let s = scenario(config, resolution, true)?;
    let output = run(&s)?;
    let files = emit_run(&output, out, force)?;
    summarize(&output);
    for f in files {
        println!("wrote         {}", f.display());
    }
    Ok(if output.verdict().passed() { PASS } else { FAIL })
}

fn cmd_study(
    config: &Path,
    epsilons: &[f64],
    resolution: Option<usize>,
    out: &Path,
    force: bool,
) -> Result<u8, LakeError> {
    let s = scenario(config, resolution, false)?;
    let study = convergence_study(&s, epsilons)?;
    let files = emit_study(&study, out, force)?;
    let r = &study.report;
    println!(
        "{:>10} {:>6} {:>12} {:>12} {:>12} {:>12}",
        "epsilon", "res", "sup_error", "gamma_drift", "energy_drift", "omega_slope"
    );
    for (k, m) in study.members.iter().enumerate() {
        println!(
            "{:>10} {:>6} {:>12} {:>12} {:>12} {:>12}",
            m.epsilon,
            m.resolution,
            show(r.sup_errors[k]),
            show(r.gamma_drift[k]),
            show(r.energy_drift[k]),
            show(r.omega_slope[k])
        );
        if let Err(e) = &m.output {
            println!("    member failed: {e}");
        }
    }
    println!("verdict {:?}", r.verdict);
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(if r.verdict.passed() { PASS } else { FAIL })
}

fn cmd_kernels(run_selftest: bool) -> Result<u8, LakeError> {
    if !run_selftest {
        eprintln!("nothing to do: pass --selftest");
        return Ok(USAGE);
    }
    let mut ok = true;
    for c in selftest() {
        println!(
            "{} {:<34} {:.12} (expected {:.12}, tol {:.0e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.expected,
            c.tolerance
        );
        ok &= c.pass;
    }
    Ok(if ok { PASS } else { FAIL })
}

/// Invariants every records file satisfies.
fn check_records(records: &[DiagnosticsRecord]) -> Vec<String> {
    let mut problems = Vec::new();
    if records.is_empty() {
        problems.push("no records".to_string());
        return problems;
    }
    for (k, r) in records.iter().enumerate() {
        if !r.scale_is_consistent() {
            problems.push(format!("row {}: rho does not match exp(-4 pi E/(Gamma Omega))", k + 1));
        }
        if r.mass_outside.windows(2).any(|w| w[1] > w[0]) {
            problems.push(format!("row {}: mass outside B(q, R rho) increases with R", k + 1));
        }
    }
    let forward = records.windows(2).all(|w| w[1].t > w[0].t);
    let backward = records.windows(2).all(|w| w[1].t < w[0].t);
    if !(forward || backward) {
        problems.push("t is not monotone".to_string());
    }
    problems
}

fn cmd_diag(path: &Path) -> Result<u8, LakeError> {
    let file = File::open(path).map_err(|source| LakeError::Io { path: path.to_path_buf(), source })?;
    let records = read_records(file)?;
    let problems = check_records(&records);
    if let (Some(first), Some(last)) = (records.first(), records.last()) {
        let rel = |f: fn(&DiagnosticsRecord) -> f64| {
            records.iter().map(|r| ((f(r) - f(first)) / f(first)).abs()).fold(0.0, f64::max)
        };
        let wander = records.iter().map(|r| r.center.dist(first.center)).fold(0.0, f64::max);
        println!("records       {}", records.len());
        println!("t             {:.6e} .. {:.6e}", first.t, last.t);
        println!("s             {:.6e} .. {:.6e}", first.s, last.s);
        println!("gamma drift   {:.4e}", rel(|r| r.gamma));
        println!("energy drift  {:.4e}", rel(|r| r.energy));
        println!("omega drift   {:.4e}", rel(|r| r.omega));
        println!(
            "center        ({:.6}, {:.6}) -> ({:.6}, {:.6}), max wander {:.4e}",
            first.center.x, first.center.y, last.center.x, last.center.y, wander
        );
        println!("rho           {:.4e} -> {:.4e}", first.rho, last.rho);
        println!("max |u.n|     {:.4e}", records.iter().map(|r| r.boundary_flux).fold(0.0, f64::max));
    }
    for p in &problems {
        println!("invariant violated: {p}");
    }
    Ok(if problems.is_empty() { PASS } else { FAIL })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { PASS });
        }
    };
    let result = match &cli.command {
        Command::Run { config, resolution, out, force } => cmd_run(config, *resolution, out, *force),
        Command::Study { config, epsilons, resolution, out, force } => {
            cmd_study(config, epsilons, *resolution, out, *force)
        }
        Command::Kernels { selftest } => cmd_kernels(*selftest),
        Command::Diag { records } => cmd_diag(records),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(code_for(&e))
        }
    }
}

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use super::run::RunOutput;
use super::study::{ConvergenceReport, Study};
use crate::diagnostics::write_records;
use crate::error::{LakeError, Result};

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> LakeError + '_ {
    move |source| LakeError::Io { path: path.to_path_buf(), source }
}

fn guard(dir: &Path, names: &[String], force: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    let paths: Vec<PathBuf> = names.iter().map(|n| dir.join(n)).collect();
    if !force {
        if let Some(p) = paths.iter().find(|p| p.exists()) {
            return Err(LakeError::Exists(p.clone()));
        }
    }
    Ok(paths)
}

fn write_csv(path: &Path, output: &RunOutput) -> Result<()> {
    let file = fs::File::create(path).map_err(io(path))?;
    write_records(BufWriter::new(file), &output.records)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io(path))
}

fn echo(output: &RunOutput, extra: &str) -> String {
    format!(
        "# config_hash = {}\n# code_version = {}\n{extra}{}",
        output.provenance.config_hash,
        output.provenance.code_version,
        output.scenario.to_toml_string()
    )
}

/// Single-run report in the study schema, with one entry per array.
pub fn run_report(output: &RunOutput) -> ConvergenceReport {
    ConvergenceReport {
        scenario: output.scenario.name.clone(),
        epsilons: vec![output.scenario.blob.epsilon],
        sup_errors: vec![output.sup_error().ok()],
        gamma_drift: vec![Some(output.gamma_drift())],
        energy_drift: vec![Some(output.energy_drift())],
        omega_slope: vec![Some(output.omega_slope())],
        verdict: output.verdict(),
    }
}

fn to_json(report: &ConvergenceReport) -> String {
    serde_json::to_string_pretty(report).unwrap_or_default() + "\n"
}

/// Write `records.csv`, `report.json` and `config.echo` for one run.
pub fn emit_run(output: &RunOutput, dir: &Path, force: bool) -> Result<Vec<PathBuf>> {
    let names = ["records.csv", "report.json", "config.echo"].map(String::from);
    let paths = guard(dir, &names, force)?;
    write_csv(&paths[0], output)?;
    write_text(&paths[1], &to_json(&run_report(output)))?;
    write_text(&paths[2], &echo(output, ""))?;
    Ok(paths)
}

/// Write a study: `report.json`, `records.csv` and `config.echo` for the
/// smallest ε, and `records_eps<ε>.csv` for every member that ran.
pub fn emit_study(study: &Study, dir: &Path, force: bool) -> Result<Vec<PathBuf>> {
    let mut names: Vec<String> = vec!["report.json".into()];
    let finest = study.members.last().and_then(|m| m.output.as_ref().ok());
    if finest.is_some() {
        names.push("records.csv".into());
        names.push("config.echo".into());
    }
    for m in &study.members {
        if m.output.is_ok() {
            names.push(format!("records_eps{}.csv", m.epsilon));
        }
    }
    let paths = guard(dir, &names, force)?;
    write_text(&paths[0], &to_json(&study.report))?;
    let mut next = 1;
    if let Some(out) = finest {
        write_csv(&paths[1], out)?;
        let eps: Vec<String> = study.report.epsilons.iter().map(f64::to_string).collect();
        write_text(&paths[2], &echo(out, &format!("# study epsilons = [{}]\n", eps.join(", "))))?;
        next = 3;
    }
    for out in study.members.iter().filter_map(|m| m.output.as_ref().ok()) {
        write_csv(&paths[next], out)?;
        next += 1;
    }
    Ok(paths)
}

//! `simulate` and `reduce`: run a scenario and write its outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use geoschro_core::dynamics::{propagate, TrajectoryRecord};
use geoschro_core::hilbert::{inner, StateVector};
use geoschro_core::reduction::{commuting_diagram, fubini_study_distance, level_set_project};
use serde::{Deserialize, Serialize};

use crate::config::{parse_config, Scenario};
use crate::error::CliError;
use crate::io::{write_csv, write_json, write_jsonl, BasisJson, RayJson, RecordJson, ReducedRecordJson};

pub const SUMMARY_FILE: &str = "summary.json";
pub const TRAJECTORY_FILE: &str = "trajectory.jsonl";
pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const REDUCED_FILE: &str = "reduced.jsonl";
pub const RESIDUAL_CSV: &str = "residual.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalValues {
    pub t: f64,
    pub norm: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionSummary {
    pub mu: f64,
    pub dt_reduced: f64,
    pub k_reproj: usize,
    pub max_fs_residual: f64,
    pub max_trace_drift: f64,
    pub max_hermiticity_drift: f64,
    pub max_idempotency_drift: f64,
    pub reprojections: usize,
}

/// Contents of `summary.json`. Deterministic for a fixed configuration and
/// seed: no timings or host details.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub basis: BasisJson,
    pub method: String,
    pub dt: f64,
    pub t0: f64,
    pub t1: f64,
    pub stride: usize,
    pub seed: u64,
    pub autonomous: bool,
    pub records: usize,
    #[serde(rename = "final")]
    pub final_values: FinalValues,
    pub max_norm_drift: f64,
    pub max_momentum_drift: f64,
    pub max_energy_drift: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_fidelity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction: Option<ReductionSummary>,
    /// Output files by role, relative to the summary's directory.
    pub files: BTreeMap<String, String>,
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.to_path_buf(), message: e.to_string() })
}

fn max_drift(records: &[TrajectoryRecord], f: impl Fn(&TrajectoryRecord) -> f64) -> f64 {
    let first = f(&records[0]);
    records.iter().map(|r| (f(r) - first).abs()).fold(0.0, f64::max)
}

fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64, CliError> {
    let overlap = inner(a, b)?.norm_sqr();
    Ok(overlap / (a.norm_sqr() * b.norm_sqr()))
}

fn summarize(scenario: &Scenario, records: &[TrajectoryRecord]) -> Result<Summary, CliError> {
    let last = records.last().expect("a trajectory has at least one record");
    let reference_fidelity = match (&scenario.reference_state, &last.coefficients) {
        (Some(reference), Some(c)) => Some(fidelity(reference, &StateVector::new(scenario.basis, c.clone())?)?),
        _ => None,
    };
    Ok(Summary {
        name: scenario.name.clone(),
        basis: (&scenario.basis).into(),
        method: scenario.integrator.method().name().into(),
        dt: scenario.integrator.dt(),
        t0: scenario.time.t0,
        t1: scenario.time.t1,
        stride: scenario.time.stride,
        seed: scenario.seed,
        autonomous: scenario.hamiltonian.is_autonomous(),
        records: records.len(),
        final_values: FinalValues { t: last.t, norm: last.norm, j: last.momentum_j, energy: last.energy },
        max_norm_drift: max_drift(records, |r| r.norm),
        max_momentum_drift: max_drift(records, |r| r.momentum_j),
        max_energy_drift: max_drift(records, |r| r.energy),
        reference_fidelity,
        reduction: None,
        files: BTreeMap::new(),
    })
}

fn write_trajectory(
    dir: &Path,
    file: &str,
    scenario: &Scenario,
    records: &[TrajectoryRecord],
    summary: &mut Summary,
) -> Result<(), CliError> {
    let coefficients = scenario.outputs.coefficients;
    write_jsonl(&dir.join(file), records.iter().map(|r| RecordJson::new(r, coefficients)))?;
    summary.files.insert("trajectory".into(), file.into());
    if scenario.outputs.diagnostics {
        let (n0, e0) = (records[0].norm, records[0].energy);
        let rows = records.iter().map(|r| vec![r.t, r.norm, r.norm - n0, r.momentum_j, r.energy, r.energy - e0]);
        write_csv(&dir.join(TRAJECTORY_CSV), &["t", "norm", "norm_drift", "J", "energy", "energy_drift"], rows)?;
        summary.files.insert("trajectory_csv".into(), TRAJECTORY_CSV.into());
    }
    Ok(())
}

/// Integrate a scenario and write `trajectory.jsonl`, `summary.json` and
/// (unless disabled) `trajectory.csv` into `out_dir`.
pub fn run_simulate(config: &Path, out_dir: &Path, seed: Option<u64>) -> Result<Summary, CliError> {
    let scenario = parse_config(config, seed)?;
    simulate_scenario(&scenario, out_dir)
}

pub fn simulate_scenario(scenario: &Scenario, out_dir: &Path) -> Result<Summary, CliError> {
    let t = scenario.time;
    let records = propagate(&scenario.hamiltonian, &scenario.initial_state, &scenario.integrator, t.t0, t.t1, t.stride)?;
    create_dir(out_dir)?;
    let mut summary = summarize(scenario, &records)?;
    write_trajectory(out_dir, TRAJECTORY_FILE, scenario, &records, &mut summary)?;
    write_json(&out_dir.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

/// Run both paths of the reduction diagram: the upstairs flow of the
/// level-set projection of the initial state, and the projector flow of its
/// ray. Writes `trajectory.jsonl`, `reduced.jsonl`, `summary.json` and the
/// CSV mirrors including `residual.csv`.
pub fn run_reduce(config: &Path, out_dir: &Path, seed: Option<u64>) -> Result<Summary, CliError> {
    let scenario = parse_config(config, seed)?;
    reduce_scenario(&scenario, out_dir)
}

pub fn reduce_scenario(scenario: &Scenario, out_dir: &Path) -> Result<Summary, CliError> {
    let red = scenario.reduction.ok_or_else(|| CliError::schema("/reduction", "missing required field"))?;
    let t = scenario.time;
    let psi0 = level_set_project(&scenario.initial_state, red.mu)?;
    let report = commuting_diagram(
        &scenario.hamiltonian,
        &psi0,
        &scenario.integrator,
        red.dt_reduced,
        t.t0,
        t.t1,
        t.stride,
        red.k_reproj,
    )?;
    create_dir(out_dir)?;
    let mut summary = summarize(scenario, &report.upstairs)?;
    write_trajectory(out_dir, TRAJECTORY_FILE, scenario, &report.upstairs, &mut summary)?;

    if scenario.outputs.reduced {
        let first = &report.reduced.samples[0].ray;
        let mut reduced = Vec::with_capacity(report.reduced.samples.len());
        for s in &report.reduced.samples {
            reduced.push(ReducedRecordJson {
                t: s.t,
                ray: RayJson::new(&s.ray, red.mu),
                fs_distance_to_initial: fubini_study_distance(first, &s.ray)?,
            });
        }
        write_jsonl(&out_dir.join(REDUCED_FILE), reduced)?;
        summary.files.insert("reduced".into(), REDUCED_FILE.into());
    }
    if scenario.outputs.diagnostics {
        let rows = report.samples.iter().map(|s| vec![s.t, s.distance]);
        write_csv(&out_dir.join(RESIDUAL_CSV), &["t", "fs_residual"], rows)?;
        summary.files.insert("residual_csv".into(), RESIDUAL_CSV.into());
    }
    summary.reduction = Some(ReductionSummary {
        mu: red.mu,
        dt_reduced: red.dt_reduced,
        k_reproj: red.k_reproj,
        max_fs_residual: report.max_residual,
        max_trace_drift: report.reduced.max_trace_drift,
        max_hermiticity_drift: report.reduced.max_hermiticity_drift,
        max_idempotency_drift: report.reduced.max_idempotency_drift,
        reprojections: report.reduced.reprojections,
    });
    write_json(&out_dir.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

/// Write a gnuplot script next to `summary` plotting the CSV mirrors it
/// lists: norm drift, energy and `J` always, the Fubini–Study residual when
/// a reduction was run. Fails with [`CliError::MissingInput`] naming the
/// first referenced file that does not exist.
pub fn emit_plot_script(summary_path: &Path) -> Result<PathBuf, CliError> {
    if !summary_path.exists() {
        return Err(CliError::MissingInput(summary_path.to_path_buf()));
    }
    let summary: Summary = crate::io::read_json(summary_path)?;
    let dir = summary_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let trajectory = summary
        .files
        .get("trajectory_csv")
        .ok_or_else(|| CliError::MissingInput(dir.join(TRAJECTORY_CSV)))?;
    let mut inputs = vec![trajectory.clone()];
    if summary.reduction.is_some() {
        inputs.push(summary.files.get("residual_csv").cloned().unwrap_or_else(|| RESIDUAL_CSV.into()));
    }
    for name in &inputs {
        let path = dir.join(name);
        if !path.exists() {
            return Err(CliError::MissingInput(path));
        }
    }

    let mut script = String::new();
    script.push_str(&format!("# {}\nset datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\n", summary.name));
    let stanza = |title: &str, file: &str, column: &str, log: bool| {
        format!(
            "\nset title '{title}'\n{}plot '{file}' using 't':'{column}' with lines\n{}",
            if log { "set logscale y\n" } else { "" },
            if log { "unset logscale y\n" } else { "" },
        )
    };
    script.push_str(&stanza("norm drift", trajectory, "norm_drift", false));
    script.push_str(&stanza("energy", trajectory, "energy", false));
    script.push_str(&stanza("momentum map J", trajectory, "J", false));
    if inputs.len() > 1 {
        script.push_str(&stanza("Fubini-Study residual", &inputs[1], "fs_residual", true));
    }
    let out = dir.join("plot.gp");
    fs::write(&out, script).map_err(|e| CliError::Io { path: out.clone(), message: e.to_string() })?;
    Ok(out)
}

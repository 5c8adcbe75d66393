use std::path::{Path, PathBuf};
use std::process::Command;

use geoschro::config::parse_config;
use geoschro::io::{read_jsonl, write_json, OperatorJson, RecordJson, ReducedRecordJson, StateJson};
use geoschro::run::{reduce_scenario, simulate_scenario, Summary};
use geoschro::{emit_plot_script, run_simulate, CliError};
use geoschro_core::hilbert::{random_state, BasisSpec, StateVector};
use geoschro_core::operators::build_momentum;
use geoschro_core::Complex64;
use serde_json::json;

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn write_config(dir: &Path, value: serde_json::Value) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&value).unwrap()).unwrap();
    path
}

fn minimal() -> serde_json::Value {
    json!({
        "basis": { "kind": "hermite1d_orthonormal", "size": 8 },
        "hamiltonian": [{ "operator": "p2", "coefficient": 0.5 }, { "operator": "x2", "coefficient": 0.5 }],
        "initial_state": { "kind": "basis_vector", "index": 1 },
        "integrator": { "method": "magnus2", "dt": 0.1 },
        "time": { "t1": 1.0 }
    })
}

fn schema_pointer(value: serde_json::Value) -> String {
    let dir = tempfile::tempdir().unwrap();
    match parse_config(&write_config(dir.path(), value), None) {
        Err(CliError::Schema { pointer, .. }) | Err(CliError::UnknownOperator { pointer, .. }) => pointer,
        other => panic!("expected a schema error, got {other:?}"),
    }
}

#[test]
fn schema_errors_name_the_field() {
    let mut v = minimal();
    v["integrator"]["step"] = json!(0.1);
    assert_eq!(schema_pointer(v), "/integrator/step");

    let mut v = minimal();
    v.as_object_mut().unwrap().remove("time");
    assert_eq!(schema_pointer(v), "/time");

    let mut v = minimal();
    v["hamiltonian"][1]["operator"] = json!("x3");
    assert_eq!(schema_pointer(v), "/hamiltonian/1/operator");

    let mut v = minimal();
    v["hamiltonian"][0]["operator"] = json!("Lz");
    assert_eq!(schema_pointer(v), "/hamiltonian/0/operator");

    let mut v = minimal();
    v["hamiltonian"][0]["coefficient"] = json!({ "kind": "table", "points": [[0.0, 1.0], [0.0, 2.0]] });
    assert_eq!(schema_pointer(v), "/hamiltonian/0/coefficient/points");

    let mut v = minimal();
    v["hamiltonian"][0]["coefficient"] = json!({ "kind": "sinusoid", "amplitude": 1.0 });
    assert_eq!(schema_pointer(v), "/hamiltonian/0/coefficient/frequency");

    let mut v = minimal();
    v["hamiltonian"][1]["coefficient"] = json!({ "kind": "sinusoid", "amplitude": 0.1, "frequency": 1.0 });
    v["integrator"]["method"] = json!("exact_eig");
    assert_eq!(schema_pointer(v), "/integrator/method");

    let mut v = minimal();
    v["time"]["t0"] = json!(2.0);
    assert_eq!(schema_pointer(v), "/time/t1");

    let mut v = minimal();
    v["initial_state"] = json!({ "kind": "basis_vector", "index": 8 });
    assert_eq!(schema_pointer(v), "/initial_state/index");

    let mut v = minimal();
    v["reduction"] = json!({ "mu": 0.5, "dt_reduced": 0.1 });
    assert_eq!(schema_pointer(v), "/reduction/mu");

    let mut v = minimal();
    v["basis"] = json!({ "kind": "probabilist", "size": 8 });
    assert_eq!(schema_pointer(v), "/basis/kind");
}

#[test]
fn non_hermitian_builtin_is_rejected() {
    let mut v = minimal();
    v["basis"] = json!({ "kind": "hermite1d_probabilist", "size": 8 });
    v["hamiltonian"] = json!([{ "operator": "d_dx_prob" }]);
    assert_eq!(schema_pointer(v), "/hamiltonian/0/operator");
}

#[test]
fn other_bases_and_coefficient_kinds_parse() {
    let dir = tempfile::tempdir().unwrap();
    let v = json!({
        "basis": { "kind": "fourier_interval", "size": 9, "half_length": 2.0 },
        "hamiltonian": [
            { "operator": "fourier_p2", "coefficient": { "kind": "polynomial", "coefficients": [0.5, 0.1] } },
            { "operator": "id", "coefficient": { "kind": "table", "points": [[0.0, 1.0], [1.0, 0.0]] } }
        ],
        "initial_state": { "kind": "random", "seed": 4 },
        "integrator": { "method": "cayley2", "dt": 0.05 },
        "time": { "t1": 0.5, "stride": 2 }
    });
    let s = parse_config(&write_config(dir.path(), v), None).unwrap();
    assert_eq!(s.hamiltonian.terms().len(), 2);
    assert!(!s.hamiltonian.is_autonomous());
    let summary = simulate_scenario(&s, &dir.path().join("out")).unwrap();
    assert!(summary.max_norm_drift < 1e-12);

    let v = json!({
        "basis": { "kind": "hermite3d_degree", "size": 3 },
        "hamiltonian": [{ "operator": "Lz" }],
        "initial_state": { "kind": "basis_vector", "index": 1 },
        "integrator": { "method": "exact_eig", "dt": 0.5 },
        "time": { "t1": 1.0 }
    });
    let s = parse_config(&write_config(dir.path(), v), None).unwrap();
    assert_eq!(s.basis.dim(), 20);
}

#[test]
fn matrix_and_state_files_resolve_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    let b = BasisSpec::hermite(12);
    write_json(&dir.path().join("p.json"), &OperatorJson::from(&build_momentum(b).unwrap())).unwrap();
    let psi = random_state(12, 9);
    write_json(&dir.path().join("psi.json"), &StateJson::from(&psi)).unwrap();
    let v = json!({
        "basis": { "kind": "hermite1d_orthonormal", "size": 12 },
        "hamiltonian": [{ "operator": "p.json" }],
        "initial_state": { "kind": "coefficients_file", "path": "psi.json" },
        "integrator": { "method": "exact_eig", "dt": 0.1 },
        "time": { "t1": 0.3 }
    });
    let s = parse_config(&write_config(dir.path(), v), None).unwrap();
    assert_eq!(s.initial_state, psi);
    assert_eq!(s.hamiltonian.terms()[0].operator, build_momentum(b).unwrap());
}

#[test]
fn seed_override_changes_random_state() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = minimal();
    v["initial_state"] = json!({ "kind": "random" });
    v["seed"] = json!(3);
    let path = write_config(dir.path(), v);
    let a = parse_config(&path, None).unwrap();
    let b = parse_config(&path, Some(3)).unwrap();
    let c = parse_config(&path, Some(4)).unwrap();
    assert_eq!(a.initial_state, b.initial_state);
    assert_ne!(a.initial_state, c.initial_state);
    assert_eq!(c.seed, 4);
}

#[test]
fn translation_scenario_reaches_coherent_state() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_simulate(&scenarios().join("translation.json"), dir.path(), None).unwrap();
    assert!(summary.reference_fidelity.unwrap() >= 1.0 - 1e-8);
    let recs: Vec<RecordJson> = read_jsonl(&dir.path().join("trajectory.jsonl")).unwrap();
    assert_eq!(recs.len(), 11);
    assert!(recs.iter().all(|r| r.re.is_some() && (r.j + 0.5).abs() < 1e-14));
}

#[test]
fn identity_scenario_only_rotates_phase() {
    let dir = tempfile::tempdir().unwrap();
    let s = parse_config(&scenarios().join("identity_phase.json"), None).unwrap();
    let summary = reduce_scenario(&s, dir.path()).unwrap();
    let recs: Vec<RecordJson> = read_jsonl(&dir.path().join("trajectory.jsonl")).unwrap();
    let mu = s.reduction.unwrap().mu;
    let psi0 = geoschro_core::reduction::level_set_project(&s.initial_state, mu).unwrap();
    for r in &recs {
        let state = StateVector::new(s.basis, r.re.clone().unwrap().into_iter().zip(r.im.clone().unwrap()).map(|(a, b)| Complex64::new(a, b)).collect()).unwrap();
        let expected = psi0.point().scale(Complex64::from_polar(1.0, -r.t));
        assert!(state.sub(&expected).unwrap().norm() < 1e-13, "t = {}", r.t);
    }
    let reduced: Vec<ReducedRecordJson> = read_jsonl(&dir.path().join("reduced.jsonl")).unwrap();
    assert!(reduced.iter().all(|r| r.fs_distance_to_initial < 1e-12 && r.ray.mu == mu));
    assert!(summary.reduction.unwrap().max_fs_residual < 1e-12);
}

#[test]
fn oscillator_scenario_conserves_energy() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_simulate(&scenarios().join("harmonic_oscillator.json"), dir.path(), None).unwrap();
    assert!((summary.final_values.energy - 0.5).abs() < 1e-14);
    assert!(summary.max_energy_drift < 1e-14);
    assert!((summary.final_values.t - 2.0 * std::f64::consts::PI).abs() < 1e-15);
}

#[test]
fn plot_script_follows_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let s = parse_config(&scenarios().join("identity_phase.json"), None).unwrap();
    let sim = dir.path().join("sim");
    simulate_scenario(&s, &sim).unwrap();
    let script = std::fs::read_to_string(emit_plot_script(&sim.join("summary.json")).unwrap()).unwrap();
    assert_eq!(script.matches("\nplot ").count(), 3);

    let red = dir.path().join("red");
    reduce_scenario(&s, &red).unwrap();
    let script = std::fs::read_to_string(emit_plot_script(&red.join("summary.json")).unwrap()).unwrap();
    assert_eq!(script.matches("\nplot ").count(), 4);
    assert!(script.contains("residual.csv"));

    std::fs::remove_file(red.join("residual.csv")).unwrap();
    match emit_plot_script(&red.join("summary.json")) {
        Err(CliError::MissingInput(p)) => assert_eq!(p, red.join("residual.csv")),
        other => panic!("{other:?}"),
    }
    let summary: Summary = geoschro::io::read_json(&red.join("summary.json")).unwrap();
    assert_eq!(summary.files["reduced"], "reduced.jsonl");
}

#[test]
fn csv_mirror_matches_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    run_simulate(&scenarios().join("harmonic_oscillator.json"), dir.path(), None).unwrap();
    let recs: Vec<RecordJson> = read_jsonl(&dir.path().join("trajectory.jsonl")).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,norm,norm_drift,J,energy,energy_drift");
    for (line, rec) in lines.zip(&recs) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!((cols[0], cols[1], cols[3], cols[4]), (rec.t, rec.norm, rec.j, rec.energy));
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_geoschro"))
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |cmd: &mut Command| cmd.output().unwrap().status.code().unwrap();

    let mut ok = bin();
    ok.arg("simulate").arg("--config").arg(scenarios().join("identity_phase.json")).arg("--out").arg(dir.path().join("a"));
    assert_eq!(code(&mut ok), 0);

    let mut v = minimal();
    v["hamiltonian"][0]["operator"] = json!("nope");
    let cfg = write_config(dir.path(), v);
    assert_eq!(code(bin().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("b"))), 1);

    let bad_json = dir.path().join("broken.json");
    std::fs::write(&bad_json, "{").unwrap();
    assert_eq!(code(bin().args(["simulate", "--out", "x", "--config"]).arg(&bad_json)), 1);

    // A huge dt with a table coefficient that blows up is a numeric error.
    let mut v = minimal();
    v["hamiltonian"][0]["coefficient"] = json!({ "kind": "polynomial", "coefficients": [0.0, 1e308] });
    v["time"]["t1"] = json!(10.0);
    let cfg = write_config(dir.path(), v);
    assert_eq!(code(bin().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("c"))), 2);

    assert_eq!(code(bin().args(["simulate", "--out", "x", "--config"]).arg(dir.path().join("missing.json"))), 3);
    assert_eq!(code(bin().args(["plot", "--summary"]).arg(dir.path().join("none/summary.json"))), 3);
    assert_eq!(code(bin().args(["verify", "--suite", "nope"])), 1);
    assert_eq!(code(bin().args(["verify", "--suite", "analytic", "--tol", "nonsense"])), 1);
    assert_eq!(code(bin().args(["verify", "--suite", "analytic", "--tol", "monomial3_x=1"])), 4);
    let out = bin().args(["verify", "--suite", "analytic"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["suites"][0]["cases"].as_array().unwrap().len(), 14);
}

#[test]
fn driven_golden_scenario_meets_its_budgets() {
    let dir = tempfile::tempdir().unwrap();
    let summary = geoschro::run_reduce(&scenarios().join("driven_oscillator.json"), dir.path(), None).unwrap();
    assert!(summary.max_norm_drift <= 1e-12 && summary.max_momentum_drift <= 1e-12);
    let red = summary.reduction.unwrap();
    assert!(red.max_fs_residual <= 1e-6, "{}", red.max_fs_residual);
    assert!(red.max_trace_drift <= 1e-10 && red.max_idempotency_drift <= 1e-10);
    let reduced: Vec<ReducedRecordJson> = read_jsonl(&dir.path().join("reduced.jsonl")).unwrap();
    assert_eq!(reduced.len(), summary.records);
    assert_eq!(reduced[0].fs_distance_to_initial, 0.0);
}

#[test]
fn zero_length_run_has_one_record_and_still_plots() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = minimal();
    v["time"] = json!({ "t0": 1.5, "t1": 1.5 });
    v["reduction"] = json!({ "mu": -0.5, "dt_reduced": 0.1 });
    let s = parse_config(&write_config(dir.path(), v), None).unwrap();
    let summary = reduce_scenario(&s, &dir.path().join("out")).unwrap();
    assert_eq!(summary.records, 1);
    assert_eq!(summary.reduction.unwrap().max_fs_residual, 0.0);
    let script = std::fs::read_to_string(emit_plot_script(&dir.path().join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(script.matches("\nplot ").count(), 4);
}

#[test]
fn output_flags_control_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = parse_config(&scenarios().join("identity_phase.json"), None).unwrap();
    s.outputs.diagnostics = false;
    s.outputs.reduced = false;
    reduce_scenario(&s, dir.path()).unwrap();
    let mut names: Vec<String> =
        std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    assert_eq!(names, ["summary.json", "trajectory.jsonl"]);
    assert!(matches!(emit_plot_script(&dir.path().join("summary.json")), Err(CliError::MissingInput(_))));
}

//! JSON and JSON Lines formats.
//!
//! Complex arrays are split into parallel `re`/`im` arrays in basis
//! enumeration order; matrices are row-major nested arrays. Floats are
//! written in shortest round-trip form.

use std::fs;
use std::io::Write;
use std::path::Path;

use geoschro_core::dynamics::TrajectoryRecord;
use geoschro_core::hilbert::{BasisKind, BasisSpec, StateVector};
use geoschro_core::linalg::ComplexMatrix;
use geoschro_core::operators::{OperatorMatrix, Symmetry};
use geoschro_core::reduction::{ray_of, Ray};
use geoschro_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisJson {
    pub kind: String,
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_length: Option<f64>,
}

impl From<&BasisSpec> for BasisJson {
    fn from(b: &BasisSpec) -> Self {
        Self { kind: b.kind().name().into(), size: b.size(), half_length: b.half_length() }
    }
}

impl BasisJson {
    pub fn to_spec(&self) -> Result<BasisSpec, String> {
        let kind = BasisKind::from_name(&self.kind).ok_or_else(|| format!("unknown basis kind {:?}", self.kind))?;
        BasisSpec::new(kind, self.size, self.half_length).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    pub basis: BasisJson,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

fn split(c: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    (c.iter().map(|z| z.re).collect(), c.iter().map(|z| z.im).collect())
}

fn join(re: &[f64], im: &[f64]) -> Result<Vec<Complex64>, String> {
    if re.len() != im.len() {
        return Err(format!("re has {} entries but im has {}", re.len(), im.len()));
    }
    Ok(re.iter().zip(im).map(|(a, b)| Complex64::new(*a, *b)).collect())
}

impl From<&StateVector> for StateJson {
    fn from(s: &StateVector) -> Self {
        let (re, im) = split(s.coefficients());
        Self { basis: s.basis().into(), re, im }
    }
}

impl StateJson {
    pub fn to_state(&self) -> Result<StateVector, String> {
        let basis = self.basis.to_spec()?;
        StateVector::new(basis, join(&self.re, &self.im)?).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorJson {
    pub basis: BasisJson,
    pub symmetry: String,
    pub raise_band: usize,
    pub lower_band: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    /// The matrix is the whole operator (no truncation error anywhere).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub exact: bool,
}

impl From<&OperatorMatrix> for OperatorJson {
    fn from(op: &OperatorMatrix) -> Self {
        let m = op.matrix();
        let rows = |f: fn(&Complex64) -> f64| (0..m.dim()).map(|i| m.row(i).iter().map(f).collect()).collect();
        Self {
            basis: op.basis().into(),
            symmetry: op.symmetry().name().into(),
            raise_band: op.raise_band(),
            lower_band: op.lower_band(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
            exact: op.is_exact_truncation(),
        }
    }
}

impl OperatorJson {
    pub fn to_operator(&self) -> Result<OperatorMatrix, String> {
        let basis = self.basis.to_spec()?;
        let symmetry = Symmetry::from_name(&self.symmetry).ok_or_else(|| format!("unknown symmetry {:?}", self.symmetry))?;
        let n = basis.dim();
        if self.re.len() != n || self.im.len() != n {
            return Err(format!("expected {n} rows"));
        }
        let mut data = Vec::with_capacity(n * n);
        for (r, i) in self.re.iter().zip(&self.im) {
            if r.len() != n || i.len() != n {
                return Err(format!("expected {n} columns per row"));
            }
            data.extend(join(r, i)?);
        }
        let m = ComplexMatrix::from_row_major(n, data).map_err(|e| e.to_string())?;
        OperatorMatrix::new(basis, m, symmetry, self.raise_band, self.lower_band)
            .map(|op| op.with_exact_truncation(self.exact))
            .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayJson {
    #[serde(flatten)]
    pub state: StateJson,
    pub mu: f64,
}

impl RayJson {
    pub fn new(r: &Ray, mu: f64) -> Self {
        Self { state: r.representative().into(), mu }
    }

    /// The ray through the stored representative, with its phase and norm
    /// re-canonicalised.
    pub fn to_ray(&self) -> Result<Ray, String> {
        ray_of(&self.state.to_state()?).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordJson {
    pub t: f64,
    pub norm: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub energy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub re: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
}

impl RecordJson {
    pub fn new(r: &TrajectoryRecord, with_coefficients: bool) -> Self {
        let (re, im) = match (&r.coefficients, with_coefficients) {
            (Some(c), true) => {
                let (re, im) = split(c);
                (Some(re), Some(im))
            }
            _ => (None, None),
        };
        Self { t: r.t, norm: r.norm, j: r.momentum_j, energy: r.energy, re, im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedRecordJson {
    pub t: f64,
    pub ray: RayJson,
    pub fs_distance_to_initial: f64,
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io { path: path.to_path_buf(), message: e.to_string() }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_error(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_error(path, e))
}

/// One compact JSON value per line.
pub fn write_jsonl<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), CliError> {
    let mut out = Vec::new();
    for row in rows {
        serde_json::to_writer(&mut out, &row).map_err(|e| io_error(path, e))?;
        out.push(b'\n');
    }
    fs::write(path, out).map_err(|e| io_error(path, e))
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() }))
        .collect()
}

/// Plain CSV with a header row; `{:e}`-free shortest float formatting.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), CliError> {
    let mut out = Vec::new();
    writeln!(out, "{}", header.join(",")).map_err(|e| io_error(path, e))?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", line.join(",")).map_err(|e| io_error(path, e))?;
    }
    fs::write(path, out).map_err(|e| io_error(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use geoschro_core::hilbert::random_state;
    use geoschro_core::operators::{build_momentum, build_quadratics};

    #[test]
    fn state_round_trip_is_exact() {
        let s = random_state(16, 3);
        let text = serde_json::to_string(&StateJson::from(&s)).unwrap();
        let back: StateJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_state().unwrap(), s);
    }

    #[test]
    fn operator_round_trip() {
        let b = BasisSpec::hermite(6);
        for op in [build_momentum(b).unwrap(), build_quadratics(b).unwrap().2] {
            let text = serde_json::to_string(&OperatorJson::from(&op)).unwrap();
            let back: OperatorJson = serde_json::from_str(&text).unwrap();
            assert_eq!(back.to_operator().unwrap(), op);
        }
    }

    #[test]
    fn ray_json_is_flat() {
        let r = ray_of(&random_state(4, 1)).unwrap();
        let v = serde_json::to_value(RayJson::new(&r, -0.5)).unwrap();
        assert!(v.get("re").is_some() && v.get("mu").is_some() && v.get("basis").is_some());
        let back: RayJson = serde_json::from_value(v).unwrap();
        // Re-canonicalising may move the last bit.
        let d = geoschro_core::reduction::fubini_study_distance(&back.to_ray().unwrap(), &r).unwrap();
        assert!(d < 1e-15);
    }

    #[test]
    fn record_keys() {
        let rec = TrajectoryRecord { t: 0.5, norm: 1.0, momentum_j: -0.5, energy: 0.25, coefficients: None };
        let text = serde_json::to_string(&RecordJson::new(&rec, true)).unwrap();
        assert_eq!(text, r#"{"t":0.5,"norm":1.0,"J":-0.5,"energy":0.25}"#);
    }

    #[test]
    fn bad_shapes_are_rejected() {
        let basis = |kind: &str| BasisJson { kind: kind.into(), size: 2, half_length: None };
        let j = StateJson { basis: basis("hermite1d_orthonormal"), re: vec![1.0], im: vec![0.0, 1.0] };
        assert!(j.to_state().is_err());
        let j = StateJson { basis: basis("legendre"), re: vec![1.0; 2], im: vec![0.0; 2] };
        assert!(j.to_state().is_err());
    }
}

//! Scenario configuration files.
//!
//! A configuration is a JSON object; every validation error names the
//! offending field with a JSON pointer. Operator names are either built-ins
//! (`p2`, `x2`, `xp_px`, `p`, `x`, `id`, `Lx`, `Ly`, `Lz`, `fourier_p2`,
//! `d_dx_prob`) or paths ending in `.json`, resolved relative to the
//! configuration file and read as operator matrix files.

use std::path::{Path, PathBuf};

use geoschro_core::dynamics::{CoefficientFn, IntegratorSpec, Method, TDepHamiltonian, Term};
use geoschro_core::hilbert::{coherent_state, BasisKind, BasisSpec, StateVector};
use geoschro_core::operators::{
    build_angular_momentum, build_derivative_probabilist, build_fourier_p_squared, build_identity, build_momentum,
    build_position, build_quadratics, OperatorMatrix, Symmetry,
};
use geoschro_core::Complex64;
use serde_json::Value;

use crate::error::CliError;
use crate::io::{read_json, OperatorJson, StateJson};

pub const BUILTIN_OPERATORS: [&str; 11] =
    ["p2", "x2", "xp_px", "p", "x", "id", "Lx", "Ly", "Lz", "fourier_p2", "d_dx_prob"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSpan {
    pub t0: f64,
    pub t1: f64,
    pub stride: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionSpec {
    pub mu: f64,
    pub dt_reduced: f64,
    pub k_reproj: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outputs {
    /// Store `re`/`im` coefficient arrays in trajectory records.
    pub coefficients: bool,
    /// Write CSV mirrors of the drift diagnostics and residual curve.
    pub diagnostics: bool,
    /// Write the reduced ray trajectory when running the reduction.
    pub reduced: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self { coefficients: false, diagnostics: true, reduced: true }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub basis: BasisSpec,
    pub hamiltonian: TDepHamiltonian,
    pub initial_state: StateVector,
    /// Optional target state; its fidelity with the final state is reported.
    pub reference_state: Option<StateVector>,
    pub integrator: IntegratorSpec,
    pub time: TimeSpan,
    pub reduction: Option<ReductionSpec>,
    pub outputs: Outputs,
    pub seed: u64,
}

/// A JSON value together with its location.
#[derive(Clone, Copy)]
struct Node<'v, 'p> {
    value: &'v Value,
    pointer: &'p str,
}

fn err(pointer: &str, message: impl Into<String>) -> CliError {
    CliError::schema(if pointer.is_empty() { "/" } else { pointer }, message)
}

fn child_pointer(parent: &str, key: &str) -> String {
    format!("{parent}/{}", key.replace('~', "~0").replace('/', "~1"))
}

impl<'a> Node<'a, '_> {
    fn object(&self, allowed: &[&str]) -> Result<&'a serde_json::Map<String, Value>, CliError> {
        let map = self.value.as_object().ok_or_else(|| err(self.pointer, "expected an object"))?;
        if let Some(key) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(err(&child_pointer(self.pointer, key), "unknown field"));
        }
        Ok(map)
    }

    fn f64(&self) -> Result<f64, CliError> {
        match self.value.as_f64() {
            Some(v) if v.is_finite() => Ok(v),
            _ => Err(err(self.pointer, "expected a finite number")),
        }
    }

    fn usize(&self) -> Result<usize, CliError> {
        self.value
            .as_u64()
            .and_then(|v| usize::try_from(v).ok())
            .ok_or_else(|| err(self.pointer, "expected a non-negative integer"))
    }

    fn u64(&self) -> Result<u64, CliError> {
        self.value.as_u64().ok_or_else(|| err(self.pointer, "expected a non-negative integer"))
    }

    fn str(&self) -> Result<&'a str, CliError> {
        self.value.as_str().ok_or_else(|| err(self.pointer, "expected a string"))
    }

    fn bool(&self) -> Result<bool, CliError> {
        self.value.as_bool().ok_or_else(|| err(self.pointer, "expected a boolean"))
    }

    fn array(&self) -> Result<&'a [Value], CliError> {
        self.value.as_array().map(Vec::as_slice).ok_or_else(|| err(self.pointer, "expected an array"))
    }
}

/// Owned pointer strings for child nodes; keeps `Node` borrowing simple.
struct Field {
    pointer: String,
}

impl Field {
    fn node<'v>(&self, value: &'v Value) -> Node<'v, '_> {
        Node { value, pointer: &self.pointer }
    }
}

fn required<'a>(map: &'a serde_json::Map<String, Value>, parent: &str, key: &str) -> Result<(&'a Value, Field), CliError> {
    let pointer = child_pointer(parent, key);
    match map.get(key) {
        Some(v) => Ok((v, Field { pointer })),
        None => Err(err(&pointer, "missing required field")),
    }
}

fn optional<'a>(map: &'a serde_json::Map<String, Value>, parent: &str, key: &str) -> Option<(&'a Value, Field)> {
    map.get(key).map(|v| (v, Field { pointer: child_pointer(parent, key) }))
}

macro_rules! field {
    ($map:expr, $parent:expr, $key:expr, $method:ident) => {{
        let (v, f) = required($map, $parent, $key)?;
        f.node(v).$method()?
    }};
}

macro_rules! opt_field {
    ($map:expr, $parent:expr, $key:expr, $method:ident) => {
        match optional($map, $parent, $key) {
            Some((v, f)) => Some(f.node(v).$method()?),
            None => None,
        }
    };
}

fn numeric_at(pointer: &str) -> impl Fn(geoschro_core::Error) -> CliError + '_ {
    move |e| err(pointer, e.to_string())
}

/// Read and validate a configuration file. `seed` overrides the file's
/// `seed` field.
pub fn parse_config(path: &Path, seed: Option<u64>) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let default_name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario").to_string();
    parse_value(&value, &base, &default_name, seed)
}

/// Validate an already parsed configuration; relative operator and state
/// files are resolved against `base`.
pub fn parse_value(value: &Value, base: &Path, default_name: &str, seed: Option<u64>) -> Result<Scenario, CliError> {
    let root = Node { value, pointer: "" };
    let map = root.object(&[
        "name",
        "basis",
        "hamiltonian",
        "initial_state",
        "reference_state",
        "integrator",
        "time",
        "reduction",
        "outputs",
        "seed",
    ])?;
    let name = opt_field!(map, "", "name", str).unwrap_or(default_name).to_string();
    let seed = match seed {
        Some(s) => s,
        None => opt_field!(map, "", "seed", u64).unwrap_or(0),
    };

    let (v, f) = required(map, "", "basis")?;
    let basis = parse_basis(f.node(v))?;

    let (v, f) = required(map, "", "hamiltonian")?;
    let hamiltonian = parse_hamiltonian(f.node(v), basis, base)?;

    let (v, f) = required(map, "", "initial_state")?;
    let initial_state = parse_state(f.node(v), basis, base, seed)?;
    let reference_state = match optional(map, "", "reference_state") {
        Some((v, f)) => Some(parse_state(f.node(v), basis, base, seed)?),
        None => None,
    };

    let (v, f) = required(map, "", "integrator")?;
    let integrator = parse_integrator(f.node(v))?;
    if integrator.method() == Method::ExactEig && !hamiltonian.is_autonomous() {
        return Err(err("/integrator/method", "exact_eig requires time-independent coefficients"));
    }

    let (v, f) = required(map, "", "time")?;
    let time = parse_time(f.node(v))?;

    let reduction = match optional(map, "", "reduction") {
        Some((v, f)) => Some(parse_reduction(f.node(v))?),
        None => None,
    };

    let outputs = match optional(map, "", "outputs") {
        Some((v, f)) => {
            let node = f.node(v);
            let m = node.object(&["coefficients", "diagnostics", "reduced"])?;
            let d = Outputs::default();
            Outputs {
                coefficients: opt_field!(m, node.pointer, "coefficients", bool).unwrap_or(d.coefficients),
                diagnostics: opt_field!(m, node.pointer, "diagnostics", bool).unwrap_or(d.diagnostics),
                reduced: opt_field!(m, node.pointer, "reduced", bool).unwrap_or(d.reduced),
            }
        }
        None => Outputs::default(),
    };

    Ok(Scenario { name, basis, hamiltonian, initial_state, reference_state, integrator, time, reduction, outputs, seed })
}

fn parse_basis(node: Node<'_, '_>) -> Result<BasisSpec, CliError> {
    let m = node.object(&["kind", "size", "half_length"])?;
    let kind_name = field!(m, node.pointer, "kind", str);
    let kind = BasisKind::from_name(kind_name)
        .ok_or_else(|| err(&child_pointer(node.pointer, "kind"), format!("unknown basis kind {kind_name:?}")))?;
    let size = field!(m, node.pointer, "size", usize);
    let half_length = opt_field!(m, node.pointer, "half_length", f64);
    BasisSpec::new(kind, size, half_length).map_err(numeric_at(node.pointer))
}

fn builtin(name: &str, basis: BasisSpec) -> Option<geoschro_core::Result<OperatorMatrix>> {
    Some(match name {
        "p2" => build_quadratics(basis).map(|q| q.1),
        "x2" => build_quadratics(basis).map(|q| q.0),
        "xp_px" => build_quadratics(basis).map(|q| q.2),
        "p" => build_momentum(basis),
        "x" => build_position(basis),
        "id" => Ok(build_identity(basis)),
        "Lx" => build_angular_momentum(basis).map(|l| l.0),
        "Ly" => build_angular_momentum(basis).map(|l| l.1),
        "Lz" => build_angular_momentum(basis).map(|l| l.2),
        "fourier_p2" => build_fourier_p_squared(basis),
        "d_dx_prob" => build_derivative_probabilist(basis),
        _ => return None,
    })
}

/// Resolve an operator name against `basis`.
pub fn resolve_operator(name: &str, pointer: &str, basis: BasisSpec, base: &Path) -> Result<OperatorMatrix, CliError> {
    if let Some(op) = builtin(name, basis) {
        return op.map_err(|e| err(pointer, format!("operator {name:?} on {} basis: {e}", basis.kind().name())));
    }
    if name.ends_with(".json") {
        let path: PathBuf = base.join(name);
        let json: OperatorJson = read_json(&path)?;
        let op = json.to_operator().map_err(|m| CliError::Parse { path: path.clone(), message: m })?;
        if op.basis() != &basis {
            return Err(err(pointer, format!("operator file {name:?} is on a different basis")));
        }
        return Ok(op);
    }
    Err(CliError::UnknownOperator { pointer: pointer.to_string(), name: name.to_string() })
}

fn parse_coefficient(node: Node<'_, '_>) -> Result<CoefficientFn, CliError> {
    if node.value.is_number() {
        return Ok(CoefficientFn::Constant(node.f64()?));
    }
    let m = node.object(&["kind", "value", "amplitude", "frequency", "phase", "coefficients", "points"])?;
    let p = node.pointer;
    let kind = field!(m, p, "kind", str);
    let allowed: &[&str] = match kind {
        "constant" => &["kind", "value"],
        "sinusoid" => &["kind", "amplitude", "frequency", "phase"],
        "polynomial" => &["kind", "coefficients"],
        "table" => &["kind", "points"],
        other => return Err(err(&child_pointer(p, "kind"), format!("unknown coefficient kind {other:?}"))),
    };
    node.object(allowed)?;
    let c = match kind {
        "constant" => CoefficientFn::Constant(field!(m, p, "value", f64)),
        "sinusoid" => CoefficientFn::Sinusoid {
            amplitude: field!(m, p, "amplitude", f64),
            frequency: field!(m, p, "frequency", f64),
            phase: opt_field!(m, p, "phase", f64).unwrap_or(0.0),
        },
        "polynomial" => {
            let (v, f) = required(m, p, "coefficients")?;
            let items = f.node(v).array()?;
            let mut c = Vec::with_capacity(items.len());
            for (k, item) in items.iter().enumerate() {
                let fk = Field { pointer: child_pointer(&f.pointer, &k.to_string()) };
                c.push(fk.node(item).f64()?);
            }
            CoefficientFn::Polynomial(c)
        }
        _ => {
            let (v, f) = required(m, p, "points")?;
            let items = f.node(v).array()?;
            let mut pts = Vec::with_capacity(items.len());
            for (k, item) in items.iter().enumerate() {
                let fk = Field { pointer: child_pointer(&f.pointer, &k.to_string()) };
                let pair = fk.node(item).array()?;
                if pair.len() != 2 {
                    return Err(err(&fk.pointer, "expected a [t, value] pair"));
                }
                let t = Field { pointer: child_pointer(&fk.pointer, "0") };
                let val = Field { pointer: child_pointer(&fk.pointer, "1") };
                pts.push((t.node(&pair[0]).f64()?, val.node(&pair[1]).f64()?));
            }
            CoefficientFn::table(pts).map_err(numeric_at(&f.pointer))?
        }
    };
    Ok(c)
}

fn parse_hamiltonian(node: Node<'_, '_>, basis: BasisSpec, base: &Path) -> Result<TDepHamiltonian, CliError> {
    let items = node.array()?;
    if items.is_empty() {
        return Err(err(node.pointer, "at least one term is required"));
    }
    let mut terms = Vec::with_capacity(items.len());
    for (k, item) in items.iter().enumerate() {
        let f = Field { pointer: child_pointer(node.pointer, &k.to_string()) };
        let term = f.node(item);
        let m = term.object(&["operator", "coefficient"])?;
        let (v, fo) = required(m, term.pointer, "operator")?;
        let name = fo.node(v).str()?;
        let operator = resolve_operator(name, &fo.pointer, basis, base)?;
        if operator.symmetry() != Symmetry::Hermitian {
            return Err(err(&fo.pointer, format!("operator {name:?} is not Hermitian")));
        }
        let coefficient = match optional(m, term.pointer, "coefficient") {
            Some((v, fc)) => parse_coefficient(fc.node(v))?,
            None => CoefficientFn::Constant(1.0),
        };
        terms.push(Term { coefficient, operator, label: name.to_string() });
    }
    TDepHamiltonian::new(terms).map_err(numeric_at(node.pointer))
}

fn parse_state(node: Node<'_, '_>, basis: BasisSpec, base: &Path, seed: u64) -> Result<StateVector, CliError> {
    let m = node.object(&["kind", "index", "alpha", "path", "seed"])?;
    let p = node.pointer;
    let kind = field!(m, p, "kind", str);
    let allowed: &[&str] = match kind {
        "basis_vector" => &["kind", "index"],
        "coherent" => &["kind", "alpha"],
        "coefficients_file" => &["kind", "path"],
        "random" => &["kind", "seed"],
        other => return Err(err(&child_pointer(p, "kind"), format!("unknown initial state kind {other:?}"))),
    };
    node.object(allowed)?;
    match kind {
        "basis_vector" => {
            let (v, f) = required(m, p, "index")?;
            let index = f.node(v).usize()?;
            StateVector::basis_vector(basis, index).map_err(numeric_at(&f.pointer))
        }
        "coherent" => {
            let (v, f) = required(m, p, "alpha")?;
            let alpha = f.node(v).array()?;
            if alpha.len() != 2 {
                return Err(err(&f.pointer, "expected [re, im]"));
            }
            let re = Field { pointer: child_pointer(&f.pointer, "0") }.node_f64(&alpha[0])?;
            let im = Field { pointer: child_pointer(&f.pointer, "1") }.node_f64(&alpha[1])?;
            coherent_state(basis, Complex64::new(re, im)).map_err(numeric_at(p))
        }
        "coefficients_file" => {
            let (v, f) = required(m, p, "path")?;
            let path = base.join(f.node(v).str()?);
            let json: StateJson = read_json(&path)?;
            let state = json.to_state().map_err(|m| CliError::Parse { path: path.clone(), message: m })?;
            if state.basis() != &basis {
                return Err(err(&f.pointer, "state file is on a different basis"));
            }
            Ok(state)
        }
        _ => {
            let s = opt_field!(m, p, "seed", u64).unwrap_or(seed);
            Ok(StateVector::random(basis, s))
        }
    }
}

impl Field {
    fn node_f64(&self, value: &Value) -> Result<f64, CliError> {
        self.node(value).f64()
    }
}

fn parse_integrator(node: Node<'_, '_>) -> Result<IntegratorSpec, CliError> {
    let m = node.object(&["method", "dt"])?;
    let (v, f) = required(m, node.pointer, "method")?;
    let name = f.node(v).str()?;
    let method = Method::from_name(name).ok_or_else(|| err(&f.pointer, format!("unknown method {name:?}")))?;
    let (v, f) = required(m, node.pointer, "dt")?;
    let dt = f.node(v).f64()?;
    IntegratorSpec::new(method, dt).map_err(numeric_at(&f.pointer))
}

fn parse_time(node: Node<'_, '_>) -> Result<TimeSpan, CliError> {
    let m = node.object(&["t0", "t1", "stride"])?;
    let t0 = opt_field!(m, node.pointer, "t0", f64).unwrap_or(0.0);
    let t1 = field!(m, node.pointer, "t1", f64);
    if t1 < t0 {
        return Err(err(&child_pointer(node.pointer, "t1"), "t1 must not precede t0"));
    }
    let stride = opt_field!(m, node.pointer, "stride", usize).unwrap_or(1);
    if stride == 0 {
        return Err(err(&child_pointer(node.pointer, "stride"), "stride must be positive"));
    }
    Ok(TimeSpan { t0, t1, stride })
}

fn parse_reduction(node: Node<'_, '_>) -> Result<ReductionSpec, CliError> {
    let m = node.object(&["mu", "dt_reduced", "k_reproj"])?;
    let mu = field!(m, node.pointer, "mu", f64);
    if mu >= 0.0 {
        return Err(err(&child_pointer(node.pointer, "mu"), "mu must be negative"));
    }
    let dt_reduced = field!(m, node.pointer, "dt_reduced", f64);
    if dt_reduced <= 0.0 {
        return Err(err(&child_pointer(node.pointer, "dt_reduced"), "dt_reduced must be positive"));
    }
    let k_reproj = opt_field!(m, node.pointer, "k_reproj", usize).unwrap_or(100);
    Ok(ReductionSpec { mu, dt_reduced, k_reproj })
}

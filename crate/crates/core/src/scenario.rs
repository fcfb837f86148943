//! Scenario files: UTF-8 JSON, complex numbers as `[re, im]` (a bare number
//! is read as real), matrices as row-major nested arrays, algebra elements
//! as coordinate arrays over the declared basis order.
//!
//! Every error names the JSON path of the offending value.

use std::fmt;
use std::path::Path;

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::curvature::VerticalOperator;
use crate::fgp::{ProjectiveModule, UniversalConnectionForm};
use crate::forms::UniversalOneForm;
use crate::linalg::{CMatrix, Grading, Tolerances, C64};
use crate::submersion::FramePoint;
use crate::triple::{AlgebraElement, SpectralTriple};

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for ScenarioError {}

fn err(path: &str, message: impl fmt::Display) -> ScenarioError {
    ScenarioError {
        path: path.to_string(),
        message: message.to_string(),
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub rank_tol: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    /// `sha256:<hex>` of the file bytes.
    pub digest: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub triple: SpectralTriple,
    pub module: Option<ProjectiveModule>,
    pub connection: Option<UniversalConnectionForm>,
    pub vertical: Option<VerticalOperator>,
    pub second_triple: Option<SpectralTriple>,
    pub frame: Option<FramePoint>,
    /// True when `frame` came from the canned catalog.
    pub canned_frame: bool,
}

impl Scenario {
    /// The connection, or `A = 0` on the module when none was given.
    pub fn connection_or_zero(&self) -> Option<UniversalConnectionForm> {
        let module = self.module.as_ref()?;
        Some(
            self.connection
                .clone()
                .unwrap_or_else(|| UniversalConnectionForm::zero(module.m(), self.triple.d())),
        )
    }
}

pub fn parse_scenario(path: &Path, overrides: Overrides) -> Result<Scenario, ScenarioError> {
    let bytes = std::fs::read(path).map_err(|e| err("$", format!("cannot read {}: {e}", path.display())))?;
    let fallback = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario").to_string();
    parse_bytes(&bytes, &fallback, overrides)
}

pub fn parse_bytes(bytes: &[u8], fallback_name: &str, overrides: Overrides) -> Result<Scenario, ScenarioError> {
    let text = std::str::from_utf8(bytes).map_err(|e| err("$", format!("not UTF-8: {e}")))?;
    let root: Value = serde_json::from_str(text).map_err(|e| err("$", format!("invalid JSON: {e}")))?;
    let digest = format!("sha256:{}", hex::encode(Sha256::digest(bytes)));
    let obj = object(&root, "$")?;

    let name = match obj.get("name") {
        Some(v) => v.as_str().ok_or_else(|| err("$.name", "expected a string"))?.to_string(),
        None => fallback_name.to_string(),
    };
    let seed = match (overrides.seed, obj.get("seed")) {
        (Some(s), _) => s,
        (None, Some(v)) => v.as_u64().ok_or_else(|| err("$.seed", "expected a non-negative integer"))?,
        (None, None) => 0,
    };
    let mut tolerances = Tolerances::default();
    if let Some(t) = obj.get("tolerances") {
        let t = object(t, "$.tolerances")?;
        if let Some(v) = t.get("rank") {
            tolerances.rank = positive(v, "$.tolerances.rank")?;
        }
        if let Some(v) = t.get("residual") {
            tolerances.residual = positive(v, "$.tolerances.residual")?;
        }
    }
    if let Some(t) = overrides.tol {
        tolerances.residual = t;
    }
    if let Some(t) = overrides.rank_tol {
        tolerances.rank = t;
    }

    let triple_value = obj.get("triple").ok_or_else(|| err("$.triple", "missing"))?;
    let triple = parse_triple(triple_value, "$.triple", tolerances)?;
    let second_triple = obj
        .get("second_triple")
        .map(|v| parse_triple(v, "$.second_triple", tolerances))
        .transpose()?;
    let module = obj.get("module").map(|v| parse_module(v, "$.module", &triple)).transpose()?;
    let connection = match obj.get("connection") {
        Some(v) => {
            let module = module.as_ref().ok_or_else(|| err("$.connection", "a connection needs a module"))?;
            Some(parse_connection(v, "$.connection", &triple, module)?)
        }
        None => None,
    };
    let vertical = match obj.get("vertical") {
        Some(v) => {
            let module = module.as_ref().ok_or_else(|| err("$.vertical", "a vertical operator needs a module"))?;
            Some(parse_vertical(v, "$.vertical", &triple, module)?)
        }
        None => None,
    };
    let (frame, canned_frame) = match obj.get("frame") {
        Some(v) => {
            let (f, canned) = parse_frame(v, "$.frame")?;
            (Some(f), canned)
        }
        None => (None, false),
    };
    Ok(Scenario {
        name,
        digest,
        seed,
        tolerances,
        triple,
        module,
        connection,
        vertical,
        second_triple,
        frame,
        canned_frame,
    })
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a serde_json::Map<String, Value>, ScenarioError> {
    v.as_object().ok_or_else(|| err(path, "expected an object"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, ScenarioError> {
    v.as_array().ok_or_else(|| err(path, "expected an array"))
}

fn field<'a>(obj: &'a serde_json::Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, ScenarioError> {
    obj.get(key).ok_or_else(|| err(&format!("{path}.{key}"), "missing"))
}

fn real(v: &Value, path: &str) -> Result<f64, ScenarioError> {
    let x = v.as_f64().ok_or_else(|| err(path, format!("expected a number, got {v}")))?;
    if !x.is_finite() {
        return Err(err(path, "number is not finite"));
    }
    Ok(x)
}

fn positive(v: &Value, path: &str) -> Result<f64, ScenarioError> {
    let x = real(v, path)?;
    if x <= 0.0 {
        return Err(err(path, "expected a positive number"));
    }
    Ok(x)
}

fn complex(v: &Value, path: &str) -> Result<C64, ScenarioError> {
    match v {
        Value::Number(_) => Ok(C64::new(real(v, path)?, 0.0)),
        Value::Array(parts) if parts.len() == 2 => Ok(C64::new(real(&parts[0], &format!("{path}[0]"))?, real(&parts[1], &format!("{path}[1]"))?)),
        _ => Err(err(path, format!("expected a complex number [re, im], got {v}"))),
    }
}

fn complex_vec(v: &Value, path: &str) -> Result<Vec<C64>, ScenarioError> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| complex(x, &format!("{path}[{i}]")))
        .collect()
}

/// Rectangular matrix of the given shape, or any shape when `None`.
fn matrix(v: &Value, path: &str, shape: Option<(usize, usize)>) -> Result<CMatrix, ScenarioError> {
    let rows = array(v, path)?;
    let parsed: Vec<Vec<C64>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| complex_vec(r, &format!("{path}[{i}]")))
        .collect::<Result<_, _>>()?;
    let nrows = parsed.len();
    let ncols = parsed.first().map_or(0, Vec::len);
    for (i, r) in parsed.iter().enumerate() {
        if r.len() != ncols {
            return Err(err(&format!("{path}[{i}]"), format!("ragged matrix: row has {} entries, row 0 has {ncols}", r.len())));
        }
    }
    if let Some((er, ec)) = shape {
        if (nrows, ncols) != (er, ec) {
            return Err(err(path, format!("expected a {er}x{ec} matrix, got {nrows}x{ncols}")));
        }
    }
    Ok(CMatrix::from_fn(nrows, ncols, |i, j| parsed[i][j]))
}

fn square(v: &Value, path: &str, n: Option<usize>) -> Result<CMatrix, ScenarioError> {
    let m = matrix(v, path, n.map(|n| (n, n)))?;
    if m.nrows() != m.ncols() {
        return Err(err(path, format!("expected a square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    if m.nrows() == 0 {
        return Err(err(path, "matrix is empty"));
    }
    Ok(m)
}

fn signs(v: &Value, path: &str) -> Result<Vec<f64>, ScenarioError> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let p = format!("{path}[{i}]");
            match real(x, &p)? {
                s if s == 1.0 || s == -1.0 => Ok(s),
                s => Err(err(&p, format!("grading sign must be 1 or -1, got {s}"))),
            }
        })
        .collect()
}

fn parse_triple(v: &Value, path: &str, tol: Tolerances) -> Result<SpectralTriple, ScenarioError> {
    let obj = object(v, path)?;
    let dirac = square(field(obj, "dirac", path)?, &format!("{path}.dirac"), None)?;
    let n = dirac.nrows();
    let gpath = format!("{path}.gamma");
    let gvalue = field(obj, "gamma", path)?;
    let gamma = match array(gvalue, &gpath)?.first() {
        Some(Value::Array(_)) => Grading::new(square(gvalue, &gpath, Some(n))?, tol.residual).map_err(|e| err(&gpath, e))?,
        _ => {
            let s = signs(gvalue, &gpath)?;
            if s.len() != n {
                return Err(err(&gpath, format!("expected {n} signs, got {}", s.len())));
            }
            Grading::from_signs(&s)
        }
    };
    let bpath = format!("{path}.basis");
    let basis = array(field(obj, "basis", path)?, &bpath)?
        .iter()
        .enumerate()
        .map(|(k, b)| square(b, &format!("{bpath}[{k}]"), Some(n)))
        .collect::<Result<Vec<_>, _>>()?;
    if basis.is_empty() {
        return Err(err(&bpath, "basis is empty"));
    }
    SpectralTriple::new(gamma, basis, dirac, tol).map_err(|e| err(path, e))
}

fn element(v: &Value, path: &str, d: usize) -> Result<AlgebraElement, ScenarioError> {
    let c = complex_vec(v, path)?;
    if c.len() != d {
        return Err(err(path, format!("expected {d} coordinates, got {}", c.len())));
    }
    Ok(AlgebraElement::from_slice(&c))
}

/// `m × m` table whose entries are parsed by `entry`.
fn table<T>(v: &Value, path: &str, m: usize, mut entry: impl FnMut(&Value, &str) -> Result<T, ScenarioError>) -> Result<Vec<T>, ScenarioError> {
    let rows = array(v, path)?;
    if rows.len() != m {
        return Err(err(path, format!("expected {m} rows, got {}", rows.len())));
    }
    let mut out = Vec::with_capacity(m * m);
    for (i, r) in rows.iter().enumerate() {
        let rp = format!("{path}[{i}]");
        let cols = array(r, &rp)?;
        if cols.len() != m {
            return Err(err(&rp, format!("expected {m} entries, got {}", cols.len())));
        }
        for (j, x) in cols.iter().enumerate() {
            out.push(entry(x, &format!("{rp}[{j}]"))?);
        }
    }
    Ok(out)
}

fn parse_module(v: &Value, path: &str, st: &SpectralTriple) -> Result<ProjectiveModule, ScenarioError> {
    let obj = object(v, path)?;
    let s = signs(field(obj, "grading", path)?, &format!("{path}.grading"))?;
    if s.is_empty() {
        return Err(err(&format!("{path}.grading"), "module needs at least one generator"));
    }
    let d = st.d();
    let entries = table(field(obj, "p", path)?, &format!("{path}.p"), s.len(), |x, p| element(x, p, d))?;
    ProjectiveModule::new(st, entries, s, st.tolerances().residual).map_err(|e| err(&format!("{path}.p"), e))
}

fn parse_connection(v: &Value, path: &str, st: &SpectralTriple, module: &ProjectiveModule) -> Result<UniversalConnectionForm, ScenarioError> {
    let obj = object(v, path)?;
    let hermitian = match obj.get("hermitian") {
        Some(h) => h.as_bool().ok_or_else(|| err(&format!("{path}.hermitian"), "expected a boolean"))?,
        None => false,
    };
    let d = st.d();
    let entries = table(field(obj, "entries", path)?, &format!("{path}.entries"), module.m(), |x, p| {
        Ok(UniversalOneForm::new(matrix(x, p, Some((d, d)))?))
    })?;
    UniversalConnectionForm::new(module.m(), entries, hermitian).map_err(|e| err(path, e))
}

fn parse_vertical(v: &Value, path: &str, st: &SpectralTriple, module: &ProjectiveModule) -> Result<VerticalOperator, ScenarioError> {
    let obj = object(v, path)?;
    let d = st.d();
    let entries = table(field(obj, "entries", path)?, &format!("{path}.entries"), module.m(), |x, p| element(x, p, d))?;
    VerticalOperator::new(st, module, entries, st.tolerances().residual).map_err(|e| err(path, e))
}

fn parse_frame(v: &Value, path: &str) -> Result<(FramePoint, bool), ScenarioError> {
    let obj = object(v, path)?;
    if let Some(name) = obj.get("canned") {
        let name = name.as_str().ok_or_else(|| err(&format!("{path}.canned"), "expected a string"))?;
        let num = |key: &str| real(field(obj, key, path)?, &format!("{path}.{key}"));
        let fp = match name {
            "heisenberg" => Ok(FramePoint::heisenberg()),
            "hopf" => FramePoint::hopf(num("lambda")?),
            "warped_torus" => FramePoint::warped_torus(num("f")?, num("f_prime")?),
            other => return Err(err(&format!("{path}.canned"), format!("unknown frame '{other}' (heisenberg, hopf, warped_torus)"))),
        };
        return fp.map(|f| (f, true)).map_err(|e| err(path, e));
    }
    let count = |key: &str| -> Result<usize, ScenarioError> {
        let p = format!("{path}.{key}");
        field(obj, key, path)?
            .as_u64()
            .map(|x| x as usize)
            .ok_or_else(|| err(&p, "expected a non-negative integer"))
    };
    let dim_m = count("dim_m")?;
    let dim_f = count("dim_f")?;
    let cpath = format!("{path}.c");
    let mut c = Vec::with_capacity(dim_m.pow(3));
    let slabs = array(field(obj, "c", path)?, &cpath)?;
    if slabs.len() != dim_m {
        return Err(err(&cpath, format!("expected {dim_m} slices, got {}", slabs.len())));
    }
    for (k, slab) in slabs.iter().enumerate() {
        let sp = format!("{cpath}[{k}]");
        let rows = array(slab, &sp)?;
        if rows.len() != dim_m {
            return Err(err(&sp, format!("expected {dim_m} rows, got {}", rows.len())));
        }
        for (i, row) in rows.iter().enumerate() {
            let rp = format!("{sp}[{i}]");
            let vals = array(row, &rp)?;
            if vals.len() != dim_m {
                return Err(err(&rp, format!("expected {dim_m} entries, got {}", vals.len())));
            }
            for (j, x) in vals.iter().enumerate() {
                c.push(real(x, &format!("{rp}[{j}]"))?);
            }
        }
    }
    FramePoint::new(dim_m, dim_f, c).map(|f| (f, false)).map_err(|e| err(path, e))
}

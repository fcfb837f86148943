//! Result documents. Output is a pure function of command, scenario bytes,
//! seed and version: maps are ordered and matrices are printed with a
//! fixed 17-significant-digit format.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::value::RawValue;

use crate::check::Check;
use crate::linalg::CMatrix;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Row-major matrix of `[re, im]` pairs, pre-rendered.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixDump {
    pub rows: usize,
    pub cols: usize,
    pub data: Box<RawValue>,
}

fn fixed(x: f64) -> String {
    // both signed zeros print as +0; non-finite entries become null
    if !x.is_finite() {
        "null".to_string()
    } else if x == 0.0 {
        "0.0000000000000000e0".to_string()
    } else {
        format!("{x:.16e}")
    }
}

impl MatrixDump {
    pub fn new(m: &CMatrix) -> Self {
        let mut s = String::from("[");
        for i in 0..m.nrows() {
            if i > 0 {
                s.push(',');
            }
            s.push('[');
            for j in 0..m.ncols() {
                if j > 0 {
                    s.push(',');
                }
                let z = m[(i, j)];
                let _ = write!(s, "[{},{}]", fixed(z.re), fixed(z.im));
            }
            s.push(']');
        }
        s.push(']');
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data: RawValue::from_string(s).expect("well-formed matrix literal"),
        }
    }
}

fn positive_zeros(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) if n.as_f64() == Some(0.0) && n.is_f64() => *v = serde_json::json!(0.0),
        serde_json::Value::Array(xs) => xs.iter_mut().for_each(positive_zeros),
        serde_json::Value::Object(m) => m.values_mut().for_each(positive_zeros),
        _ => {}
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultDocument {
    pub version: &'static str,
    pub command: String,
    pub scenario: String,
    pub digest: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub norms: BTreeMap<String, f64>,
    pub dims: BTreeMap<String, usize>,
    pub values: BTreeMap<String, serde_json::Value>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub matrices: BTreeMap<String, MatrixDump>,
    pub notes: Vec<String>,
}

impl ResultDocument {
    pub fn new(command: &str, scenario: &str, digest: &str, seed: u64) -> Self {
        Self {
            version: VERSION,
            command: command.to_string(),
            scenario: scenario.to_string(),
            digest: digest.to_string(),
            seed,
            passed: true,
            checks: Vec::new(),
            norms: BTreeMap::new(),
            dims: BTreeMap::new(),
            values: BTreeMap::new(),
            matrices: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn check(&mut self, c: Check) {
        self.passed &= c.passed;
        self.checks.push(c);
    }

    pub fn checks(&mut self, cs: impl IntoIterator<Item = Check>) {
        for c in cs {
            self.check(c);
        }
    }

    pub fn norm(&mut self, name: &str, x: f64) {
        self.norms.insert(name.to_string(), x);
    }

    pub fn dim(&mut self, name: &str, d: usize) {
        self.dims.insert(name.to_string(), d);
    }

    pub fn value(&mut self, name: &str, v: impl Serialize) {
        let mut v = serde_json::to_value(v).expect("plain data serializes");
        positive_zeros(&mut v);
        self.values.insert(name.to_string(), v);
    }

    pub fn matrix(&mut self, name: &str, m: &CMatrix) {
        self.matrices.insert(name.to_string(), MatrixDump::new(m));
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result document serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "ncurv {} {} {}", self.version, self.command, self.scenario);
        let _ = writeln!(s, "digest {}", self.digest);
        let _ = writeln!(s, "seed {}", self.seed);
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "[{tag}] {} residual={:e} threshold={:e}", c.name, c.residual, c.threshold);
        }
        for (k, v) in &self.dims {
            let _ = writeln!(s, "dim {k} = {v}");
        }
        for (k, v) in &self.norms {
            let _ = writeln!(s, "norm {k} = {v:e}");
        }
        for (k, v) in &self.values {
            let _ = writeln!(s, "value {k} = {v}");
        }
        for (k, m) in &self.matrices {
            let _ = writeln!(s, "matrix {k} ({}x{}) = {}", m.rows, m.cols, m.data.get());
        }
        for n in &self.notes {
            let _ = writeln!(s, "note {n}");
        }
        let _ = writeln!(s, "status {}", if self.passed { "PASS" } else { "FAIL" });
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;

    #[test]
    fn matrix_dump_is_fixed_width() {
        let m = CMatrix::from_row_slice(1, 2, &[C64::new(1.0, -0.0), C64::new(1.0 / 3.0, 2.5)]);
        let d = MatrixDump::new(&m);
        assert_eq!(
            d.data.get(),
            "[[[1.0000000000000000e0,0.0000000000000000e0],[3.3333333333333331e-1,2.5000000000000000e0]]]"
        );
    }

    #[test]
    fn negative_zero_values_print_positive() {
        let mut doc = ResultDocument::new("submersion", "x", "sha256:00", 0);
        doc.value("k", vec![-0.0, 1.5]);
        assert_eq!(doc.values["k"].to_string(), "[0.0,1.5]");
    }

    #[test]
    fn failing_check_flips_status() {
        let mut doc = ResultDocument::new("validate", "x", "sha256:00", 0);
        doc.check(Check::at_most("a", 0.0, 1.0));
        assert!(doc.passed);
        doc.check(Check::at_most("b", 2.0, 1.0));
        assert!(!doc.passed);
        assert!(doc.to_text().ends_with("status FAIL\n"));
        let json: serde_json::Value = serde_json::from_str(&doc.to_json()).unwrap();
        assert_eq!(json["checks"][1]["passed"], false);
    }
}

use std::io::Write;
use std::str::FromStr;

use serde_json::{Map, Number, Value};

/// Float rendered with 17 significant digits; non-finite values become null.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&format!("{:.16e}", x + 0.0)).expect("valid number literal"))
    } else {
        Value::Null
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub value: Value,
    pub expected: Value,
    pub tol: Value,
    pub pass: bool,
}

impl CheckResult {
    /// `value <= tol`, reported against an expected value of zero.
    pub fn at_most(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value: num(value),
            expected: num(0.0),
            tol: num(tol),
            pass: value <= tol,
        }
    }

    /// `|value - expected| <= tol`.
    pub fn close(name: impl Into<String>, value: f64, expected: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value: num(value),
            expected: num(expected),
            tol: num(tol),
            pass: (value - expected).abs() <= tol,
        }
    }

    pub fn flag(name: impl Into<String>, value: bool, expected: bool) -> Self {
        Self {
            name: name.into(),
            value: Value::Bool(value),
            expected: Value::Bool(expected),
            tol: Value::Null,
            pass: value == expected,
        }
    }

    pub fn count(name: impl Into<String>, value: usize, expected: usize) -> Self {
        Self {
            name: name.into(),
            value: Value::from(value),
            expected: Value::from(expected),
            tol: Value::Null,
            pass: value == expected,
        }
    }

    pub fn tally(name: impl Into<String>, value: usize) -> Self {
        Self {
            name: name.into(),
            value: Value::from(value),
            expected: Value::Null,
            tol: Value::Null,
            pass: true,
        }
    }

    /// A recorded quantity with no pass criterion.
    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value: num(value),
            expected: Value::Null,
            tol: Value::Null,
            pass: true,
        }
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("name".into(), Value::String(self.name.clone()));
        m.insert("value".into(), self.value.clone());
        m.insert("expected".into(), self.expected.clone());
        m.insert("tol".into(), self.tol.clone());
        m.insert("pass".into(), Value::Bool(self.pass));
        Value::Object(m)
    }
}

/// Rows of a scan, one cell per column.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub config: Map<String, Value>,
    pub results: Vec<CheckResult>,
    pub table: Option<Table>,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| !r.pass)
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), Value::String(self.command.clone()));
        m.insert("config".into(), Value::Object(self.config.clone()));
        m.insert(
            "results".into(),
            Value::Array(self.results.iter().map(CheckResult::to_json).collect()),
        );
        m.insert("pass".into(), Value::Bool(self.pass()));
        Value::Object(m)
    }

    pub fn write_json(&self, out: &mut dyn Write) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut *out, &self.to_json())?;
        out.write_all(b"\n")
    }

    /// The scan table when there is one, otherwise the check list.
    pub fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        match &self.table {
            Some(t) => {
                w.write_record(&t.columns)?;
                for row in &t.rows {
                    w.write_record(row.iter().map(cell))?;
                }
            }
            None => {
                w.write_record(["name", "value", "expected", "tol", "pass"])?;
                for r in &self.results {
                    w.write_record([
                        r.name.clone(),
                        cell(&r.value),
                        cell(&r.expected),
                        cell(&r.tol),
                        r.pass.to_string(),
                    ])?;
                }
            }
        }
        w.flush()
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        assert_eq!(num(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(num(f64::NAN), Value::Null);
        let back: f64 = num(std::f64::consts::PI).to_string().parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn csv_uses_newline_terminator() {
        let rep = Report {
            command: "x".into(),
            config: Map::new(),
            results: vec![CheckResult::at_most("r", 0.5, 1.0)],
            table: None,
        };
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("name,value,expected,tol,pass\n"));
        assert!(!text.contains('\r'));
        assert!(rep.pass());
    }
}

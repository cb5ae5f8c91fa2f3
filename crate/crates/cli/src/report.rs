//! Deterministic JSON reports and RFC-4180 CSV tables.

use serde_json::{Map, Value};

/// Significant digits kept for floating-point output.
pub const FLOAT_DIGITS: usize = 12;

/// `x` rounded to [`FLOAT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", FLOAT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// JSON number for a finite float, or the strings `inf`, `-inf`, `nan`.
pub fn num(x: f64) -> Value {
    if x.is_nan() {
        Value::from("nan")
    } else if x.is_infinite() {
        Value::from(if x > 0.0 { "inf" } else { "-inf" })
    } else {
        serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number)
    }
}

/// Float text used in CSV cells.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e12) {
        format!("{:e}", round_sig(x))
    } else {
        round_sig(x).to_string()
    }
}

/// Rounds every float inside a serialized value.
pub fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => num(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(items) => Value::Array(items.into_iter().map(normalize).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}

/// Serializes any report fragment with rounded floats.
pub fn to_value<T: serde::Serialize>(x: &T) -> Value {
    normalize(serde_json::to_value(x).unwrap_or(Value::Null))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }
}

/// Outcome of one command: assertions, result data and optional tables.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: String,
    pub config: String,
    pub seed: u64,
    pub mode: String,
    pub checks: Vec<Check>,
    pub results: Map<String, Value>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(command: &str, config: String, seed: u64, mode: &str) -> Self {
        Report {
            command: command.into(),
            config,
            seed,
            mode: mode.into(),
            checks: Vec::new(),
            results: Map::new(),
            tables: Vec::new(),
        }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: Value) {
        self.checks.push(Check { name: name.into(), passed, detail });
    }

    pub fn result(&mut self, key: &str, v: Value) {
        self.results.insert(key.into(), v);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }

    pub fn to_json_value(&self) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| serde_json::json!({"name": c.name, "passed": c.passed, "detail": c.detail}))
            .collect();
        let tables: Vec<Value> = self.tables.iter().map(|t| Value::from(t.name.clone())).collect();
        serde_json::json!({
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "mode": self.mode,
            "passed": self.passed(),
            "failures": self.failures(),
            "checks": checks,
            "results": Value::Object(self.results.clone()),
            "tables": tables,
        })
    }

    /// Writes `<command>.json` and one `<command>_<table>.csv` per table.
    pub fn write_to(&self, dir: &std::path::Path) -> std::io::Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let json = dir.join(format!("{}.json", self.command));
        std::fs::write(&json, self.to_json())?;
        let mut written = vec![json];
        for t in &self.tables {
            let p = dir.join(format!("{}_{}.csv", self.command, t.name));
            std::fs::write(&p, t.to_csv())?;
            written.push(p);
        }
        Ok(written)
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("report serializes");
        s.push('\n');
        s
    }
}

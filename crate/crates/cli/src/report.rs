use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Map, Value};

pub const SCHEMA: u64 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub measured: f64,
    pub limit: f64,
    /// `"max"` when `measured ≤ limit` is required, `"min"` for `measured ≥ limit`.
    pub kind: &'static str,
    pub passed: bool,
}

/// Everything a subcommand reports: its resolved inputs, measured values and
/// the pass/fail checks built from them.
#[derive(Clone, Debug)]
pub struct Report {
    pub subcommand: String,
    pub inputs: Map<String, Value>,
    pub results: Map<String, Value>,
    pub checks: Vec<(String, Check)>,
}

impl Report {
    pub fn new(subcommand: &str) -> Self {
        Report {
            subcommand: subcommand.to_string(),
            inputs: Map::new(),
            results: Map::new(),
            checks: Vec::new(),
        }
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) {
        self.inputs.insert(key.to_string(), to_value(value));
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(key.to_string(), to_value(value));
    }

    pub fn at_most(&mut self, name: &str, measured: f64, limit: f64) {
        let passed = measured <= limit;
        self.checks.push((name.to_string(), Check { measured, limit, kind: "max", passed }));
    }

    pub fn at_least(&mut self, name: &str, measured: f64, limit: f64) {
        let passed = measured >= limit;
        self.checks.push((name.to_string(), Check { measured, limit, kind: "min", passed }));
    }

    pub fn holds(&mut self, name: &str, ok: bool) {
        let measured = if ok { 1.0 } else { 0.0 };
        self.at_least(name, measured, 1.0);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, c)| c.passed)
    }

    pub fn to_json(&self) -> Value {
        let checks: Map<String, Value> = self.checks.iter().map(|(k, c)| (k.clone(), to_value(c))).collect();
        json!({
            "schema": SCHEMA,
            "subcommand": self.subcommand,
            "inputs": self.inputs,
            "results": self.results,
            "checks": checks,
            "passed": self.passed(),
        })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report values are finite JSON");
                s.push('\n');
                s
            }
            Format::Csv => to_csv(&self.to_json()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

fn to_value(value: impl Serialize) -> Value {
    sanitize(serde_json::to_value(value).expect("serializable report value"))
}

/// JSON has no NaN or infinity; those become strings.
fn sanitize(v: Value) -> Value {
    match v {
        Value::Array(items) => Value::Array(items.into_iter().map(sanitize).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, sanitize(v))).collect()),
        Value::Null => Value::String("NaN".into()),
        other => other,
    }
}

fn is_table(v: &Value) -> bool {
    match v {
        Value::Array(rows) => {
            !rows.is_empty()
                && rows.iter().all(|r| r.as_object().is_some_and(|o| o.values().all(is_scalar)))
                && rows.windows(2).all(|w| keys(&w[0]) == keys(&w[1]))
        }
        _ => false,
    }
}

fn keys(v: &Value) -> Vec<&String> {
    v.as_object().map(|o| o.keys().collect()).unwrap_or_default()
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>, tables: &mut Vec<(String, Vec<Value>)>) {
    match v {
        Value::Object(map) => {
            for (k, item) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, item, rows, tables);
            }
        }
        Value::Array(items) if is_table(v) => tables.push((prefix.to_string(), items.clone())),
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), item, rows, tables);
            }
        }
        scalar => rows.push((prefix.to_string(), scalar_text(scalar))),
    }
}

/// `key,value` lines for every scalar, followed by one headed block per
/// array of flat records.
fn to_csv(report: &Value) -> String {
    let (mut rows, mut tables) = (Vec::new(), Vec::new());
    flatten("", report, &mut rows, &mut tables);
    let mut out = String::from("key,value\n");
    for (k, v) in rows {
        let _ = writeln!(out, "{k},{v}");
    }
    for (name, items) in tables {
        let header: Vec<&String> = keys(&items[0]);
        let _ = writeln!(out, "\n# {name}");
        let _ = writeln!(out, "{}", header.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(","));
        for item in &items {
            let obj = item.as_object().expect("table rows are objects");
            let line: Vec<String> = header.iter().map(|k| scalar_text(&obj[k.as_str()])).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passed_requires_every_check() {
        let mut r = Report::new("demo");
        r.at_most("a", 1e-9, 1e-6);
        r.at_least("b", 3.0, 2.0);
        assert!(r.passed());
        r.holds("c", false);
        assert!(!r.passed());
    }

    #[test]
    fn csv_splits_tables_from_scalars() {
        let mut r = Report::new("demo");
        r.input("seed", 3);
        r.result("rows", vec![json!({"t": 0.0, "v": 1.0}), json!({"t": 1.0, "v": 0.5})]);
        let csv = r.render(Format::Csv);
        assert!(csv.contains("inputs.seed,3\n"));
        assert!(csv.contains("# results.rows\nt,v\n0.0,1.0\n1.0,0.5\n"));
    }

    #[test]
    fn non_finite_values_become_strings() {
        let mut r = Report::new("demo");
        r.result("x", f64::NAN);
        assert_eq!(r.to_json()["results"]["x"], json!("NaN"));
    }
}

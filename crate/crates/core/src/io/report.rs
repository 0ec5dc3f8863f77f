//! Output files: flat JSON objects and CSV tables with a provenance line.
//!
//! Numbers are written with 17 significant digits (`{:.16e}`) so identical
//! runs give identical bytes. Non-finite numbers are `null` in JSON and
//! `inf`/`NaN` in CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use super::config::RunConfig;
use crate::error::{Error, Result};

pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Hex SHA-256 of the canonical config text.
pub fn config_hash(config: &RunConfig) -> String {
    Sha256::digest(config.canonical().as_bytes())
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

#[derive(Clone, Debug, PartialEq)]
pub enum JsonValue {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    /// Numbers with `None` for `null`.
    Nums(Vec<Option<f64>>),
    Strs(Vec<String>),
}

/// One flat JSON object. Keys are written in sorted order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct JsonReport {
    pub entries: BTreeMap<String, JsonValue>,
}

impl JsonReport {
    /// Starts a report with `kind`, `version` and `config_hash`.
    pub fn new(kind: &str, hash: &str) -> JsonReport {
        let mut r = JsonReport::default();
        r.str("kind", kind).str("version", crate::VERSION).str("config_hash", hash);
        r
    }

    pub fn num(&mut self, key: &str, v: f64) -> &mut Self {
        let v = if v.is_finite() { JsonValue::Num(v) } else { JsonValue::Null };
        self.entries.insert(key.into(), v);
        self
    }

    pub fn int(&mut self, key: &str, v: i64) -> &mut Self {
        self.entries.insert(key.into(), JsonValue::Int(v));
        self
    }

    pub fn bool(&mut self, key: &str, v: bool) -> &mut Self {
        self.entries.insert(key.into(), JsonValue::Bool(v));
        self
    }

    pub fn str(&mut self, key: &str, v: &str) -> &mut Self {
        self.entries.insert(key.into(), JsonValue::Str(v.into()));
        self
    }

    pub fn nums(&mut self, key: &str, v: &[f64]) -> &mut Self {
        self.opt_nums(key, &v.iter().map(|&x| Some(x)).collect::<Vec<_>>())
    }

    pub fn opt_nums(&mut self, key: &str, v: &[Option<f64>]) -> &mut Self {
        let v = v.iter().map(|x| x.filter(|x| x.is_finite())).collect();
        self.entries.insert(key.into(), JsonValue::Nums(v));
        self
    }

    pub fn strs(&mut self, key: &str, v: &[&str]) -> &mut Self {
        self.entries.insert(key.into(), JsonValue::Strs(v.iter().map(|s| s.to_string()).collect()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&JsonValue> {
        self.entries.get(key)
    }

    /// Number or `Int`; `null` reads as NaN.
    pub fn get_num(&self, key: &str) -> Option<f64> {
        match self.entries.get(key)? {
            JsonValue::Num(v) => Some(*v),
            JsonValue::Int(v) => Some(*v as f64),
            JsonValue::Null => Some(f64::NAN),
            _ => None,
        }
    }

    pub fn get_bool(&self, key: &str) -> Option<bool> {
        match self.entries.get(key)? {
            JsonValue::Bool(v) => Some(*v),
            _ => None,
        }
    }

    pub fn get_nums(&self, key: &str) -> Option<&[Option<f64>]> {
        match self.entries.get(key)? {
            JsonValue::Nums(v) => Some(v),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = String::from("{\n");
        let last = self.entries.len().saturating_sub(1);
        for (k, (key, v)) in self.entries.iter().enumerate() {
            let _ = write!(s, "  {}: {}", quote(key), render(v));
            s.push_str(if k == last { "\n" } else { ",\n" });
        }
        s.push_str("}\n");
        s
    }
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialise")
}

fn render(v: &JsonValue) -> String {
    let num = |x: &Option<f64>| x.map_or("null".to_string(), fmt_num);
    match v {
        JsonValue::Null => "null".into(),
        JsonValue::Bool(b) => b.to_string(),
        JsonValue::Int(i) => i.to_string(),
        JsonValue::Num(x) => num(&Some(*x).filter(|x| x.is_finite())),
        JsonValue::Str(s) => quote(s),
        JsonValue::Nums(xs) => format!("[{}]", xs.iter().map(num).collect::<Vec<_>>().join(", ")),
        JsonValue::Strs(xs) => format!("[{}]", xs.iter().map(|s| quote(s)).collect::<Vec<_>>().join(", ")),
    }
}

/// Reads a flat report: scalars, or arrays of numbers/nulls or of strings.
pub fn parse_report_json(text: &str) -> Result<JsonReport> {
    use serde_json::Value;
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let Value::Object(map) = value else {
        return Err(Error::Parse("report must be a JSON object".into()));
    };
    let mut out = JsonReport::default();
    for (key, v) in map {
        let entry = match v {
            Value::Null => JsonValue::Null,
            Value::Bool(b) => JsonValue::Bool(b),
            Value::Number(n) => match n.as_i64() {
                Some(i) => JsonValue::Int(i),
                None => JsonValue::Num(n.as_f64().ok_or_else(|| Error::Parse(format!("{key}: bad number")))?),
            },
            Value::String(s) => JsonValue::Str(s),
            Value::Array(items) if items.iter().all(Value::is_string) && !items.is_empty() => {
                JsonValue::Strs(items.into_iter().map(|s| s.as_str().unwrap_or_default().to_string()).collect())
            }
            Value::Array(items) => JsonValue::Nums(
                items
                    .into_iter()
                    .map(|x| match x {
                        Value::Null => Ok(None),
                        Value::Number(n) => Ok(n.as_f64()),
                        _ => Err(Error::Parse(format!("{key}: arrays hold numbers or strings"))),
                    })
                    .collect::<Result<_>>()?,
            ),
            Value::Object(_) => return Err(Error::Parse(format!("{key}: nested objects are not allowed"))),
        };
        out.entries.insert(key, entry);
    }
    Ok(out)
}

/// A CSV table preceded by `# nematic <version> config=<hash>`.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryTable {
    pub version: String,
    pub config_hash: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl SummaryTable {
    pub fn new(hash: &str, header: &[&str]) -> SummaryTable {
        SummaryTable {
            version: crate::VERSION.into(),
            config_hash: hash.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&v| fmt_num(v)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    /// Numeric values of one column.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("no column {name}")))?;
        self.rows
            .iter()
            .map(|r| r[k].parse::<f64>().map_err(|e| Error::Parse(format!("{name}: {e}"))))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# nematic {} config={}\n{}\n", self.version, self.config_hash, self.header.join(","));
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

pub fn parse_summary_csv(text: &str) -> Result<SummaryTable> {
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| Error::Parse("empty file".into()))?;
    let rest = first
        .strip_prefix("# nematic ")
        .ok_or_else(|| Error::Parse("missing provenance line".into()))?;
    let (version, hash) = rest
        .split_once(" config=")
        .ok_or_else(|| Error::Parse("provenance line lacks config=".into()))?;
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Parse("missing header".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    if header.iter().any(|h| h.is_empty()) {
        return Err(Error::Parse("empty column name".into()));
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let row: Vec<String> = line.split(',').map(str::to_string).collect();
        if row.len() != header.len() {
            return Err(Error::Parse(format!(
                "row {} has {} cells, header has {}",
                k + 1,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok(SummaryTable { version: version.into(), config_hash: hash.into(), header, rows })
}

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};
use stoqbell::optimizer::format_sig;

/// Significant digits of every floating-point output.
pub const DIGITS: usize = 12;

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub params: Value,
    pub version: String,
    pub seed: Option<u64>,
    pub timestamp: String,
}

impl Manifest {
    pub fn new(command: &str, params: Value, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            params,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

/// Rounds every float in `v` to [`DIGITS`] significant digits.
pub fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n
                .as_f64()
                .and_then(|x| format_sig(x, DIGITS).parse::<f64>().ok())
                .and_then(serde_json::Number::from_f64)
            {
                *n = r;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_floats),
        Value::Object(o) => o.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// `{"manifest": …, <fields>…}` with rounded floats, pretty-printed.
pub fn document(manifest: &Manifest, fields: Vec<(&str, Value)>) -> serde_json::Result<String> {
    let mut map = Map::new();
    map.insert("manifest".into(), serde_json::to_value(manifest)?);
    for (k, v) in fields {
        map.insert(k.into(), v);
    }
    let mut doc = Value::Object(map);
    round_floats(&mut doc);
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

/// Writes to `out`, or to stdout when absent.
pub fn emit(out: Option<&Path>, text: &str) -> std::io::Result<()> {
    match out {
        Some(p) => fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

/// `data.csv` → `data.csv.manifest.json`.
pub fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn sig(x: f64) -> String {
    format_sig(x, DIGITS)
}

use std::fs;
use std::io::Write;
use std::path::Path;

use hyperqkd::numfmt::{fmt_sig, round_sig};
use serde::Serialize;
use serde_json::Value;

use crate::spec::RunSpec;
use crate::CliError;

/// One line of the self-describing header that opens every output file.
pub fn header_line(spec: &RunSpec) -> Result<String, CliError> {
    Ok(format!("# run_spec: {}", to_json_compact(spec)?))
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n
                .as_f64()
                .map(round_sig)
                .and_then(serde_json::Number::from_f64)
            {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Serializes with every real rounded to 12 significant digits.
pub fn to_json_value<T: Serialize>(value: &T) -> Result<Value, CliError> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v);
    Ok(v)
}

pub fn to_json_compact<T: Serialize>(value: &T) -> Result<String, CliError> {
    Ok(serde_json::to_string(&to_json_value(value)?)?)
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(&to_json_value(value)?)? + "\n")
}

/// A CSV cell for an optional real.
pub fn num(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Writes to `path`, or stdout when absent.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, contents),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_reals_are_rounded() {
        let s = to_json_compact(&serde_json::json!({"a": 1.0 / 3.0, "b": [0.1, 2], "c": null}))
            .unwrap();
        assert_eq!(s, r#"{"a":0.333333333333,"b":[0.1,2],"c":null}"#);
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("eta=1"), "eta=1");
        assert_eq!(csv_field("P[0,1]"), "\"P[0,1]\"");
    }
}

//! JSON/CSV serialization and fixed-precision number rendering.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::array::{ComplexGrid, Signal, TfMatrix};
use crate::error::{Result, TfqError};
use crate::phasespace::Grid;

/// Significant digits used for every number written by the CLI.
pub const SIG_DIGITS: usize = 12;

/// Fixed-point decimal with [`SIG_DIGITS`] significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return format!("{:.*}", SIG_DIGITS - 1, 0.0);
    }
    let mag = x.abs().log10().floor() as i64;
    let decimals = (SIG_DIGITS as i64 - 1 - mag).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    // Rounding can produce "-0.000…".
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Rounds every float in `v` to [`SIG_DIGITS`] significant digits and
/// renders it as pretty JSON with a trailing newline.
pub fn render_json(v: &Value) -> String {
    let mut out = serde_json::to_string_pretty(&round_floats(v)).expect("values are finite");
    out.push('\n');
    out
}

fn round_floats(v: &Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(0.0);
            fmt_sig(x).parse::<f64>().map(|r| json!(r)).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.iter().map(round_floats).collect()),
        Value::Object(m) => Value::Object(m.iter().map(|(k, x)| (k.clone(), round_floats(x))).collect()),
        other => other.clone(),
    }
}

fn pair(c: Complex64) -> Value {
    json!([c.re, c.im])
}

fn parse_pair(v: &Value) -> Result<Complex64> {
    let bad = || TfqError::InvalidArgument(format!("expected [re, im] pair, got {v}"));
    let a = v.as_array().ok_or_else(bad)?;
    if a.len() != 2 {
        return Err(bad());
    }
    let re = a[0].as_f64().ok_or_else(bad)?;
    let im = a[1].as_f64().ok_or_else(bad)?;
    Ok(Complex64::new(re, im))
}

/// Signal as a JSON array of `[re, im]` pairs.
pub fn signal_to_json(f: &Signal) -> Value {
    Value::Array(f.as_slice().iter().copied().map(pair).collect())
}

pub fn signal_from_json(v: &Value) -> Result<Signal> {
    let a = v
        .as_array()
        .ok_or_else(|| TfqError::InvalidArgument("signal must be a JSON array".into()))?;
    Signal::new(a.iter().map(parse_pair).collect::<Result<_>>()?)
}

/// Grid table as `{"N": n, "layout": "x-major", "values": [[re, im], …]}`.
pub fn grid_to_json(t: &ComplexGrid) -> Value {
    json!({
        "N": t.n(),
        "layout": "x-major",
        "values": t.as_slice().iter().copied().map(pair).collect::<Vec<_>>(),
    })
}

pub fn grid_from_json(v: &Value) -> Result<ComplexGrid> {
    let n = v["N"]
        .as_u64()
        .ok_or_else(|| TfqError::InvalidArgument("missing integer field N".into()))?;
    if v["layout"] != "x-major" {
        return Err(TfqError::InvalidArgument("layout must be \"x-major\"".into()));
    }
    let vals = v["values"]
        .as_array()
        .ok_or_else(|| TfqError::InvalidArgument("missing values array".into()))?;
    let data = vals.iter().map(parse_pair).collect::<Result<Vec<_>>>()?;
    ComplexGrid::from_vec(Grid::new(n as usize)?, data)
}

/// Grid table as CSV with columns `x, omega, re, im` in x-major order.
pub fn grid_to_csv(t: &TfMatrix) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let map_err = |e: csv::Error| TfqError::InvalidArgument(e.to_string());
    w.write_record(["x", "omega", "re", "im"]).map_err(map_err)?;
    let n = t.n();
    for x in 0..n {
        for om in 0..n {
            let v = t.get(x, om);
            w.write_record([x.to_string(), om.to_string(), fmt_sig(v.re), fmt_sig(v.im)])
                .map_err(map_err)?;
        }
    }
    finish_csv(w)
}

pub(crate) fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| TfqError::InvalidArgument(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| TfqError::InvalidArgument(e.to_string()))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|source| TfqError::Io {
                path: dir.display().to_string(),
                source,
            })?;
        }
    }
    fs::write(path, contents).map_err(|source| TfqError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| TfqError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_grid, random_signal, seeded};

    #[test]
    fn sig_digits() {
        assert_eq!(fmt_sig(1.0), "1.00000000000");
        assert_eq!(fmt_sig(123.456), "123.456000000");
        assert_eq!(fmt_sig(0.00123), "0.00123000000000");
        assert_eq!(fmt_sig(0.0), "0.00000000000");
        assert_eq!(fmt_sig(-2.5e3), "-2500.00000000");
        assert_eq!(fmt_sig(-1e-300).len(), fmt_sig(1e-300).len() + 1);
        assert_eq!(fmt_sig(f64::INFINITY), "inf");
        assert_eq!(fmt_sig(1.5e13), "15000000000000");
    }

    #[test]
    fn json_round_trips() {
        let g = Grid::new(4).unwrap();
        let mut r = seeded(1);
        let f = random_signal(g, &mut r);
        assert_eq!(signal_from_json(&signal_to_json(&f)).unwrap(), f);
        let t = random_grid(g, &mut r);
        let j = grid_to_json(&t);
        assert_eq!(j["N"], 4);
        assert_eq!(j["layout"], "x-major");
        assert_eq!(grid_from_json(&j).unwrap(), t);
        assert!(signal_from_json(&json!([[1.0]])).is_err());
    }

    #[test]
    fn csv_layout() {
        let g = Grid::new(2).unwrap();
        let t = ComplexGrid::from_fn(g, |x, om| Complex64::new((2 * x + om) as f64, 0.0));
        let s = grid_to_csv(&t).unwrap();
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], "x,omega,re,im");
        assert_eq!(lines[2], "0,1,1.00000000000,0.00000000000");
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn rendered_json_is_rounded() {
        let s = render_json(&json!({"a": 0.1 + 0.2, "b": [1, 2.5e-20], "c": "x"}));
        assert!(s.contains("0.3"), "{s}");
        assert!(!s.contains("0.30000000000000004"));
        assert!(s.ends_with("}\n"));
    }

    #[test]
    fn io_errors_carry_path() {
        let e = read_file(Path::new("/nonexistent/dir/file.json")).unwrap_err();
        assert!(e.to_string().contains("/nonexistent/dir/file.json"));
    }
}

//! JSON and Matrix Market serialization.
//!
//! Matrix Market files carry exact rationals in `%rational i j num den`
//! comment lines next to the float data, so standard readers still see a
//! plain real matrix.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

use super::{Mode, NonnegMatrix, RationalMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    MatrixMarket,
    Json,
}

impl Format {
    /// `.mtx`/`.mm` select Matrix Market, everything else JSON.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("mtx") | Some("mm") => Format::MatrixMarket,
            _ => Format::Json,
        }
    }
}

pub fn load_matrix(path: &Path, format: Format) -> Result<NonnegMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        Format::Json => parse_json(&text),
        Format::MatrixMarket => parse_matrix_market(&text),
    }
}

pub fn save_matrix(m: &NonnegMatrix, path: &Path, format: Format) -> Result<()> {
    let text = match format {
        Format::Json => to_json_string(m),
        Format::MatrixMarket => to_matrix_market(m),
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn int_value(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

pub fn to_json_string(m: &NonnegMatrix) -> String {
    let n = m.n();
    let rows: Vec<Value> = match m.exact() {
        Some(q) => (0..n)
            .map(|i| {
                Value::Array(
                    (0..n)
                        .map(|j| {
                            let e = q.get(i, j);
                            json!([int_value(e.numer()), int_value(e.denom())])
                        })
                        .collect(),
                )
            })
            .collect(),
        None => (0..n)
            .map(|i| json!((0..n).map(|j| m.get(i, j)).collect::<Vec<f64>>()))
            .collect(),
    };
    let doc = json!({ "n": n, "mode": m.mode(), "rows": rows });
    let mut s = serde_json::to_string(&doc).expect("json values serialize");
    s.push('\n');
    s
}

fn json_int(v: &Value) -> Option<BigInt> {
    match v {
        Value::Number(x) => x.as_i64().map(BigInt::from),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

fn parse_json(text: &str) -> Result<NonnegMatrix> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| Error::format(e.line(), e.to_string()))?;
    let bad = |msg: &str| Error::format(1, msg.to_string());
    let n = doc
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| bad("missing integer field \"n\""))? as usize;
    let mode = match doc.get("mode").and_then(Value::as_str) {
        None | Some("float") => Mode::Float,
        Some("rational") => Mode::Rational,
        Some(other) => return Err(bad(&format!("unknown mode \"{other}\""))),
    };
    let rows = doc
        .get("rows")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing array field \"rows\""))?;
    if rows.len() != n || rows.iter().any(|r| r.as_array().map(Vec::len) != Some(n)) {
        return Err(bad("rows do not form a square matrix of the declared size"));
    }
    let cell = |i: usize, j: usize| &rows[i].as_array().expect("checked above")[j];
    match mode {
        Mode::Float => {
            let mut entries = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    entries.push(
                        cell(i, j)
                            .as_f64()
                            .ok_or_else(|| bad(&format!("entry ({i}, {j}) is not a number")))?,
                    );
                }
            }
            NonnegMatrix::from_dmatrix(DMatrix::from_row_slice(n, n, &entries))
        }
        Mode::Rational => {
            let mut entries = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    let pair = cell(i, j).as_array().filter(|p| p.len() == 2);
                    let parsed = pair.and_then(|p| Some((json_int(&p[0])?, json_int(&p[1])?)));
                    match parsed {
                        Some((_, d)) if d.is_zero() => {
                            return Err(bad(&format!("entry ({i}, {j}) has zero denominator")))
                        }
                        Some((num, den)) => entries.push(BigRational::new(num, den)),
                        None => {
                            return Err(bad(&format!("entry ({i}, {j}) is not a [num, den] pair")))
                        }
                    }
                }
            }
            NonnegMatrix::from_rational(RationalMatrix::from_fn(n, |i, j| {
                entries[i * n + j].clone()
            }))
        }
    }
}

fn to_matrix_market(m: &NonnegMatrix) -> String {
    let n = m.n();
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    let nonzeros: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (0..n).map(move |i| (i, j)))
        .filter(|&(i, j)| m.get(i, j) != 0.0 || m.exact().is_some_and(|q| !q.get(i, j).is_zero()))
        .collect();
    if let Some(q) = m.exact() {
        for &(i, j) in &nonzeros {
            let e = q.get(i, j);
            let _ = writeln!(
                out,
                "%rational {} {} {} {}",
                i + 1,
                j + 1,
                e.numer(),
                e.denom()
            );
        }
    }
    let _ = writeln!(out, "{n} {n} {}", nonzeros.len());
    for &(i, j) in &nonzeros {
        let _ = writeln!(out, "{} {} {:?}", i + 1, j + 1, m.get(i, j));
    }
    out
}

fn parse_matrix_market(text: &str) -> Result<NonnegMatrix> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim()));
    let (_, header) = lines.next().ok_or_else(|| Error::format(1, "empty file"))?;
    let words: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(Error::format(1, "expected %%MatrixMarket matrix header"));
    }
    let coordinate = match words[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(Error::format(1, format!("unsupported layout \"{other}\""))),
    };
    if words[3] != "real" && words[3] != "integer" {
        return Err(Error::format(
            1,
            format!("unsupported field \"{}\"", words[3]),
        ));
    }
    if words[4] != "general" {
        return Err(Error::format(
            1,
            format!("unsupported symmetry \"{}\"", words[4]),
        ));
    }

    let mut exact: Vec<(usize, usize, BigRational, usize)> = Vec::new();
    let mut body: Vec<(usize, &str)> = Vec::new();
    for (no, line) in lines {
        if let Some(rest) = line.strip_prefix("%rational") {
            let f: Vec<&str> = rest.split_whitespace().collect();
            let parsed = (f.len() == 4)
                .then(|| {
                    Some((
                        f[0].parse::<usize>().ok()?,
                        f[1].parse::<usize>().ok()?,
                        f[2].parse::<BigInt>().ok()?,
                        f[3].parse::<BigInt>().ok()?,
                    ))
                })
                .flatten();
            match parsed {
                Some((i, j, num, den)) if i >= 1 && j >= 1 && !den.is_zero() => {
                    exact.push((i - 1, j - 1, BigRational::new(num, den), no))
                }
                _ => return Err(Error::format(no, "malformed %rational line")),
            }
        } else if !line.is_empty() && !line.starts_with('%') {
            body.push((no, line));
        }
    }

    let (&(size_no, size_line), data) = body
        .split_first()
        .ok_or_else(|| Error::format(1, "missing size line"))?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|w| {
            w.parse()
                .map_err(|_| Error::format(size_no, "bad size line"))
        })
        .collect::<Result<_>>()?;
    let expected = if coordinate { 3 } else { 2 };
    if dims.len() != expected {
        return Err(Error::format(size_no, "bad size line"));
    }
    if dims[0] != dims[1] {
        return Err(Error::format(size_no, "matrix is not square"));
    }
    let n = dims[0];
    let mut a = DMatrix::<f64>::zeros(n, n);
    let number = |no: usize, w: &str| {
        w.parse::<f64>()
            .map_err(|_| Error::format(no, format!("bad number \"{w}\"")))
    };
    if coordinate {
        if data.len() != dims[2] {
            return Err(Error::format(
                size_no,
                "entry count does not match size line",
            ));
        }
        for &(no, line) in data {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::format(no, "expected \"i j value\""));
            }
            let i: usize = f[0]
                .parse()
                .map_err(|_| Error::format(no, "bad row index"))?;
            let j: usize = f[1]
                .parse()
                .map_err(|_| Error::format(no, "bad column index"))?;
            if i == 0 || j == 0 || i > n || j > n {
                return Err(Error::format(no, "index out of range"));
            }
            a[(i - 1, j - 1)] = number(no, f[2])?;
        }
    } else {
        if data.len() != n * n {
            return Err(Error::format(
                size_no,
                "array entry count does not match size",
            ));
        }
        for (k, &(no, line)) in data.iter().enumerate() {
            a[(k % n, k / n)] = number(no, line)?;
        }
    }

    if exact.is_empty() {
        return NonnegMatrix::from_dmatrix(a);
    }
    let mut q = vec![BigRational::zero(); n * n];
    for (i, j, e, no) in exact {
        if i >= n || j >= n {
            return Err(Error::format(no, "rational index out of range"));
        }
        if e.to_f64() != Some(a[(i, j)]) {
            return Err(Error::format(
                no,
                "rational entry disagrees with float data",
            ));
        }
        q[i * n + j] = e;
    }
    NonnegMatrix::from_rational(RationalMatrix::from_fn(n, |i, j| q[i * n + j].clone()))
}

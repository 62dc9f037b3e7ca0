//! State files, number formatting and CSV output.
//!
//! A state file is JSON, either
//! `{"twice_s": 4, "amplitudes": [[re, im], ...]}` for a pure state or
//! `{"twice_s": 2, "matrix": [[re, im], ...]}` (n² entries, row-major) for
//! a mixed one. Nested rows `[[[re, im], ...], ...]` are also read.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::states::{AnyState, DensityLike, MixedState, PureState};
use crate::wigner::Spin;
use crate::{CMat, CVec, Error, Result, C64};

/// Significant digits in every exported float.
pub const SIG_DIGITS: usize = 12;

/// x in scientific notation with [`SIG_DIGITS`] significant digits;
/// integers below 10^12 are printed plainly.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x.fract() == 0.0 && x.abs() < 1e12 {
        return format!("{}", x as i64);
    }
    format!("{:.*e}", SIG_DIGITS - 1, x)
}

/// x rounded to [`SIG_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    fmt_sig(x).parse().unwrap_or(x)
}

/// Rounds every float in a JSON tree; non-finite numbers become null.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().unwrap_or(f64::NAN);
                serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number)
            } else {
                Value::Number(n)
            }
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, x)| (k, round_json(x))).collect()),
        other => other,
    }
}

/// Pretty JSON with rounded floats.
pub fn to_json_string(value: &impl Serialize) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&round_json(v)).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize, Deserialize)]
struct StateFile {
    twice_s: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    amplitudes: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    matrix: Option<MatrixEntries>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixEntries {
    Flat(Vec<[f64; 2]>),
    Rows(Vec<Vec<[f64; 2]>>),
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// JSON text of a state. Amplitudes are written in full precision so a
/// round-trip reproduces the state exactly.
pub fn state_to_json(state: &AnyState) -> Result<String> {
    let twice_s = state.spin().twice_s();
    let file = match state {
        AnyState::Pure(p) => StateFile {
            twice_s,
            amplitudes: Some(p.amplitudes().iter().map(|&z| pair(z)).collect()),
            matrix: None,
        },
        AnyState::Mixed(m) => {
            let a = m.matrix();
            StateFile {
                twice_s,
                amplitudes: None,
                matrix: Some(MatrixEntries::Flat(
                    (0..a.nrows())
                        .flat_map(|i| (0..a.ncols()).map(move |j| pair(a[(i, j)])))
                        .collect(),
                )),
            }
        }
    };
    let mut s = serde_json::to_string_pretty(&file).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn state_from_json(text: &str) -> Result<AnyState> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("state file: {e}")))?;
    let s = Spin::supported(file.twice_s)?;
    let n = s.dim();
    match (file.amplitudes, file.matrix) {
        (Some(a), None) => {
            if a.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: a.len(),
                });
            }
            let v = CVec::from_iterator(n, a.iter().map(|p| C64::new(p[0], p[1])));
            Ok(AnyState::Pure(PureState::new(s, v)?))
        }
        (None, Some(entries)) => {
            let flat = match entries {
                MatrixEntries::Flat(v) => v,
                MatrixEntries::Rows(rows) => {
                    if rows.iter().any(|row| row.len() != n) {
                        return Err(Error::Dimension {
                            expected: n,
                            got: rows.iter().map(|r| r.len()).find(|&l| l != n).unwrap_or(0),
                        });
                    }
                    rows.concat()
                }
            };
            if flat.len() != n * n {
                return Err(Error::Dimension {
                    expected: n * n,
                    got: flat.len(),
                });
            }
            let m = CMat::from_fn(n, n, |i, j| C64::new(flat[i * n + j][0], flat[i * n + j][1]));
            Ok(AnyState::Mixed(MixedState::new(s, m)?))
        }
        _ => Err(Error::Parse(
            "state file needs exactly one of 'amplitudes' or 'matrix'".into(),
        )),
    }
}

pub fn read_state(path: &Path) -> Result<AnyState> {
    state_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_state(path: &Path, state: &AnyState) -> Result<()> {
    std::fs::write(path, state_to_json(state)?)?;
    Ok(())
}

/// CSV text with a header line and [`fmt_sig`] cells.
pub fn csv_string(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_sig(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Writes to `path`, or to stdout when `path` is None.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            so.flush()?;
        }
    }
    Ok(())
}

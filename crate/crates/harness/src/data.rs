//! Sparse labelled text format: `<label> <index>:<value> ...`, one instance
//! per line, 1-based strictly increasing indices. Labels `-1`/`+1` are kept,
//! `0`/`1` are mapped to `-1`/`+1`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use llp_core::{Instance, Label, SparseVector};

use crate::{HarnessError, Result};

pub fn load_sparse_dataset(path: impl AsRef<Path>) -> Result<Vec<Instance>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let instances = parse_sparse(&text).map_err(|(line, column, message)| HarnessError::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message,
    })?;
    if instances.is_empty() {
        return Err(HarnessError::NoInstances(path.to_path_buf()));
    }
    Ok(instances)
}

/// Parses the whole text; errors carry 1-based `(line, column, message)`.
/// Blank lines and `#` comments are skipped.
pub fn parse_sparse(text: &str) -> Result<Vec<Instance>, (usize, usize, String)> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_line(line).map_err(|(col, msg)| (n + 1, col, msg))?);
    }
    Ok(out)
}

fn parse_line(line: &str) -> Result<Instance, (usize, String)> {
    let mut tokens = tokens(line);
    let (col, label) = tokens.next().expect("line is not blank");
    let label = match label.trim_start_matches('+') {
        "1" => Label::Positive,
        "-1" | "0" => Label::Negative,
        other => return Err((col, format!("bad label {other:?}"))),
    };
    let mut entries: Vec<(u32, f64)> = Vec::new();
    for (col, tok) in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| (col, format!("expected index:value, got {tok:?}")))?;
        let idx: u32 = idx.parse().map_err(|_| (col, format!("bad index {idx:?}")))?;
        let val: f64 = val.parse().map_err(|_| (col, format!("bad value {val:?}")))?;
        if idx == 0 {
            return Err((col, "feature indices start at 1".into()));
        }
        if !val.is_finite() {
            return Err((col, format!("non-finite value at index {idx}")));
        }
        match entries.last() {
            Some(&(prev, _)) if prev == idx => return Err((col, format!("duplicate index {idx}"))),
            Some(&(prev, _)) if prev > idx => {
                return Err((col, format!("index {idx} after {prev}; indices must increase")))
            }
            _ => {}
        }
        entries.push((idx, val));
    }
    let features = SparseVector::new(entries).map_err(|e| (1, e.to_string()))?;
    Ok(Instance::labeled(features, label))
}

/// Whitespace-separated tokens with their 1-based starting column.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    line.split_whitespace().map(move |t| {
        let offset = t.as_ptr() as usize - line.as_ptr() as usize;
        (line[..offset].chars().count() + 1, t)
    })
}

/// Inverse of [`parse_sparse`]; values that are exactly 1 are written as `1`.
pub fn format_sparse(instances: &[Instance]) -> String {
    let mut s = String::new();
    for x in instances {
        let label = match x.label {
            Some(Label::Positive) => "+1",
            _ => "-1",
        };
        s.push_str(label);
        for (i, v) in x.features.iter() {
            write!(s, " {i}:{v}").expect("writing to a String");
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_labels_and_features() {
        let xs = parse_sparse("+1 3:1 7:1\n0 2:0.5\n\n1\n-1 1:2 # note\n").unwrap();
        assert_eq!(xs.len(), 4);
        assert_eq!(xs[0].label, Some(Label::Positive));
        assert_eq!(xs[0].features.entries(), &[(3, 1.0), (7, 1.0)]);
        assert_eq!(xs[1].label, Some(Label::Negative));
        assert_eq!(xs[2].label, Some(Label::Positive));
        assert!(xs[2].features.is_empty());
        assert_eq!(xs[3].features.entries(), &[(1, 2.0)]);
    }

    #[test]
    fn diagnostics_carry_position() {
        assert_eq!(parse_sparse("+1 1:1\n+1 4:1 4:1").unwrap_err().0, 2);
        let (line, col, msg) = parse_sparse("+1 1:1\n+1 4:1 4:1").unwrap_err();
        assert_eq!((line, col), (2, 8));
        assert!(msg.contains("duplicate index 4"));
        let (_, col, msg) = parse_sparse("2 1:1").unwrap_err();
        assert_eq!(col, 1);
        assert!(msg.contains("bad label"));
        assert!(parse_sparse("+1 5:1 2:1").unwrap_err().2.contains("must increase"));
        assert!(parse_sparse("+1 0:1").is_err());
        assert!(parse_sparse("+1 x").is_err());
    }

    #[test]
    fn round_trip() {
        let text = "+1 3:1 7:0.25\n-1 1:1\n";
        assert_eq!(format_sparse(&parse_sparse(text).unwrap()), text);
    }
}

//! Two-column `index,value` text for coefficient vectors and fields.
//!
//! Values use the shortest representation that parses back to the same
//! `f64`, so the text round-trips exactly.

use std::fmt::Write;

pub const HEADER: &str = "index,value";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct CsvError {
    pub line: usize,
    pub message: String,
}

pub fn encode(values: &[f64]) -> String {
    let mut out = String::with_capacity(24 * (values.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for (i, v) in values.iter().enumerate() {
        writeln!(out, "{i},{v:?}").expect("writing to a String");
    }
    out
}

pub fn decode(text: &str) -> Result<Vec<f64>, CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        _ => {
            return Err(CsvError {
                line: 1,
                message: format!("expected header `{HEADER}`"),
            })
        }
    }
    let mut values = Vec::new();
    for (i, raw) in lines {
        let err = |message: String| CsvError { line: i + 1, message };
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (index, value) = line.split_once(',').ok_or_else(|| err("expected `index,value`".into()))?;
        let index: usize = index.trim().parse().map_err(|e| err(format!("index `{index}`: {e}")))?;
        if index != values.len() {
            return Err(err(format!("expected index {}, found {index}", values.len())));
        }
        values.push(value.trim().parse().map_err(|e| err(format!("value `{value}`: {e}")))?);
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout() {
        assert_eq!(encode(&[0.5, -1e-300]), "index,value\n0,0.5\n1,-1e-300\n");
        assert_eq!(encode(&[]), "index,value\n");
    }

    #[test]
    fn errors_carry_lines() {
        assert_eq!(decode("nope\n").unwrap_err().line, 1);
        assert_eq!(decode("index,value\n0,1\n2,3\n").unwrap_err().line, 3);
        assert_eq!(decode("index,value\n0,x\n").unwrap_err().line, 2);
    }

    proptest! {
        #[test]
        fn round_trip(values in proptest::collection::vec(-1e300f64..1e300, 0..50)) {
            prop_assert_eq!(decode(&encode(&values)).unwrap(), values);
        }
    }
}

//! Reading numeric columns from text files.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based line number, 0 when the problem is not tied to a line.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ParseError {}

fn fields(line: &str) -> Vec<&str> {
    if line.contains([',', ';', '\t']) {
        line.split([',', ';', '\t']).map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// One value per data line. `column` is 1-based and required when a line
/// has more than one field. Text after `#` and blank lines are ignored.
/// Fields may be separated by commas, semicolons, tabs or spaces; the
/// decimal mark is always `.`.
pub fn parse_values(text: &str, column: Option<usize>) -> Result<Vec<f64>, ParseError> {
    if column == Some(0) {
        return Err(ParseError { line: 0, message: "columns are numbered from 1".into() });
    }
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| ParseError { line: i + 1, message };
        let cols = fields(line);
        let field = match column {
            Some(c) => *cols.get(c - 1).ok_or_else(|| err(format!("no column {c} (found {})", cols.len())))?,
            None if cols.len() == 1 => cols[0],
            None => return Err(err(format!("{} columns found; select one with --column", cols.len()))),
        };
        let v: f64 = field.parse().map_err(|_| err(format!("not a number: {field:?}")))?;
        if !v.is_finite() {
            return Err(err(format!("not a finite number: {field:?}")));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(ParseError { line: 0, message: "no data values found".into() });
    }
    Ok(out)
}

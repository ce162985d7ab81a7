//! Public plaintext operands (filter taps, DFT matrices, masks, FC
//! weights, index ramps) and their on-disk text format.
//!
//! Format, line oriented:
//!
//! ```text
//! # oblivdsp plain operand v1
//! role <name>
//! dims <rows> <cols>
//! scale <f64>
//! <cols space-separated values>   (one line per row)
//! ```

use std::fmt;
use std::io::{BufRead, Write};

/// A public, data-independent matrix or vector operand.
#[derive(Clone, Debug, PartialEq)]
pub struct PlainOperand {
    pub role: String,
    pub rows: usize,
    pub cols: usize,
    pub scale: f64,
    /// Row-major values, rows × cols.
    pub values: Vec<f64>,
}

#[derive(Debug)]
pub enum OperandError {
    Io(std::io::Error),
    Parse(String),
}

impl fmt::Display for OperandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperandError::Io(e) => write!(f, "io error: {e}"),
            OperandError::Parse(m) => write!(f, "malformed operand file: {m}"),
        }
    }
}

impl std::error::Error for OperandError {}

impl From<std::io::Error> for OperandError {
    fn from(e: std::io::Error) -> Self {
        OperandError::Io(e)
    }
}

impl PlainOperand {
    pub fn vector(role: &str, values: Vec<f64>) -> Self {
        PlainOperand {
            role: role.into(),
            rows: 1,
            cols: values.len(),
            scale: 1.0,
            values,
        }
    }

    pub fn matrix(role: &str, rows: usize, cols: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), rows * cols);
        PlainOperand {
            role: role.into(),
            rows,
            cols,
            scale: 1.0,
            values,
        }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "# oblivdsp plain operand v1")?;
        writeln!(w, "role {}", self.role)?;
        writeln!(w, "dims {} {}", self.rows, self.cols)?;
        writeln!(w, "scale {}", self.scale)?;
        for r in 0..self.rows {
            let line: Vec<String> = self.row(r).iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl BufRead) -> Result<Self, OperandError> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| OperandError::Parse("empty file".into()))??;
        if !header.starts_with("# oblivdsp plain operand v1") {
            return Err(OperandError::Parse("missing v1 header".into()));
        }
        let mut role = None;
        let mut dims = None;
        let mut scale = 1.0f64;
        let mut values = Vec::new();
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("role ") {
                role = Some(rest.trim().to_string());
            } else if let Some(rest) = line.strip_prefix("dims ") {
                let mut it = rest.split_whitespace();
                let rows = it
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| OperandError::Parse("bad dims".into()))?;
                let cols = it
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| OperandError::Parse("bad dims".into()))?;
                dims = Some((rows, cols));
            } else if let Some(rest) = line.strip_prefix("scale ") {
                scale = rest
                    .trim()
                    .parse()
                    .map_err(|_| OperandError::Parse("bad scale".into()))?;
            } else {
                for tok in line.split_whitespace() {
                    values.push(
                        tok.parse::<f64>()
                            .map_err(|_| OperandError::Parse(format!("bad value {tok:?}")))?,
                    );
                }
            }
        }
        let role = role.ok_or_else(|| OperandError::Parse("missing role".into()))?;
        let (rows, cols) = dims.ok_or_else(|| OperandError::Parse("missing dims".into()))?;
        if values.len() != rows * cols {
            return Err(OperandError::Parse(format!(
                "expected {}x{} = {} values, found {}",
                rows,
                cols,
                rows * cols,
                values.len()
            )));
        }
        Ok(PlainOperand {
            role,
            rows,
            cols,
            scale,
            values,
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), OperandError> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self, OperandError> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip_is_exact() {
        let op = PlainOperand::matrix("fc_weight_1", 2, 3, vec![0.1, -2.5e-7, 3.0, 4.25, 0.0, 1e9]);
        let mut buf = Vec::new();
        op.write_to(&mut buf).unwrap();
        let back = PlainOperand::read_from(&mut &buf[..]).unwrap();
        assert_eq!(back, op);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let text = "# oblivdsp plain operand v1\nrole h\ndims 1 3\nscale 1\n0.5 0.5\n";
        assert!(PlainOperand::read_from(&mut text.as_bytes()).is_err());
    }
}

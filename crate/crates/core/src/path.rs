//! Time-stamped sample paths.
//!
//! A [`Path`] is a finite grid of strictly increasing times starting at 0
//! together with values, read either as piecewise-constant
//! right-continuous (jump processes) or piecewise-linear (diffusion
//! samples). Operations only ever evaluate paths at their own nodes.

use std::io::{BufRead, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PathError {
    #[error("path needs at least one node")]
    Empty,
    #[error("times and values have different lengths ({times} vs {values})")]
    LengthMismatch { times: usize, values: usize },
    #[error("times must start at 0 and be strictly increasing (violation at index {0})")]
    BadTimes(usize),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("csv parse error at line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Interpretation of the values between nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    /// Right-continuous step function; node value holds until the next node.
    PiecewiseConstant,
    /// Linear interpolation between nodes.
    PiecewiseLinear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    times: Vec<f64>,
    values: Vec<f64>,
    kind: PathKind,
}

impl Path {
    pub fn new(times: Vec<f64>, values: Vec<f64>, kind: PathKind) -> Result<Self, PathError> {
        if times.is_empty() {
            return Err(PathError::Empty);
        }
        if times.len() != values.len() {
            return Err(PathError::LengthMismatch {
                times: times.len(),
                values: values.len(),
            });
        }
        if times[0] != 0.0 {
            return Err(PathError::BadTimes(0));
        }
        for i in 1..times.len() {
            if !(times[i] > times[i - 1]) || !times[i].is_finite() {
                return Err(PathError::BadTimes(i));
            }
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(PathError::NonFinite(i));
        }
        Ok(Self { times, values, kind })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one node
    }

    /// Final node time.
    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Write as two-column CSV `time,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), PathError> {
        writeln!(w, "time,value")?;
        for (t, v) in self.times.iter().zip(&self.values) {
            writeln!(w, "{t},{v}")?;
        }
        Ok(())
    }

    /// Read a two-column CSV written by [`Path::write_csv`].
    pub fn read_csv<R: BufRead>(r: R, kind: PathKind) -> Result<Self, PathError> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || (i == 0 && line == "time,value") {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64, PathError> {
                s.ok_or(PathError::Csv {
                    line: i + 1,
                    msg: "expected two columns".into(),
                })?
                .trim()
                .parse()
                .map_err(|e| PathError::Csv {
                    line: i + 1,
                    msg: format!("{e}"),
                })
            };
            times.push(parse(parts.next())?);
            values.push(parse(parts.next())?);
        }
        Path::new(times, values, kind)
    }
}

/// Write a reflection result as three-column CSV `time,phi,eta`.
pub fn write_reflection_csv<W: Write>(phi: &Path, eta: &Path, mut w: W) -> Result<(), PathError> {
    writeln!(w, "time,phi,eta")?;
    for ((t, p), e) in phi.times().iter().zip(phi.values()).zip(eta.values()) {
        writeln!(w, "{t},{p},{e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_malformed_grids() {
        assert!(matches!(
            Path::new(vec![], vec![], PathKind::PiecewiseLinear),
            Err(PathError::Empty)
        ));
        assert!(matches!(
            Path::new(vec![0.0, 1.0], vec![1.0], PathKind::PiecewiseLinear),
            Err(PathError::LengthMismatch { .. })
        ));
        assert!(matches!(
            Path::new(vec![0.5, 1.0], vec![1.0, 1.0], PathKind::PiecewiseLinear),
            Err(PathError::BadTimes(0))
        ));
        assert!(matches!(
            Path::new(vec![0.0, 1.0, 1.0], vec![1.0; 3], PathKind::PiecewiseLinear),
            Err(PathError::BadTimes(2))
        ));
    }

    #[test]
    fn csv_round_trip() {
        let p = Path::new(
            vec![0.0, 0.1, 1.5],
            vec![2.0, 1.25, -0.75],
            PathKind::PiecewiseLinear,
        )
        .unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let q = Path::read_csv(buf.as_slice(), PathKind::PiecewiseLinear).unwrap();
        assert_eq!(p, q);
    }
}

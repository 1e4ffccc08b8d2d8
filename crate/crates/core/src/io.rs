//! JSON schemas shared by coefficient arrays, operators, rules and kernel samples.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

use crate::error::{LabError, Result};
use crate::space::{DomainPoint, SpaceSpec, C64};

/// Complex number serialised as `{"re": .., "im": ..}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cx {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for Cx {
    fn from(z: C64) -> Self {
        Cx { re: z.re, im: z.im }
    }
}

impl From<Cx> for C64 {
    fn from(z: Cx) -> Self {
        C64::new(z.re, z.im)
    }
}

pub fn point_to_json(z: &DomainPoint) -> Vec<Cx> {
    z.coords().iter().map(|c| Cx::from(*c)).collect()
}

pub fn point_from_json(c: &[Cx]) -> Result<DomainPoint> {
    match c {
        [a] => Ok(DomainPoint::Single((*a).into())),
        [a, b] => Ok(DomainPoint::Pair([(*a).into(), (*b).into()])),
        _ => Err(LabError::param(format!("a point has 1 or 2 coordinates, got {}", c.len()))),
    }
}

/// Dense complex array in row-major order with split real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexArray {
    pub space: SpaceSpec,
    pub shape: [usize; 2],
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexArray {
    pub fn from_row_major(space: &SpaceSpec, shape: [usize; 2], data: &[C64]) -> Self {
        ComplexArray {
            space: space.clone(),
            shape,
            re: data.iter().map(|z| z.re).collect(),
            im: data.iter().map(|z| z.im).collect(),
        }
    }

    pub fn from_matrix(space: &SpaceSpec, m: &DMatrix<C64>) -> Self {
        let data: Vec<C64> = (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])).collect();
        Self::from_row_major(space, [m.nrows(), m.ncols()], &data)
    }

    /// Validates lengths and finiteness, returning row-major values.
    pub fn values(&self) -> Result<Vec<C64>> {
        let n = self.shape[0].checked_mul(self.shape[1]).ok_or_else(|| LabError::param("array shape overflows"))?;
        if self.re.len() != n || self.im.len() != n {
            return Err(LabError::mismatch(format!(
                "shape {:?} needs {n} values, got re={} im={}",
                self.shape,
                self.re.len(),
                self.im.len()
            )));
        }
        if self.re.iter().chain(&self.im).any(|x| !x.is_finite()) {
            return Err(LabError::param("array contains non-finite values"));
        }
        Ok(self.re.iter().zip(&self.im).map(|(&a, &b)| C64::new(a, b)).collect())
    }

    pub fn to_matrix(&self) -> Result<DMatrix<C64>> {
        let v = self.values()?;
        Ok(DMatrix::from_row_slice(self.shape[0], self.shape[1], &v))
    }
}

/// Rectangular table of already-formatted cells, written as RFC 4180 CSV.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            if r.len() != self.header.len() {
                return Err(LabError::mismatch(format!("row has {} cells, header has {}", r.len(), self.header.len())));
            }
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| LabError::Io(e.into_error()))
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| LabError::Io(e.error))?;
    Ok(())
}

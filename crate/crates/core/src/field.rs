//! Nodal fields and their on-disk formats.
//!
//! Two formats are supported for a [`ScalarField`]:
//!
//! * CSV with header `x,y,value`, one row per node in row-major order
//!   (`x` fastest).
//! * Flat little-endian binary: the node count per side as `u64`, followed
//!   by `n²` `f64` values in row-major order.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid2D;

/// A real value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    n: usize,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid2D) -> Self {
        Self {
            n: grid.n(),
            values: vec![0.0; grid.num_nodes()],
        }
    }

    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            n: grid.n(),
            values: grid.sample(f),
        }
    }

    pub fn from_values(grid: &Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_nodes() {
            return Err(Error::InvalidInput(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.num_nodes()
            )));
        }
        Ok(Self {
            n: grid.n(),
            values,
        })
    }

    /// Nodes per side of the grid this field lives on.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, id: usize) -> f64 {
        self.values[id]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn same_grid(&self, grid: &Grid2D) -> bool {
        self.n == grid.n()
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &ScalarField) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    pub fn scaled(&self, alpha: f64) -> ScalarField {
        ScalarField {
            n: self.n,
            values: self.values.iter().map(|v| alpha * v).collect(),
        }
    }

    pub fn to_csv(&self, grid: &Grid2D) -> String {
        let mut out = String::from("x,y,value\n");
        for (id, v) in self.values.iter().enumerate() {
            let [x, y] = grid.point(id);
            let _ = writeln!(out, "{x},{y},{v}");
        }
        out
    }

    pub fn from_csv(grid: &Grid2D, text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default().trim();
        if header != "x,y,value" {
            return Err(Error::InvalidInput(format!(
                "expected header `x,y,value`, found `{header}`"
            )));
        }
        let mut values = Vec::with_capacity(grid.num_nodes());
        for (row, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
            let v = line
                .rsplit(',')
                .next()
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::InvalidInput(format!("bad CSV row {}: `{line}`", row + 2)))?;
            values.push(v);
        }
        Self::from_values(grid, values)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 8 * self.values.len());
        out.extend_from_slice(&(self.n as u64).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = || Error::InvalidInput("truncated binary field".into());
        let n = u64::from_le_bytes(bytes.get(..8).ok_or_else(bad)?.try_into().unwrap()) as usize;
        let body = &bytes[8..];
        if body.len() != 8 * n * n {
            return Err(bad());
        }
        let values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self { n, values })
    }

    /// Reads a field from a `.csv` or binary file.
    pub fn read(grid: &Grid2D, path: &Path) -> Result<Self> {
        let io = |source| Error::Io {
            path: path.display().to_string(),
            source,
        };
        if path.extension().is_some_and(|e| e == "csv") {
            Self::from_csv(grid, &std::fs::read_to_string(path).map_err(io)?)
        } else {
            let f = Self::from_bytes(&std::fs::read(path).map_err(io)?)?;
            if !f.same_grid(grid) {
                return Err(Error::InvalidInput(format!(
                    "field in {} has n = {}, expected {}",
                    path.display(),
                    f.n,
                    grid.n()
                )));
            }
            Ok(f)
        }
    }
}

/// A 2-vector per grid node, stored as two component arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl VectorField {
    #[inline]
    pub fn at(&self, id: usize) -> [f64; 2] {
        [self.x[id], self.y[id]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_layout_is_row_major() {
        let g = Grid2D::new(8).unwrap();
        let f = ScalarField::from_fn(&g, |x, y| x + 10.0 * y);
        let csv = f.to_csv(&g);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x,y,value"));
        assert_eq!(lines.next(), Some("0,0,0"));
        let third = lines.nth(1).unwrap();
        assert!(third.starts_with(&format!("{},0,", 2.0 / 7.0)));
        assert_eq!(ScalarField::from_csv(&g, &csv).unwrap(), f);
    }

    #[test]
    fn csv_rejects_wrong_header_and_size() {
        let g = Grid2D::new(8).unwrap();
        assert!(ScalarField::from_csv(&g, "a,b\n1,2\n").is_err());
        assert!(ScalarField::from_csv(&g, "x,y,value\n0,0,1\n").is_err());
    }

    proptest! {
        #[test]
        fn binary_round_trip(n in 8usize..20, seed in any::<u64>()) {
            let g = Grid2D::new(n).unwrap();
            let f = ScalarField::from_fn(&g, |x, y| ((seed as f64) * x - y).sin());
            prop_assert_eq!(ScalarField::from_bytes(&f.to_bytes()).unwrap(), f);
        }
    }
}

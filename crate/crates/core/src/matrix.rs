//! Dense square matrices over f64 with the plain-text interchange format.
//!
//! Storage is row-major. The text format is: a first line holding the order
//! N, then N lines of N comma-separated entries. The writer emits 17
//! significant digits so round-trips are bit exact for f64.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix {
    order: usize,
    entries: Vec<f64>,
}

/// Formats a float with 17 significant digits, enough to reconstruct the
/// exact f64 on parse.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl SquareMatrix {
    pub fn new(order: usize, entries: Vec<f64>) -> Result<Self> {
        if order == 0 {
            return Err(Error::usage("matrix order must be positive"));
        }
        if entries.len() != order * order {
            return Err(Error::usage(format!(
                "expected {} entries for order {order}, got {}",
                order * order,
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::usage("matrix entries must be finite"));
        }
        Ok(SquareMatrix { order, entries })
    }

    pub fn zeros(order: usize) -> Self {
        SquareMatrix {
            order,
            entries: vec![0.0; order * order],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = SquareMatrix::zeros(order);
        for i in 0..order {
            m.entries[i * order + i] = 1.0;
        }
        m
    }

    /// Matrix with a single 1 at (row, col).
    pub fn unit(order: usize, row: usize, col: usize) -> Self {
        let mut m = SquareMatrix::zeros(order);
        m.entries[row * order + col] = 1.0;
        m
    }

    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entries = Vec::with_capacity(order * order);
        for i in 0..order {
            for j in 0..order {
                entries.push(f(i, j));
            }
        }
        SquareMatrix { order, entries }
    }

    /// Diagonal matrix from the given values (length = order).
    pub fn from_diagonal(values: &[f64]) -> Self {
        let order = values.len();
        SquareMatrix::from_fn(order, |i, j| if i == j { values[i] } else { 0.0 })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.order + col]
    }

    pub fn set_entry(&mut self, row: usize, col: usize, value: f64) {
        self.entries[row * self.order + col] = value;
    }

    /// Row-major view of the entries; also the vectorization used for the
    /// trace inner product.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [f64] {
        &mut self.entries
    }

    /// Trace (Hilbert-Schmidt) inner product <A, B> = sum_ij A_ij B_ij.
    pub fn dot(&self, other: &SquareMatrix) -> f64 {
        debug_assert_eq!(self.order, other.order);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scaled(&self, factor: f64) -> SquareMatrix {
        SquareMatrix {
            order: self.order,
            entries: self.entries.iter().map(|v| v * factor).collect(),
        }
    }

    /// self += factor * other.
    pub fn add_scaled(&mut self, factor: f64, other: &SquareMatrix) {
        debug_assert_eq!(self.order, other.order);
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += factor * b;
        }
    }

    pub fn sub(&self, other: &SquareMatrix) -> SquareMatrix {
        let mut out = self.clone();
        out.add_scaled(-1.0, other);
        out
    }

    pub fn transpose(&self) -> SquareMatrix {
        let n = self.order;
        SquareMatrix::from_fn(n, |i, j| self.entry(j, i))
    }

    /// Matrix product self * other.
    pub fn matmul(&self, other: &SquareMatrix) -> SquareMatrix {
        debug_assert_eq!(self.order, other.order);
        let n = self.order;
        let mut out = SquareMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.entry(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * other.entry(k, j);
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.order);
        let n = self.order;
        (0..n)
            .map(|i| (0..n).map(|j| self.entry(i, j) * v[j]).sum())
            .collect()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Serializes to the plain-text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.order);
        for i in 0..self.order {
            let row: Vec<String> = (0..self.order)
                .map(|j| format_f64(self.entry(i, j)))
                .collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    /// Parses the plain-text format produced by `to_text`.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::usage("empty matrix file"))?;
        let order: usize = header
            .trim()
            .parse()
            .map_err(|_| Error::usage(format!("bad matrix header '{header}'")))?;
        if order == 0 {
            return Err(Error::usage("matrix order must be positive"));
        }
        let mut entries = Vec::with_capacity(order * order);
        for _ in 0..order {
            let line = lines
                .next()
                .ok_or_else(|| Error::usage("matrix file truncated"))?;
            let row: Vec<&str> = line.split(',').collect();
            if row.len() != order {
                return Err(Error::usage(format!(
                    "expected {order} entries per row, got {}",
                    row.len()
                )));
            }
            for cell in row {
                let v: f64 = cell
                    .trim()
                    .parse()
                    .map_err(|_| Error::usage(format!("bad matrix entry '{cell}'")))?;
                entries.push(v);
            }
        }
        SquareMatrix::new(order, entries)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        SquareMatrix::from_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_validates() {
        assert!(SquareMatrix::new(0, vec![]).is_err());
        assert!(SquareMatrix::new(2, vec![1.0; 3]).is_err());
        assert!(SquareMatrix::new(2, vec![1.0, 2.0, f64::NAN, 0.0]).is_err());
        assert!(SquareMatrix::new(2, vec![1.0; 4]).is_ok());
    }

    #[test]
    fn dot_and_frobenius() {
        let a = SquareMatrix::new(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        // sum of squares 1+4+9+16 = 30
        assert!((a.frobenius_norm() - 30.0f64.sqrt()).abs() < 1e-15);
        let id = SquareMatrix::identity(2);
        assert_eq!(a.dot(&id), 5.0);
    }

    #[test]
    fn matmul_against_hand_product() {
        let a = SquareMatrix::new(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = SquareMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let ab = a.matmul(&b);
        assert_eq!(ab.entries(), &[2.0, 1.0, 4.0, 3.0]);
    }

    #[test]
    fn text_round_trip_is_exact() {
        // Entries chosen to have non-terminating binary expansions.
        let a = SquareMatrix::new(
            3,
            vec![
                0.1,
                -2.0 / 3.0,
                1e-300,
                3.14159265358979,
                -0.0,
                7.0,
                1.0 / 7.0,
                2.0f64.sqrt(),
                -1e17,
            ],
        )
        .unwrap();
        let b = SquareMatrix::from_text(&a.to_text()).unwrap();
        for (x, y) in a.entries().iter().zip(b.entries()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn from_text_rejects_malformed() {
        assert!(SquareMatrix::from_text("").is_err());
        assert!(SquareMatrix::from_text("2\n1,2\n3").is_err());
        assert!(SquareMatrix::from_text("2\n1,2\n3,x").is_err());
        assert!(SquareMatrix::from_text("two\n1\n").is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        let a = SquareMatrix::new(2, vec![0.25, -0.5, 1.0 / 3.0, 9.0]).unwrap();
        a.write_file(&path).unwrap();
        let b = SquareMatrix::read_file(&path).unwrap();
        assert_eq!(a, b);
    }
}

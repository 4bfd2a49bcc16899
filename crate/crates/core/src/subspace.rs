//! Linear subspaces of the space of order-N matrices.
//!
//! A subspace is stored as an orthonormal basis under the trace inner
//! product. Construction always re-orthonormalizes (modified Gram-Schmidt,
//! two passes), so downstream code can rely on the Gram identity to near
//! machine precision.
//!
//! The interchange format is a header line `N m` followed by the m basis
//! matrices, each serialized in the matrix text format.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::rng::{salt, GaussianStream};

/// Residual threshold (relative to input scale) below which a spanning
/// direction is considered dependent and dropped.
pub const DEPENDENT_DROP_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixSubspace {
    order: usize,
    basis: Vec<SquareMatrix>,
}

/// Orthogonalizes `candidate` against `basis` (two MGS passes) and returns
/// the unit residual if it clears `threshold`.
pub(crate) fn orthonormal_residual(
    basis: &[SquareMatrix],
    candidate: &SquareMatrix,
    threshold: f64,
) -> Option<SquareMatrix> {
    let mut r = candidate.clone();
    for _ in 0..2 {
        for b in basis {
            let c = r.dot(b);
            r.add_scaled(-c, b);
        }
    }
    let norm = r.frobenius_norm();
    if norm < threshold {
        None
    } else {
        Some(r.scaled(1.0 / norm))
    }
}

impl MatrixSubspace {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Codimension inside the N^2-dimensional matrix space.
    pub fn codim(&self) -> usize {
        self.order * self.order - self.basis.len()
    }

    pub fn basis(&self) -> &[SquareMatrix] {
        &self.basis
    }

    /// Orthonormalizes a spanning set, dropping dependent directions.
    /// Errors when every input is numerically zero.
    pub fn from_spanning_set(mats: &[SquareMatrix]) -> Result<Self> {
        let order = mats
            .first()
            .map(SquareMatrix::order)
            .ok_or_else(|| Error::usage("empty spanning set"))?;
        if mats.iter().any(|m| m.order() != order) {
            return Err(Error::usage("spanning set mixes matrix orders"));
        }
        let scale = mats
            .iter()
            .map(SquareMatrix::frobenius_norm)
            .fold(0.0f64, f64::max);
        if scale == 0.0 {
            return Err(Error::usage("spanning set is numerically zero"));
        }
        let threshold = DEPENDENT_DROP_THRESHOLD * scale;
        let mut basis: Vec<SquareMatrix> = Vec::new();
        for m in mats {
            if let Some(b) = orthonormal_residual(&basis, m, threshold) {
                basis.push(b);
            }
        }
        if basis.is_empty() {
            return Err(Error::usage("spanning set is numerically zero"));
        }
        Ok(MatrixSubspace { order, basis })
    }

    /// Matrices whose first `zero_rows` rows vanish; dimension (N-k)*N.
    pub fn coordinate_row_subspace(order: usize, zero_rows: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::usage("matrix order must be positive"));
        }
        if zero_rows >= order {
            return Err(Error::usage(format!(
                "zeroing {zero_rows} of {order} rows leaves no subspace"
            )));
        }
        let mut basis = Vec::with_capacity((order - zero_rows) * order);
        for i in zero_rows..order {
            for j in 0..order {
                basis.push(SquareMatrix::unit(order, i, j));
            }
        }
        Ok(MatrixSubspace { order, basis })
    }

    /// Deterministic random subspace of the requested dimension: Gaussian
    /// draws from the pinned stream, orthonormalized as they arrive.
    pub fn random(order: usize, dim: usize, seed: u64) -> Result<Self> {
        let full = order * order;
        if dim == 0 || dim > full {
            return Err(Error::usage(format!(
                "dimension must lie in 1..={full}, got {dim}"
            )));
        }
        let mut stream = GaussianStream::new(seed, salt::SUBSPACE, 0);
        let mut basis: Vec<SquareMatrix> = Vec::new();
        let mut attempts = 0usize;
        while basis.len() < dim {
            attempts += 1;
            if attempts > 4 * dim + 16 {
                return Err(Error::numerical(
                    "random subspace generation kept drawing dependent matrices",
                ));
            }
            let g = stream.gaussian_matrix(order);
            let scale = g.frobenius_norm().max(1.0);
            if let Some(b) =
                orthonormal_residual(&basis, &g, DEPENDENT_DROP_THRESHOLD * scale)
            {
                basis.push(b);
            }
        }
        Ok(MatrixSubspace { order, basis })
    }

    /// Coefficients of the orthogonal projection in this basis.
    pub fn coefficients(&self, a: &SquareMatrix) -> Vec<f64> {
        self.basis.iter().map(|b| a.dot(b)).collect()
    }

    /// Member with the given coefficient vector.
    pub fn member(&self, coeffs: &[f64]) -> SquareMatrix {
        debug_assert_eq!(coeffs.len(), self.basis.len());
        let mut out = SquareMatrix::zeros(self.order);
        for (c, b) in coeffs.iter().zip(&self.basis) {
            out.add_scaled(*c, b);
        }
        out
    }

    /// Orthogonal projection onto the subspace.
    pub fn project(&self, a: &SquareMatrix) -> SquareMatrix {
        self.member(&self.coefficients(a))
    }

    /// Frobenius distance from `a` to the subspace.
    pub fn containment_residual(&self, a: &SquareMatrix) -> f64 {
        a.sub(&self.project(a)).frobenius_norm()
    }

    /// Orthogonal complement, built by greedily absorbing the coordinate
    /// directions with the largest residual first.
    pub fn complement(&self) -> Result<MatrixSubspace> {
        let n = self.order;
        let target = self.codim();
        if target == 0 {
            return Err(Error::usage("complement of the full space is empty"));
        }
        let mut basis = self.basis.clone();
        let mut complement: Vec<SquareMatrix> = Vec::new();
        let mut candidates: Vec<SquareMatrix> = (0..n * n)
            .map(|t| SquareMatrix::unit(n, t / n, t % n))
            .collect();
        while complement.len() < target {
            // pick the candidate farthest from the current span
            let (best_idx, _) = candidates
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let mut r = c.clone();
                    for b in &basis {
                        let d = r.dot(b);
                        r.add_scaled(-d, b);
                    }
                    (i, r.frobenius_norm())
                })
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .expect("candidates nonempty");
            let cand = candidates.swap_remove(best_idx);
            if let Some(b) = orthonormal_residual(&basis, &cand, 1e-8) {
                basis.push(b.clone());
                complement.push(b);
            }
        }
        Ok(MatrixSubspace {
            order: n,
            basis: complement,
        })
    }

    /// Worst-case deviation of the basis Gram matrix from the identity.
    pub fn gram_deviation(&self) -> f64 {
        let m = self.basis.len();
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in i..m {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.basis[i].dot(&self.basis[j]) - want).abs());
            }
        }
        worst
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.order, self.basis.len());
        for b in &self.basis {
            out.push_str(&b.to_text());
        }
        out
    }

    /// Parses the subspace format. The stored basis is re-orthonormalized;
    /// if it deviates from orthonormality by more than 1e-6 a warning is
    /// emitted on stderr.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::usage("empty subspace file"))?;
        let mut parts = header.split_whitespace();
        let order: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::usage(format!("bad subspace header '{header}'")))?;
        let count: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::usage(format!("bad subspace header '{header}'")))?;
        if parts.next().is_some() {
            return Err(Error::usage(format!("bad subspace header '{header}'")));
        }
        if order == 0 || count == 0 {
            return Err(Error::usage("subspace must have positive order and size"));
        }
        let mut mats = Vec::with_capacity(count);
        let mut block = String::new();
        for _ in 0..count {
            block.clear();
            let head = lines
                .next()
                .ok_or_else(|| Error::usage("subspace file truncated"))?;
            let declared: usize = head
                .trim()
                .parse()
                .map_err(|_| Error::usage(format!("bad matrix header '{head}'")))?;
            if declared != order {
                return Err(Error::usage(format!(
                    "matrix order {declared} disagrees with subspace order {order}"
                )));
            }
            let _ = writeln!(block, "{declared}");
            for _ in 0..order {
                let row = lines
                    .next()
                    .ok_or_else(|| Error::usage("subspace file truncated"))?;
                let _ = writeln!(block, "{row}");
            }
            mats.push(SquareMatrix::from_text(&block)?);
        }
        let raw = MatrixSubspace {
            order,
            basis: mats.clone(),
        };
        let deviation = raw.gram_deviation();
        let rebuilt = MatrixSubspace::from_spanning_set(&mats)?;
        if deviation > 1e-6 {
            eprintln!(
                "warning: subspace basis deviates from orthonormality by {deviation:.3e}; re-orthonormalized ({} of {} directions kept)",
                rebuilt.dim(),
                count
            );
        }
        Ok(rebuilt)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        MatrixSubspace::from_text(&text)
    }
}

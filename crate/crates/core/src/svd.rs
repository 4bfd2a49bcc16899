//! Singular value decomposition of square matrices.
//!
//! Backed by nalgebra's Golub-Kahan SVD; this wrapper sorts the spectrum
//! nonincreasing (permuting U and V columns to match) and clamps values that
//! are zero up to roundoff, so downstream rank logic sees exact zeros.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

/// Relative threshold below which a singular value is treated as zero.
pub const SINGULAR_VALUE_CLAMP: f64 = 1e-12;

/// Nonincreasing, nonnegative singular values of a square matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn largest(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Number of values strictly above zero (after clamping).
    pub fn rank(&self) -> usize {
        self.values.iter().filter(|v| **v > 0.0).count()
    }
}

/// A = left * diag(spectrum) * right^T with orthogonal left/right factors.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub left: SquareMatrix,
    pub spectrum: SingularSpectrum,
    pub right: SquareMatrix,
}

impl SvdFactors {
    pub fn reconstruct(&self) -> SquareMatrix {
        let n = self.left.order();
        let scaled = SquareMatrix::from_fn(n, |i, j| {
            self.left.entry(i, j) * self.spectrum.values()[j]
        });
        scaled.matmul(&self.right.transpose())
    }

    /// j-th left singular vector.
    pub fn left_vector(&self, j: usize) -> Vec<f64> {
        let n = self.left.order();
        (0..n).map(|i| self.left.entry(i, j)).collect()
    }

    /// j-th right singular vector.
    pub fn right_vector(&self, j: usize) -> Vec<f64> {
        let n = self.right.order();
        (0..n).map(|i| self.right.entry(i, j)).collect()
    }
}

fn to_dmatrix(a: &SquareMatrix) -> DMatrix<f64> {
    let n = a.order();
    DMatrix::from_fn(n, n, |i, j| a.entry(i, j))
}

/// Full SVD with sorted spectrum.
pub fn svd_factorize(a: &SquareMatrix) -> Result<SvdFactors> {
    let n = a.order();
    let svd = nalgebra::SVD::try_new(to_dmatrix(a), true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::numerical("SVD iteration failed to converge"))?;
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..n).collect();
    let sv = &svd.singular_values;
    order.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).unwrap());

    let top = sv[order[0]];
    let clamp = SINGULAR_VALUE_CLAMP * top;
    let values: Vec<f64> = order
        .iter()
        .map(|&i| if sv[i] <= clamp { 0.0 } else { sv[i] })
        .collect();

    let left = SquareMatrix::from_fn(n, |i, j| u[(i, order[j])]);
    // nalgebra hands back V^T; our convention stores V itself.
    let right = SquareMatrix::from_fn(n, |i, j| v_t[(order[j], i)]);
    Ok(SvdFactors {
        left,
        spectrum: SingularSpectrum { values },
        right,
    })
}

/// Singular values only (still sorted and clamped).
///
/// Skips the U/V accumulation entirely, which matters in hot loops that need
/// just the spectrum (norm evaluations, line searches).
pub fn singular_values(a: &SquareMatrix) -> Result<SingularSpectrum> {
    let svd = nalgebra::SVD::try_new(to_dmatrix(a), false, false, f64::EPSILON, 0)
        .ok_or_else(|| Error::numerical("SVD iteration failed to converge"))?;
    let mut values: Vec<f64> = svd.singular_values.iter().copied().collect();
    values.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let top = values.first().copied().unwrap_or(0.0);
    let clamp = SINGULAR_VALUE_CLAMP * top;
    for v in &mut values {
        if *v <= clamp {
            *v = 0.0;
        }
    }
    Ok(SingularSpectrum { values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthogonality_defect(m: &SquareMatrix) -> f64 {
        let n = m.order();
        let g = m.transpose().matmul(m);
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g.entry(i, j) - want).abs());
            }
        }
        worst
    }

    #[test]
    fn two_by_two_known_spectrum() {
        // Oracle: eigenvalues of A^T A for A = [[1,2],[3,4]] solve
        // x^2 - 30x + 4 = 0, i.e. 15 +- sqrt(221); singular values are their
        // square roots, approximately 5.4650 and 0.3660.
        let a = SquareMatrix::new(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let s = svd_factorize(&a).unwrap();
        let disc = 221.0f64.sqrt();
        let expect = [(15.0 + disc).sqrt(), (15.0 - disc).sqrt()];
        for (got, want) in s.spectrum.values().iter().zip(expect) {
            assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
        }
        assert!((s.spectrum.values()[0] - 5.4649857042).abs() < 1e-9);
        assert!((s.spectrum.values()[1] - 0.3659661906).abs() < 1e-9);
    }

    #[test]
    fn factors_are_orthogonal_and_reconstruct() {
        let a = SquareMatrix::new(
            3,
            vec![0.5, -1.0, 2.0, 0.0, 3.0, -0.25, 1.5, 1.5, 1.5],
        )
        .unwrap();
        let f = svd_factorize(&a).unwrap();
        assert!(orthogonality_defect(&f.left) < 1e-12);
        assert!(orthogonality_defect(&f.right) < 1e-12);
        let r = f.reconstruct();
        let mut worst = 0.0f64;
        for (x, y) in a.entries().iter().zip(r.entries()) {
            worst = worst.max((x - y).abs());
        }
        assert!(worst < 1e-12, "reconstruction defect {worst}");
    }

    #[test]
    fn spectrum_sorted_and_nonnegative() {
        let a = SquareMatrix::new(
            4,
            vec![
                0.1, 2.0, -3.0, 0.4, 1.0, 1.0, 1.0, 1.0, -2.0, 0.0, 0.0, 5.0, 0.3, 0.3, -0.3,
                0.3,
            ],
        )
        .unwrap();
        let s = singular_values(&a).unwrap();
        let v = s.values();
        for w in v.windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(v.iter().all(|x| *x >= 0.0));
        // Sum of squares equals squared Frobenius norm.
        let ss: f64 = v.iter().map(|x| x * x).sum();
        let fr = a.frobenius_norm();
        assert!((ss - fr * fr).abs() <= 1e-10 * fr * fr);
    }

    #[test]
    fn rank_deficient_matrix_clamps_to_zero() {
        // Rank one: second singular value must be exactly 0 after clamping.
        let a = SquareMatrix::new(2, vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        let s = singular_values(&a).unwrap();
        assert_eq!(s.values()[1], 0.0);
        assert_eq!(s.rank(), 1);
    }

    #[test]
    fn zero_matrix_spectrum() {
        let s = singular_values(&SquareMatrix::zeros(3)).unwrap();
        assert_eq!(s.values(), &[0.0, 0.0, 0.0]);
        assert_eq!(s.rank(), 0);
    }

    #[test]
    fn identity_spectrum_is_flat() {
        let s = singular_values(&SquareMatrix::identity(5)).unwrap();
        for v in s.values() {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }
}

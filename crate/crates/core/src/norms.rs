//! Schatten (quasi-)norms, mixed column norms, and the sequence comparison
//! lemma used by the flat-spectrum lower bounds.
//!
//! All exponents live in (0, ∞]. For p < 1 these are quasi-norms; sums are
//! evaluated in the log domain after scaling by the largest term so tiny
//! exponents cannot overflow or lose the head term.

use crate::error::{Error, Result};
use crate::exponent::SpectrumExponent;
use crate::matrix::SquareMatrix;
use crate::svd::singular_values;

/// ell_p (quasi-)norm of a sequence; absolute values are taken.
pub fn sequence_norm(values: &[f64], p: SpectrumExponent) -> f64 {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    match p {
        SpectrumExponent::Infinite => scale,
        SpectrumExponent::Finite(p) if p >= 1.0 => {
            let acc: f64 = values
                .iter()
                .map(|v| (v.abs() / scale).powf(p))
                .sum();
            scale * acc.powf(1.0 / p)
        }
        SpectrumExponent::Finite(p) => {
            // quasi-norm range: exp-log-sum on the scaled terms
            let acc: f64 = values
                .iter()
                .filter(|v| **v != 0.0)
                .map(|v| (p * (v.abs() / scale).ln()).exp())
                .sum();
            scale * (acc.ln() / p).exp()
        }
    }
}

/// Schatten (quasi-)norm: ell_p norm of the singular values; p = ∞ gives the
/// operator norm.
pub fn schatten_norm(a: &SquareMatrix, p: SpectrumExponent) -> Result<f64> {
    Ok(sequence_norm(singular_values(a)?.values(), p))
}

/// Schatten norm evaluated on an already computed spectrum.
pub fn spectrum_norm(spectrum: &[f64], p: SpectrumExponent) -> f64 {
    sequence_norm(spectrum, p)
}

/// Mixed norm with columns as the inner blocks: the inner exponent is applied
/// down each column (row index varies), the outer exponent across columns.
pub fn mixed_norm(
    m: &SquareMatrix,
    inner: SpectrumExponent,
    outer: SpectrumExponent,
) -> f64 {
    let n = m.order();
    let per_column: Vec<f64> = (0..n)
        .map(|k| {
            let col: Vec<f64> = (0..n).map(|j| m.entry(j, k)).collect();
            sequence_norm(&col, inner)
        })
        .collect();
    sequence_norm(&per_column, outer)
}

/// Mixed norm with rows as the inner blocks; identical to `mixed_norm` on the
/// transpose, exposed separately so call sites state their orientation.
pub fn mixed_norm_transposed(
    m: &SquareMatrix,
    inner: SpectrumExponent,
    outer: SpectrumExponent,
) -> f64 {
    let n = m.order();
    let per_row: Vec<f64> = (0..n)
        .map(|j| {
            let row: Vec<f64> = (0..n).map(|k| m.entry(j, k)).collect();
            sequence_norm(&row, inner)
        })
        .collect();
    sequence_norm(&per_row, outer)
}

/// Compares the ell_q/ell_p ratio of a sequence against its truncation.
///
/// `x` has m+1 entries; the last entry must not exceed the smallest absolute
/// value among the first m. For 0 < q < p ≤ ∞ the extended ratio
/// ||x||_q / ||x||_p is at least the truncated one; both are returned as
/// `(extended, truncated)`.
pub fn pietsch_ratio_compare(
    x: &[f64],
    q: SpectrumExponent,
    p: SpectrumExponent,
) -> Result<(f64, f64)> {
    if x.len() < 2 {
        return Err(Error::usage("need at least two entries to compare"));
    }
    if !q.lt(p) {
        return Err(Error::usage(format!(
            "comparison needs 0 < q < p <= inf, got q={q}, p={p}"
        )));
    }
    let m = x.len() - 1;
    let head_min = x[..m].iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
    let tail = x[m].abs();
    if tail > head_min {
        return Err(Error::usage(format!(
            "appended entry {tail} exceeds the smallest head entry {head_min}"
        )));
    }
    if x.iter().all(|v| *v == 0.0) {
        return Err(Error::usage("sequence is identically zero"));
    }
    let extended = sequence_norm(x, q) / sequence_norm(x, p);
    let truncated = sequence_norm(&x[..m], q) / sequence_norm(&x[..m], p);
    Ok((extended, truncated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{salt, GaussianStream};

    fn pexp(v: f64) -> SpectrumExponent {
        SpectrumExponent::finite(v).unwrap()
    }

    const INF: SpectrumExponent = SpectrumExponent::Infinite;

    #[test]
    fn sequence_norm_hand_values() {
        let x = [3.0, -4.0];
        assert_eq!(sequence_norm(&x, pexp(1.0)), 7.0);
        assert_eq!(sequence_norm(&x, pexp(2.0)), 5.0);
        assert_eq!(sequence_norm(&x, INF), 4.0);
        // quasi-norm: (1 + sqrt(4))^2 = 9 for p = 1/2 on (1, 4)
        let y = [1.0, 4.0];
        assert!((sequence_norm(&y, pexp(0.5)) - 9.0).abs() < 1e-12);
        assert_eq!(sequence_norm(&[], pexp(2.0)), 0.0);
        assert_eq!(sequence_norm(&[0.0, 0.0], INF), 0.0);
    }

    #[test]
    fn quasi_norm_survives_extreme_scales() {
        // With p = 0.1 a naive power sum of raw entries overflows; the scaled
        // log-domain form must return scale * 2^(1/p) for two equal entries.
        let p = pexp(0.1);
        for scale in [1e-200, 1.0, 1e200] {
            let v = [scale, scale];
            let want = scale * 2f64.powf(10.0);
            let got = sequence_norm(&v, p);
            assert!(
                (got - want).abs() <= 1e-10 * want,
                "scale {scale}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn schatten_norms_of_known_matrix() {
        // A = [[1,2],[3,4]]: squared singular values are 15 +- sqrt(221).
        // Nuclear norm: sqrt(30 + 2*|det|) = sqrt(34); Frobenius: sqrt(30);
        // operator: sqrt(15 + sqrt(221)).
        let a = SquareMatrix::new(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let nuc = schatten_norm(&a, pexp(1.0)).unwrap();
        assert!((nuc - 34.0f64.sqrt()).abs() < 1e-12);
        let fro = schatten_norm(&a, pexp(2.0)).unwrap();
        assert!((fro - 30.0f64.sqrt()).abs() < 1e-12);
        let op = schatten_norm(&a, INF).unwrap();
        assert!((op - (15.0 + 221.0f64.sqrt()).sqrt()).abs() < 1e-12);
        // p = 4: ((s1^2)^2 + (s2^2)^2)^(1/4) = (2*(225+221))^(1/4)
        let p4 = schatten_norm(&a, pexp(4.0)).unwrap();
        assert!((p4 - 892.0f64.powf(0.25)).abs() < 1e-12);
        // quasi p = 1/2 from the closed-form spectrum
        let disc = 221.0f64.sqrt();
        let s1 = (15.0 + disc).sqrt();
        let s2 = (15.0 - disc).sqrt();
        let want = (s1.sqrt() + s2.sqrt()).powi(2);
        let ph = schatten_norm(&a, pexp(0.5)).unwrap();
        assert!((ph - want).abs() < 1e-10);
    }

    #[test]
    fn mixed_norm_hand_values() {
        // Columns of [[1,2],[3,4]] are (1,3) and (2,4).
        let m = SquareMatrix::new(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let l1l2 = mixed_norm(&m, pexp(2.0), pexp(1.0));
        assert!((l1l2 - (10.0f64.sqrt() + 20.0f64.sqrt())).abs() < 1e-12);
        let linf = mixed_norm(&m, pexp(2.0), INF);
        assert!((linf - 20.0f64.sqrt()).abs() < 1e-12);
        // inner 2 / outer 2 collapses to Frobenius
        let l2l2 = mixed_norm(&m, pexp(2.0), pexp(2.0));
        assert!((l2l2 - 30.0f64.sqrt()).abs() < 1e-12);
        // transposed variant runs over rows (1,2) and (3,4)
        let rows = mixed_norm_transposed(&m, pexp(2.0), pexp(1.0));
        assert!((rows - (5.0f64.sqrt() + 5.0)).abs() < 1e-12);
    }

    #[test]
    fn column_mixed_norm_bounds_schatten() {
        // For q >= 2 the column mixed norm is below the Schatten norm; for
        // p <= 2 the Schatten norm is below the column mixed norm.
        let mut stream = GaussianStream::new(2024, salt::ACCEPTANCE, 0);
        for trial in 0..200 {
            let n = 2 + (trial % 5);
            let a = stream.gaussian_matrix(n);
            for q in [pexp(2.0), pexp(3.0), pexp(5.0), INF] {
                let lhs = mixed_norm(&a, pexp(2.0), q);
                let rhs = schatten_norm(&a, q).unwrap();
                assert!(
                    lhs <= rhs * (1.0 + 1e-10),
                    "q={q}: mixed {lhs} > schatten {rhs}"
                );
            }
            for p in [pexp(1.0), pexp(1.3), pexp(1.7), pexp(2.0)] {
                let lhs = schatten_norm(&a, p).unwrap();
                let rhs = mixed_norm(&a, pexp(2.0), p);
                assert!(
                    lhs <= rhs * (1.0 + 1e-10),
                    "p={p}: schatten {lhs} > mixed {rhs}"
                );
            }
        }
    }

    #[test]
    fn schatten_monotone_in_exponent() {
        // q <= p implies ||A||_p <= ||A||_q.
        let mut stream = GaussianStream::new(7, salt::ACCEPTANCE, 1);
        let grid = [pexp(0.5), pexp(1.0), pexp(1.5), pexp(2.0), pexp(4.0), INF];
        for trial in 0..100 {
            let n = 2 + (trial % 4);
            let a = stream.gaussian_matrix(n);
            let norms: Vec<f64> = grid
                .iter()
                .map(|p| schatten_norm(&a, *p).unwrap())
                .collect();
            for w in norms.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-10));
            }
        }
    }

    #[test]
    fn unitary_invariance() {
        let mut stream = GaussianStream::new(99, salt::ACCEPTANCE, 2);
        for _ in 0..50 {
            let a = stream.gaussian_matrix(4);
            let u = stream.orthogonal_matrix(4);
            let v = stream.orthogonal_matrix(4);
            let rotated = u.matmul(&a).matmul(&v);
            for p in [pexp(0.7), pexp(1.0), pexp(2.0), pexp(3.0), INF] {
                let x = schatten_norm(&a, p).unwrap();
                let y = schatten_norm(&rotated, p).unwrap();
                assert!((x - y).abs() <= 1e-9 * x.max(1.0), "p={p}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn hoelder_interpolation_through_frobenius() {
        // ||A||_2 <= sqrt(||A||_q * ||A||_q'), conjugate pair (q, q').
        use crate::exponent::conjugate_exponent;
        let mut stream = GaussianStream::new(5, salt::ACCEPTANCE, 3);
        for trial in 0..100 {
            let n = 2 + (trial % 5);
            let a = stream.gaussian_matrix(n);
            for q in [pexp(1.0), pexp(1.5), pexp(2.0), pexp(3.0), INF] {
                let qc = conjugate_exponent(q).unwrap();
                let two = schatten_norm(&a, pexp(2.0)).unwrap();
                let rhs = (schatten_norm(&a, q).unwrap() * schatten_norm(&a, qc).unwrap()).sqrt();
                assert!(two <= rhs * (1.0 + 1e-10));
            }
        }
    }

    #[test]
    fn pietsch_hand_values() {
        // (2, 1) with q=1, p=2: extended 3/sqrt(5), truncated 1.
        let (ext, trunc) = pietsch_ratio_compare(&[2.0, 1.0], pexp(1.0), pexp(2.0)).unwrap();
        assert!((ext - 3.0 / 5.0f64.sqrt()).abs() < 1e-12);
        assert_eq!(trunc, 1.0);
        assert!(ext >= trunc);
        // all ones, q=1, p=inf: (3, 2)
        let (e, t) = pietsch_ratio_compare(&[1.0, 1.0, 1.0], pexp(1.0), INF).unwrap();
        assert!((e - 3.0).abs() < 1e-12 && (t - 2.0).abs() < 1e-12);
    }

    #[test]
    fn pietsch_rejects_bad_input() {
        // appended entry larger than the head minimum
        assert!(pietsch_ratio_compare(&[1.0, 2.0], pexp(1.0), pexp(2.0)).is_err());
        // q >= p
        assert!(pietsch_ratio_compare(&[2.0, 1.0], pexp(2.0), pexp(2.0)).is_err());
        assert!(pietsch_ratio_compare(&[2.0, 1.0], pexp(3.0), pexp(2.0)).is_err());
        // identically zero
        assert!(pietsch_ratio_compare(&[0.0, 0.0], pexp(1.0), pexp(2.0)).is_err());
        // too short
        assert!(pietsch_ratio_compare(&[1.0], pexp(1.0), pexp(2.0)).is_err());
    }

    #[test]
    fn pietsch_random_admissible_sequences() {
        let mut stream = GaussianStream::new(314, salt::ACCEPTANCE, 4);
        for _ in 0..1000 {
            let m = 1 + stream.below(20) as usize;
            let mut x: Vec<f64> = (0..m).map(|_| stream.normal().abs() + 1e-3).collect();
            let head_min = x.iter().cloned().fold(f64::INFINITY, f64::min);
            x.push(stream.uniform() * head_min);
            let p = if stream.below(4) == 0 {
                INF
            } else {
                pexp(0.1 + 4.0 * stream.uniform())
            };
            let q = pexp(match p {
                SpectrumExponent::Finite(pv) => pv * (0.05 + 0.9 * stream.uniform()),
                SpectrumExponent::Infinite => 0.1 + 4.0 * stream.uniform(),
            });
            let (ext, trunc) = pietsch_ratio_compare(&x, q, p).unwrap();
            assert!(
                ext >= trunc,
                "violation: ext {ext} < trunc {trunc} (q={q}, p={p}, x={x:?})"
            );
        }
    }
}

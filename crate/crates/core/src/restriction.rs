//! Maximization of the Schatten q-vs-p norm ratio over a subspace.
//!
//! `restriction_norm` estimates sup { ||A||_q / ||A||_p : A in S, A != 0 }
//! by projected gradient ascent on the unit coefficient sphere, with
//! multistart. The reported value is always achieved by the returned witness,
//! so it is a certified lower bound on the supremum; as an estimate of the
//! supremum itself it is heuristic.
//!
//! Deterministic starts come first: the projected identity (exact on
//! coordinate-row subspaces and the full space for q <= p), and a flat-top
//! member when q < p (which guarantees the combinatorial floor). Random
//! starts follow, one pinned substream per start index, so results do not
//! depend on thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::SpectrumExponent;
use crate::matrix::SquareMatrix;
use crate::multiplicity::{auto_flat_count, construct_flat_top, kappa};
use crate::norms::spectrum_norm;
use crate::rng::{salt, GaussianStream};
use crate::subspace::MatrixSubspace;
use crate::svd::{singular_values, svd_factorize, SvdFactors};

/// Iteration cap per start.
const MAX_ITERS: usize = 200;
/// A phase stops after this many consecutive iterations whose combined
/// relative gain stays below `STALL_GAIN`. Near a nonsmooth maximizer (tied
/// top singular block) the ascent keeps finding real but vanishing
/// improvements every iteration; gains this small are far below every
/// downstream tolerance and not worth the line-search cost.
const STALL_WINDOW: usize = 12;
const STALL_GAIN: f64 = 1e-10;
/// Relative tolerance for declaring a tied top singular block.
const TIE_TOLERANCE: f64 = 1e-9;
/// Smoothing ladder for quasi-norm exponents, relative to the top singular
/// value: the surrogate replaces sigma by sqrt(sigma^2 + eps^2).
const SMOOTHING_LADDER: [f64; 3] = [1e-6, 1e-7, 1e-8];

/// A member achieving the reported ratio, plus the audit trail of all starts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioWitness {
    pub matrix: SquareMatrix,
    pub value: f64,
    pub p: SpectrumExponent,
    pub q: SpectrumExponent,
    /// Final objective of every start, deterministic starts first.
    pub per_start: Vec<f64>,
}

/// Exact objective ||A||_q / ||A||_p evaluated from one factorization.
fn ratio_of(spectrum: &[f64], p: SpectrumExponent, q: SpectrumExponent) -> f64 {
    spectrum_norm(spectrum, q) / spectrum_norm(spectrum, p)
}

/// Weights w_j with d||A||_s = sum_j w_j u_j v_j^T; `eps` smooths s < 1.
pub(crate) fn norm_gradient_weights(spectrum: &[f64], s: SpectrumExponent, eps: f64) -> Vec<f64> {
    match s {
        SpectrumExponent::Infinite => {
            let top = spectrum[0];
            let tied = spectrum
                .iter()
                .take_while(|v| **v >= top * (1.0 - TIE_TOLERANCE))
                .count()
                .max(1);
            // averaging over a tied block is basis independent
            spectrum
                .iter()
                .enumerate()
                .map(|(j, _)| if j < tied { 1.0 / tied as f64 } else { 0.0 })
                .collect()
        }
        SpectrumExponent::Finite(s) if s >= 1.0 => {
            let norm = spectrum_norm(spectrum, SpectrumExponent::Finite(s));
            spectrum.iter().map(|v| (v / norm).powf(s - 1.0)).collect()
        }
        SpectrumExponent::Finite(s) => {
            // smoothed surrogate m_j = sqrt(sigma_j^2 + eps^2)
            let smoothed: Vec<f64> = spectrum.iter().map(|v| v.hypot(eps)).collect();
            let norm = spectrum_norm(&smoothed, SpectrumExponent::Finite(s));
            spectrum
                .iter()
                .zip(&smoothed)
                .map(|(v, m)| (m / norm).powf(s - 1.0) * (v / m))
                .collect()
        }
    }
}

/// Euclidean gradient of the ratio at A, pulled back to coefficient space.
fn ratio_gradient(
    subspace: &MatrixSubspace,
    factors: &SvdFactors,
    p: SpectrumExponent,
    q: SpectrumExponent,
    eps: f64,
) -> Vec<f64> {
    let spectrum = factors.spectrum.values();
    let np = spectrum_norm(spectrum, p);
    let nq = spectrum_norm(spectrum, q);
    let wq = norm_gradient_weights(spectrum, q, eps);
    let wp = norm_gradient_weights(spectrum, p, eps);
    let n = factors.left.order();
    // d(ratio)/d sigma_j collapses onto the singular frames
    let omega: Vec<f64> = (0..n)
        .map(|j| (wq[j] * np - nq * wp[j]) / (np * np))
        .collect();
    let scaled = SquareMatrix::from_fn(n, |i, j| factors.left.entry(i, j) * omega[j]);
    let euclidean = scaled.matmul(&factors.right.transpose());
    subspace.coefficients(&euclidean)
}

fn normalize(c: &mut [f64]) {
    let norm: f64 = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in c.iter_mut() {
        *x /= norm;
    }
}

/// Runs ascent from one start; returns (best objective, best coefficients).
fn ascend(
    subspace: &MatrixSubspace,
    p: SpectrumExponent,
    q: SpectrumExponent,
    start: &[f64],
) -> Option<(f64, Vec<f64>)> {
    let quasi = matches!(p, SpectrumExponent::Finite(v) if v < 1.0)
        || matches!(q, SpectrumExponent::Finite(v) if v < 1.0);
    let phases: &[f64] = if quasi { &SMOOTHING_LADDER } else { &[0.0] };
    let iters_per_phase = MAX_ITERS / phases.len();

    let mut c = start.to_vec();
    normalize(&mut c);
    let mut factors = svd_factorize(&subspace.member(&c)).ok()?;
    let mut value = ratio_of(factors.spectrum.values(), p, q);
    if !value.is_finite() {
        return None;
    }
    let mut best = (value, c.clone());

    for phase in phases {
        let mut step = 0.5;
        let mut mark = value;
        let mut window_left = STALL_WINDOW;
        for _ in 0..iters_per_phase {
            let eps = phase * factors.spectrum.largest();
            let grad = ratio_gradient(subspace, &factors, p, q, eps);
            let align: f64 = grad.iter().zip(&c).map(|(g, x)| g * x).sum();
            let mut tangent: Vec<f64> = grad
                .iter()
                .zip(&c)
                .map(|(g, x)| g - align * x)
                .collect();
            let tnorm: f64 = tangent.iter().map(|x| x * x).sum::<f64>().sqrt();
            if tnorm <= 1e-10 * (1.0 + value.abs()) {
                break;
            }
            for x in &mut tangent {
                *x /= tnorm;
            }
            // backtracking on the exact objective; candidates only need the
            // spectrum, so the full factorization waits until acceptance
            let mut improved = false;
            while step > 1e-12 {
                let mut cand: Vec<f64> = c
                    .iter()
                    .zip(&tangent)
                    .map(|(x, t)| x + step * t)
                    .collect();
                normalize(&mut cand);
                let member = subspace.member(&cand);
                if let Ok(spectrum) = singular_values(&member) {
                    let v = ratio_of(spectrum.values(), p, q);
                    if v.is_finite() && v > value * (1.0 + 1e-14) {
                        let Ok(f) = svd_factorize(&member) else { break };
                        // re-evaluate from the factor path so value and
                        // factors never drift apart in the last ulp
                        value = ratio_of(f.spectrum.values(), p, q);
                        c = cand;
                        factors = f;
                        improved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
            if value > best.0 {
                best = (value, c.clone());
            }
            if value > mark * (1.0 + STALL_GAIN) {
                mark = value;
                window_left = STALL_WINDOW;
            } else {
                window_left -= 1;
                if window_left == 0 {
                    break;
                }
            }
            step = (step * 1.5).min(1.0);
        }
    }
    Some(best)
}

/// Multistart estimate of the restriction norm of the identity from
/// S_p to S_q on the subspace. `restarts` counts the random starts added
/// after the deterministic ones.
pub fn restriction_norm(
    subspace: &MatrixSubspace,
    p: SpectrumExponent,
    q: SpectrumExponent,
    restarts: usize,
    seed: u64,
) -> Result<RatioWitness> {
    let dim = subspace.dim();
    let order = subspace.order();

    let mut starts: Vec<Vec<f64>> = Vec::new();
    // projected identity: exact maximizer on coordinate-row patterns for q<=p
    let id_coeffs = subspace.coefficients(&SquareMatrix::identity(order));
    if id_coeffs.iter().map(|x| x * x).sum::<f64>().sqrt() > 1e-8 {
        starts.push(id_coeffs);
    }
    // flat-top member secures the combinatorial floor when q < p
    if q.lt(p) && dim > 0 {
        let k = auto_flat_count(order, dim);
        if kappa(k, order).map(|t| dim >= t).unwrap_or(false) {
            if let Ok(cert) = construct_flat_top(subspace, k, 1e-8, seed) {
                starts.push(subspace.coefficients(&cert.matrix));
            }
        }
    }
    let deterministic = starts.len();
    for index in 0..restarts {
        let mut stream = GaussianStream::new(seed, salt::RESTRICTION, index as u64);
        starts.push(stream.unit_vector(dim));
    }
    if starts.is_empty() {
        return Err(Error::usage("no starts: zero restarts and no deterministic start"));
    }

    let outcomes: Vec<Option<(f64, Vec<f64>)>> = starts
        .par_iter()
        .map(|s| ascend(subspace, p, q, s))
        .collect();

    let per_start: Vec<f64> = outcomes
        .iter()
        .map(|o| o.as_ref().map(|(v, _)| *v).unwrap_or(f64::NAN))
        .collect();
    let best = outcomes
        .iter()
        .flatten()
        .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    debug_assert!(deterministic <= 2);
    match best {
        None => Err(Error::numerical("every ascent start failed")),
        Some((value, coeffs)) => {
            Ok(RatioWitness {
                matrix: subspace.member(coeffs),
                value: *value,
                p,
                q,
                per_start,
            })
        }
    }
}

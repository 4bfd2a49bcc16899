//! Construction of subspace members whose top singular value is flat with
//! prescribed multiplicity.
//!
//! Any subspace of dimension at least kappa(k) = (2N-k+1)(k-1)+1 contains a
//! matrix with operator norm one attained by its k largest singular values.
//! `construct_flat_top` realizes such a matrix inductively: given a member B
//! with sigma_1 = ... = sigma_j = 1 = ||B||, it finds a perturbation X in the
//! subspace that (a) kills the flat block (X v_i = 0, i <= j) and (b) maps
//! the remaining right singular directions into the orthocomplement of the
//! flat left block. Those are kappa(j+1) - 1 linear conditions, so a null
//! direction exists. The scalar gamma with ||B + gamma X|| = 1 is then found
//! by bisection on the convex reduced-block norm; the flat block is exactly
//! preserved and the multiplicity grows by at least one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::SpectrumExponent;
use crate::matrix::SquareMatrix;
use crate::norms::spectrum_norm;
use crate::restriction::RatioWitness;
use crate::rng::{salt, GaussianStream};
use crate::subspace::MatrixSubspace;
use crate::svd::svd_factorize;

/// Minimal subspace dimension guaranteeing a flat top block of size k.
pub fn kappa(flat_count: usize, order: usize) -> Result<usize> {
    if flat_count < 1 || flat_count > order {
        return Err(Error::usage(format!(
            "flat count must lie in 1..={order}, got {flat_count}"
        )));
    }
    Ok((2 * order - flat_count + 1) * (flat_count - 1) + 1)
}

/// Largest k whose guarantee threshold fits inside a subspace of the given
/// dimension: the biggest k with dim - 1 >= 2N(k-1), capped at N.
pub fn auto_flat_count(order: usize, dim: usize) -> usize {
    (((dim - 1) / (2 * order)) + 1).min(order)
}

/// Output of the flat-top construction, checkable without rerunning it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiplicityCertificate {
    pub matrix: SquareMatrix,
    /// Number of leading singular values within tolerance of one.
    pub achieved_multiplicity: usize,
    /// max over the first k singular values of |sigma_i - 1|.
    pub spectral_residual: f64,
    /// max(0, operator norm - 1).
    pub norm_excess: f64,
    /// Frobenius distance from the matrix to the input subspace.
    pub containment_residual: f64,
    /// (multiplicity being extended, chosen gamma) per inductive step.
    pub gamma_trace: Vec<(usize, f64)>,
    pub tolerance: f64,
}

/// Orthonormal basis of the null space of the linear map given by `rows`
/// (each row a functional on R^dim), via row-space completion.
fn null_space(rows: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut row_basis: Vec<Vec<f64>> = Vec::new();
    let scale = rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    for row in rows {
        let mut r = row.clone();
        for _ in 0..2 {
            for b in &row_basis {
                let c: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in r.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let norm: f64 = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 * scale {
            for x in &mut r {
                *x /= norm;
            }
            row_basis.push(r);
        }
    }
    // Complete the row space to the full space with coordinate directions,
    // largest residual first; the appended vectors span the null space.
    let mut null = Vec::new();
    let mut span = row_basis;
    let mut candidates: Vec<usize> = (0..dim).collect();
    while span.len() < dim {
        let (pos, best, best_norm) = candidates
            .iter()
            .enumerate()
            .map(|(pos, &c)| {
                let mut r = vec![0.0; dim];
                r[c] = 1.0;
                for b in &span {
                    let d = b[c];
                    for (x, y) in r.iter_mut().zip(b) {
                        *x -= d * y;
                    }
                }
                let norm: f64 = r.iter().map(|x| x * x).sum::<f64>().sqrt();
                (pos, r, norm)
            })
            .max_by(|a, b| a.2.partial_cmp(&b.2).unwrap())
            .expect("candidates nonempty");
        candidates.remove(pos);
        if best_norm < 1e-10 {
            break;
        }
        let mut r = best;
        // second orthogonalization pass for accuracy
        for b in &span {
            let c: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in r.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        let norm: f64 = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut r {
            *x /= norm;
        }
        span.push(r.clone());
        null.push(r);
    }
    null
}

/// Operator norm of gamma * p + d.
fn reduced_norm(p: &SquareMatrix, d: &SquareMatrix, gamma: f64) -> Result<f64> {
    let mut m = d.clone();
    m.add_scaled(gamma, p);
    Ok(svd_factorize(&m)?.spectrum.largest())
}

pub fn construct_flat_top(
    subspace: &MatrixSubspace,
    flat_count: usize,
    tol: f64,
    seed: u64,
) -> Result<MultiplicityCertificate> {
    let n = subspace.order();
    let dim = subspace.dim();
    let threshold = kappa(flat_count, n)?;
    if dim < threshold {
        return Err(Error::usage(format!(
            "flat count {flat_count} needs dimension >= {threshold}, subspace has {dim}"
        )));
    }
    if !(tol > 0.0 && tol <= 0.1) {
        return Err(Error::usage(format!(
            "tolerance must lie in (0, 0.1], got {tol}"
        )));
    }

    // Initial member: random unit combination, normalized to operator norm 1.
    let mut stream = GaussianStream::new(seed, salt::FLAT_TOP, 0);
    let mut b = loop {
        let coeffs = stream.unit_vector(dim);
        let cand = subspace.member(&coeffs);
        let top = svd_factorize(&cand)?.spectrum.largest();
        if top > 1e-10 {
            break cand.scaled(1.0 / top);
        }
    };

    let mut gamma_trace: Vec<(usize, f64)> = Vec::new();
    // Every pass must either finish, raise the multiplicity, or rescale
    // after roundoff drift; the cap turns any state that stops progressing
    // into a reportable failure instead of a spin.
    let max_passes = 6 * n + 12;
    let mut done = false;
    for _ in 0..max_passes {
        let mut f = svd_factorize(&b)?;
        let top = f.spectrum.largest();
        if !(top > 1e-10) {
            return Err(Error::numerical("flat-top member collapsed to zero"));
        }
        if (top - 1.0).abs() > tol / 8.0 {
            // An overlarge step or accumulated update roundoff moved the top
            // away from one. The recount below assumes ||B|| = 1 and can
            // never see a flat block otherwise, so restore the invariant.
            b = b.scaled(1.0 / top);
            f = svd_factorize(&b)?;
        }
        let sigma = f.spectrum.values();
        let flat = sigma
            .iter()
            .take_while(|s| (**s - 1.0).abs() <= tol / 2.0)
            .count();
        if flat >= flat_count {
            done = true;
            break;
        }
        let j = flat.max(1);

        // Linear conditions on the coefficient vector alpha of X:
        //   X v_i = 0 for i < j (N scalar rows each), and
        //   <X v_i, u_l> = 0 for i >= j, l < j.
        let basis = subspace.basis();
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(j * n + (n - j) * j);
        let v_vectors: Vec<Vec<f64>> = (0..n).map(|i| f.right_vector(i)).collect();
        let u_vectors: Vec<Vec<f64>> = (0..j).map(|l| f.left_vector(l)).collect();
        let images: Vec<Vec<Vec<f64>>> = basis
            .iter()
            .map(|bm| v_vectors.iter().map(|v| bm.apply(v)).collect())
            .collect();
        for i in 0..j {
            for r in 0..n {
                rows.push((0..dim).map(|m| images[m][i][r]).collect());
            }
        }
        for i in j..n {
            for u in u_vectors.iter() {
                rows.push(
                    (0..dim)
                        .map(|m| images[m][i].iter().zip(u).map(|(x, y)| x * y).sum())
                        .collect(),
                );
            }
        }

        let null = null_space(&rows, dim);
        if null.is_empty() {
            return Err(Error::numerical(format!(
                "no null direction at multiplicity {j} (dimension {dim})"
            )));
        }

        // Complement frames U_j^+ (columns j..N of U) and V_j^+.
        let tail = n - j;
        let u_plus: Vec<Vec<f64>> = (j..n).map(|c| f.left_vector(c)).collect();
        let v_plus: Vec<Vec<f64>> = (j..n).map(|c| f.right_vector(c)).collect();
        let reduce = |m: &SquareMatrix| -> SquareMatrix {
            let imgs: Vec<Vec<f64>> = v_plus.iter().map(|v| m.apply(v)).collect();
            SquareMatrix::from_fn(tail, |r, c| {
                imgs[c].iter().zip(&u_plus[r]).map(|(x, y)| x * y).sum()
            })
        };

        // Rank the null directions by how much mass the candidate leaves on
        // the complement block; a direction with no mass cannot raise the
        // next singular value.
        let mut candidates: Vec<(f64, SquareMatrix)> = null
            .iter()
            .map(|alpha| {
                let x = subspace.member(alpha);
                let r = reduce(&x);
                (r.frobenius_norm(), x)
            })
            .collect();
        candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

        let d_block = reduce(&b);
        let mut advanced = false;
        for (attempt, (mass, x)) in candidates.iter().take(3).enumerate() {
            if *mass < 1e-10 {
                continue;
            }
            let x = x.scaled(1.0 / x.frobenius_norm());
            let p_block = reduce(&x);

            // Bracket the unique nonnegative root of ||D + gamma P|| = 1.
            let g0 = reduced_norm(&p_block, &d_block, 0.0)?;
            if (g0 - 1.0).abs() <= tol / 4.0 {
                // next singular value is already flat; recount on next pass
                gamma_trace.push((j, 0.0));
                advanced = true;
                break;
            }
            // A gamma beyond ~1e12 multiplies null-space roundoff into the
            // flat block and destroys it; treat such candidates as massless.
            let mut lo = 0.0f64;
            let mut hi = 1.0f64;
            let mut doublings = 0;
            let bracket = loop {
                let g = reduced_norm(&p_block, &d_block, hi)?;
                if g > 1.0 {
                    break true;
                }
                lo = hi;
                hi *= 2.0;
                doublings += 1;
                if doublings > 40 {
                    break false;
                }
            };
            if !bracket {
                if attempt == 2 {
                    return Err(Error::numerical(
                        "reduced block norm never exceeded one while bracketing",
                    ));
                }
                continue;
            }
            let mut gamma = hi;
            let mut ok = false;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let g = reduced_norm(&p_block, &d_block, mid)?;
                if (g - 1.0).abs() <= tol / 4.0 {
                    gamma = mid;
                    ok = true;
                    break;
                }
                if g > 1.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            if !ok {
                return Err(Error::numerical(
                    "bisection on the reduced block failed to converge",
                ));
            }
            b.add_scaled(gamma, &x);
            gamma_trace.push((j, gamma));
            advanced = true;
            break;
        }
        if !advanced {
            return Err(Error::numerical(format!(
                "all null directions at multiplicity {j} left the complement block empty"
            )));
        }
    }
    if !done {
        return Err(Error::numerical(format!(
            "flat block failed to stabilize within {max_passes} passes"
        )));
    }

    // Certificate from a fresh factorization.
    let f = svd_factorize(&b)?;
    let sigma = f.spectrum.values();
    let achieved = sigma
        .iter()
        .take_while(|s| (**s - 1.0).abs() <= tol)
        .count();
    let spectral_residual = sigma[..flat_count]
        .iter()
        .map(|s| (s - 1.0).abs())
        .fold(0.0f64, f64::max);
    let norm_excess = (sigma[0] - 1.0).max(0.0);
    let containment_residual = subspace.containment_residual(&b);
    let cert = MultiplicityCertificate {
        matrix: b,
        achieved_multiplicity: achieved,
        spectral_residual,
        norm_excess,
        containment_residual,
        gamma_trace,
        tolerance: tol,
    };
    if cert.spectral_residual > tol || cert.achieved_multiplicity < flat_count {
        return Err(Error::numerical_with_best(
            format!(
                "flat block check failed: residual {:.3e}, achieved {}",
                cert.spectral_residual, cert.achieved_multiplicity
            ),
            1.0 - cert.spectral_residual,
        ));
    }
    Ok(cert)
}

/// Lower-bound witness for the q-vs-p norm ratio on a subspace: builds the
/// flat-top member for the automatic k and reports its ratio, which is at
/// least k^(1/q - 1/p) up to the construction tolerance.
pub fn flat_top_ratio_witness(
    subspace: &MatrixSubspace,
    p: SpectrumExponent,
    q: SpectrumExponent,
) -> Result<RatioWitness> {
    if !q.le(p) {
        return Err(Error::usage(format!(
            "ratio witness needs q <= p, got q={q}, p={p}"
        )));
    }
    let k = auto_flat_count(subspace.order(), subspace.dim());
    let cert = construct_flat_top(subspace, k, 1e-8, 0)?;
    let spectrum = svd_factorize(&cert.matrix)?.spectrum;
    let value = spectrum_norm(spectrum.values(), q) / spectrum_norm(spectrum.values(), p);
    Ok(RatioWitness {
        matrix: cert.matrix,
        value,
        p,
        q,
        per_start: vec![value],
    })
}

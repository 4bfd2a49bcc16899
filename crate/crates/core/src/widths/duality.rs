//! Duality audit: the Gelfand width of the identity S_p -> S_q equals the
//! Kolmogorov width of the adjoint identity S_q* -> S_p*. Both sides are
//! estimated independently (minimax heuristic vs finite-net approximation
//! width) and compared.

use serde::{Deserialize, Serialize};

use super::{
    gelfand_minimax, kolmogorov_finite_set, Direction, EstimateReport, FiniteTestSet,
    TargetNorm, WidthKind, WidthQuery,
};
use crate::error::{Error, Result};
use crate::exponent::{conjugate_exponent, SpectrumExponent};
use crate::matrix::SquareMatrix;
use crate::norms::sequence_norm;
use crate::rng::{mix_seed, salt, GaussianStream};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DualityOptions {
    /// Inner restarts for the Gelfand side.
    pub restarts: usize,
    /// Outer refinement budget for both sides.
    pub outer_iters: usize,
    /// Unit-ball samples approximating the adjoint image.
    pub net_size: usize,
    pub seed: u64,
}

impl Default for DualityOptions {
    fn default() -> Self {
        DualityOptions {
            restarts: 256,
            outer_iters: 50,
            net_size: 4096,
            seed: 0,
        }
    }
}

/// Paired primal/dual estimates of one width.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualityAudit {
    pub primal: EstimateReport,
    pub dual: EstimateReport,
    /// |primal - dual| / max(primal, dual); 0 when both vanish.
    pub relative_gap: f64,
}

/// Seeded net on the unit sphere of S_s: random nonnegative spectra
/// normalized in the s-norm, conjugated by random orthogonal factors. Two
/// deterministic extreme members come first: the rank-one coordinate
/// matrix and the normalized flat-spectrum identity.
fn unit_sphere_net(
    order: usize,
    s: SpectrumExponent,
    count: usize,
    seed: u64,
) -> Result<FiniteTestSet> {
    let mut members = Vec::with_capacity(count + 2);
    members.push(SquareMatrix::unit(order, 0, 0));
    let flat = (order as f64).powf(-s.reciprocal());
    members.push(SquareMatrix::identity(order).scaled(flat));
    for t in 0..count {
        let mut stream = GaussianStream::new(seed, salt::NET, t as u64);
        let mut spectrum: Vec<f64> = (0..order).map(|_| stream.normal().abs()).collect();
        let norm = sequence_norm(&spectrum, s);
        if norm <= 1e-300 {
            spectrum = vec![1.0; order];
        }
        let norm = sequence_norm(&spectrum, s).max(1e-300);
        for v in &mut spectrum {
            *v /= norm;
        }
        let u = stream.orthogonal_matrix(order);
        let v = stream.orthogonal_matrix(order);
        let d = SquareMatrix::from_diagonal(&spectrum);
        members.push(u.matmul(&d).matmul(&v.transpose()));
    }
    FiniteTestSet::custom(members)
}

/// Estimates c_n(S_p -> S_q) directly and d_n(S_q* -> S_p*) through a
/// finite net of the adjoint unit ball, and reports both with their
/// relative gap. Requires the Banach range p, q >= 1.
pub fn duality_gap(
    p: SpectrumExponent,
    q: SpectrumExponent,
    order: usize,
    n: usize,
    opts: &DualityOptions,
) -> Result<DualityAudit> {
    if !p.at_least(1.0) || !q.at_least(1.0) {
        return Err(Error::usage(format!(
            "duality needs 1 <= p, q <= inf, got p={p}, q={q}"
        )));
    }
    let query = WidthQuery {
        kind: WidthKind::Gelfand,
        p,
        q,
        order,
        n,
    };
    query.validate()?;
    let primal = gelfand_minimax(query, opts.outer_iters, opts.restarts, opts.seed)?;

    let p_conj = conjugate_exponent(p)?;
    let q_conj = conjugate_exponent(q)?;
    let net = unit_sphere_net(
        order,
        q_conj,
        opts.net_size,
        mix_seed(opts.seed, salt::NET, 0),
    )?;
    let mut dual = kolmogorov_finite_set(
        &net,
        TargetNorm::Schatten(p_conj),
        n,
        opts.outer_iters,
        mix_seed(opts.seed, salt::NET, 1),
    )?;
    // relabel: the net under-samples the adjoint unit ball, so the
    // one-sided upper reading does not survive the restriction to the net
    dual.direction = Direction::Heuristic;
    dual.query = WidthQuery {
        kind: WidthKind::Kolmogorov,
        p: q_conj,
        q: p_conj,
        order,
        n,
    };
    dual.notes.push(format!(
        "adjoint unit ball approximated by a {}-sample net plus two extreme members; \
         net density limits accuracy",
        opts.net_size
    ));

    let top = primal.value.max(dual.value);
    let relative_gap = if top == 0.0 {
        0.0
    } else {
        (primal.value - dual.value).abs() / top
    };
    Ok(DualityAudit {
        primal,
        dual,
        relative_gap,
    })
}

//! Gaussian matrix ensembles and spectral concentration experiments.
//!
//! Expected Schatten norms of an N x N standard Gaussian matrix scale as
//! N^(1/2 + 1/q); `estimate_expected_schatten` reports the Monte Carlo mean
//! together with that normalization. `dvoretzky_band` probes the almost-
//! Euclidean behaviour of random subspaces below the critical dimension
//! ~ N^(1 + 2/q): on such subspaces N^(1/2-1/q) ||A||_q / ||A||_2 stays in a
//! narrow band, as does the nuclear-side statistic N^(-1/2) ||A||_1/||A||_2.
//!
//! Trial t always draws from the substream keyed by the trial index, so
//! results are independent of the worker count; `sample_gaussian(n, seed)`
//! is exactly trial 0 of the same seed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::SpectrumExponent;
use crate::matrix::SquareMatrix;
use crate::norms::spectrum_norm;
use crate::rng::{mix_seed, salt, GaussianStream};
use crate::subspace::MatrixSubspace;
use crate::svd::singular_values;

/// One standard Gaussian matrix from the pinned stream for (n, seed).
pub fn sample_gaussian(order: usize, seed: u64) -> SquareMatrix {
    GaussianStream::new(seed, salt::GAUSSIAN_MATRIX, 0).gaussian_matrix(order)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub order: usize,
    pub exponent: SpectrumExponent,
    pub trials: usize,
    pub seed: u64,
    pub mean: f64,
    /// Standard error of the mean.
    pub stderr: f64,
    /// mean / N^(1/2 + 1/q).
    pub normalized_mean: f64,
}

/// Monte Carlo estimate of E ||G||_q for G standard Gaussian of the given
/// order. Per-trial values are collected positionally and folded with
/// Welford's recurrence in trial order, so the worker count cannot change
/// the result.
pub fn estimate_expected_schatten(
    order: usize,
    q: SpectrumExponent,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloReport> {
    if order == 0 {
        return Err(Error::usage("order must be positive"));
    }
    if trials < 2 {
        return Err(Error::usage("need at least two trials for a standard error"));
    }
    let values: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let g = GaussianStream::new(seed, salt::GAUSSIAN_MATRIX, t as u64)
                .gaussian_matrix(order);
            singular_values(&g).map(|s| spectrum_norm(s.values(), q))
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    for (i, v) in values.iter().enumerate() {
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let variance = m2 / (trials - 1) as f64;
    let stderr = (variance / trials as f64).sqrt();
    let scale = (order as f64).powf(0.5 + q.reciprocal());
    Ok(MonteCarloReport {
        order,
        exponent: q,
        trials,
        seed,
        mean,
        stderr,
        normalized_mean: mean / scale,
    })
}

/// Min / median / max summary of a per-trial statistic.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Band {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

fn band_of(mut values: Vec<f64>) -> Band {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    let median = if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    };
    Band {
        min: values[0],
        median,
        max: values[n - 1],
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DvoretzkyBandReport {
    pub order: usize,
    pub exponent: SpectrumExponent,
    pub subspace_dim: usize,
    pub trials: usize,
    pub seed: u64,
    /// Band of N^(1/2 - 1/q) ||A||_q / ||A||_2.
    pub euclidean_stat: Band,
    /// Band of N^(-1/2) ||A||_1 / ||A||_2.
    pub nuclear_stat: Band,
}

/// Concentration probe: per trial, draw a random subspace of the given
/// dimension and a uniform unit member, and record both band statistics.
pub fn dvoretzky_band(
    order: usize,
    q: SpectrumExponent,
    subspace_dim: usize,
    trials: usize,
    seed: u64,
) -> Result<DvoretzkyBandReport> {
    if !q.at_least(2.0) {
        return Err(Error::usage(format!(
            "band statistic needs q >= 2, got {q}"
        )));
    }
    if subspace_dim == 0 || subspace_dim > order * order {
        return Err(Error::usage(format!(
            "subspace dimension must lie in 1..={}, got {subspace_dim}",
            order * order
        )));
    }
    if trials == 0 {
        return Err(Error::usage("need at least one trial"));
    }
    let n = order as f64;
    let one = SpectrumExponent::finite(1.0).expect("1 is a valid exponent");
    let two = SpectrumExponent::finite(2.0).expect("2 is a valid exponent");
    let pairs: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let sub_seed = mix_seed(seed, salt::DVORETZKY, t as u64);
            let s = MatrixSubspace::random(order, subspace_dim, sub_seed)?;
            let mut stream = GaussianStream::new(seed, salt::DVORETZKY_MEMBER, t as u64);
            let a = s.member(&stream.unit_vector(subspace_dim));
            let spectrum = singular_values(&a)?;
            let n2 = spectrum_norm(spectrum.values(), two);
            let nq = spectrum_norm(spectrum.values(), q);
            let n1 = spectrum_norm(spectrum.values(), one);
            Ok((
                n.powf(0.5 - q.reciprocal()) * nq / n2,
                n.powf(-0.5) * n1 / n2,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DvoretzkyBandReport {
        order,
        exponent: q,
        subspace_dim,
        trials,
        seed,
        euclidean_stat: band_of(pairs.iter().map(|p| p.0).collect()),
        nuclear_stat: band_of(pairs.iter().map(|p| p.1).collect()),
    })
}

//! Deterministic, splittable random streams.
//!
//! Every stochastic routine in this crate draws from a `GaussianStream`
//! keyed by `(master seed, salt, index)`. The generator is pinned so runs
//! reproduce bit for bit regardless of thread count:
//!
//! * generator: ChaCha8, keyed with the 32-byte block
//!   `LE64(master) || LE64(salt) || LE64(index) || LE64(0)`;
//! * uniforms on [0,1): `(next_u64() >> 11) * 2^-53`;
//! * standard normals: Marsaglia's polar transform on uniform pairs, with the
//!   spare value cached inside the stream;
//! * bounded integers: rejection sampling on the top multiple of the bound.
//!
//! Salts below namespace the independent substream families. Parallel loops
//! key one stream per task index and collect results positionally, so worker
//! count never changes any output.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::matrix::SquareMatrix;

/// Substream namespaces. Values are arbitrary but frozen; changing one is a
/// breaking change for reproducibility.
pub mod salt {
    /// Gaussian matrix ensembles (one index per Monte Carlo trial).
    pub const GAUSSIAN_MATRIX: u64 = 1;
    /// Random subspace spanning sets.
    pub const SUBSPACE: u64 = 2;
    /// Multistart ascent initial points (one index per start).
    pub const RESTRICTION: u64 = 3;
    /// Flat-spectrum construction seed combination.
    pub const FLAT_TOP: u64 = 4;
    /// Subspace draws inside concentration-band trials.
    pub const DVORETZKY: u64 = 5;
    /// Unit member draws inside concentration-band trials.
    pub const DVORETZKY_MEMBER: u64 = 6;
    /// Random complement frames in the minimax outer search.
    pub const FRAME: u64 = 7;
    /// Random nets over unit-ball images.
    pub const NET: u64 = 8;
    /// Outer search inside finite-set width minimization.
    pub const KOLMOGOROV: u64 = 9;
    /// Sampled symmetry-group elements for finite test sets.
    pub const TEST_SET: u64 = 10;
    /// Acceptance-suite ancillary draws.
    pub const ACCEPTANCE: u64 = 11;
}

/// SplitMix64 step; used to fold `(master, salt, index)` into a single u64
/// for APIs that accept one seed value.
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a single u64 sub-seed from `(master, salt, index)`.
pub fn mix_seed(master: u64, salt: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master).wrapping_add(salt)).wrapping_add(index))
}

/// A ChaCha8-backed stream with the pinned uniform and normal transforms.
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl GaussianStream {
    pub fn new(master: u64, salt: u64, index: u64) -> Self {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&master.to_le_bytes());
        key[8..16].copy_from_slice(&salt.to_le_bytes());
        key[16..24].copy_from_slice(&index.to_le_bytes());
        // last 8 bytes stay zero
        GaussianStream {
            rng: ChaCha8Rng::from_seed(key),
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, bound) by rejection.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % bound;
            }
        }
    }

    /// Standard normal via the polar transform.
    pub fn normal(&mut self) -> f64 {
        if let Some(v) = self.spare_normal.take() {
            return v;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let m = (-2.0 * s.ln() / s).sqrt();
                self.spare_normal = Some(v * m);
                return u * m;
            }
        }
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for slot in out.iter_mut() {
            *slot = self.normal();
        }
    }

    /// Order-n matrix of i.i.d. standard normals, filled row major.
    pub fn gaussian_matrix(&mut self, order: usize) -> SquareMatrix {
        let mut entries = vec![0.0; order * order];
        self.fill_normal(&mut entries);
        SquareMatrix::new(order, entries).expect("normal entries are finite")
    }

    /// Uniform point on the unit sphere of R^dim.
    pub fn unit_vector(&mut self, dim: usize) -> Vec<f64> {
        loop {
            let mut v = vec![0.0; dim];
            self.fill_normal(&mut v);
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                for x in &mut v {
                    *x /= norm;
                }
                return v;
            }
        }
    }

    /// Haar-ish random orthogonal matrix: Gram-Schmidt applied to Gaussian
    /// columns, with each pivot normalized (sign left as drawn).
    pub fn orthogonal_matrix(&mut self, order: usize) -> SquareMatrix {
        loop {
            let g = self.gaussian_matrix(order);
            if let Some(q) = gram_schmidt_columns(&g) {
                return q;
            }
        }
    }

    /// Uniform permutation of 0..n by Fisher-Yates.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.below((i + 1) as u64) as usize;
            p.swap(i, j);
        }
        p
    }

    /// n independent signs, each +1 or -1.
    pub fn signs(&mut self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|_| if self.next_u64() & 1 == 0 { 1.0 } else { -1.0 })
            .collect()
    }
}

/// Column-wise modified Gram-Schmidt; None when a pivot degenerates.
fn gram_schmidt_columns(g: &SquareMatrix) -> Option<SquareMatrix> {
    let n = g.order();
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| g.entry(i, j)).collect())
        .collect();
    for j in 0..n {
        for k in 0..j {
            let proj: f64 = (0..n).map(|i| cols[j][i] * cols[k][i]).sum();
            for i in 0..n {
                cols[j][i] -= proj * cols[k][i];
            }
        }
        let norm: f64 = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-10 {
            return None;
        }
        for i in 0..n {
            cols[j][i] /= norm;
        }
    }
    Some(SquareMatrix::from_fn(n, |i, j| cols[j][i]))
}

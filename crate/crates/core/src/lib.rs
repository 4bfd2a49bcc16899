//! Numerical toolkit for Schatten-class geometry: spectral and mixed norms,
//! matrix subspaces with restriction-norm maximization, flat-spectrum
//! constructions with verifiable certificates, Gaussian ensembles, width
//! estimation, and piecewise rate envelopes.

pub mod envelopes;
pub mod error;
pub mod exponent;
pub mod matrix;
pub mod multiplicity;
pub mod norms;
pub mod randmat;
pub mod restriction;
pub mod rng;
pub mod subspace;
pub mod svd;
pub mod widths;

pub use error::{Error, Result};
pub use exponent::{conjugate_exponent, SpectrumExponent};
pub use matrix::SquareMatrix;
pub use svd::{svd_factorize, SingularSpectrum, SvdFactors};

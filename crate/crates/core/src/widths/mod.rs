//! Width estimators for the identity S_p -> S_q and for finite matrix sets:
//! explicit-subspace upper estimates, a Grassmannian minimax heuristic,
//! finite-set approximation widths, the extreme-point and group-orbit test
//! sets with their exact orthogonality identity, and duality audits.
//!
//! Every estimate carries a direction label. Heuristic searches never claim
//! certification; the only certified direction is a lower bound backed by a
//! spot-checkable witness matrix.

mod duality;
mod gelfand;
mod kolmogorov;
mod sets;

pub use duality::{duality_gap, DualityAudit, DualityOptions};
pub use gelfand::{
    gelfand_certified_floor, gelfand_minimax, gelfand_sweep, gelfand_upper_from_subspace,
};
pub use kolmogorov::{kolmogorov_finite_set, TargetNorm};
pub use sets::{
    averaged_set, orthogonality_check, vasileva_extreme_points, AveragedMode, FiniteTestSet,
    OrthogonalityReport, SetProvenance,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::SpectrumExponent;
use crate::matrix::SquareMatrix;
use crate::subspace::MatrixSubspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WidthKind {
    Gelfand,
    Kolmogorov,
}

impl WidthKind {
    pub fn label(self) -> &'static str {
        match self {
            WidthKind::Gelfand => "gelfand",
            WidthKind::Kolmogorov => "kolmogorov",
        }
    }
}

/// One width question: which width, which exponent pair, which order, which
/// index n (1-based; the approximating codimension/dimension is n-1).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WidthQuery {
    pub kind: WidthKind,
    pub p: SpectrumExponent,
    pub q: SpectrumExponent,
    pub order: usize,
    pub n: usize,
}

impl WidthQuery {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::usage("order must be positive"));
        }
        if self.n == 0 || self.n > self.order * self.order {
            return Err(Error::usage(format!(
                "index n must lie in 1..={}, got {}",
                self.order * self.order,
                self.n
            )));
        }
        Ok(())
    }
}

/// What the reported value can be trusted for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// A true lower bound, backed by the attached witness.
    CertifiedLower,
    /// An upper-style estimate: the search may miss the optimum but the
    /// reported value is evaluated exactly (or conservatively) at a
    /// feasible point.
    HeuristicUpper,
    /// Best-effort point estimate with no one-sided guarantee.
    Heuristic,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::CertifiedLower => "certified-lower",
            Direction::HeuristicUpper => "heuristic-upper",
            Direction::Heuristic => "heuristic",
        }
    }
}

/// Evidence attached to an estimate: the extremal matrix found, or the
/// subspace at which the outer search stopped.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Witness {
    Matrix(SquareMatrix),
    Subspace(MatrixSubspace),
}

/// A width or norm estimate with its full audit trail.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateReport {
    pub query: WidthQuery,
    pub value: f64,
    pub direction: Direction,
    pub witness: Option<Witness>,
    /// Outer or inner restart count, whichever the estimator varies.
    pub restarts: usize,
    /// Total inner evaluations or refinement steps spent.
    pub iterations: usize,
    pub seed: u64,
    /// Value reached from each restart, deterministic candidates first.
    pub per_restart: Vec<f64>,
    /// Documented limitations and post-processing applied to this report.
    pub notes: Vec<String>,
}

impl EstimateReport {
    pub fn validate(&self) -> Result<()> {
        self.query.validate()?;
        if !(self.value >= 0.0) {
            return Err(Error::usage(format!(
                "estimate value must be nonnegative, got {}",
                self.value
            )));
        }
        if self.direction == Direction::CertifiedLower && self.witness.is_none() {
            return Err(Error::usage(
                "certified lower bounds must carry a witness".to_string(),
            ));
        }
        Ok(())
    }
}

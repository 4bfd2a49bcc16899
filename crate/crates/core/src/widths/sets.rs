//! Finite test sets for width lower-bound experiments: the signed
//! unit-coordinate extreme points, and the orbit of the rank-r diagonal
//! under the signed double-permutation group, together with the exact
//! orthogonality identity of the orbit coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::rng::{mix_seed, salt, GaussianStream};

/// Enumeration is allowed only while the full group fits this budget.
pub const ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetProvenance {
    VasilevaExtreme,
    Averaged,
    Custom,
}

impl SetProvenance {
    pub fn label(self) -> &'static str {
        match self {
            SetProvenance::VasilevaExtreme => "vasileva-extreme",
            SetProvenance::Averaged => "averaged",
            SetProvenance::Custom => "custom",
        }
    }
}

/// A nonempty finite set of matrices of one common order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteTestSet {
    pub order: usize,
    pub members: Vec<SquareMatrix>,
    pub provenance: SetProvenance,
    /// Size of the generating group when the set is a full orbit.
    pub group_size: Option<u64>,
}

impl FiniteTestSet {
    pub fn custom(members: Vec<SquareMatrix>) -> Result<Self> {
        let order = members
            .first()
            .ok_or_else(|| Error::usage("test set needs at least one member"))?
            .order();
        if members.iter().any(|m| m.order() != order) {
            return Err(Error::usage("test set members must share one order"));
        }
        Ok(FiniteTestSet {
            order,
            members,
            provenance: SetProvenance::Custom,
            group_size: None,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// The 2 N^2 signed unit-coordinate matrices: the extreme points of the
/// convex hull generating the nuclear-type unit ball. Order: row-major over
/// the cells, plus sign before minus sign.
pub fn vasileva_extreme_points(order: usize) -> Result<FiniteTestSet> {
    if order == 0 {
        return Err(Error::usage("order must be positive"));
    }
    let mut members = Vec::with_capacity(2 * order * order);
    for i in 0..order {
        for j in 0..order {
            members.push(SquareMatrix::unit(order, i, j));
            let mut neg = SquareMatrix::zeros(order);
            neg.set_entry(i, j, -1.0);
            members.push(neg);
        }
    }
    Ok(FiniteTestSet {
        order,
        members,
        provenance: SetProvenance::VasilevaExtreme,
        group_size: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AveragedMode {
    /// All distinct orbit images; requires the full group within the cap.
    Enumerate,
    /// This many seeded independent draws from the group (duplicates kept).
    Sample(usize),
}

/// (N!)^2 * 2^N, or None past the enumeration cap.
fn group_size(order: usize) -> Option<u128> {
    let mut fact: u128 = 1;
    for i in 2..=order as u128 {
        fact = fact.checked_mul(i)?;
    }
    let squared = fact.checked_mul(fact)?;
    let total = squared.checked_mul(1u128.checked_shl(order as u32)?)?;
    if total <= ENUMERATION_CAP {
        Some(total)
    } else {
        None
    }
}

/// Lexicographic permutations of 0..n, visited in order.
fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        f(&perm);
        // next_permutation: find the last ascent, swap, reverse the tail
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else {
            return;
        };
        let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
}

/// Entry pattern of the orbit image: row i carries eps_i at column
/// pi2^{-1}(pi1(i)) when pi1(i) < r, zero elsewhere.
fn orbit_member(
    order: usize,
    r: usize,
    pi1: &[usize],
    pi2_inv: &[usize],
    eps: &[f64],
) -> SquareMatrix {
    let mut m = SquareMatrix::zeros(order);
    for i in 0..order {
        if pi1[i] < r {
            m.set_entry(i, pi2_inv[pi1[i]], eps[i]);
        }
    }
    m
}

fn invert_permutation(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0usize; p.len()];
    for (i, &v) in p.iter().enumerate() {
        inv[v] = i;
    }
    inv
}

/// Orbit of the rank-r diagonal under signed double permutations: members
/// (eps_i D_{pi1(i), pi2(j)}) with D the 0/1 diagonal of rank r.
///
/// Enumerate mode lists each distinct image once (the group acts with
/// multiplicity when r < N) and records the full group size; sample mode
/// returns exactly `count` seeded draws, duplicates kept.
pub fn averaged_set(
    order: usize,
    r: usize,
    mode: AveragedMode,
    seed: u64,
) -> Result<FiniteTestSet> {
    if order == 0 || r == 0 || r > order {
        return Err(Error::usage(format!(
            "need 1 <= r <= N, got r={r}, N={order}"
        )));
    }
    match mode {
        AveragedMode::Enumerate => {
            let g = group_size(order).ok_or_else(|| {
                Error::usage(format!(
                    "group size (N!)^2 2^N exceeds the enumeration cap {ENUMERATION_CAP} \
                     at N={order}; use sample mode"
                ))
            })?;
            // dedup by the exact -1/0/+1 entry pattern, kept in first-seen
            // (lexicographic group) order
            let mut seen = std::collections::HashSet::new();
            let mut members = Vec::new();
            for_each_permutation(order, |pi1| {
                for_each_permutation(order, |pi2| {
                    let pi2_inv = invert_permutation(pi2);
                    for mask in 0u64..(1u64 << order) {
                        let eps: Vec<f64> = (0..order)
                            .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
                            .collect();
                        let m = orbit_member(order, r, pi1, &pi2_inv, &eps);
                        let key: Vec<i8> = m.entries().iter().map(|&v| v as i8).collect();
                        if seen.insert(key) {
                            members.push(m);
                        }
                    }
                });
            });
            Ok(FiniteTestSet {
                order,
                members,
                provenance: SetProvenance::Averaged,
                group_size: Some(g as u64),
            })
        }
        AveragedMode::Sample(count) => {
            if count == 0 {
                return Err(Error::usage("sample count must be positive"));
            }
            let members = (0..count)
                .map(|t| {
                    let mut stream =
                        GaussianStream::new(mix_seed(seed, salt::TEST_SET, t as u64), 0, 0);
                    let pi1 = stream.permutation(order);
                    let pi2 = stream.permutation(order);
                    let eps = stream.signs(order);
                    orbit_member(order, r, &pi1, &invert_permutation(&pi2), &eps)
                })
                .collect();
            Ok(FiniteTestSet {
                order,
                members,
                provenance: SetProvenance::Averaged,
                group_size: None,
            })
        }
    }
}

/// Result of the exact orbit-coordinate orthogonality verification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    pub order: usize,
    pub rank: usize,
    pub group_size: u64,
    /// Same-cell averages equal rank/order^2 and distinct-cell averages
    /// vanish, verified in integer arithmetic over the whole group.
    pub exact: bool,
    /// Worst floating-point distance of any average from its exact value.
    pub max_deviation: f64,
    /// The exact same-cell average as a reduced fraction numerator/denominator.
    pub diagonal_numerator: u64,
    pub diagonal_denominator: u64,
}

/// Verifies over the full group G that the cell coordinates of the orbit
/// images form an orthogonal system: for cells (i,j) and (i',j'),
/// |G|^{-1} sum_gamma phi_ij(gamma) phi_i'j'(gamma) equals r/N^2 when the
/// cells coincide and 0 otherwise. Entries are -1/0/+1, so the sums are
/// integers and the check is exact.
pub fn orthogonality_check(order: usize, r: usize) -> Result<OrthogonalityReport> {
    if order == 0 || r == 0 || r > order {
        return Err(Error::usage(format!(
            "need 1 <= r <= N, got r={r}, N={order}"
        )));
    }
    let g = group_size(order).ok_or_else(|| {
        Error::usage(format!(
            "group size (N!)^2 2^N exceeds the enumeration cap {ENUMERATION_CAP} at N={order}"
        ))
    })? as i64;
    let cells = order * order;
    // accumulator over ordered cell pairs; entries stay within +-|G|
    let mut acc = vec![0i64; cells * cells];
    for_each_permutation(order, |pi1| {
        // nonzero rows and their diagonal slot under pi1
        let active: Vec<(usize, usize)> = (0..order)
            .filter(|&i| pi1[i] < r)
            .map(|i| (i, pi1[i]))
            .collect();
        for_each_permutation(order, |pi2| {
            let pi2_inv = invert_permutation(pi2);
            // cell index of each nonzero coordinate of this (pi1, pi2) image
            let cells_hit: Vec<usize> = active
                .iter()
                .map(|&(i, slot)| i * order + pi2_inv[slot])
                .collect();
            for mask in 0u64..(1u64 << order) {
                for (a, &(ia, _)) in active.iter().enumerate() {
                    let ea: i64 = if mask >> ia & 1 == 1 { -1 } else { 1 };
                    for (b, &(ib, _)) in active.iter().enumerate() {
                        let eb: i64 = if mask >> ib & 1 == 1 { -1 } else { 1 };
                        acc[cells_hit[a] * cells + cells_hit[b]] += ea * eb;
                    }
                }
            }
        });
    });
    // |G| r / N^2 = ((N-1)!)^2 2^N r, an integer
    debug_assert_eq!((g * r as i64) % (cells as i64), 0);
    let expected_diag = g * r as i64 / cells as i64;
    let mut exact = true;
    let mut max_deviation = 0.0f64;
    for a in 0..cells {
        for b in 0..cells {
            let sum = acc[a * cells + b];
            let expected = if a == b { expected_diag } else { 0 };
            if sum != expected {
                exact = false;
            }
            let float_avg = sum as f64 / g as f64;
            let float_expected = if a == b {
                r as f64 / cells as f64
            } else {
                0.0
            };
            max_deviation = max_deviation.max((float_avg - float_expected).abs());
        }
    }
    let d = gcd(r as u64, cells as u64);
    Ok(OrthogonalityReport {
        order,
        rank: r,
        group_size: g as u64,
        exact,
        max_deviation,
        diagonal_numerator: r as u64 / d,
        diagonal_denominator: cells as u64 / d,
    })
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::schatten_norm;
    use crate::svd::svd_factorize;
    use crate::SpectrumExponent;

    #[test]
    fn extreme_points_order_one() {
        let set = vasileva_extreme_points(1).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.members[0].entry(0, 0), 1.0);
        assert_eq!(set.members[1].entry(0, 0), -1.0);
    }

    #[test]
    fn extreme_points_are_rank_one_and_unit() {
        let set = vasileva_extreme_points(2).unwrap();
        assert_eq!(set.len(), 8);
        for m in &set.members {
            assert!((m.frobenius_norm() - 1.0).abs() < 1e-15);
            let spectrum = svd_factorize(m).unwrap().spectrum;
            assert!((spectrum.values()[0] - 1.0).abs() < 1e-12);
            assert!(spectrum.values()[1].abs() < 1e-12);
        }
    }

    #[test]
    fn averaged_group_sizes() {
        let set = averaged_set(1, 1, AveragedMode::Enumerate, 0).unwrap();
        assert_eq!(set.group_size, Some(2));
        assert_eq!(set.len(), 2);
        // (2!)^2 * 2^2 = 16 group elements, 8 distinct rank-1 images
        let set = averaged_set(2, 1, AveragedMode::Enumerate, 0).unwrap();
        assert_eq!(set.group_size, Some(16));
        assert_eq!(set.len(), 8);
        // full rank: the group acts freely on signed permutation matrices
        let set = averaged_set(2, 2, AveragedMode::Enumerate, 0).unwrap();
        assert_eq!(set.group_size, Some(16));
        assert_eq!(set.len(), 8); // 2 perms * 4 sign patterns
    }

    #[test]
    fn averaged_members_have_flat_rank_r_spectrum() {
        for order in 1..=4usize {
            for r in 1..=order {
                let set = averaged_set(order, r, AveragedMode::Enumerate, 0).unwrap();
                for m in &set.members {
                    let spectrum = svd_factorize(m).unwrap().spectrum;
                    for (i, &s) in spectrum.values().iter().enumerate() {
                        let want = if i < r { 1.0 } else { 0.0 };
                        assert!((s - want).abs() < 1e-12);
                    }
                    // Schatten t-norm is r^{1/t} for every member
                    let t = SpectrumExponent::finite(3.0).unwrap();
                    let norm = schatten_norm(m, t).unwrap();
                    assert!((norm - (r as f64).powf(1.0 / 3.0)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn averaged_sampling_is_deterministic_and_shaped() {
        let a = averaged_set(5, 3, AveragedMode::Sample(40), 9).unwrap();
        let b = averaged_set(5, 3, AveragedMode::Sample(40), 9).unwrap();
        assert_eq!(a.len(), 40);
        assert_eq!(a.group_size, None);
        for (x, y) in a.members.iter().zip(&b.members) {
            assert_eq!(x.entries(), y.entries());
        }
        let c = averaged_set(5, 3, AveragedMode::Sample(40), 10).unwrap();
        assert!(a.members.iter().zip(&c.members).any(|(x, y)| x != y));
        for m in &a.members {
            let nonzero = m.entries().iter().filter(|v| **v != 0.0).count();
            assert_eq!(nonzero, 3);
        }
    }

    #[test]
    fn enumeration_cap_enforced() {
        // (6!)^2 * 2^6 = 33 177 600 > 10^6
        let err = averaged_set(6, 2, AveragedMode::Enumerate, 0);
        assert!(err.is_err());
        assert!(orthogonality_check(6, 1).is_err());
        // N=5 still fits: (5!)^2 * 2^5 = 460 800
        assert!(group_size(5).is_some());
    }

    #[test]
    fn orthogonality_identity_small_cases() {
        let rep = orthogonality_check(2, 1).unwrap();
        assert!(rep.exact);
        assert_eq!(rep.group_size, 16);
        assert_eq!(
            (rep.diagonal_numerator, rep.diagonal_denominator),
            (1, 4)
        );
        assert!(rep.max_deviation <= 1e-14);

        let rep = orthogonality_check(3, 2).unwrap();
        assert!(rep.exact);
        assert_eq!(
            (rep.diagonal_numerator, rep.diagonal_denominator),
            (2, 9)
        );
    }

    #[test]
    fn orthogonality_identity_full_grid_to_order_four() {
        for order in 1..=4usize {
            for r in 1..=order {
                let rep = orthogonality_check(order, r).unwrap();
                assert!(rep.exact, "N={order} r={r}");
                assert!(rep.max_deviation <= 1e-14, "N={order} r={r}");
            }
        }
    }

    #[test]
    fn permutation_enumeration_is_lexicographic_and_complete() {
        let mut seen = Vec::new();
        for_each_permutation(3, |p| seen.push(p.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 1, 2]);
        assert_eq!(seen[5], vec![2, 1, 0]);
        let mut sorted = seen.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 6);
    }

    #[test]
    fn custom_set_validation() {
        assert!(FiniteTestSet::custom(vec![]).is_err());
        let mixed = vec![SquareMatrix::identity(2), SquareMatrix::identity(3)];
        assert!(FiniteTestSet::custom(mixed).is_err());
        let ok = FiniteTestSet::custom(vec![SquareMatrix::identity(2)]).unwrap();
        assert_eq!(ok.provenance, SetProvenance::Custom);
    }
}

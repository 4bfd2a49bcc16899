//! The release gate: thirteen numbered checks with pinned seeds and
//! wall-clock budgets. `verify` runs them in order; the integration tests
//! run them one per test so a failure names its criterion.
//!
//! Each check is self-contained: it draws its own streams from a frozen
//! per-criterion seed and never reuses state from another check. Statistical
//! checks are calibrated so the pinned seed passes with wide margin; they are
//! regression tripwires, not hypothesis tests.

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use schatten_widths::envelopes::{evaluate_envelope, reference_rates, EnvelopeConfig, Regime};
use schatten_widths::matrix::format_f64;
use schatten_widths::multiplicity::{construct_flat_top, flat_top_ratio_witness, kappa};
use schatten_widths::norms::{mixed_norm, pietsch_ratio_compare, schatten_norm, spectrum_norm};
use schatten_widths::randmat::{dvoretzky_band, estimate_expected_schatten};
use schatten_widths::rng::{mix_seed, salt, GaussianStream};
use schatten_widths::subspace::MatrixSubspace;
use schatten_widths::svd::singular_values;
use schatten_widths::widths::{
    duality_gap, gelfand_minimax, gelfand_sweep, orthogonality_check, DualityOptions, WidthKind,
    WidthQuery,
};
use schatten_widths::{Result, SpectrumExponent, SquareMatrix};
use serde::{Deserialize, Serialize};

use crate::args::{
    Command, DvoretzkyArgs, EnvelopeArgs, FlatTopArgs, GaussianArgs, GelfandArgs, KolmogorovArgs,
    NormsArgs, OrthocheckArgs, PhaseDiagramArgs, SetChoice,
};
use crate::commands;
use crate::manifest::{json_document, scrub_timestamps, RunManifest};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_seconds: f64,
}

/// Frozen per-criterion master seed.
fn crit_seed(id: u64) -> u64 {
    mix_seed(0x57AB1E, salt::ACCEPTANCE, id)
}

fn fe(v: f64) -> SpectrumExponent {
    SpectrumExponent::finite(v).expect("literal exponent")
}

fn inf() -> SpectrumExponent {
    SpectrumExponent::infinity()
}

/// Seconds budget written into the criterion itself; infinite when the check
/// carries none.
fn finish(
    id: u32,
    name: &'static str,
    budget_seconds: f64,
    started: Instant,
    result: Result<(bool, String)>,
) -> CriterionOutcome {
    let elapsed = started.elapsed().as_secs_f64();
    let (mut passed, mut detail) = match result {
        Ok((ok, detail)) => (ok, detail),
        Err(e) => (false, format!("error: {e}")),
    };
    if elapsed >= budget_seconds {
        passed = false;
        detail = format!("{detail}; exceeded {budget_seconds:.0}s budget at {elapsed:.1}s");
    }
    CriterionOutcome {
        id,
        name,
        passed,
        detail,
        elapsed_seconds: elapsed,
    }
}

/// Least-squares slope of ys against xs.
fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let num: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let den: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    num / den
}

/// 1. Norm inequalities on seeded Gaussian matrices: mixed-vs-Schatten both
/// ways, Schatten monotonicity, multiplicative interpolation, and unitary
/// invariance.
pub fn criterion_01() -> CriterionOutcome {
    let started = Instant::now();
    let seed = crit_seed(1);
    let run = || -> Result<(bool, String)> {
        let orders: Vec<usize> = (2..=8).collect();
        let trials = 1000usize;
        let cases: Vec<(usize, usize)> = orders
            .iter()
            .flat_map(|&n| (0..trials).map(move |t| (n, t)))
            .collect();

        let upper_exps = [fe(2.0), fe(3.0), inf()];
        let lower_exps = [fe(1.0), fe(1.5), fe(2.0)];
        let chain = [fe(1.0), fe(1.5), fe(2.0), fe(3.0), fe(4.0), inf()];

        // Worst signed excess of each left side over its right side; a
        // violation is an excess beyond the stated slack.
        let per_case: Vec<Result<(usize, f64)>> = cases
            .par_iter()
            .map(|&(order, t)| {
                let index = ((order as u64) << 32) | t as u64;
                let mut stream = GaussianStream::new(seed, salt::ACCEPTANCE, index);
                let m = stream.gaussian_matrix(order);
                let spectrum = singular_values(&m)?.values().to_vec();

                let mut violations = 0usize;
                let mut worst = f64::NEG_INFINITY;
                let mut check = |lhs: f64, rhs: f64, slack: f64| {
                    let excess = lhs / rhs.max(1e-300) - 1.0;
                    worst = worst.max(excess);
                    if lhs > rhs * (1.0 + slack) + 1e-12 {
                        violations += 1;
                    }
                };

                for q in upper_exps {
                    check(mixed_norm(&m, fe(2.0), q), spectrum_norm(&spectrum, q), 1e-10);
                }
                for p in lower_exps {
                    check(spectrum_norm(&spectrum, p), mixed_norm(&m, fe(2.0), p), 1e-10);
                }
                for pair in chain.windows(2) {
                    check(
                        spectrum_norm(&spectrum, pair[1]),
                        spectrum_norm(&spectrum, pair[0]),
                        1e-10,
                    );
                }
                // ||A||_2 <= (||A||_1 ||A||_inf)^(1/2) and its (1,3;3/2) twin.
                check(
                    spectrum_norm(&spectrum, fe(2.0)),
                    (spectrum_norm(&spectrum, fe(1.0)) * spectrum_norm(&spectrum, inf())).sqrt(),
                    1e-9,
                );
                check(
                    spectrum_norm(&spectrum, fe(1.5)),
                    (spectrum_norm(&spectrum, fe(1.0)) * spectrum_norm(&spectrum, fe(3.0))).sqrt(),
                    1e-9,
                );
                let u = stream.orthogonal_matrix(order);
                let v = stream.orthogonal_matrix(order);
                let rotated = u.matmul(&m).matmul(&v);
                for p in [fe(1.0), inf()] {
                    let before = spectrum_norm(&spectrum, p);
                    let after = schatten_norm(&rotated, p)?;
                    let rel = (after - before).abs() / before.max(1e-300);
                    worst = worst.max(rel);
                    if rel > 1e-9 {
                        violations += 1;
                    }
                }
                Ok((violations, worst))
            })
            .collect();

        let mut violations = 0usize;
        let mut worst = f64::NEG_INFINITY;
        for r in per_case {
            let (v, w) = r?;
            violations += v;
            worst = worst.max(w);
        }
        Ok((
            violations == 0,
            format!(
                "{} matrices checked; {} violations; worst excess {:.2e}",
                cases.len(),
                violations,
                worst
            ),
        ))
    };
    finish(1, "norm-inequalities", 30.0, started, run())
}

/// 2. Sequence ratio comparison: appending a no-larger entry never decreases
/// the q-over-p norm ratio, over random admissible sequences and exponents.
pub fn criterion_02() -> CriterionOutcome {
    let started = Instant::now();
    let seed = crit_seed(2);
    let run = || -> Result<(bool, String)> {
        let total = 10_000usize;
        let mut violations = 0usize;
        let mut worst = f64::NEG_INFINITY;
        for t in 0..total {
            let mut stream = GaussianStream::new(seed, salt::ACCEPTANCE, t as u64);
            let m = 1 + stream.below(20) as usize;
            let a = 0.25 + 7.75 * stream.uniform();
            let b = 0.25 + 7.75 * stream.uniform();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let q = fe(lo);
            let p = if stream.uniform() < 0.15 {
                inf()
            } else if hi - lo < 1e-9 {
                fe(hi + 0.5)
            } else {
                fe(hi)
            };
            let mut values: Vec<f64> = (0..m + 1)
                .map(|_| stream.normal().abs() + 1e-6)
                .collect();
            values.sort_by(|x, y| y.partial_cmp(x).unwrap());
            let (extended, truncated) = pietsch_ratio_compare(&values, q, p)?;
            let deficit = truncated - extended;
            worst = worst.max(deficit / truncated.max(1e-300));
            if extended < truncated * (1.0 - 1e-12) - 1e-15 {
                violations += 1;
            }
        }
        Ok((
            violations == 0,
            format!("{total} sequences; {violations} violations; worst relative deficit {worst:.2e}"),
        ))
    };
    finish(2, "sequence-ratio-comparison", 5.0, started, run())
}

/// 3. Dimension-threshold identity: N^2 - kappa(k) = (N-k)(N-k+2) in exact
/// integer arithmetic.
pub fn criterion_03() -> CriterionOutcome {
    let started = Instant::now();
    let run = || -> Result<(bool, String)> {
        let mut checked = 0usize;
        for order in 1..=64usize {
            for k in 1..=order {
                let threshold = kappa(k, order)?;
                let lhs = order * order - threshold;
                let rhs = (order - k) * (order - k + 2);
                if lhs != rhs {
                    return Ok((
                        false,
                        format!("mismatch at N={order} k={k}: {lhs} vs {rhs}"),
                    ));
                }
                checked += 1;
            }
        }
        Ok((true, format!("{checked} pairs verified exactly")))
    };
    finish(3, "threshold-identity", f64::INFINITY, started, run())
}

/// 4. Flat-top certificates: the construction reaches the requested leading
/// multiplicity with all three residuals at tolerance, on random subspaces
/// of exactly the threshold dimension.
pub fn criterion_04() -> CriterionOutcome {
    let started = Instant::now();
    let seed = crit_seed(4);
    let run = || -> Result<(bool, String)> {
        let mut cases = Vec::new();
        for order in [4usize, 5, 6] {
            for k in 1..=4usize {
                for rep in 0..20usize {
                    cases.push((order, k, rep));
                }
            }
        }
        let results: Vec<Result<(bool, f64)>> = cases
            .par_iter()
            .enumerate()
            .map(|(idx, &(order, k, _rep))| {
                let dim = kappa(k, order)?;
                let subspace =
                    MatrixSubspace::random(order, dim, mix_seed(seed, salt::ACCEPTANCE, idx as u64))?;
                let cert = construct_flat_top(
                    &subspace,
                    k,
                    1e-8,
                    mix_seed(seed, salt::ACCEPTANCE, 100_000 + idx as u64),
                )?;
                let worst = cert
                    .spectral_residual
                    .max(cert.norm_excess)
                    .max(cert.containment_residual);
                Ok((cert.achieved_multiplicity >= k && worst <= 1e-8, worst))
            })
            .collect();
        let mut failures = 0usize;
        let mut worst = 0.0f64;
        for r in results {
            let (ok, w) = r?;
            if !ok {
                failures += 1;
            }
            worst = worst.max(w);
        }
        Ok((
            failures == 0,
            format!(
                "{} constructions; {} failures; worst residual {:.2e}",
                cases.len(),
                failures,
                worst
            ),
        ))
    };
    finish(4, "flat-top-certificates", 120.0, started, run())
}

/// 5. Flat-top ratio floor: the automatic-k witness ratio clears the
/// dimension floor ((N^2-n+1)/(2N))^(1/q-1/p) on every seeded subspace.
pub fn criterion_05() -> CriterionOutcome {
    let started = Instant::now();
    let seed = crit_seed(5);
    let run = || -> Result<(bool, String)> {
        let order = 5usize;
        let (p, q) = (inf(), fe(1.0));
        let expo = q.reciprocal() - p.reciprocal();
        let mut cases = Vec::new();
        for n in [1usize, 5, 13, 21] {
            for rep in 0..50usize {
                cases.push((n, rep));
            }
        }
        let results: Vec<Result<(bool, f64)>> = cases
            .par_iter()
            .enumerate()
            .map(|(idx, &(n, _rep))| {
                let dim = order * order - n + 1;
                let subspace =
                    MatrixSubspace::random(order, dim, mix_seed(seed, salt::ACCEPTANCE, idx as u64))?;
                let witness = flat_top_ratio_witness(&subspace, p, q)?;
                let floor = (dim as f64 / (2.0 * order as f64)).powf(expo);
                Ok((witness.value >= floor * 0.95, witness.value / floor))
            })
            .collect();
        let mut failures = 0usize;
        let mut tightest = f64::INFINITY;
        for r in results {
            let (ok, margin) = r?;
            if !ok {
                failures += 1;
            }
            tightest = tightest.min(margin);
        }
        Ok((
            failures == 0,
            format!(
                "{} witnesses; {} below floor; tightest value/floor ratio {:.3}",
                cases.len(),
                failures,
                tightest
            ),
        ))
    };
    finish(5, "flat-top-ratio-floor", f64::INFINITY, started, run())
}

/// 6. Orbit orthogonality: the signed double-permutation averages match the
/// exact rational values over the fully enumerated group.
pub fn criterion_06() -> CriterionOutcome {
    let started = Instant::now();
    let run = || -> Result<(bool, String)> {
        let mut checked = 0usize;
        let mut worst = 0.0f64;
        let mut largest_group = 0u64;
        for order in 1..=4usize {
            for r in 1..=order {
                let report = orthogonality_check(order, r)?;
                if !report.exact || report.max_deviation > 1e-14 {
                    return Ok((
                        false,
                        format!(
                            "N={order} r={r}: exact={} deviation={:.2e}",
                            report.exact, report.max_deviation
                        ),
                    ));
                }
                worst = worst.max(report.max_deviation);
                largest_group = largest_group.max(report.group_size);
                checked += 1;
            }
        }
        Ok((
            true,
            format!(
                "{checked} (N;r) pairs exact; largest group {largest_group}; worst float deviation {worst:.2e}"
            ),
        ))
    };
    finish(6, "orbit-orthogonality", 10.0, started, run())
}

/// 7. Width endpoints: the minimax estimate at n=1 and n=N^2 lands within 2%
/// of the closed-form values.
pub fn criterion_07() -> CriterionOutcome {
    let started = Instant::now();
    let seed = crit_seed(7);
    let run = || -> Result<(bool, String)> {
        let pairs = [
            (fe(1.0), fe(2.0)),
            (fe(2.0), fe(1.0)),
            (fe(1.0), inf()),
            (inf(), fe(1.0)),
            (fe(2.0), fe(2.0)),
        ];
        let mut checked = 0usize;
        let mut worst_rel = 0.0f64;
        let mut failures = Vec::new();
        for order in [2usize, 3] {
            for (p, q) in pairs {
                let gap = q.reciprocal() - p.reciprocal();
                let nf = order as f64;
                for (n, expected) in [
                    (1usize, nf.powf(gap).max(1.0)),
                    (
                        order * order,
                        if p.le(q) { nf.powf(gap) } else { 1.0 },
                    ),
                ] {
                    let query = WidthQuery {
                        kind: WidthKind::Gelfand,
                        p,
                        q,
                        order,
                        n,
                    };
                    let report = gelfand_minimax(
                        query,
                        50,
                        256,
                        mix_seed(seed, salt::ACCEPTANCE, checked as u64),
                    )?;
                    let rel = (report.value - expected).abs() / expected;
                    worst_rel = worst_rel.max(rel);
                    if rel > 0.02 {
                        failures.push(format!(
                            "p={p} q={q} N={order} n={n}: got {:.4} want {:.4}",
                            report.value, expected
                        ));
                    }
                    checked += 1;
                }
            }
        }
        Ok((
            failures.is_empty(),
            if failures.is_empty() {
                format!("{checked} endpoint queries; worst relative error {worst_rel:.4}")
            } else {
                failures.join("; ")
            },
        ))
    };
    finish(7, "width-endpoints", 300.0, started, run())
}

/// 8. Width sandwich: across the whole sweep the estimate stays between the
/// dimension floor and the coordinate ceiling, and never increases in n.
pub fn criterion_08() -> CriterionOutcome {
    let started = Instant::now();
    let seed = crit_seed(8);
    let run = || -> Result<(bool, String)> {
        let order = 3usize;
        let (p, q) = (inf(), fe(1.0));
        let expo = q.reciprocal() - p.reciprocal();
        let reports = gelfand_sweep(p, q, order, 40, 64, seed)?;
        let mut previous = f64::INFINITY;
        let mut worst_floor = f64::INFINITY;
        let mut worst_ceil = 0.0f64;
        for report in &reports {
            let n = report.query.n;
            let m = (order * order - n + 1) as f64;
            let floor = (m / (2.0 * order as f64)).powf(expo);
            let ceiling = (m / order as f64).ceil().powf(expo);
            worst_floor = worst_floor.min(report.value / floor);
            worst_ceil = worst_ceil.max(report.value / ceiling);
            if report.value < floor * 0.95 || report.value > ceiling * 1.05 {
                return Ok((
                    false,
                    format!(
                        "n={n}: estimate {:.4} outside [{:.4}; {:.4}]",
                        report.value,
                        floor * 0.95,
                        ceiling * 1.05
                    ),
                ));
            }
            if report.value > previous + 1e-12 {
                return Ok((false, format!("estimate increased at n={n}")));
            }
            previous = report.value;
        }
        Ok((
            true,
            format!(
                "9 estimates monotone; min value/floor {:.3}; max value/ceiling {:.3}",
                worst_floor, worst_ceil
            ),
        ))
    };
    finish(8, "width-sandwich", f64::INFINITY, started, run())
}

/// 9. Gaussian norm scaling: normalized means sit in a fixed band, log-log
/// slopes match 1/2 + 1/q, and the order-2 Frobenius mean matches the
/// chi-square closed form within three standard errors.
pub fn criterion_09() -> CriterionOutcome {
    let started = Instant::now();
    let seed = crit_seed(9);
    let run = || -> Result<(bool, String)> {
        let orders = [16usize, 32, 64];
        let exps = [fe(1.0), fe(2.0), fe(4.0), inf()];
        let mut issues = Vec::new();
        let mut slopes = Vec::new();
        for q in exps {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for order in orders {
                let report = estimate_expected_schatten(order, q, 2000, seed)?;
                if !(0.5..=2.5).contains(&report.normalized_mean) {
                    issues.push(format!(
                        "normalized mean {:.3} out of band at N={order} q={q}",
                        report.normalized_mean
                    ));
                }
                xs.push((order as f64).ln());
                ys.push(report.mean.ln());
            }
            let slope = fit_slope(&xs, &ys);
            let expected = 0.5 + q.reciprocal();
            if (slope - expected).abs() > 0.1 {
                issues.push(format!(
                    "slope {slope:.3} vs {expected:.3} at q={q}"
                ));
            }
            slopes.push(format!("q={q}: {slope:.3}"));
        }
        // E sqrt(chi^2_4) = sqrt(2) Gamma(5/2) / Gamma(2) = 1.8800 to the
        // printed digits.
        let frob = estimate_expected_schatten(2, fe(2.0), 2000, seed)?;
        let drift = (frob.mean - 1.8800).abs();
        if drift > 3.0 * frob.stderr {
            issues.push(format!(
                "order-2 Frobenius mean {:.4} is {:.1} standard errors from 1.8800",
                frob.mean,
                drift / frob.stderr
            ));
        }
        Ok((
            issues.is_empty(),
            if issues.is_empty() {
                format!(
                    "12 ensembles in band; slopes {}; order-2 drift {:.2} stderr",
                    slopes.join("; "),
                    drift / frob.stderr
                )
            } else {
                issues.join("; ")
            },
        ))
    };
    finish(9, "gaussian-scaling", 120.0, started, run())
}

/// 10. Concentration bands: on random sections of the critical dimension the
/// normalized ratio statistics span at most a factor of four.
pub fn criterion_10() -> CriterionOutcome {
    let started = Instant::now();
    let seed = crit_seed(10);
    let run = || -> Result<(bool, String)> {
        let order = 32usize;
        let mut spans = Vec::new();
        for q in [fe(4.0), inf()] {
            let k = (0.1 * (order as f64).powf(1.0 + 2.0 * q.reciprocal())).floor() as usize;
            let report = dvoretzky_band(order, q, k, 200, seed)?;
            let euclidean_span = report.euclidean_stat.max / report.euclidean_stat.min;
            let nuclear_span = report.nuclear_stat.max / report.nuclear_stat.min;
            if euclidean_span > 4.0 || nuclear_span > 4.0 {
                return Ok((
                    false,
                    format!(
                        "q={q} k={k}: spans {:.2} and {:.2} exceed 4",
                        euclidean_span, nuclear_span
                    ),
                ));
            }
            spans.push(format!(
                "q={q} k={k}: {:.2} / {:.2}",
                euclidean_span, nuclear_span
            ));
        }
        Ok((true, spans.join("; ")))
    };
    finish(10, "subspace-concentration", f64::INFINITY, started, run())
}

/// 11. Envelope algebra: total classification over the documented grid and
/// the exact junction identities.
pub fn criterion_11() -> CriterionOutcome {
    let started = Instant::now();
    let run = || -> Result<(bool, String)> {
        let cfg = EnvelopeConfig::default();
        // 20-point exponent grid: 19 log-spaced values on [1/4, 64] plus
        // infinity.
        let mut grid: Vec<SpectrumExponent> = Vec::new();
        let factor = (64.0f64 / 0.25).powf(1.0 / 18.0);
        for i in 0..19 {
            grid.push(fe(0.25 * factor.powi(i)));
        }
        grid.push(inf());

        let mut evaluated = 0usize;
        for order in 1..=8usize {
            for &p in &grid {
                for &q in &grid {
                    for n in 1..=order * order {
                        let rate = evaluate_envelope(p, q, order, n, &cfg)?;
                        if !(rate.lower.is_finite()
                            && rate.upper.is_finite()
                            && rate.lower > 0.0
                            && rate.lower <= rate.upper * (1.0 + 1e-12))
                        {
                            return Ok((
                                false,
                                format!(
                                    "bad bracket [{};{}] at p={p} q={q} N={order} n={n}",
                                    rate.lower, rate.upper
                                ),
                            ));
                        }
                        evaluated += 1;
                    }
                }
            }
        }

        // p = q evaluates to exactly one.
        for &p in &grid {
            for (order, n) in [(4usize, 1usize), (4, 7), (8, 64)] {
                let rate = evaluate_envelope(p, p, order, n, &cfg)?;
                if (rate.lower - 1.0).abs() > 1e-12 || (rate.upper - 1.0).abs() > 1e-12 {
                    return Ok((false, format!("p=q rate not 1 at p={p} N={order} n={n}")));
                }
            }
        }

        // Terminal width: rate N^(1/q-1/p) when p <= q, across regimes.
        let ordered_pairs = [
            (fe(1.0), fe(2.0)),
            (fe(0.5), fe(1.5)),
            (fe(2.0), inf()),
            (fe(3.0), fe(5.0)),
            (fe(2.0), fe(2.0)),
        ];
        for (p, q) in ordered_pairs {
            for order in [2usize, 4, 8] {
                let n = order * order;
                let expected = (order as f64).powf(q.reciprocal() - p.reciprocal());
                let rate = evaluate_envelope(p, q, order, n, &cfg)?;
                let rel = ((rate.lower - expected).abs() / expected)
                    .max((rate.upper - expected).abs() / expected);
                if rel > 1e-12 {
                    return Ok((
                        false,
                        format!("terminal rate off by {rel:.2e} at p={p} q={q} N={order}"),
                    ));
                }
            }
        }

        // Interpolation-regime rate equals the Euclidean-target base rate
        // min{1, N^(3/2-1/p)/sqrt(n)} raised to (1/p-1/q)/(1/p-1/2). At
        // q = 2 the base is cross-checked against the independent prior-rate
        // evaluator, where the exponent degenerates to 1.
        for pv in [1.25f64, 1.5, 1.75] {
            for qv in [1.5f64, 1.75, 2.0] {
                if qv <= pv {
                    continue;
                }
                let p = fe(pv);
                let q = fe(qv);
                for order in [4usize, 8] {
                    for n in [1usize, order, 2 * order, order * order] {
                        let rate = evaluate_envelope(p, q, order, n, &cfg)?;
                        if rate.regime != Regime::A3 {
                            return Ok((
                                false,
                                format!("expected interpolation regime at p={pv} q={qv} N={order} n={n}"),
                            ));
                        }
                        let base = if qv == 2.0 {
                            reference_rates(p, q, order, n)?
                                .iter()
                                .find(|r| r.source == "CD")
                                .map(|r| r.rate)
                                .ok_or_else(|| {
                                    schatten_widths::Error::usage("reference rate missing")
                                })?
                        } else {
                            ((order as f64).powf(1.5 - 1.0 / pv) / (n as f64).sqrt()).min(1.0)
                        };
                        let exponent = (1.0 / pv - 1.0 / qv) / (1.0 / pv - 0.5);
                        let expected = base.powf(exponent);
                        let rel = (rate.lower - expected).abs() / expected.max(1e-300);
                        if rel > 1e-12 {
                            return Ok((
                                false,
                                format!(
                                    "interpolation junction off by {rel:.2e} at p={pv} q={qv} N={order} n={n}"
                                ),
                            ));
                        }
                    }
                }
            }
        }
        Ok((
            true,
            format!("{evaluated} grid cells classified; all junction identities within 1e-12"),
        ))
    };
    finish(11, "envelope-algebra", f64::INFINITY, started, run())
}

/// 12. Duality audit: primal and adjoint-side estimates of the same width
/// agree within the heuristic tolerance.
pub fn criterion_12() -> CriterionOutcome {
    let started = Instant::now();
    let seed = crit_seed(12);
    let run = || -> Result<(bool, String)> {
        let opts = DualityOptions {
            restarts: 96,
            outer_iters: 35,
            net_size: 512,
            seed,
        };
        let mut gaps = Vec::new();
        for n in 1..=4usize {
            let audit = duality_gap(fe(1.0), fe(2.0), 2, n, &opts)?;
            if audit.relative_gap > 0.15 {
                return Ok((
                    false,
                    format!(
                        "n={n}: primal {:.4} dual {:.4} gap {:.1}%",
                        audit.primal.value,
                        audit.dual.value,
                        100.0 * audit.relative_gap
                    ),
                ));
            }
            gaps.push(format!("n={n}: {:.1}%", 100.0 * audit.relative_gap));
        }
        Ok((true, gaps.join("; ")))
    };
    finish(12, "duality-gap", f64::INFINITY, started, run())
}

/// One deterministic invocation rendered exactly as the binary would render
/// it: canonical CSV plus the JSON document with blanked timestamps.
fn render_for_comparison(cmd: &Command, seed: u64) -> Result<(String, String)> {
    let flags = commands::flag_map(cmd);
    let output = commands::run_subcommand(cmd, seed)?;
    let mut manifest = RunManifest::start(cmd.name(), flags, seed);
    manifest.finish(&output);
    let mut doc = json_document(&manifest, &output);
    scrub_timestamps(&mut doc);
    let json = serde_json::to_string(&doc)
        .map_err(|e| schatten_widths::Error::usage(format!("serialize: {e}")))?;
    Ok((output.csv(), json))
}

/// The invocations replayed by the reproducibility check: one per subcommand,
/// sized to exercise every parallel code path quickly.
fn reproducibility_commands(matrix_file: PathBuf) -> Vec<Command> {
    vec![
        Command::Norms(NormsArgs {
            file: matrix_file,
            p: fe(2.0),
            mixed: None,
        }),
        Command::FlatTop(FlatTopArgs {
            order: 4,
            k: Some(2),
            dim: Some(8),
            tol: 1e-8,
        }),
        Command::Gelfand(GelfandArgs {
            p: fe(1.0),
            q: fe(2.0),
            order: 2,
            n: Some(2),
            sweep: false,
            restarts: 24,
            outer_iters: 15,
        }),
        Command::Kolmogorov(KolmogorovArgs {
            set: SetChoice::Vasileva,
            order: 2,
            r: 1,
            sample: None,
            target: schatten_widths::widths::TargetNorm::Schatten(fe(1.0)),
            n: 2,
            outer_iters: 15,
        }),
        Command::Orthocheck(OrthocheckArgs { order: 3, r: 2 }),
        Command::Gaussian(GaussianArgs {
            order: 16,
            q: fe(2.0),
            trials: 300,
        }),
        Command::Dvoretzky(DvoretzkyArgs {
            order: 8,
            q: fe(4.0),
            k: 6,
            trials: 40,
        }),
        Command::Envelope(EnvelopeArgs {
            p: fe(1.0),
            q: fe(2.0),
            order: 4,
            n: 16,
            small_frac: 0.5,
            crit_frac: 0.1,
        }),
        Command::PhaseDiagram(PhaseDiagramArgs {
            order: 4,
            p_grid: crate::args::ExponentGrid(vec![fe(1.0), fe(2.0)]),
            q_grid: crate::args::ExponentGrid(vec![fe(2.0), inf()]),
            n_grid: crate::args::IndexGrid(vec![1, 8, 16]),
            small_frac: 0.5,
            crit_frac: 0.1,
        }),
    ]
}

/// 13. Reproducibility: identical manifests yield byte-identical CSV and
/// JSON on one worker and on eight, including a direct duality-audit replay.
pub fn criterion_13() -> CriterionOutcome {
    let started = Instant::now();
    let seed = crit_seed(13);
    let run = || -> Result<(bool, String)> {
        let matrix_file = std::env::temp_dir().join(format!(
            "schatten-widths-repro-{}.txt",
            std::process::id()
        ));
        SquareMatrix::from_diagonal(&[2.0, 1.0]).write_file(&matrix_file)?;
        let commands = reproducibility_commands(matrix_file.clone());

        let render_all = |cmds: &[Command]| -> Result<Vec<(String, String)>> {
            let mut rendered = Vec::with_capacity(cmds.len() + 1);
            for cmd in cmds {
                rendered.push(render_for_comparison(cmd, 77)?);
            }
            // Direct library replay of the adjoint-side audit.
            let audit = duality_gap(
                fe(1.0),
                fe(2.0),
                2,
                2,
                &DualityOptions {
                    restarts: 32,
                    outer_iters: 15,
                    net_size: 128,
                    seed,
                },
            )?;
            let text = serde_json::to_string(&audit)
                .map_err(|e| schatten_widths::Error::usage(format!("serialize: {e}")))?;
            rendered.push((format_f64(audit.relative_gap), text));
            Ok(rendered)
        };

        let pool = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| schatten_widths::Error::usage(format!("thread pool: {e}")))
        };
        let serial = pool(1)?.install(|| render_all(&commands));
        let wide = pool(8)?.install(|| render_all(&commands));
        let wide_again = pool(8)?.install(|| render_all(&commands));
        let _ = std::fs::remove_file(&matrix_file);
        let serial = serial?;
        let wide = wide?;
        let wide_again = wide_again?;

        let mut mismatches = Vec::new();
        for (i, ((a, b), c)) in serial.iter().zip(&wide).zip(&wide_again).enumerate() {
            if a != b || b != c {
                mismatches.push(i.to_string());
            }
        }
        Ok((
            mismatches.is_empty(),
            if mismatches.is_empty() {
                format!(
                    "{} invocations byte-identical across 1 and 8 workers and across reruns",
                    serial.len()
                )
            } else {
                format!("mismatched invocation indices: {}", mismatches.join(" "))
            },
        ))
    };
    finish(13, "reproducibility", f64::INFINITY, started, run())
}

pub fn run_all(mut progress: impl FnMut(&CriterionOutcome)) -> Vec<CriterionOutcome> {
    let criteria: [fn() -> CriterionOutcome; 13] = [
        criterion_01,
        criterion_02,
        criterion_03,
        criterion_04,
        criterion_05,
        criterion_06,
        criterion_07,
        criterion_08,
        criterion_09,
        criterion_10,
        criterion_11,
        criterion_12,
        criterion_13,
    ];
    criteria
        .iter()
        .map(|f| {
            let outcome = f();
            progress(&outcome);
            outcome
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_fit_recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0];
        let ys = [2.5, 4.5, 6.5];
        assert!((fit_slope(&xs, &ys) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn criterion_seeds_are_frozen() {
        // Locking the derivation: a change here silently breaks every pinned
        // expectation downstream, so it must fail loudly instead.
        assert_eq!(crit_seed(1), mix_seed(0x57AB1E, salt::ACCEPTANCE, 1));
        assert_ne!(crit_seed(1), crit_seed(2));
    }

    #[test]
    fn finish_flags_budget_overrun() {
        let started = Instant::now();
        let outcome = finish(1, "x", 0.0, started, Ok((true, "fine".into())));
        assert!(!outcome.passed);
        assert!(outcome.detail.contains("budget"));
    }
}

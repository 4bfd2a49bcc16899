//! Subcommand handlers. Each one computes a `CommandOutput` whose rows back
//! both output formats, plus the normalized flag map for the run manifest.

use std::collections::BTreeMap;

use schatten_widths::envelopes::{evaluate_envelope, phase_diagram, reference_rates, EnvelopeConfig};
use schatten_widths::matrix::format_f64;
use schatten_widths::multiplicity::{auto_flat_count, construct_flat_top};
use schatten_widths::norms::{mixed_norm, schatten_norm};
use schatten_widths::randmat::{dvoretzky_band, estimate_expected_schatten};
use schatten_widths::subspace::MatrixSubspace;
use schatten_widths::widths::{
    averaged_set, gelfand_certified_floor, gelfand_minimax, gelfand_sweep, kolmogorov_finite_set,
    orthogonality_check, vasileva_extreme_points, AveragedMode, EstimateReport, TargetNorm,
    WidthKind, WidthQuery,
};
use schatten_widths::{Error, Result, SquareMatrix};
use serde_json::json;

use crate::acceptance;
use crate::args::{
    Command, DvoretzkyArgs, EnvelopeArgs, FlatTopArgs, GaussianArgs, GelfandArgs, KolmogorovArgs,
    NormsArgs, OrthocheckArgs, PhaseDiagramArgs, SetChoice,
};
use crate::report::{cell_bool, cell_exponent, cell_f64, CommandOutput};

/// Width-estimate CSV header shared by `gelfand` and `kolmogorov`.
const WIDTH_COLUMNS: [&str; 9] = [
    "kind", "p", "q", "N", "n", "value", "direction", "seed", "restarts",
];

/// 0 success, 1 usage or input error, 2 numerical failure, 3 verification
/// failure (the latter set on the output, not the error).
pub fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Usage(_) | Error::Io(_) => 1,
        Error::Numerical { .. } => 2,
    }
}

fn target_text(t: TargetNorm) -> String {
    match t {
        TargetNorm::Schatten(s) => format!("schatten:{s}"),
        TargetNorm::MixedColumn(s) => format!("mixed:{s}"),
    }
}

/// Normalized flag map recorded in the manifest. Resolved values are stored
/// (never "auto"), so replaying the manifest pins the whole computation.
pub fn flag_map(cmd: &Command) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        m.insert(k.to_string(), v);
    };
    match cmd {
        Command::Norms(a) => {
            put("file", a.file.display().to_string());
            put("p", cell_exponent(a.p));
            if let Some(inner) = a.mixed {
                put("mixed", cell_exponent(inner));
            }
        }
        Command::FlatTop(a) => {
            let (k, dim) = resolve_flat_top(a);
            put("N", a.order.to_string());
            put("k", k.to_string());
            put("dim", dim.to_string());
            put("tol", format!("{}", a.tol));
        }
        Command::Gelfand(a) => {
            put("p", cell_exponent(a.p));
            put("q", cell_exponent(a.q));
            put("N", a.order.to_string());
            if a.sweep {
                put("sweep", "true".to_string());
            } else if let Some(n) = a.n {
                put("n", n.to_string());
            }
            put("restarts", a.restarts.to_string());
            put("outer-iters", a.outer_iters.to_string());
        }
        Command::Kolmogorov(a) => {
            put(
                "set",
                match a.set {
                    SetChoice::Vasileva => "vasileva".to_string(),
                    SetChoice::Averaged => "averaged".to_string(),
                },
            );
            put("N", a.order.to_string());
            if a.set == SetChoice::Averaged {
                put("r", a.r.to_string());
                if let Some(count) = a.sample {
                    put("sample", count.to_string());
                }
            }
            put("target", target_text(a.target));
            put("n", a.n.to_string());
            put("outer-iters", a.outer_iters.to_string());
        }
        Command::Orthocheck(a) => {
            put("N", a.order.to_string());
            put("r", a.r.to_string());
        }
        Command::Gaussian(a) => {
            put("N", a.order.to_string());
            put("q", cell_exponent(a.q));
            put("trials", a.trials.to_string());
        }
        Command::Dvoretzky(a) => {
            put("N", a.order.to_string());
            put("q", cell_exponent(a.q));
            put("k", a.k.to_string());
            put("trials", a.trials.to_string());
        }
        Command::Envelope(a) => {
            put("p", cell_exponent(a.p));
            put("q", cell_exponent(a.q));
            put("N", a.order.to_string());
            put("n", a.n.to_string());
            put("cfg-small-frac", format!("{}", a.small_frac));
            put("cfg-crit-frac", format!("{}", a.crit_frac));
        }
        Command::PhaseDiagram(a) => {
            put("N", a.order.to_string());
            put(
                "p-grid",
                a.p_grid.0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","),
            );
            put(
                "q-grid",
                a.q_grid.0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","),
            );
            put(
                "n-grid",
                a.n_grid.0.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
            );
            put("cfg-small-frac", format!("{}", a.small_frac));
            put("cfg-crit-frac", format!("{}", a.crit_frac));
        }
        Command::Verify(_) => {
            put("suite", "primary".to_string());
        }
    }
    m
}

pub fn run_subcommand(cmd: &Command, seed: u64) -> Result<CommandOutput> {
    match cmd {
        Command::Norms(a) => run_norms(a),
        Command::FlatTop(a) => run_flat_top(a, seed),
        Command::Gelfand(a) => run_gelfand(a, seed),
        Command::Kolmogorov(a) => run_kolmogorov(a, seed),
        Command::Orthocheck(a) => run_orthocheck(a),
        Command::Gaussian(a) => run_gaussian(a, seed),
        Command::Dvoretzky(a) => run_dvoretzky(a, seed),
        Command::Envelope(a) => run_envelope(a),
        Command::PhaseDiagram(a) => run_phase_diagram(a),
        Command::Verify(_) => run_verify(),
    }
}

fn run_norms(a: &NormsArgs) -> Result<CommandOutput> {
    let m = SquareMatrix::read_file(&a.file)?;
    let mut out = CommandOutput::new(vec!["kind", "inner", "outer", "N", "value"]);
    let (kind, inner, value) = match a.mixed {
        Some(inner) => ("mixed", cell_exponent(inner), mixed_norm(&m, inner, a.p)),
        None => ("schatten", String::new(), schatten_norm(&m, a.p)?),
    };
    out.push_row(vec![
        kind.to_string(),
        inner,
        cell_exponent(a.p),
        m.order().to_string(),
        cell_f64(value),
    ])?;
    Ok(out)
}

fn resolve_flat_top(a: &FlatTopArgs) -> (usize, usize) {
    let dim = a.dim.unwrap_or(a.order * a.order);
    let k = a
        .k
        .unwrap_or_else(|| if dim == 0 { 1 } else { auto_flat_count(a.order, dim) });
    (k, dim)
}

fn run_flat_top(a: &FlatTopArgs, seed: u64) -> Result<CommandOutput> {
    let (k, dim) = resolve_flat_top(a);
    let subspace = MatrixSubspace::random(a.order, dim, seed)?;
    let cert = construct_flat_top(&subspace, k, a.tol, seed)?;
    let mut out = CommandOutput::new(vec![
        "N",
        "k",
        "dim",
        "seed",
        "achieved_multiplicity",
        "spectral_residual",
        "norm_excess",
        "containment_residual",
        "steps",
    ]);
    out.push_row(vec![
        a.order.to_string(),
        k.to_string(),
        dim.to_string(),
        seed.to_string(),
        cert.achieved_multiplicity.to_string(),
        cell_f64(cert.spectral_residual),
        cell_f64(cert.norm_excess),
        cell_f64(cert.containment_residual),
        cert.gamma_trace.len().to_string(),
    ])?;
    out.payload = Some(json!({
        "certificate": {
            "matrix": cert.matrix.to_text(),
            "achieved_multiplicity": cert.achieved_multiplicity,
            "spectral_residual": format_f64(cert.spectral_residual),
            "norm_excess": format_f64(cert.norm_excess),
            "containment_residual": format_f64(cert.containment_residual),
            "gamma_trace": cert
                .gamma_trace
                .iter()
                .map(|(mult, gamma)| json!([mult, format_f64(*gamma)]))
                .collect::<Vec<_>>(),
            "tolerance": format_f64(cert.tolerance),
        }
    }));
    Ok(out)
}

fn width_row(report: &EstimateReport) -> Vec<String> {
    vec![
        report.query.kind.label().to_string(),
        cell_exponent(report.query.p),
        cell_exponent(report.query.q),
        report.query.order.to_string(),
        report.query.n.to_string(),
        cell_f64(report.value),
        report.direction.label().to_string(),
        report.seed.to_string(),
        report.restarts.to_string(),
    ]
}

fn width_output(reports: Vec<EstimateReport>) -> Result<CommandOutput> {
    let mut out = CommandOutput::new(WIDTH_COLUMNS.to_vec());
    for report in &reports {
        out.push_row(width_row(report))?;
    }
    out.payload = Some(json!({ "reports": reports }));
    Ok(out)
}

fn run_gelfand(a: &GelfandArgs, seed: u64) -> Result<CommandOutput> {
    let reports = if a.sweep {
        gelfand_sweep(a.p, a.q, a.order, a.outer_iters, a.restarts, seed)?
    } else {
        let n = a.n.ok_or_else(|| {
            schatten_widths::Error::usage("either --n or --sweep is required")
        })?;
        let query = WidthQuery {
            kind: WidthKind::Gelfand,
            p: a.p,
            q: a.q,
            order: a.order,
            n,
        };
        let mut reports = vec![gelfand_minimax(query, a.outer_iters, a.restarts, seed)?];
        // The heuristic row gets a matching certified floor whenever the
        // exponent order admits one.
        if a.q.le(a.p) {
            reports.push(gelfand_certified_floor(a.p, a.q, a.order, n, seed)?);
        }
        reports
    };
    width_output(reports)
}

fn run_kolmogorov(a: &KolmogorovArgs, seed: u64) -> Result<CommandOutput> {
    let set = match a.set {
        SetChoice::Vasileva => vasileva_extreme_points(a.order)?,
        SetChoice::Averaged => {
            let mode = match a.sample {
                Some(count) => AveragedMode::Sample(count),
                None => AveragedMode::Enumerate,
            };
            averaged_set(a.order, a.r, mode, seed)?
        }
    };
    let report = kolmogorov_finite_set(&set, a.target, a.n, a.outer_iters, seed)?;
    let mut out = width_output(vec![report])?;
    let members = set.len();
    let group_size = set.group_size;
    if let Some(payload) = out.payload.as_mut() {
        payload["set"] = json!({
            "provenance": set.provenance.label(),
            "members": members,
            "group_size": group_size,
        });
    }
    Ok(out)
}

fn run_orthocheck(a: &OrthocheckArgs) -> Result<CommandOutput> {
    let report = orthogonality_check(a.order, a.r)?;
    let mut out = CommandOutput::new(vec![
        "N",
        "r",
        "group_size",
        "exact",
        "max_deviation",
        "diagonal_numerator",
        "diagonal_denominator",
    ]);
    out.push_row(vec![
        report.order.to_string(),
        report.rank.to_string(),
        report.group_size.to_string(),
        cell_bool(report.exact),
        cell_f64(report.max_deviation),
        report.diagonal_numerator.to_string(),
        report.diagonal_denominator.to_string(),
    ])?;
    out.payload = Some(serde_json::to_value(&report).expect("report serializes"));
    Ok(out)
}

fn run_gaussian(a: &GaussianArgs, seed: u64) -> Result<CommandOutput> {
    let report = estimate_expected_schatten(a.order, a.q, a.trials, seed)?;
    let mut out = CommandOutput::new(vec![
        "N",
        "q",
        "k",
        "trials",
        "seed",
        "mean",
        "stderr",
        "normalized_mean",
    ]);
    out.push_row(vec![
        report.order.to_string(),
        cell_exponent(report.exponent),
        String::new(),
        report.trials.to_string(),
        report.seed.to_string(),
        cell_f64(report.mean),
        cell_f64(report.stderr),
        cell_f64(report.normalized_mean),
    ])?;
    out.payload = Some(serde_json::to_value(&report).expect("report serializes"));
    Ok(out)
}

fn run_dvoretzky(a: &DvoretzkyArgs, seed: u64) -> Result<CommandOutput> {
    let report = dvoretzky_band(a.order, a.q, a.k, a.trials, seed)?;
    let mut out = CommandOutput::new(vec![
        "N",
        "q",
        "k",
        "trials",
        "seed",
        "euclidean_min",
        "euclidean_median",
        "euclidean_max",
        "nuclear_min",
        "nuclear_median",
        "nuclear_max",
    ]);
    out.push_row(vec![
        report.order.to_string(),
        cell_exponent(report.exponent),
        report.subspace_dim.to_string(),
        report.trials.to_string(),
        report.seed.to_string(),
        cell_f64(report.euclidean_stat.min),
        cell_f64(report.euclidean_stat.median),
        cell_f64(report.euclidean_stat.max),
        cell_f64(report.nuclear_stat.min),
        cell_f64(report.nuclear_stat.median),
        cell_f64(report.nuclear_stat.max),
    ])?;
    out.payload = Some(serde_json::to_value(&report).expect("report serializes"));
    Ok(out)
}

const ENVELOPE_COLUMNS: [&str; 9] = [
    "p", "q", "N", "n", "regime", "rate_lower", "rate_upper", "sharp", "constant_dependent",
];

fn envelope_row(
    p: schatten_widths::SpectrumExponent,
    q: schatten_widths::SpectrumExponent,
    order: usize,
    n: usize,
    rate: &schatten_widths::envelopes::RegimeRate,
) -> Vec<String> {
    vec![
        cell_exponent(p),
        cell_exponent(q),
        order.to_string(),
        n.to_string(),
        rate.regime.label().to_string(),
        cell_f64(rate.lower),
        cell_f64(rate.upper),
        cell_bool(rate.sharp()),
        cell_bool(rate.constant_dependent),
    ]
}

fn run_envelope(a: &EnvelopeArgs) -> Result<CommandOutput> {
    let cfg = EnvelopeConfig {
        small_codim_fraction: a.small_frac,
        critical_dim_fraction: a.crit_frac,
    };
    let rate = evaluate_envelope(a.p, a.q, a.order, a.n, &cfg)?;
    let references = reference_rates(a.p, a.q, a.order, a.n)?;
    let mut out = CommandOutput::new(ENVELOPE_COLUMNS.to_vec());
    out.push_row(envelope_row(a.p, a.q, a.order, a.n, &rate))?;
    out.payload = Some(json!({
        "rate": rate,
        "references": references,
    }));
    Ok(out)
}

fn run_phase_diagram(a: &PhaseDiagramArgs) -> Result<CommandOutput> {
    let cfg = EnvelopeConfig {
        small_codim_fraction: a.small_frac,
        critical_dim_fraction: a.crit_frac,
    };
    let rows = phase_diagram(&a.p_grid.0, &a.q_grid.0, a.order, &a.n_grid.0, &cfg)?;
    let mut out = CommandOutput::new(ENVELOPE_COLUMNS.to_vec());
    for row in &rows {
        out.push_row(envelope_row(row.p, row.q, row.order, row.n, &row.rate))?;
    }
    Ok(out)
}

fn run_verify() -> Result<CommandOutput> {
    let outcomes = acceptance::run_all(|o| {
        eprintln!(
            "criterion {:>2}  {}  {}  ({:.1}s)",
            o.id,
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.elapsed_seconds
        );
    });
    let mut out = CommandOutput::new(vec!["criterion", "name", "passed", "elapsed_seconds"]);
    for o in &outcomes {
        out.push_row(vec![
            o.id.to_string(),
            o.name.to_string(),
            cell_bool(o.passed),
            format!("{:.3}", o.elapsed_seconds),
        ])?;
    }
    if outcomes.iter().any(|o| !o.passed) {
        out.exit_code = 3;
    }
    out.payload = Some(json!({ "verdicts": outcomes }));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::Cli;
    use clap::Parser;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(args).unwrap()
    }

    #[test]
    fn envelope_row_matches_closed_form() {
        let cli = parse(&[
            "schatten-widths",
            "envelope",
            "--p",
            "1",
            "--q",
            "2",
            "--N",
            "4",
            "--n",
            "16",
        ]);
        let out = run_subcommand(&cli.command, cli.seed).unwrap();
        assert_eq!(out.rows.len(), 1);
        // n = N^2 rate is N^(1/q - 1/p) = 1/2 exactly.
        assert_eq!(out.rows[0][5], cell_f64(0.5));
        assert_eq!(out.rows[0][7], "true");
    }

    #[test]
    fn phase_diagram_row_count_is_grid_product() {
        let cli = parse(&[
            "schatten-widths",
            "phase-diagram",
            "--N",
            "4",
            "--p-grid",
            "1,2",
            "--q-grid",
            "2,inf",
            "--n-grid",
            "1,8,16",
        ]);
        let out = run_subcommand(&cli.command, cli.seed).unwrap();
        assert_eq!(out.rows.len(), 12);
        assert_eq!(out.columns, ENVELOPE_COLUMNS.to_vec());
    }

    #[test]
    fn orthocheck_reports_exact_fraction() {
        let cli = parse(&["schatten-widths", "orthocheck", "--N", "2", "--r", "1"]);
        let out = run_subcommand(&cli.command, cli.seed).unwrap();
        assert_eq!(out.rows[0][3], "true");
        assert_eq!(out.rows[0][5], "1");
        assert_eq!(out.rows[0][6], "4");
    }

    #[test]
    fn flag_map_resolves_flat_top_defaults() {
        let cli = parse(&["schatten-widths", "flat-top", "--N", "4"]);
        let flags = flag_map(&cli.command);
        assert_eq!(flags["dim"], "16");
        assert_eq!(flags["k"], "2");
        assert!(!flags.contains_key("threads"));
    }

    #[test]
    fn gelfand_appends_certified_floor_row() {
        let cli = parse(&[
            "schatten-widths",
            "gelfand",
            "--p",
            "inf",
            "--q",
            "1",
            "--N",
            "2",
            "--n",
            "1",
            "--restarts",
            "8",
            "--outer-iters",
            "5",
        ]);
        let out = run_subcommand(&cli.command, cli.seed).unwrap();
        assert_eq!(out.rows.len(), 2);
        assert_eq!(out.rows[0][6], "heuristic");
        assert_eq!(out.rows[1][6], "certified-lower");
    }

    #[test]
    fn kolmogorov_payload_names_the_set() {
        let cli = parse(&[
            "schatten-widths",
            "kolmogorov",
            "--set",
            "vasileva",
            "--N",
            "2",
            "--target",
            "schatten:1",
            "--n",
            "1",
            "--outer-iters",
            "5",
        ]);
        let out = run_subcommand(&cli.command, cli.seed).unwrap();
        let payload = out.payload.unwrap();
        assert_eq!(payload["set"]["members"], 8);
    }

    #[test]
    fn exit_codes_by_error_kind() {
        assert_eq!(exit_code_for(&Error::usage("bad flag")), 1);
        let io = Error::Io(std::io::Error::new(std::io::ErrorKind::NotFound, "gone"));
        assert_eq!(exit_code_for(&io), 1);
        assert_eq!(exit_code_for(&Error::numerical("diverged")), 2);
    }
}

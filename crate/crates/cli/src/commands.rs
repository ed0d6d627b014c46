use std::path::PathBuf;

use anyhow::{bail, Result};
use serde_json::json;
use tempered_core::basis::{projection_nodes, MAX_QUAD_NODES};
use tempered_core::heat::{convolution_reference, heat_apply, heat_equation_residual, strong_continuity_scan};
use tempered_core::sobolev::{sobolev_norm, HermiteCoeffs, SobolevOrder};
use tempered_core::stats::{log_grid, log_grid_per_decade};
use tempered_core::stochastic::{ito_convergence, mc_expectation, monotonicity_scan, ItoScanConfig};
use tempered_core::translation::{accuracy_envelope, norm_bound_scan, spread_directions};

use crate::bundle::{Bundle, Report, Verdict, TOOL, VERSION};
use crate::config::{Method, RunConfig};
use crate::input::InputSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ScanKind {
    TranslationBound,
    Continuity,
    Monotonicity,
    Ito,
}

impl ScanKind {
    fn name(self) -> &'static str {
        match self {
            ScanKind::TranslationBound => "translation-bound",
            ScanKind::Continuity => "continuity",
            ScanKind::Monotonicity => "monotonicity",
            ScanKind::Ito => "ito",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Build,
    Solve,
    Scan(ScanKind),
    ResidualHeat,
    Info,
}

impl Command {
    pub fn name(self) -> String {
        match self {
            Command::Build => "build".into(),
            Command::Solve => "solve".into(),
            Command::Scan(kind) => format!("scan {}", kind.name()),
            Command::ResidualHeat => "residual-heat".into(),
            Command::Info => "info".into(),
        }
    }
}

pub const DEFAULT_OUT: &str = "tempered-run";
const DEFAULT_TIME: f64 = 0.5;

/// Result of a command: the report and the bundle directory, if any.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub dir: Option<PathBuf>,
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

fn input(cfg: &RunConfig) -> Result<HermiteCoeffs> {
    InputSpec::parse(&cfg.input, cfg.d)?.build(cfg.d, cfg.n, cfg.q)
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    if command == Command::Info {
        return Ok(Outcome { report: Report::new("info", cfg, info(cfg)?, Vec::new()), dir: None });
    }
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let mut bundle = Bundle::create(&dir, cfg)?;
    let (results, verdicts) = match command {
        Command::Build => build(cfg, &mut bundle)?,
        Command::Solve => solve(cfg, &mut bundle)?,
        Command::Scan(kind) => scan(kind, cfg, &mut bundle)?,
        Command::ResidualHeat => residual_heat(cfg, &mut bundle)?,
        Command::Info => unreachable!("handled above"),
    };
    let report = Report::new(&command.name(), cfg, results, verdicts);
    let dir = bundle.finish(&report)?;
    Ok(Outcome { report, dir: Some(dir) })
}

fn info(cfg: &RunConfig) -> Result<serde_json::Value> {
    let p = SobolevOrder::new(cfg.p)?;
    Ok(json!({
        "tool": TOOL,
        "version": VERSION,
        "basis_size": cfg.basis_len(),
        "accuracy_envelope": accuracy_envelope(cfg.n),
        "projection_nodes": projection_nodes(cfg.n),
        "max_quadrature_nodes": MAX_QUAD_NODES,
        "translation_degree": p.translation_degree(),
        "ordering": tempered_core::sobolev::ORDERING,
    }))
}

fn build(cfg: &RunConfig, bundle: &mut Bundle) -> Result<(serde_json::Value, Vec<Verdict>)> {
    let phi = bundle.time("build", || input(cfg))?;
    bundle.coeffs("input", &phi)?;
    let results = json!({
        "input": cfg.input,
        "basis_size": phi.len(),
        "norm": sobolev_norm(&phi, cfg.p),
        "content_degree": phi.content_degree(),
        "file": "coefficients/input.json",
    });
    Ok((results, Vec::new()))
}

struct Solution {
    method: Method,
    t: f64,
    coeffs: HermiteCoeffs,
    aggregate_se: Option<f64>,
}

fn solve_one(method: Method, phi: &HermiteCoeffs, t: f64, cfg: &RunConfig) -> Result<(HermiteCoeffs, Option<Vec<f64>>)> {
    Ok(match method {
        Method::Spectral => (heat_apply(phi, t)?, None),
        Method::ConvReference => {
            if t == 0.0 {
                (phi.clone(), None)
            } else {
                (convolution_reference(phi, t, cfg.q.unwrap_or(cfg.n + 16))?, None)
            }
        }
        Method::Mc => {
            let est = mc_expectation(phi, t, cfg.m, cfg.require_seed()?)?;
            (est.mean, Some(est.std_errors))
        }
    })
}

fn aggregate(se: &[f64], phi: &HermiteCoeffs, p: f64) -> f64 {
    se.iter().enumerate().map(|(pos, s)| phi.basis().eigenvalue(pos).powf(p) * s).sum()
}

fn solve(cfg: &RunConfig, bundle: &mut Bundle) -> Result<(serde_json::Value, Vec<Verdict>)> {
    let phi = input(cfg)?;
    bundle.coeffs("input", &phi)?;
    let times = cfg.times(&[DEFAULT_TIME]);
    let methods: Vec<Method> = if cfg.compare {
        let mut m = vec![Method::Spectral, Method::ConvReference];
        if cfg.seed.is_some() {
            m.push(Method::Mc);
        }
        m
    } else {
        vec![cfg.method]
    };
    let mut solutions = Vec::new();
    let mut rows = Vec::new();
    for &method in &methods {
        for (i, &t) in times.iter().enumerate() {
            let (coeffs, se) = bundle.time(method.name(), || solve_one(method, &phi, t, cfg))?;
            let name = format!("{}_t{i}", method.name());
            bundle.coeffs(&name, &coeffs)?;
            if let Some(se) = &se {
                bundle.json(&format!("coefficients/{name}.se.json"), se)?;
            }
            let aggregate_se = se.as_ref().map(|s| aggregate(s, &phi, cfg.p));
            rows.push(vec![
                method.name().to_owned(),
                fmt(t),
                fmt(sobolev_norm(&coeffs, cfg.p)),
                aggregate_se.map(fmt).unwrap_or_default(),
            ]);
            solutions.push(Solution { method, t, coeffs, aggregate_se });
        }
    }
    bundle.table("solutions", &["method", "t", "norm", "aggregate_se"], &rows)?;

    let mut verdicts = Vec::new();
    let mut comparisons = Vec::new();
    let mut table = Vec::new();
    let th = &cfg.thresholds;
    for (a_idx, a) in solutions.iter().enumerate() {
        for b in &solutions[a_idx + 1..] {
            if a.t != b.t {
                continue;
            }
            let distance = sobolev_norm(&(&a.coeffs - &b.coeffs), cfg.p);
            let bound = match a.aggregate_se.or(b.aggregate_se) {
                Some(se) => th.mc_se_factor * se,
                None => th.deterministic_distance,
            };
            let name = format!("{}-vs-{}@t={}", a.method.name(), b.method.name(), a.t);
            let passed = distance <= bound;
            verdicts.push(Verdict::new(&name, passed, format!("distance {distance:e} <= {bound:e}")));
            comparisons.push(json!({"a": a.method, "b": b.method, "t": a.t, "distance": distance, "bound": bound, "passed": passed}));
            table.push(vec![a.method.name().into(), b.method.name().into(), fmt(a.t), fmt(distance), fmt(bound)]);
        }
    }
    if cfg.compare {
        bundle.table("compare", &["a", "b", "t", "distance", "bound"], &table)?;
    }
    let results = json!({
        "times": times,
        "methods": methods,
        "solutions": solutions.iter().enumerate().map(|(i, s)| json!({
            "method": s.method,
            "t": s.t,
            "file": format!("coefficients/{}_t{}.json", s.method.name(), i % times.len()),
            "norm": sobolev_norm(&s.coeffs, cfg.p),
            "aggregate_se": s.aggregate_se,
        })).collect::<Vec<_>>(),
        "comparisons": comparisons,
    });
    Ok((results, verdicts))
}

fn scan(kind: ScanKind, cfg: &RunConfig, bundle: &mut Bundle) -> Result<(serde_json::Value, Vec<Verdict>)> {
    let th = &cfg.thresholds;
    match kind {
        ScanKind::TranslationBound => {
            let phi = input(cfg)?;
            let envelope = accuracy_envelope(cfg.n);
            let radii = cfg.radii.clone().unwrap_or_else(|| log_grid(envelope / 100.0, envelope, 25));
            let dirs = spread_directions(cfg.d, cfg.directions, cfg.seed.unwrap_or(0));
            let report = bundle.time("scan", || norm_bound_scan(&phi, cfg.p, &radii, &dirs, th.degree_slack))?;
            let rows: Vec<Vec<String>> = report.radii.iter().zip(&report.ratios).map(|(r, q)| vec![fmt(*r), fmt(*q)]).collect();
            bundle.table("translation_bound", &["radius", "ratio"], &rows)?;
            let bound = report.theoretical_degree as f64 + th.degree_slack;
            let mut verdicts = vec![Verdict::new(
                "degree-bound",
                report.fitted_slope <= bound,
                format!("slope {:e} <= {bound}", report.fitted_slope),
            )];
            if cfg.p == 0.0 {
                verdicts.push(Verdict::new(
                    "isometry",
                    report.fitted_slope.abs() <= th.isometry_slope,
                    format!("|slope| {:e} <= {}", report.fitted_slope.abs(), th.isometry_slope),
                ));
            }
            Ok((serde_json::to_value(&report)?, verdicts))
        }
        ScanKind::Continuity => {
            let phi = input(cfg)?;
            let times = cfg.t_grid.clone().unwrap_or_else(|| log_grid_per_decade(1e-3, 1e-1, 12));
            let report =
                bundle.time("scan", || strong_continuity_scan(&phi, cfg.p, &times, th.continuity_slope_tol))?;
            let rows: Vec<Vec<String>> =
                report.times.iter().zip(&report.distances).map(|(t, d)| vec![fmt(*t), fmt(*d)]).collect();
            bundle.table("continuity", &["t", "distance"], &rows)?;
            let verdicts = vec![Verdict::new(
                "continuity-slope",
                report.passed,
                format!("slope {:e} within 1 +- {}", report.fitted_slope, th.continuity_slope_tol),
            )];
            Ok((serde_json::to_value(&report)?, verdicts))
        }
        ScanKind::Monotonicity => {
            let seed = cfg.require_seed()?;
            let reports = bundle.time("scan", || {
                [cfg.n, 2 * cfg.n]
                    .iter()
                    .map(|&n| monotonicity_scan(cfg.p, cfg.draws, cfg.d, n, seed))
                    .collect::<tempered_core::Result<Vec<_>>>()
            })?;
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| vec![r.config.n.to_string(), fmt(r.ensemble_max), fmt(r.exact_sup), fmt(r.ground_state)])
                .collect();
            bundle.table("monotonicity", &["N", "ensemble_max", "exact_sup", "ground_state"], &rows)?;
            let change = (reports[1].exact_sup - reports[0].exact_sup).abs() / reports[0].exact_sup.abs();
            let verdicts = vec![
                Verdict::new(
                    "bounded",
                    reports.iter().all(|r| r.bounded),
                    "ensemble maxima finite and below the exact supremum",
                ),
                Verdict::new(
                    "stable-under-doubling",
                    change <= th.monotonicity_stability,
                    format!("relative change {change:e} <= {}", th.monotonicity_stability),
                ),
            ];
            Ok((serde_json::to_value(&reports)?, verdicts))
        }
        ScanKind::Ito => {
            let phi = input(cfg)?;
            let seed = cfg.require_seed()?;
            let it = &cfg.ito;
            let scan = ItoScanConfig {
                horizon: cfg.t.unwrap_or(1.0),
                finest_steps: it.finest_steps,
                halvings: it.halvings,
                paths: it.paths,
                seed,
                covariation: it.covariation,
                drift: it.drift.clone(),
            };
            let report = bundle.time("scan", || ito_convergence(&phi, cfg.p, &scan))?;
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| vec![fmt(r.step), fmt(r.terminal_residual), r.order.map(fmt).unwrap_or_default()])
                .collect();
            bundle.table("ito", &["step", "terminal_residual", "order"], &rows)?;
            let in_band = (th.ito_order_min..=th.ito_order_max).contains(&report.fitted_order);
            let verdicts = vec![
                Verdict::new(
                    "ito-order",
                    in_band,
                    format!("order {:e} in [{}, {}]", report.fitted_order, th.ito_order_min, th.ito_order_max),
                ),
                Verdict::new("ito-monotone", report.monotone, "terminal residual non-increasing up to 20%"),
            ];
            Ok((serde_json::to_value(&report)?, verdicts))
        }
    }
}

fn residual_heat(cfg: &RunConfig, bundle: &mut Bundle) -> Result<(serde_json::Value, Vec<Verdict>)> {
    const MIN_POINTS: usize = 64;
    if cfg.intervals.iter().any(|&n| n < MIN_POINTS) || cfg.intervals.windows(2).any(|w| w[0] >= w[1]) {
        bail!("residual-heat needs increasing interval counts of at least {MIN_POINTS}");
    }
    let phi = input(cfg)?;
    let horizon = cfg.t.unwrap_or(DEFAULT_TIME);
    let th = &cfg.thresholds;
    let q = cfg.q.unwrap_or(cfg.n + 16);
    let mut methods = vec![Method::Spectral];
    if cfg.compare {
        methods.push(Method::ConvReference);
    }
    let mut reports = Vec::new();
    for &method in &methods {
        let report = bundle.time(method.name(), || match method {
            Method::ConvReference => heat_equation_residual(&phi, horizon, cfg.p, &cfg.intervals, |f, t| {
                if t == 0.0 {
                    Ok(f.clone())
                } else {
                    convolution_reference(f, t, q)
                }
            }),
            _ => heat_equation_residual(&phi, horizon, cfg.p, &cfg.intervals, heat_apply),
        })?;
        reports.push((method, report));
    }
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for (method, report) in &reports {
        for row in &report.refinement {
            rows.push(vec![
                method.name().to_owned(),
                row.intervals.to_string(),
                fmt(row.step),
                fmt(row.terminal_residual),
                row.order.map(fmt).unwrap_or_default(),
            ]);
        }
    }
    bundle.table("residual_heat", &["method", "intervals", "step", "residual", "order"], &rows)?;
    let spectral = &reports[0].1;
    if horizon == 0.0 {
        let zero = spectral.refinement.iter().all(|r| r.terminal_residual == 0.0);
        verdicts.push(Verdict::new("zero-horizon", zero, "residual vanishes at t = 0"));
    } else {
        for row in spectral.refinement.iter().skip(1) {
            let order = row.order.unwrap_or(f64::NAN);
            verdicts.push(Verdict::new(
                format!("order@{}", row.intervals),
                (order - 2.0).abs() <= th.heat_order_tol,
                format!("order {order:e} within 2 +- {}", th.heat_order_tol),
            ));
        }
    }
    if let Some((_, conv)) = reports.get(1) {
        let gap = spectral
            .refinement
            .iter()
            .zip(&conv.refinement)
            .map(|(a, b)| (a.terminal_residual - b.terminal_residual).abs())
            .fold(0.0, f64::max);
        verdicts.push(Verdict::new(
            "conv-reference-agrees",
            gap <= th.deterministic_distance,
            format!("max residual gap {gap:e} <= {:e}", th.deterministic_distance),
        ));
    }
    let results = json!({
        "horizon": horizon,
        "reports": reports.iter().map(|(m, r)| json!({"method": m, "report": r})).collect::<Vec<_>>(),
    });
    Ok((results, verdicts))
}

//! One line per acceptance criterion. Runs as a plain binary so the lines are
//! always printed; exits non-zero if a criterion outside `KNOWN_RED` fails.

use std::fs;
use std::time::Instant;

use tempered_cli::{run_config, Command, ItoSettings, Method, RunConfig, ScanKind};
use tempered_core::basis::{project_function, projection_nodes, MultiIndex};
use tempered_core::heat::{heat_apply, heat_equation_residual, heat_kernel, strong_continuity_scan};
use tempered_core::sobolev::{
    apply_hp, apply_laplacian, apply_lower, apply_position, apply_raise, delta_coeffs, margin_ensemble,
    sobolev_inner, sobolev_norm, HermiteCoeffs,
};
use tempered_core::stats::{log_grid, log_grid_per_decade};
use tempered_core::stochastic::{
    ito_residual, ito_convergence, martingale_check, mc_expectation, monotonicity_scan, BrownianPath, Covariation,
    ItoScanConfig,
};
use tempered_core::translation::{
    accuracy_envelope, norm_bound_scan, spread_directions, translate_expm, translate_quadrature, Translator,
};

/// Criteria that fail for reasons analysed in the decisions ledger.
const KNOWN_RED: &[&str] = &["3a", "9a"];

const SEED: u64 = 0;

struct Board {
    lines: Vec<(String, bool)>,
}

impl Board {
    fn record(&mut self, id: &str, name: &str, passed: bool, detail: String) {
        println!("criterion {id:<3} {}  {name}: {detail}", if passed { "PASS" } else { "FAIL" });
        self.lines.push((id.to_owned(), passed));
    }

    fn note(&self, text: String) {
        println!("    note: {text}");
    }
}

fn max_diff(a: &HermiteCoeffs, b: &HermiteCoeffs) -> f64 {
    a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn unit(d: usize, n: usize, k: &MultiIndex) -> HermiteCoeffs {
    HermiteCoeffs::basis_vector(d, n, k).unwrap()
}

fn e0(d: usize, n: usize) -> HermiteCoeffs {
    unit(d, n, &MultiIndex::zero(d))
}

fn spectral_exactness(board: &mut Board) {
    let mut eig = 0.0f64;
    let mut iso = 0.0f64;
    for d in [1, 2] {
        let n = 32;
        let basis = e0(d, n).basis().clone();
        for k in basis.indices() {
            let e = unit(d, n, k);
            let lambda = (2 * k.degree() + d) as f64;
            eig = eig.max(max_diff(&apply_hp(&e, 1.0), &(&e * lambda)));
            if k.degree() + 2 <= n {
                // H = |x|^2 - Delta through the ladder operators
                let mut h = &apply_laplacian(&e) * -1.0;
                for axis in 0..d {
                    h = &h + &apply_position(&apply_position(&e, axis).unwrap(), axis).unwrap();
                }
                eig = eig.max(max_diff(&h, &(&e * lambda)));
            }
        }
        for phi in margin_ensemble(d, n, 10, SEED).unwrap() {
            for p in [-1.5, -1.0, 0.5, 2.0] {
                for q in [-2.0, 0.0, 1.5] {
                    let lhs = sobolev_norm(&apply_hp(&phi, p), q - p);
                    let rhs = sobolev_norm(&phi, q);
                    iso = iso.max((lhs - rhs).abs() / rhs);
                }
            }
        }
    }
    board.record(
        "1",
        "spectral exactness",
        eig <= 1e-12 && iso <= 1e-12,
        format!("max |H h_k - (2|k|+d) h_k| = {eig:.2e}, max isometry defect {iso:.2e} (tol 1e-12)"),
    );
}

fn ladder_exactness(board: &mut Board) {
    let mut weights = 0.0f64;
    let mut adjoint = 0.0f64;
    for d in [1, 2] {
        let n = 32;
        let basis = e0(d, n).basis().clone();
        for k in basis.indices() {
            if k.degree() + 2 > n {
                continue;
            }
            let e = unit(d, n, k);
            for axis in 0..d {
                let kj = k.entries()[axis];
                let mut up = k.entries().to_vec();
                up[axis] += 1;
                let expected = &unit(d, n, &MultiIndex::new(up.clone()).unwrap()) * (2.0 * (kj + 1) as f64).sqrt();
                weights = weights.max(max_diff(&apply_raise(&e, axis).unwrap(), &expected));
                // (A+)^2 h_k = 2 sqrt((k+1)(k+2)) h_{k+2}
                up[axis] += 1;
                let twice = &unit(d, n, &MultiIndex::new(up).unwrap()) * (2.0 * (((kj + 1) * (kj + 2)) as f64).sqrt());
                let got = apply_raise(&apply_raise(&e, axis).unwrap(), axis).unwrap();
                weights = weights.max(max_diff(&got, &twice));
                let lowered = apply_lower(&e, axis).unwrap();
                let expected = if kj == 0 {
                    HermiteCoeffs::zeros(d, n).unwrap()
                } else {
                    let mut down = k.entries().to_vec();
                    down[axis] -= 1;
                    &unit(d, n, &MultiIndex::new(down).unwrap()) * (2.0 * kj as f64).sqrt()
                };
                weights = weights.max(max_diff(&lowered, &expected));
            }
        }
        let ens = margin_ensemble(d, n, 8, SEED).unwrap();
        for pair in ens.chunks(2) {
            for axis in 0..d {
                let lhs = sobolev_inner(&apply_lower(&pair[0], axis).unwrap(), &pair[1], 0.0).unwrap();
                let rhs = sobolev_inner(&pair[0], &apply_raise(&pair[1], axis).unwrap(), 0.0).unwrap();
                let scale = sobolev_norm(&pair[0], 0.0) * sobolev_norm(&pair[1], 0.0);
                adjoint = adjoint.max((lhs - rhs).norm() / scale);
            }
        }
    }
    board.record(
        "2",
        "ladder exactness",
        weights <= 1e-14 && adjoint <= 1e-12,
        format!("weight error {weights:.2e} (tol 1e-14), adjointness defect {adjoint:.2e} (tol 1e-12)"),
    );
}

fn translation_consistency(board: &mut Board) {
    let shifts = [-2.0, -1.0, 0.5, 1.5, 2.0];
    let worst = |phis: &[HermiteCoeffs]| {
        let mut w = 0.0f64;
        for phi in phis {
            for &x in &shifts {
                let a = translate_expm(phi, &[x]).unwrap().coeffs;
                let b = translate_quadrature(phi, &[x], 96).unwrap();
                w = w.max(max_diff(&a, &b) / sobolev_norm(phi, 0.0));
            }
        }
        w
    };
    let ensemble = margin_ensemble(1, 24, 5, SEED).unwrap();
    let spread = worst(&ensemble);
    board.record(
        "3a",
        "expm vs quadrature translation, random |k| <= N/2",
        spread <= 1e-8,
        format!("max relative coefficient gap {spread:.2e} (tol 1e-8; d=1, N=24, |x| <= 2, Q=96)"),
    );
    let mut low_content = Vec::new();
    for (i, phi) in ensemble.iter().enumerate() {
        let mut low = HermiteCoeffs::zeros(1, 24).unwrap();
        for k in 0..=1 {
            let v = phi.coeffs()[k + i % 3];
            low.set(&MultiIndex::new(vec![k]).unwrap(), v).unwrap();
        }
        low_content.push(low);
    }
    board.note(format!(
        "same comparison on content |k| <= 1: gap {:.2e}; the truncated generator and the projected exact shift agree only while the shifted mass stays below the shell",
        worst(&low_content)
    ));

    let mut overlap = 0.0f64;
    for x in [0.5, 1.0, 2.0] {
        let t = translate_expm(&e0(1, 48), &[x]).unwrap();
        overlap = overlap.max((t.coeffs.coeffs()[0].re - (-x * x / 4.0).exp()).abs());
    }
    board.record("3b", "Gaussian overlap", overlap <= 1e-6, format!("max error {overlap:.2e} (tol 1e-6; N=48)"));

    let tr = Translator::new(e0(1, 24).basis().clone()).unwrap();
    let mut defect = 0.0f64;
    for x in [0.5, 2.0, 3.4] {
        let u = tr.matrix(&[x]).unwrap();
        let g = u.transpose() * &u;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                defect = defect.max((g[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    board.record("3c", "orthogonality of the translation matrix", defect <= 1e-12, format!("max |U^T U - I| {defect:.2e} (tol 1e-12)"));
}

fn degree_bound(board: &mut Board) {
    let n = 64;
    let envelope = accuracy_envelope(n);
    let radii = log_grid(envelope / 100.0, envelope, 25);
    let dirs = spread_directions(1, 16, SEED);
    let inputs = [e0(1, n), margin_ensemble(1, n, 1, SEED).unwrap().remove(0)];
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [-2.0, -1.0, 1.0, 2.0] {
        let mut worst = f64::NEG_INFINITY;
        let mut k = 0;
        for phi in &inputs {
            let r = norm_bound_scan(phi, p, &radii, &dirs, 0.5).unwrap();
            worst = worst.max(r.fitted_slope);
            k = r.theoretical_degree;
        }
        ok &= worst <= k as f64 + 0.5;
        parts.push(format!("p={p}: {worst:.2} <= {}", k as f64 + 0.5));
    }
    let zero = inputs
        .iter()
        .map(|phi| norm_bound_scan(phi, 0.0, &radii, &dirs, 0.5).unwrap().fitted_slope.abs())
        .fold(0.0, f64::max);
    ok &= zero <= 0.05;
    parts.push(format!("p=0: |slope| {zero:.1e} <= 0.05"));
    board.record("4", "translation degree bound", ok, parts.join(", "));
}

fn heat_identity(board: &mut Board) {
    let phi = e0(1, 48);
    let exact = heat_apply(&phi, 0.5).unwrap();
    let a = mc_expectation(&phi, 0.5, 100_000, SEED).unwrap();
    let b = mc_expectation(&phi, 0.5, 200_000, SEED).unwrap();
    let dist = sobolev_norm(&(&a.mean - &exact), 0.0);
    let se = a.aggregate_se(0.0);
    let ratio = se / b.aggregate_se(0.0);
    let ok = dist <= 3.0 * se && dist <= 0.02 && (ratio / 2f64.sqrt() - 1.0).abs() <= 0.15;
    board.record(
        "5",
        "Monte Carlo heat identity",
        ok,
        format!("||mc - T_t e0||_0 = {dist:.2e} <= 3 SE = {:.2e} and <= 0.02; SE ratio under doubling {ratio:.3} (sqrt2 +- 15%)", 3.0 * se),
    );
}

fn fundamental_solution(board: &mut Board) {
    let n = 64;
    let delta = delta_coeffs(&[0.0], 1, n).unwrap();
    let kernel = project_function(|x: &[f64]| heat_kernel(x, 1.0).unwrap(), 1, n, projection_nodes(n)).unwrap();
    let est = mc_expectation(&delta, 1.0, 100_000, SEED).unwrap();
    let rel = sobolev_norm(&(&est.mean - &kernel), -1.0) / sobolev_norm(&kernel, -1.0);
    board.record("6", "fundamental solution", rel <= 0.02, format!("relative ||.||_-1 error {rel:.2e} (tol 0.02; N=64, M=1e5)"));
}

fn strong_continuity(board: &mut Board) {
    let times = log_grid_per_decade(1e-3, 1e-1, 12);
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [0.0, 1.0] {
        let r = strong_continuity_scan(&e0(1, 32), p, &times, 0.1).unwrap();
        ok &= r.passed;
        parts.push(format!("p={p}: slope {:.4}", r.fitted_slope));
    }
    board.record("7", "strong continuity", ok, format!("{} (1.0 +- 0.1)", parts.join(", ")));
}

fn ito_formula(board: &mut Board) {
    let phi = e0(1, 32);
    let scan = ItoScanConfig { seed: SEED, ..Default::default() };
    let r = ito_convergence(&phi, 0.0, &scan).unwrap();
    let zero = ito_residual(&phi, &BrownianPath::constant(1, 1.0, 256).unwrap(), 0.0, Covariation::Realized, 4).unwrap();
    let zero_max = zero.residuals.iter().copied().fold(0.0, f64::max);
    let m = martingale_check(&phi, 0.5, 10_000, 64, SEED, 0.0).unwrap();
    let ok = r.passed && zero_max == 0.0 && m.mean_within_3se;
    board.record(
        "8",
        "Ito formula",
        ok,
        format!(
            "order {:.3} over {} halvings in [0.3, 0.7], monotone {}; zero-path residual {zero_max:e}; martingale mean {:.2e} <= 3 SE {:.2e}",
            r.fitted_order,
            scan.halvings,
            r.monotone,
            m.mean_norm,
            3.0 * m.aggregate_se
        ),
    );
    board.note(format!("Ito isometry ratio {:.3} (tol 20%)", m.isometry_ratio));
}

fn monotonicity(board: &mut Board) {
    let reports: Vec<_> = [16, 32, 64].iter().map(|&n| monotonicity_scan(-1.0, 50, 1, n, SEED).unwrap()).collect();
    let finest = reports[2].ensemble_max;
    let dev = reports.iter().map(|r| (r.ensemble_max / finest - 1.0).abs()).fold(0.0, f64::max);
    let bounded = reports.iter().all(|r| r.bounded);
    let maxima: Vec<String> = reports.iter().map(|r| format!("{:.2}", r.ensemble_max)).collect();
    board.record(
        "9a",
        "monotonicity ensemble max stable",
        bounded && dev <= 0.1,
        format!("50-draw maxima at N=16,32,64: [{}], deviation from N=64 {dev:.3} (tol 0.1)", maxima.join(", ")),
    );
    let sup = reports[2].exact_sup;
    let sup_dev = reports.iter().map(|r| (r.exact_sup / sup - 1.0).abs()).fold(0.0, f64::max);
    board.record(
        "9b",
        "monotonicity supremum bounded and stable",
        bounded && sup_dev <= 0.1,
        format!("exact supremum over |k| <= N/2 is {sup:.4}, deviation across N {sup_dev:.1e}; every draw lies below it"),
    );
}

fn heat_residual(board: &mut Board) {
    let r = heat_equation_residual(&e0(1, 32), 0.5, 0.0, &[64, 128, 256, 512], heat_apply).unwrap();
    let orders: Vec<f64> = r.refinement.iter().filter_map(|row| row.order).collect();
    let order_ok = orders.iter().all(|o| (o - 2.0).abs() <= 0.2);
    let mut semigroup = 0.0f64;
    for phi in margin_ensemble(1, 64, 5, SEED).unwrap() {
        let two = heat_apply(&heat_apply(&phi, 0.3).unwrap(), 0.45).unwrap();
        semigroup = semigroup.max(sobolev_norm(&(&two - &heat_apply(&phi, 0.75).unwrap()), 0.0));
    }
    let text: Vec<String> = orders.iter().map(|o| format!("{o:.3}")).collect();
    board.record(
        "10",
        "heat-equation residual and semigroup",
        order_ok && semigroup <= 1e-7,
        format!("orders [{}] (2 +- 0.2); ||T_s T_t phi - T_(s+t) phi||_0 {semigroup:.2e} (tol 1e-7; N=64)", text.join(", ")),
    );
}

fn reproducibility(board: &mut Board) {
    let tmp = tempfile::tempdir().unwrap();
    let mut identical = true;
    let cases = [
        (
            Command::Solve,
            RunConfig { method: Method::Mc, m: 20_000, t: Some(0.5), input: "delta@0".into(), n: 48, ..Default::default() },
            vec!["report.json", "coefficients/mc_t0.json", "coefficients/mc_t0.se.json"],
        ),
        (
            Command::Scan(ScanKind::Ito),
            RunConfig {
                ito: ItoSettings { finest_steps: 1 << 10, halvings: 4, paths: 6, ..Default::default() },
                ..Default::default()
            },
            vec!["report.json", "tables/ito.csv"],
        ),
        (Command::Scan(ScanKind::Monotonicity), RunConfig { p: -1.0, n: 16, ..Default::default() }, vec!["report.json"]),
    ];
    for (i, (command, base, files)) in cases.into_iter().enumerate() {
        let first = tmp.path().join(format!("{i}-first"));
        let cfg = RunConfig { seed: Some(SEED), threads: Some(1), out: Some(first.clone()), ..base };
        run_config(command, &cfg).unwrap();
        let mut again = RunConfig::load(&first.join("config.json")).unwrap();
        let second = tmp.path().join(format!("{i}-second"));
        again.out = Some(second.clone());
        again.threads = Some(4);
        run_config(command, &again).unwrap();
        for f in files {
            identical &= fs::read(first.join(f)).unwrap() == fs::read(second.join(f)).unwrap();
        }
    }
    board.record(
        "11",
        "reproducibility",
        identical,
        "solve mc, scan ito and scan monotonicity re-run from the bundled config with 1 and 4 workers: payloads byte-identical".into(),
    );
}

fn main() {
    let mut board = Board { lines: Vec::new() };
    let steps: [(&str, fn(&mut Board)); 11] = [
        ("1", spectral_exactness),
        ("2", ladder_exactness),
        ("3", translation_consistency),
        ("4", degree_bound),
        ("5", heat_identity),
        ("6", fundamental_solution),
        ("7", strong_continuity),
        ("8", ito_formula),
        ("9", monotonicity),
        ("10", heat_residual),
        ("11", reproducibility),
    ];
    for (id, step) in steps {
        let start = Instant::now();
        step(&mut board);
        println!("    ({id}: {:.1}s)", start.elapsed().as_secs_f64());
    }
    let unexpected: Vec<&str> =
        board.lines.iter().filter(|(id, ok)| !ok && !KNOWN_RED.contains(&id.as_str())).map(|(id, _)| id.as_str()).collect();
    let red: Vec<&str> = board.lines.iter().filter(|(_, ok)| !ok).map(|(id, _)| id.as_str()).collect();
    println!("acceptance: {} checks, failing {:?}, known red {:?}", board.lines.len(), red, KNOWN_RED);
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}

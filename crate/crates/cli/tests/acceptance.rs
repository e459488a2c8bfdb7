//! Acceptance suite: every criterion at its stated tolerance, one PASS/FAIL
//! line each. Positional arguments restrict the run to the listed criteria.

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use jcurves::acs::gallery::{Nonintegrable, Profile, Pushforward};
use jcurves::acs::{
    decay_report_shells, levi_form, levi_form_frame, levi_lower_bound, nijenhuis, JacobianMode, SquaredNorm,
    StructureField,
};
use jcurves::cauchy_green::{cauchy_green, dbar_residual, weighted_c0_norm, NormParams, PlaneGrid};
use jcurves::curve::{contraction_estimate, frechet_derivative, linear_map, phi, residual_cr, CoverSettings, LineEvaluator, LineSolver, SolverSettings};
use jcurves::dilation::{dilate, verify_scaled_bounds};
use jcurves::{fd, linalg, sampling, Complex64};
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn sci(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn diagonal() -> Vec<Complex64> {
    let s = 0.5f64.sqrt();
    vec![c(s, 0.0), c(s, 0.0)]
}

fn nonintegrable(lambda: f64) -> StructureField {
    StructureField::new(Nonintegrable::new(2, lambda).unwrap())
}

fn bump(delta: f64) -> Pushforward {
    Pushforward::new(2, delta, Profile::Bump, None).unwrap()
}

fn rational(delta: f64) -> StructureField {
    StructureField::new(Pushforward::new(2, delta, Profile::Rational { s: 0.5 }, None).unwrap())
}

fn solver(j: StructureField, radius: f64, points: usize) -> LineSolver {
    LineSolver::new(j, radius, points, NormParams::default(), SolverSettings::default()).unwrap()
}

fn standard_exactness() -> Verdict {
    let t = Instant::now();
    let s = solver(StructureField::standard(2), 8.0, 129).solve(&diagonal()).unwrap();
    let elapsed = t.elapsed();
    let d = &s.diagnostics;
    verdict(
        d.growth_sup <= 1e-12 && s.iterations().len() == 1 && s.converged() && elapsed < Duration::from_secs(1),
        format!("growth_sup {:.1e}, {} iteration(s), {:.2?}", d.growth_sup, s.iterations().len(), elapsed),
    )
}

fn pompeiu() -> Verdict {
    let t = Instant::now();
    let residuals: Vec<f64> = [65, 129, 257]
        .iter()
        .map(|&n| {
            let g = PlaneGrid::from_fn(4.0, n, 1, |z| vec![c((-z.norm_sqr()).exp(), 0.0)]).unwrap();
            dbar_residual(&cauchy_green(&g), &g).unwrap().max
        })
        .collect();
    let elapsed = t.elapsed();
    let orders: Vec<f64> = residuals.windows(2).map(|w| fd::observed_order(w[0], w[1])).collect();
    let min_order = orders.iter().copied().fold(f64::INFINITY, f64::min);
    verdict(
        min_order >= 1.5 && residuals[2] <= 1e-3 && elapsed < Duration::from_secs(120),
        format!("residuals {}, orders {orders:.2?}, {elapsed:.1?}", sci(&residuals)),
    )
}

fn disc_closed_form() -> Verdict {
    let g = PlaneGrid::from_fn(4.0, 257, 1, |z| vec![c(if z.norm() < 1.0 { 1.0 } else { 0.0 }, 0.0)]).unwrap();
    let h = g.spacing();
    let t = cauchy_green(&g);
    let mut worst = 0.0f64;
    for node in 0..t.node_count() {
        let z = t.zeta_at(node);
        let r = z.norm();
        if (r - 1.0).abs() < 2.0 * h {
            continue;
        }
        let exact = if r < 1.0 { z.conj() } else { 1.0 / z };
        worst = worst.max((t.node(node)[0] - exact).norm());
    }
    verdict(worst <= 5.0 * h, format!("max error {worst:.3e} = {:.2} h", worst / h))
}

fn pushforward_oracle() -> Verdict {
    let t = Instant::now();
    let f = bump(1e-2);
    let j = StructureField::new(f.clone());
    let s = solver(j.clone(), 8.0, 257).solve(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
    let pulled = s.samples.map(|_, v| linalg::to_complex(&f.inverse(&linalg::to_real(v)))).unwrap();
    let pull = dbar_residual(&pulled, &pulled.like(2)).unwrap().max;
    let cr = residual_cr(&j, &s.samples).unwrap();
    let elapsed = t.elapsed();
    verdict(
        pull <= 1e-5 && cr <= 1e-5 && elapsed < Duration::from_secs(600),
        format!("pullback dbar {pull:.2e}, residual_cr {cr:.2e}, {elapsed:.1?}"),
    )
}

fn growth_linearity() -> Verdict {
    let lambdas = [1e-3, 3e-3, 1e-2];
    let growth: Vec<f64> = lambdas
        .iter()
        .map(|&l| solver(nonintegrable(l), 8.0, 65).solve(&diagonal()).unwrap().diagnostics.growth_sup)
        .collect();
    let xs: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = growth.iter().map(|g| g.ln()).collect();
    let mx = xs.iter().sum::<f64>() / 3.0;
    let my = ys.iter().sum::<f64>() / 3.0;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    verdict((0.85..=1.15).contains(&slope), format!("growth_sup {}, slope {slope:.4}", sci(&growth)))
}

fn random_unit(g: &mut impl Rng) -> Vec<Complex64> {
    let raw: Vec<Complex64> = (0..2).map(|_| c(g.random::<f64>() - 0.5, g.random::<f64>() - 0.5)).collect();
    let n = linalg::cnorm(&raw);
    raw.iter().map(|x| x / n).collect()
}

/// `zeta v` plus a sum of Gaussian bumps of weighted size `size`.
fn admissible_map(radius: f64, points: usize, v: &[Complex64], g: &mut impl Rng, size: f64) -> PlaneGrid {
    let bumps: Vec<(Complex64, f64, Vec<Complex64>)> = (0..3)
        .map(|_| {
            let center = c(4.0 * g.random::<f64>() - 2.0, 4.0 * g.random::<f64>() - 2.0);
            let width = 0.5 + g.random::<f64>();
            let coef = (0..2).map(|_| c(g.random::<f64>() - 0.5, g.random::<f64>() - 0.5)).collect();
            (center, width, coef)
        })
        .collect();
    let pert = PlaneGrid::from_fn(radius, points, 2, |z| {
        let mut out = vec![c(0.0, 0.0); 2];
        for (center, width, coef) in &bumps {
            let w = (-(z - center).norm_sqr() / (width * width)).exp();
            for k in 0..2 {
                out[k] += coef[k] * w;
            }
        }
        out
    })
    .unwrap();
    let pert = pert.scale(c(size / weighted_c0_norm(&pert), 0.0));
    linear_map(radius, points, v).unwrap().axpy(c(1.0, 0.0), &pert).unwrap()
}

fn contraction_regime() -> Verdict {
    let mut g = sampling::rng(6);
    let eps0 = NormParams::default().epsilon0;
    let mut worst = 0.0f64;
    let mut worst_halving = 0.0f64;
    for _ in 0..10 {
        let v = random_unit(&mut g);
        let size = eps0 * (0.1 + 0.9 * g.random::<f64>());
        let base = admissible_map(8.0, 65, &v, &mut g, size);
        let size = eps0 * (0.1 + 0.9 * g.random::<f64>());
        let other = admissible_map(8.0, 65, &v, &mut g, size);
        let full = contraction_estimate(&nonintegrable(1e-2), &base, &other).unwrap();
        let half = contraction_estimate(&nonintegrable(5e-3), &base, &other).unwrap();
        worst = worst.max(full);
        worst_halving = worst_halving.max((half / full - 0.5).abs() / 0.5);
    }
    verdict(
        worst <= 0.5 && worst_halving <= 0.2,
        format!("max ratio {worst:.3e}, max relative deviation of halving {worst_halving:.3e}"),
    )
}

fn frechet_consistency() -> Verdict {
    let j = nonintegrable(1e-2);
    let mut g = sampling::rng(7);
    let z = admissible_map(8.0, 65, &diagonal(), &mut g, 0.05);
    let eps = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let v = random_unit(&mut g);
        let dir = admissible_map(8.0, 65, &v, &mut g, 1.0);
        let plus = phi(&j, &z.axpy(c(eps, 0.0), &dir).unwrap()).unwrap();
        let minus = phi(&j, &z.axpy(c(-eps, 0.0), &dir).unwrap()).unwrap();
        let gateaux = plus.sub(&minus).unwrap().scale(c(0.5 / eps, 0.0));
        let formula = frechet_derivative(&j, &z, &dir).unwrap();
        worst = worst.max(gateaux.sub(&formula).unwrap().sup_norm() / formula.sup_norm());
    }
    verdict(worst <= 1e-3, format!("max relative error {worst:.2e} over 5 directions"))
}

/// `max_{a<b} |N(e_a, e_b)|` with derivatives at steps `h` and `h/2`, combined
/// componentwise by Richardson extrapolation.
fn nijenhuis_extrapolated(j: &StructureField, z: &[f64]) -> f64 {
    let h = 1e-2 * (1.0 + linalg::norm(z));
    let coarse = j.clone().with_mode(JacobianMode::FiniteDifference(Some(h)));
    let fine = j.clone().with_mode(JacobianMode::FiniteDifference(Some(0.5 * h)));
    let d = j.dim();
    let mut best = 0.0f64;
    for a in 0..d {
        for b in a + 1..d {
            let mut ea = vec![0.0; d];
            let mut eb = vec![0.0; d];
            ea[a] = 1.0;
            eb[b] = 1.0;
            let nc = nijenhuis(&coarse, z, &ea, &eb).unwrap();
            let nf = nijenhuis(&fine, z, &ea, &eb).unwrap();
            let x: Vec<f64> = nc.iter().zip(&nf).map(|(p, q)| fd::richardson(*p, *q, 4.0)).collect();
            best = best.max(linalg::norm(&x));
        }
    }
    best
}

fn integrability() -> Verdict {
    let lambda = 1e-2;
    // the nonintegrable tensor carries a factor 1 - |z_1|^2, so stay off the unit circle
    let points: Vec<Vec<f64>> = sampling::ball_points(4, 0.2, 1.5, 200, 8)
        .into_iter()
        .filter(|z| (1.0 - (z[0] * z[0] + z[1] * z[1])).abs() >= 0.2)
        .take(20)
        .collect();
    let integrable = [StructureField::standard(2), StructureField::new(bump(lambda)), rational(lambda)];
    let worst_integrable = integrable
        .iter()
        .flat_map(|j| points.iter().map(move |z| nijenhuis_extrapolated(j, z)))
        .fold(0.0, f64::max);
    let ni = nonintegrable(lambda);
    let least_nonintegrable = points.iter().map(|z| nijenhuis_extrapolated(&ni, z)).fold(f64::INFINITY, f64::min);
    verdict(
        points.len() == 20 && worst_integrable <= 1e-6 && least_nonintegrable >= 1e-3 * lambda,
        format!("integrable max {worst_integrable:.2e}, nonintegrable min {least_nonintegrable:.2e} over {} points", points.len()),
    )
}

fn levi_positivity() -> Verdict {
    let samples = sampling::shell_points(4, &sampling::radii_linspace(0.5, 5.0, 10), 100);
    let standard = levi_lower_bound(&StructureField::standard(2), &SquaredNorm, &samples).tau0_estimate;
    let h = 1e-3;
    let dirs = sampling::ball_points(4, 1.0, 1.0, samples.len(), 9);
    let mut tau0 = f64::INFINITY;
    let mut frame_gap = 0.0f64;
    for j in [StructureField::new(bump(1e-2)), rational(1e-2), nonintegrable(1e-2)] {
        tau0 = tau0.min(levi_lower_bound(&j, &SquaredNorm, &samples).tau0_estimate);
        for (p, v) in samples.iter().zip(&dirs) {
            let a = levi_form(&j, &SquaredNorm, p, v);
            let b = levi_form_frame(&j, &SquaredNorm, p, v, h).unwrap();
            frame_gap = frame_gap.max((a - b).abs());
        }
    }
    verdict(
        standard == 1.0 && tau0 >= 0.8 && frame_gap <= 10.0 * h,
        format!("standard tau0 {standard}, gallery tau0 {tau0:.4}, frame gap {frame_gap:.2e} over {} points", samples.len()),
    )
}

fn covering() -> Verdict {
    let t = Instant::now();
    let ev = LineEvaluator::new(solver(nonintegrable(1e-2), 8.0, 65));
    let settings = CoverSettings::default();
    let mut ok = 0;
    let mut worst = 0.0f64;
    for p in sampling::ball_points(4, 1.0, 5.0, 100, 10) {
        if let Ok(r) = ev.cover_point(&linalg::to_complex(&p), &settings) {
            worst = worst.max(r.error);
            if r.error <= 1e-4 {
                ok += 1;
            }
        }
    }
    let elapsed = t.elapsed();
    verdict(
        ok == 100 && elapsed < Duration::from_secs(1800),
        format!("{ok}/100 covered, max error {worst:.1e}, {} lines cached, {elapsed:.1?}", ev.cached_lines()),
    )
}

fn dilation_audits() -> Verdict {
    let j = rational(1e-2);
    let epsilons = [1.0, 0.5, 0.1];
    let mut identity_gap = 0.0f64;
    for &e in &epsilons {
        let d = dilate(&j, e).unwrap().field();
        for z in sampling::ball_points(4, 0.0, 3.0, 50, 11) {
            let ez: Vec<f64> = z.iter().map(|x| e * x).collect();
            identity_gap = identity_gap.max((d.evaluate(&ez) - j.evaluate(&z)).amax());
        }
    }
    let samples = sampling::shell_points(4, &sampling::radii_linspace(0.05, 4.0, 12), 32);
    let mut base = sampling::shell_points(4, &sampling::radii_linspace(0.0, 40.0, 81), 64);
    for &e in &epsilons {
        base.extend(samples.iter().map(|z| z.iter().map(|x| x / e).collect::<Vec<_>>()));
    }
    let profile = decay_report_shells(&j, 2.0, 2, &base);
    let matched: Vec<bool> = epsilons.iter().map(|&e| verify_scaled_bounds(&j, e, &profile, &samples).unwrap().pass).collect();
    let mut low = profile.clone();
    low.lambda *= 0.5;
    let falsified = epsilons
        .iter()
        .map(|&e| verify_scaled_bounds(&j, e, &low, &samples).unwrap().violation_count)
        .collect::<Vec<_>>();
    verdict(
        identity_gap <= 1e-14 && matched.iter().all(|p| *p) && falsified.iter().all(|v| *v > 0),
        format!("identity gap {identity_gap:.1e}, matched {matched:?}, falsified violations {falsified:?}"),
    )
}

fn run_cli(config: &Path, out: &Path, args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_jcurves"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .status()
        .expect("jcurves binary runs")
        .code()
        .unwrap_or(-1)
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("config.toml");
    std::fs::write(
        &config,
        "seed = 3\n[structure]\nfamily = \"nonintegrable\"\nparams = { n = 2, lambda = 0.01 }\n[grid]\nR = 8.0\nN = 129\n[solver]\ntol_residual = 1e-4\n",
    )
    .unwrap();
    let mut codes = Vec::new();
    let mut identical = true;
    for (cmd, file) in [(vec!["check"], "check.json"), (vec!["solve-line", "--v", "0.6,0,0.8,0"], "line.json")] {
        let a = tmp.path().join("a");
        let b = tmp.path().join("b");
        codes.push(run_cli(&config, &a, &cmd));
        codes.push(run_cli(&config, &b, &cmd));
        let read = |d: &Path| std::fs::read(d.join(file)).ok();
        identical &= matches!((read(&a), read(&b)), (Some(x), Some(y)) if x == y);
    }
    verdict(identical && codes.iter().all(|c| *c == 0), format!("exit codes {codes:?}, byte-identical {identical}"))
}

type Criterion = (u32, &'static str, fn() -> Verdict);

const CRITERIA: [Criterion; 12] = [
    (1, "standard-structure exactness", standard_exactness),
    (2, "Pompeiu identity", pompeiu),
    (3, "disc characteristic function", disc_closed_form),
    (4, "pushforward oracle", pushforward_oracle),
    (5, "growth linear in lambda", growth_linearity),
    (6, "contraction regime", contraction_regime),
    (7, "Frechet derivative", frechet_consistency),
    (8, "integrability discrimination", integrability),
    (9, "Levi positivity", levi_positivity),
    (10, "covering", covering),
    (11, "dilation audits", dilation_audits),
    (12, "determinism", determinism),
];

fn main() {
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, check) in CRITERIA {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let v = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {} {name}: {} [{:.1?}]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            t.elapsed()
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}

//! Subcommand implementations. Each returns the process outcome; reports are
//! written before any failure status is returned.

use std::path::PathBuf;

use anyhow::Context;
use jcurves::acs::{
    decay_report, decay_report_shells, levi_lower_bound, nijenhuis_norm, validate_structure, DecayProfile, SquaredNorm,
};
use jcurves::cauchy_green::PlaneGrid;
use jcurves::curve::{
    center_lattice, foliation_check, solve_disc, CoverSettings, CurveSolution, DiscProblem, LineEvaluator, LineSolver,
};
use jcurves::dilation::verify_scaled_bounds;
use jcurves::{linalg, sampling, Complex64, Error};
use serde::Serialize;

use crate::config::{GridFormat, LoadedConfig};
use crate::manifest::Run;

/// Process outcome mapped to the exit-code contract.
#[derive(Debug)]
pub enum Outcome {
    Success,
    NotConverged(String),
    OutOfRegion(String),
    Failed(String),
}

impl Outcome {
    pub fn code(&self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Failed(_) => 1,
            Outcome::NotConverged(_) => 3,
            Outcome::OutOfRegion(_) => 4,
        }
    }
}

pub struct RunContext {
    pub cfg: LoadedConfig,
    pub out: PathBuf,
    pub seed: u64,
    pub strict_norm: bool,
}

impl RunContext {
    fn run(&self, command: &str) -> anyhow::Result<Run> {
        Run::new(self.out.clone(), command, &self.cfg.raw, self.seed, self.strict_norm)
    }

    fn write_grid(&self, run: &mut Run, stem: &str, grid: &PlaneGrid) -> anyhow::Result<()> {
        for f in &self.cfg.config.output.formats {
            let name = match f {
                GridFormat::Csv => format!("{stem}.csv"),
                GridFormat::Bin => format!("{stem}.bin"),
            };
            grid.save(&run.path(&name)).with_context(|| format!("writing {name}"))?;
            run.register(&name);
        }
        Ok(())
    }

    fn line_solver(&self) -> jcurves::Result<LineSolver> {
        let g = &self.cfg.config.grid;
        LineSolver::new(self.cfg.structure.clone(), g.radius, g.points, self.cfg.norms, self.cfg.settings(self.strict_norm))
    }
}

/// A malformed command-line value; reported with the configuration exit code.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn parse_reals(text: &str, what: &str) -> Result<Vec<f64>, UsageError> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| UsageError(format!("{what}: `{s}` is not a real number"))))
        .collect()
}

fn complex_vector(text: &str, n: usize, what: &str) -> Result<Vec<Complex64>, UsageError> {
    let reals = parse_reals(text, what)?;
    if reals.len() != 2 * n {
        return Err(UsageError(format!(
            "{what} needs {} comma-separated reals (re, im per coordinate), got {}",
            2 * n,
            reals.len()
        )));
    }
    Ok(linalg::to_complex(&reals))
}

#[derive(Serialize)]
struct CheckReport {
    family: String,
    params: jcurves::acs::Params,
    lambda: f64,
    theta: f64,
    #[serde(rename = "K")]
    k: usize,
    envelopes: Vec<f64>,
    tau0: f64,
    worst_point: Vec<f64>,
    structure_residual: f64,
    structure_worst_point: Vec<f64>,
    structure_ok: bool,
    theta_p_ok: bool,
    nijenhuis_max: f64,
    nijenhuis_samples: usize,
    pass: bool,
}

/// Sample radius for structure-wide checks.
const CHECK_RADIUS: f64 = 5.0;

pub fn check(ctx: &RunContext) -> anyhow::Result<Outcome> {
    let mut run = ctx.run("check")?;
    let j = &ctx.cfg.structure;
    let d = j.dim();
    let validation = validate_structure(j, &sampling::ball_points(d, 0.0, CHECK_RADIUS, 512, ctx.seed), 1e-10);
    run.mark("validate");
    let nij_points = sampling::ball_points(d, 0.0, CHECK_RADIUS, 64, ctx.seed ^ 0x9e37);
    let mut nijenhuis_max = 0.0f64;
    for z in &nij_points {
        nijenhuis_max = nijenhuis_max.max(nijenhuis_norm(j, z)?);
    }
    run.mark("nijenhuis");
    let theta = ctx.cfg.norms.theta;
    let profile = decay_report(j, theta, 2, &sampling::radii_linspace(0.0, 4.0 * CHECK_RADIUS, 41), 64);
    run.mark("decay");
    let levi = levi_lower_bound(j, &SquaredNorm, &sampling::shell_points(d, &sampling::radii_linspace(0.5, CHECK_RADIUS, 10), 100));
    run.mark("levi");
    let desc = j.descriptor();
    let theta_p_ok = theta * ctx.cfg.norms.p > 2.0;
    let report = CheckReport {
        family: desc.family,
        params: desc.params,
        lambda: profile.lambda,
        theta,
        k: profile.k,
        envelopes: profile.envelopes,
        tau0: levi.tau0_estimate,
        worst_point: levi.worst_point,
        structure_residual: validation.max_residual,
        structure_worst_point: validation.worst_point,
        structure_ok: validation.pass,
        theta_p_ok,
        nijenhuis_max,
        nijenhuis_samples: nij_points.len(),
        pass: validation.pass && theta_p_ok,
    };
    run.write_json("check.json", &report)?;
    let pass = report.pass;
    run.finish()?;
    Ok(if pass { Outcome::Success } else { Outcome::Failed("structure check failed: J^2 != -I".into()) })
}

fn solution_outcome(sol: &CurveSolution, what: &str) -> Outcome {
    if sol.converged() {
        Outcome::Success
    } else {
        Outcome::NotConverged(format!(
            "{what} did not converge (last step {:.3e}, residual_cr {:.3e})",
            sol.iterations().last().map(|r| r.step).unwrap_or(f64::NAN),
            sol.diagnostics.residual_cr
        ))
    }
}

/// Writes the iteration log of a non-contracting run and converts the error.
fn solver_failure(run: &mut Run, name: &str, e: Error) -> anyhow::Result<Outcome> {
    if let Error::NotContracting { log, .. } = &e {
        run.write_json(name, log)?;
        return Ok(Outcome::NotConverged(format!("{e}; iteration log in {}", run.path(name).display())));
    }
    Err(e.into())
}

pub fn solve_line(ctx: &RunContext, v: Option<&str>) -> anyhow::Result<Outcome> {
    let mut run = ctx.run("solve-line")?;
    let n = ctx.cfg.structure.n();
    let v = match v {
        Some(t) => complex_vector(t, n, "--v")?,
        None => {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[0] = Complex64::new(1.0, 0.0);
            e
        }
    };
    let solver = ctx.line_solver()?;
    run.mark("setup");
    let sol = match solver.solve(&v) {
        Ok(s) => s,
        Err(e) => {
            let out = solver_failure(&mut run, "line_log.json", e)?;
            run.finish()?;
            return Ok(out);
        }
    };
    run.mark("solve");
    run.write_json("line.json", &sol.diagnostics)?;
    ctx.write_grid(&mut run, "line", &sol.samples)?;
    run.finish()?;
    Ok(solution_outcome(&sol, "line"))
}

pub fn solve_disc_cmd(ctx: &RunContext, a: Option<&str>) -> anyhow::Result<Outcome> {
    let mut run = ctx.run("solve-disc")?;
    let n = ctx.cfg.structure.n();
    let center = match a {
        Some(t) => complex_vector(t, n - 1, "--a")?,
        None => vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)],
    };
    let problem = DiscProblem {
        j: ctx.cfg.structure.clone(),
        center,
        points: ctx.cfg.config.grid.points,
        norms: ctx.cfg.norms,
        settings: ctx.cfg.settings(ctx.strict_norm),
    };
    let sol = match solve_disc(&problem) {
        Ok(s) => s,
        Err(e @ Error::NotContracting { .. }) => {
            let out = solver_failure(&mut run, "disc_log.json", e)?;
            run.finish()?;
            return Ok(out);
        }
        Err(e) => return Err(e.into()),
    };
    run.mark("solve");
    run.write_json("disc.json", &sol.diagnostics)?;
    ctx.write_grid(&mut run, "disc", &sol.samples)?;
    run.finish()?;
    Ok(solution_outcome(&sol, "disc"))
}

/// Cover succeeds when the target is reached to this accuracy.
const COVER_ACCEPT: f64 = 1e-4;

pub fn cover(ctx: &RunContext, p: &str) -> anyhow::Result<Outcome> {
    let mut run = ctx.run("cover")?;
    let n = ctx.cfg.structure.n();
    let target = complex_vector(p, n, "--p")?;
    let ev = LineEvaluator::new(ctx.line_solver()?);
    run.mark("setup");
    let res = match ev.cover_point(&target, &CoverSettings::default()) {
        Ok(r) => r,
        Err(e @ Error::OutOfRegion { .. }) => {
            run.finish()?;
            return Ok(Outcome::OutOfRegion(e.to_string()));
        }
        Err(e @ Error::NotContracting { .. }) => {
            let out = solver_failure(&mut run, "cover_log.json", e)?;
            run.finish()?;
            return Ok(out);
        }
        Err(e) => return Err(e.into()),
    };
    run.mark("cover");
    run.write_json("cover.json", &res)?;
    run.finish()?;
    Ok(if res.error <= COVER_ACCEPT {
        Outcome::Success
    } else {
        Outcome::NotConverged(format!("cover reached error {:.3e} > {COVER_ACCEPT:e}", res.error))
    })
}

pub fn foliate(ctx: &RunContext, lattice: usize, spread: f64) -> anyhow::Result<Outcome> {
    let mut run = ctx.run("foliate")?;
    if ctx.cfg.structure.n() != 2 {
        return Err(UsageError("foliate uses a planar center lattice and needs n = 2".into()).into());
    }
    let centers = center_lattice(lattice, spread);
    let mut zetas = vec![Complex64::new(0.0, 0.0)];
    for r in [0.5, 1.0, 1.5] {
        for k in 0..8 {
            zetas.push(Complex64::from_polar(r, std::f64::consts::PI * k as f64 / 4.0));
        }
    }
    let report = match foliation_check(
        &ctx.cfg.structure,
        &centers,
        &zetas,
        ctx.cfg.config.grid.points,
        &ctx.cfg.norms,
        &ctx.cfg.settings(ctx.strict_norm),
    ) {
        Ok(r) => r,
        Err(e @ Error::InsufficientCenters(_)) => return Err(e.into()),
        Err(e) => {
            run.finish()?;
            return Ok(Outcome::NotConverged(e.to_string()));
        }
    };
    run.mark("foliate");
    run.write_json("foliate.json", &report)?;
    run.finish()?;
    Ok(if report.all_converged { Outcome::Success } else { Outcome::NotConverged("some discs did not converge".into()) })
}

#[derive(Serialize)]
struct DilateScan {
    profile: DecayProfile,
    audits: Vec<jcurves::dilation::ScaledBoundsAudit>,
    pass: bool,
}

pub fn dilate_scan(ctx: &RunContext, epsilons: &str) -> anyhow::Result<Outcome> {
    let mut run = ctx.run("dilate-scan")?;
    let eps = parse_reals(epsilons, "--epsilons")?;
    let j = &ctx.cfg.structure;
    let d = j.dim();
    let samples = sampling::shell_points(d, &sampling::radii_linspace(0.05, 4.0, 12), 32);
    // The profile must dominate at every base point an audit touches, namely z / epsilon.
    let mut base = sampling::shell_points(d, &sampling::radii_linspace(0.0, 40.0, 81), 64);
    for e in &eps {
        if !(*e > 0.0 && *e <= 1.0) {
            return Err(UsageError(format!("--epsilons: dilation factors must lie in (0, 1], got {e}")).into());
        }
        base.extend(samples.iter().map(|z| z.iter().map(|x| x / e).collect::<Vec<_>>()));
    }
    let profile = decay_report_shells(j, ctx.cfg.norms.theta, 2, &base);
    run.mark("profile");
    let audits = eps
        .iter()
        .map(|e| verify_scaled_bounds(j, *e, &profile, &samples))
        .collect::<jcurves::Result<Vec<_>>>()?;
    run.mark("audits");
    let pass = audits.iter().all(|a| a.pass);
    run.write_json("dilate_scan.json", &DilateScan { profile, audits, pass })?;
    run.finish()?;
    Ok(if pass { Outcome::Success } else { Outcome::Failed("scaled-bound audit reported violations".into()) })
}

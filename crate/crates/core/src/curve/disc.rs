use num_complex::Complex64;
use serde::Serialize;

use super::line::{admissibility_lambda, Finish, FixedPoint};
use super::{CurveKind, CurveSolution, SolverSettings};
use crate::acs::StructureField;
use crate::cauchy_green::{CauchyKernel, NormParams, PlaneGrid};
use crate::linalg::cnorm;
use crate::{Error, Result};

/// Radius of the parameter disc; the grid is the square `[-2, 2]^2`.
pub const DISC_RADIUS: f64 = 2.0;

/// A J-holomorphic disc through `(a, 0)` tangent to the last coordinate axis.
#[derive(Clone, Debug)]
pub struct DiscProblem {
    pub j: StructureField,
    /// Center `a` in `C^(n-1)`, `|a| <= 1`.
    pub center: Vec<Complex64>,
    /// Odd, so that `zeta = 0` is a node.
    pub points: usize,
    pub norms: NormParams,
    pub settings: SolverSettings,
}

fn validate(j: &StructureField, center: &[Complex64], points: usize) -> Result<()> {
    if j.n() < 2 {
        return Err(Error::InvalidParameter("discs need n >= 2".into()));
    }
    if center.len() != j.n() - 1 {
        return Err(Error::DimensionMismatch { expected: j.n() - 1, got: center.len() });
    }
    if cnorm(center) > 1.0 {
        return Err(Error::InvalidParameter(format!("disc center must satisfy |a| <= 1, got {}", cnorm(center))));
    }
    if points.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("disc grid needs odd N, got {points}")));
    }
    Ok(())
}

fn reference(center: &[Complex64], points: usize) -> Result<PlaneGrid> {
    PlaneGrid::from_fn(DISC_RADIUS, points, center.len() + 1, |z| {
        let mut v = center.to_vec();
        v.push(z);
        v
    })
}

fn solve_with(
    kernel: &CauchyKernel,
    j: &StructureField,
    center: &[Complex64],
    points: usize,
    norms: &NormParams,
    settings: &SolverSettings,
    lambda: Option<f64>,
) -> Result<CurveSolution> {
    validate(j, center, points)?;
    let reference = reference(center, points)?;
    let mid = (points - 1) / 2;
    let fp = FixedPoint {
        kernel,
        j,
        reference: &reference,
        mask: Some(DISC_RADIUS),
        pin: Some(reference.index(mid, mid)),
        settings,
        norms,
    };
    let out = fp.run(reference.clone())?;
    Finish {
        kind: CurveKind::Disc,
        anchor: center.to_vec(),
        j,
        reference: &reference,
        mask: Some(DISC_RADIUS),
        settings,
        norms,
        lambda,
    }
    .build(out)
}

fn lambda_for(j: &StructureField, norms: &NormParams, settings: &SolverSettings) -> Option<f64> {
    settings.admissibility_lambda.map(|threshold| {
        let l = admissibility_lambda(j, DISC_RADIUS, norms.theta);
        if l > threshold {
            log::warn!("measured decay amplitude {l:.3e} exceeds admissibility threshold {threshold:.3e}; attempting anyway");
        }
        l
    })
}

/// Fixed point of `z -> N^a + T_D g(z) - [T_D g(z)](0)` with `N^a(zeta) = (a, zeta)`,
/// where `T_D` integrates over `|zeta| <= 2` only; `z(0) = (a, 0)` exactly.
pub fn solve_disc(problem: &DiscProblem) -> Result<CurveSolution> {
    validate(&problem.j, &problem.center, problem.points)?;
    let probe = PlaneGrid::zeros(DISC_RADIUS, problem.points, problem.j.n())?;
    let kernel = CauchyKernel::for_grid(&probe);
    let lambda = lambda_for(&problem.j, &problem.norms, &problem.settings);
    solve_with(&kernel, &problem.j, &problem.center, problem.points, &problem.norms, &problem.settings, lambda)
}

#[derive(Clone, Debug, Serialize)]
pub struct FoliationReport {
    /// `min |N^a(zeta) - N^b(zeta)| / |a - b|` over center pairs and samples.
    pub min_ratio: f64,
    pub worst_pair: (Vec<Complex64>, Vec<Complex64>),
    pub worst_zeta: Complex64,
    pub centers: usize,
    pub samples: usize,
    pub all_converged: bool,
    /// Largest `sup |N^a_J - N^a|` over the lattice.
    pub max_deviation: f64,
}

/// Solves discs over the center lattice and measures how close distinct discs come.
pub fn foliation_check(
    j: &StructureField,
    centers: &[Vec<Complex64>],
    zetas: &[Complex64],
    points: usize,
    norms: &NormParams,
    settings: &SolverSettings,
) -> Result<FoliationReport> {
    if centers.len() < 2 {
        return Err(Error::InsufficientCenters(centers.len()));
    }
    if zetas.is_empty() {
        return Err(Error::InvalidParameter("foliation check needs at least one zeta sample".into()));
    }
    let probe = PlaneGrid::zeros(DISC_RADIUS, points, j.n())?;
    let kernel = CauchyKernel::for_grid(&probe);
    let lambda = lambda_for(j, norms, settings);
    let mut images = Vec::with_capacity(centers.len());
    let mut all_converged = true;
    let mut max_deviation = 0.0f64;
    for a in centers {
        let sol = solve_with(&kernel, j, a, points, norms, settings, lambda).map_err(|e| Error::DiscFailed {
            center: crate::linalg::to_real(a),
            source: Box::new(e),
        })?;
        all_converged &= sol.converged();
        max_deviation = max_deviation.max(sol.diagnostics.growth_sup);
        images.push(zetas.iter().map(|z| sol.evaluate_at(*z)).collect::<Vec<_>>());
    }
    let mut best = (f64::INFINITY, 0, 0, 0);
    for p in 0..centers.len() {
        for q in p + 1..centers.len() {
            let da: Vec<Complex64> = centers[p].iter().zip(&centers[q]).map(|(x, y)| x - y).collect();
            let sep = cnorm(&da);
            if sep == 0.0 {
                return Err(Error::InvalidParameter("duplicate disc centers".into()));
            }
            for s in 0..zetas.len() {
                let d: Vec<Complex64> = images[p][s].iter().zip(&images[q][s]).map(|(x, y)| x - y).collect();
                let ratio = cnorm(&d) / sep;
                if ratio < best.0 {
                    best = (ratio, p, q, s);
                }
            }
        }
    }
    Ok(FoliationReport {
        min_ratio: best.0,
        worst_pair: (centers[best.1].clone(), centers[best.2].clone()),
        worst_zeta: zetas[best.3],
        centers: centers.len(),
        samples: zetas.len(),
        all_converged,
        max_deviation,
    })
}

/// `k x k` lattice of centers in `[-s, s]^2` (for `n = 2`).
pub fn center_lattice(k: usize, s: f64) -> Vec<Vec<Complex64>> {
    let coord = |i: usize| if k == 1 { 0.0 } else { -s + 2.0 * s * i as f64 / (k - 1) as f64 };
    (0..k * k).map(|i| vec![Complex64::new(coord(i % k), coord(i / k))]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acs::gallery::{Profile, Pushforward};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn settings() -> SolverSettings {
        SolverSettings { admissibility_lambda: None, tol_residual: 1e-3, ..SolverSettings::default() }
    }

    fn bump(delta: f64) -> StructureField {
        StructureField::new(Pushforward::new(2, delta, Profile::Bump, None).unwrap())
    }

    fn problem(j: StructureField, a: Complex64) -> DiscProblem {
        DiscProblem { j, center: vec![a], points: 33, norms: NormParams::default(), settings: settings() }
    }

    #[test]
    fn standard_disc_is_exact() {
        let s = solve_disc(&problem(StructureField::standard(2), c(0.3, -0.2))).unwrap();
        assert!(s.converged());
        for node in 0..s.samples.node_count() {
            assert_eq!(s.samples.node(node), &[c(0.3, -0.2), s.samples.zeta_at(node)]);
        }
    }

    #[test]
    fn center_is_pinned_exactly() {
        let a = c(0.25, 0.1);
        let s = solve_disc(&problem(bump(1e-2), a)).unwrap();
        let mid = s.samples.index(16, 16);
        assert_eq!(s.samples.node(mid), &[a, c(0.0, 0.0)]);
        assert!(s.evaluate_at(c(0.0, 0.0))[1].norm() < 1e-15);
    }

    #[test]
    fn deviation_is_linear_in_lambda() {
        let d: Vec<f64> = [1e-2, 5e-3]
            .iter()
            .map(|&l| solve_disc(&problem(bump(l), c(0.0, 0.0))).unwrap().diagnostics.growth_sup)
            .collect();
        assert!(d[0] <= 20.0 * 1e-2, "{d:?}");
        assert!((d[0] / d[1] - 2.0).abs() <= 0.3, "{d:?}");
    }

    #[test]
    fn rejects_bad_input() {
        let mut p = problem(StructureField::standard(2), c(1.5, 0.0));
        assert!(solve_disc(&p).is_err());
        p.center = vec![c(0.0, 0.0)];
        p.points = 32;
        assert!(solve_disc(&p).is_err());
        let e = foliation_check(&StructureField::standard(2), &[vec![c(0.0, 0.0)]], &[c(0.0, 0.0)], 33, &NormParams::default(), &settings());
        assert!(matches!(e, Err(Error::InsufficientCenters(1))));
    }

    #[test]
    fn standard_foliation_ratio_is_one() {
        let zetas = [c(0.0, 0.0), c(1.0, 0.5), c(-1.2, 1.1)];
        let r = foliation_check(&StructureField::standard(2), &center_lattice(3, 0.5), &zetas, 17, &NormParams::default(), &settings()).unwrap();
        assert_eq!(r.min_ratio, 1.0);
    }
}

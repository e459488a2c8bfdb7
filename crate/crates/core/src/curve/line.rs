use std::sync::Arc;

use num_complex::Complex64;

use super::{
    beltrami_source, check_unit, linear_map, residual_masked, CurveKind, CurveSolution, IterationRecord, SolutionDiagnostics,
    SolverSettings,
};
use crate::acs::{decay_report, StructureField};
use crate::cauchy_green::{holder_norms_seeded, weighted_c0_norm, CauchyKernel, NormParams, PlaneGrid};
use crate::{linalg, sampling, Error, Result};

/// A J-holomorphic line through the origin asymptotic to `zeta v`.
#[derive(Clone, Debug)]
pub struct LineProblem {
    pub j: StructureField,
    pub v: Vec<Complex64>,
    pub radius: f64,
    pub points: usize,
    pub norms: NormParams,
    pub settings: SolverSettings,
}

impl LineProblem {
    pub fn new(
        j: StructureField,
        v: Vec<Complex64>,
        radius: f64,
        points: usize,
        norms: NormParams,
        settings: SolverSettings,
    ) -> Result<Self> {
        if v.len() != j.n() {
            return Err(Error::DimensionMismatch { expected: j.n(), got: v.len() });
        }
        check_unit(&v)?;
        Ok(Self { j, v, radius, points, norms, settings })
    }
}

/// Measured decay amplitude on a coarse shell set covering the grid.
pub(crate) fn admissibility_lambda(j: &StructureField, radius: f64, theta: f64) -> f64 {
    if j.is_standard() {
        return 0.0;
    }
    let radii = sampling::radii_linspace(0.0, radius, 9);
    decay_report(j, theta, 2, &radii, 32).lambda
}

/// Everything a Picard run needs besides the starting map.
pub(crate) struct FixedPoint<'a> {
    pub kernel: &'a CauchyKernel,
    pub j: &'a StructureField,
    pub reference: &'a PlaneGrid,
    pub mask: Option<f64>,
    pub pin: Option<usize>,
    pub settings: &'a SolverSettings,
    pub norms: &'a NormParams,
}

pub(crate) struct FixedPointOutcome {
    pub z: PlaneGrid,
    pub source: PlaneGrid,
    pub offset: Vec<Complex64>,
    pub log: Vec<IterationRecord>,
}

impl FixedPoint<'_> {
    /// `z_{k+1} = reference + T g(z_k)`, with `g = mu(z) conj(z_zeta)`, from `z0`.
    pub fn run(&self, z0: PlaneGrid) -> Result<FixedPointOutcome> {
        let comps = self.reference.components();
        let mut z = z0;
        let mut log: Vec<IterationRecord> = Vec::new();
        let mut source = z.like(comps);
        let mut offset = vec![Complex64::new(0.0, 0.0); comps];
        for iteration in 1..=self.settings.max_iter.max(1) {
            let (dz, _) = z.wirtinger();
            let g = beltrami_source(self.j, &z, &dz, self.mask)?;
            let mut t = if self.j.is_standard() { z.like(comps) } else { self.kernel.apply(&g) };
            let mut pin = vec![Complex64::new(0.0, 0.0); comps];
            if let Some(center) = self.pin {
                pin = t.node(center).to_vec();
                for node in 0..t.node_count() {
                    for (x, p) in t.node_mut(node).iter_mut().zip(&pin) {
                        *x -= p;
                    }
                }
            }
            let next = self.reference.axpy(Complex64::new(1.0, 0.0), &t)?;
            let step = weighted_c0_norm(&next.sub(&z)?);
            let ratio = log.last().and_then(|r| (r.step > 0.0).then(|| step / r.step));
            let holder_distance = self
                .settings
                .strict_norm
                .then(|| next.sub(self.reference).map(|d| holder_norms_seeded(&d, self.norms, self.settings.pair_seed).combined))
                .transpose()?;
            log.push(IterationRecord { iteration, step, ratio, holder_distance });
            log::debug!("iteration {iteration}: step {step:.3e} ratio {ratio:?}");
            z = next;
            source = g;
            offset = pin;
            if !step.is_finite() {
                return Err(Error::NotContracting { iteration, ratio: f64::INFINITY, log });
            }
            if step <= self.settings.tol_fixed_point {
                break;
            }
            if let (Some(r), Some(prev)) = (ratio, log.len().checked_sub(2).map(|i| log[i].step)) {
                if r >= 1.0 && prev > 1e-12 {
                    return Err(Error::NotContracting { iteration, ratio: r, log });
                }
            }
        }
        Ok(FixedPointOutcome { z, source, offset, log })
    }
}

pub(crate) struct Finish<'a> {
    pub kind: CurveKind,
    pub anchor: Vec<Complex64>,
    pub j: &'a StructureField,
    pub reference: &'a PlaneGrid,
    pub mask: Option<f64>,
    pub settings: &'a SolverSettings,
    pub norms: &'a NormParams,
    pub lambda: Option<f64>,
}

impl Finish<'_> {
    pub fn build(self, out: FixedPointOutcome) -> Result<CurveSolution> {
        let z = out.z;
        let residual_cr = residual_masked(self.j, &z, self.mask)?;
        let mut diff = z.sub(self.reference)?;
        if let Some(r) = self.mask {
            for node in 0..diff.node_count() {
                if diff.zeta_at(node).norm() > r {
                    diff.node_mut(node).iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
                }
            }
        }
        let growth_sup = diff.sup_norm();
        let distance_weighted = weighted_c0_norm(&diff);
        let last_step = out.log.last().map(|r| r.step).unwrap_or(f64::INFINITY);
        let fixed_point_converged = last_step <= self.settings.tol_fixed_point;
        let converged = fixed_point_converged && residual_cr <= self.settings.tol_residual;
        let holder = self.settings.strict_norm.then(|| holder_norms_seeded(&diff, self.norms, self.settings.pair_seed));
        let radius = z.radius();
        let diagnostics = SolutionDiagnostics {
            kind: self.kind,
            anchor: self.anchor.clone(),
            radius,
            points: z.points(),
            iterations: out.log,
            residual_cr,
            growth_sup,
            distance_weighted,
            within_epsilon0: distance_weighted <= self.norms.epsilon0,
            fixed_point_converged,
            converged,
            lambda_estimate: self.lambda,
            admissible: self.lambda.zip(self.settings.admissibility_lambda).map(|(l, t)| l <= t),
            truncation_bound: self.lambda.map(|l| l * radius.powf(1.0 - self.norms.theta)),
            holder,
        };
        if !converged {
            log::warn!("{:?} solve did not converge: step {last_step:.3e}, residual {residual_cr:.3e}", self.kind);
        }
        Ok(CurveSolution { kind: self.kind, anchor: self.anchor, samples: z, source: out.source, offset: out.offset, diagnostics })
    }
}

/// Line solver bound to one structure and grid; reuses the kernel across directions.
#[derive(Clone, Debug)]
pub struct LineSolver {
    j: StructureField,
    radius: f64,
    points: usize,
    norms: NormParams,
    settings: SolverSettings,
    kernel: Arc<CauchyKernel>,
    lambda: Option<f64>,
}

impl LineSolver {
    pub fn new(j: StructureField, radius: f64, points: usize, norms: NormParams, settings: SolverSettings) -> Result<Self> {
        let probe = PlaneGrid::zeros(radius, points, j.n())?;
        let lambda = settings.admissibility_lambda.map(|threshold| {
            let l = admissibility_lambda(&j, radius, norms.theta);
            if l > threshold {
                log::warn!("measured decay amplitude {l:.3e} exceeds admissibility threshold {threshold:.3e}; attempting anyway");
            }
            l
        });
        Ok(Self { kernel: Arc::new(CauchyKernel::for_grid(&probe)), j, radius, points, norms, settings, lambda })
    }

    pub fn for_problem(problem: &LineProblem) -> Result<Self> {
        Self::new(problem.j.clone(), problem.radius, problem.points, problem.norms, problem.settings.clone())
    }

    pub fn structure(&self) -> &StructureField {
        &self.j
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn settings(&self) -> &SolverSettings {
        &self.settings
    }

    pub fn lambda_estimate(&self) -> Option<f64> {
        self.lambda
    }

    /// Solve from `z0 = L^v`.
    pub fn solve(&self, v: &[Complex64]) -> Result<CurveSolution> {
        self.solve_from(v, None)
    }

    /// Solve from a given starting map (warm start).
    pub fn solve_from(&self, v: &[Complex64], initial: Option<&PlaneGrid>) -> Result<CurveSolution> {
        if v.len() != self.j.n() {
            return Err(Error::DimensionMismatch { expected: self.j.n(), got: v.len() });
        }
        check_unit(v)?;
        let reference = linear_map(self.radius, self.points, v)?;
        let z0 = match initial {
            Some(g) => {
                g.same_shape(&reference)?;
                g.clone()
            }
            None => reference.clone(),
        };
        let fp = FixedPoint {
            kernel: &self.kernel,
            j: &self.j,
            reference: &reference,
            mask: None,
            pin: None,
            settings: &self.settings,
            norms: &self.norms,
        };
        let out = fp.run(z0)?;
        Finish {
            kind: CurveKind::Line,
            anchor: v.to_vec(),
            j: &self.j,
            reference: &reference,
            mask: None,
            settings: &self.settings,
            norms: &self.norms,
            lambda: self.lambda,
        }
        .build(out)
    }
}

/// Picard iteration for `z = L^v + T(mu(z) conj(z_zeta))` from `z0 = L^v`.
pub fn solve_line(problem: &LineProblem) -> Result<CurveSolution> {
    LineSolver::for_problem(problem)?.solve(&problem.v)
}

/// Unit vector `v / |v|` in `C^n`.
pub fn normalized(v: &[Complex64]) -> Vec<Complex64> {
    let n = linalg::cnorm(v);
    v.iter().map(|c| c / n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acs::gallery::{Profile, Pushforward};
    use crate::curve::residual_cr;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn settings() -> SolverSettings {
        SolverSettings { admissibility_lambda: None, ..SolverSettings::default() }
    }

    #[test]
    fn standard_line_is_exact_in_one_iteration() {
        let v = vec![c(0.6, 0.0), c(0.0, 0.8)];
        let p = LineProblem::new(StructureField::standard(2), v.clone(), 4.0, 33, NormParams::default(), settings()).unwrap();
        let s = solve_line(&p).unwrap();
        assert!(s.converged());
        assert_eq!(s.iterations().len(), 1);
        assert_eq!(s.samples, linear_map(4.0, 33, &v).unwrap());
        assert_eq!(s.diagnostics.growth_sup, 0.0);
    }

    #[test]
    fn standard_lines_are_rotation_equivariant() {
        let solver = LineSolver::new(StructureField::standard(2), 4.0, 17, NormParams::default(), settings()).unwrap();
        let e1 = solver.solve(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let v = [c(0.0, 0.6), c(-0.8, 0.0)];
        let sv = solver.solve(&v).unwrap();
        for node in 0..e1.samples.node_count() {
            let w = e1.samples.node(node)[0];
            assert_eq!(sv.samples.node(node), &[w * v[0], w * v[1]]);
        }
    }

    #[test]
    fn rejects_non_unit_direction() {
        let r = LineProblem::new(StructureField::standard(2), vec![c(1.0, 0.0), c(1.0, 0.0)], 4.0, 17, NormParams::default(), settings());
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn gallery_line_converges_and_is_consistent() {
        let j = StructureField::new(Pushforward::new(2, 1e-2, Profile::Bump, None).unwrap());
        let v = vec![c(1.0, 0.0), c(0.0, 0.0)];
        let p = LineProblem::new(j.clone(), v.clone(), 6.0, 49, NormParams::default(), SolverSettings { tol_residual: 1e-3, ..settings() }).unwrap();
        let s = solve_line(&p).unwrap();
        assert!(s.converged(), "{:?}", s.diagnostics);
        assert!(s.diagnostics.growth_sup > 0.0 && s.diagnostics.growth_sup < 0.1);
        // fixed-point consistency: one more application moves the map by at most 2 tol
        let reference = linear_map(6.0, 49, &v).unwrap();
        let (dz, _) = s.samples.wirtinger();
        let g = beltrami_source(&j, &s.samples, &dz, None).unwrap();
        let again = reference.axpy(c(1.0, 0.0), &crate::cauchy_green::cauchy_green(&g)).unwrap();
        assert!(weighted_c0_norm(&again.sub(&s.samples).unwrap()) <= 2.0 * p.settings.tol_fixed_point);
        assert_eq!(residual_cr(&j, &s.samples).unwrap(), s.diagnostics.residual_cr);
        // steps decay geometrically
        for r in s.iterations().iter().skip(2).filter_map(|r| r.ratio) {
            assert!(r < 0.5, "{r}");
        }
    }

    #[test]
    fn off_grid_evaluation_matches_nodes() {
        let j = StructureField::new(Pushforward::new(2, 1e-2, Profile::Bump, None).unwrap());
        let solver = LineSolver::new(j, 4.0, 33, NormParams::default(), settings()).unwrap();
        let s = solver.solve(&[c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        for node in [0, 100, 544, 1000] {
            let a = s.evaluate_at(s.samples.zeta_at(node));
            let b = s.samples.node(node);
            assert!(linalg::cnorm(&[a[0] - b[0], a[1] - b[1]]) < 1e-13);
        }
    }

    #[test]
    fn max_iter_exhaustion_returns_unconverged_solution() {
        let j = StructureField::new(Pushforward::new(2, 1e-2, Profile::Bump, None).unwrap());
        let st = SolverSettings { max_iter: 2, ..settings() };
        let s = LineSolver::new(j, 4.0, 17, NormParams::default(), st).unwrap().solve(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(!s.converged());
        assert_eq!(s.iterations().len(), 2);
    }

    #[test]
    fn strict_mode_records_holder_distance() {
        let j = StructureField::new(Pushforward::new(2, 1e-2, Profile::Bump, None).unwrap());
        let st = SolverSettings { strict_norm: true, max_iter: 3, ..settings() };
        let s = LineSolver::new(j, 4.0, 17, NormParams::default(), st).unwrap().solve(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(s.iterations().iter().all(|r| r.holder_distance.is_some()));
        assert!(s.diagnostics.holder.is_some());
    }

    #[test]
    fn admissibility_is_reported() {
        let j = StructureField::new(Pushforward::new(2, 1e-2, Profile::Bump, None).unwrap());
        let s = LineSolver::new(j, 4.0, 17, NormParams::default(), SolverSettings::default()).unwrap();
        let l = s.lambda_estimate().unwrap();
        assert!(l > 0.0 && l < 0.05);
    }
}

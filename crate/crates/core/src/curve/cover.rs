use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::line::normalized;
use super::{linear_map, CurveSolution, LineSolver};
use crate::linalg::{self, cnorm};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverSettings {
    /// Target `|L_J^v(zeta) - p|`.
    pub tol: f64,
    pub max_steps: usize,
    /// Step along sphere tangents for the direction columns.
    pub fd_direction: f64,
    /// Step in `zeta` for the parameter columns.
    pub fd_zeta: f64,
    /// Scale of direction columns; smaller values make the minimum-norm step prefer `zeta`.
    pub direction_weight: f64,
}

impl Default for CoverSettings {
    fn default() -> Self {
        Self { tol: 1e-8, max_steps: 30, fd_direction: 1e-6, fd_zeta: 1e-5, direction_weight: 0.1 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverResult {
    pub target: Vec<Complex64>,
    pub v: Vec<Complex64>,
    pub zeta: Complex64,
    pub achieved: Vec<Complex64>,
    pub error: f64,
    pub steps: usize,
    /// `error <= tol` with the final line at its fixed point.
    pub converged: bool,
    /// CR residual of the final line (a discretization diagnostic).
    pub line_residual_cr: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

type Key = Vec<u64>;

fn key(v: &[Complex64]) -> Key {
    v.iter().flat_map(|c| [c.re.to_bits(), c.im.to_bits()]).collect()
}

/// Evaluation map `(zeta, v) -> L_J^v(zeta)` with a per-direction solution cache.
#[derive(Debug)]
pub struct LineEvaluator {
    solver: LineSolver,
    cache: RwLock<HashMap<Key, Arc<CurveSolution>>>,
}

impl LineEvaluator {
    pub fn new(solver: LineSolver) -> Self {
        Self { solver, cache: RwLock::new(HashMap::new()) }
    }

    pub fn solver(&self) -> &LineSolver {
        &self.solver
    }

    pub fn cached_lines(&self) -> usize {
        self.cache.read().expect("cache lock").len()
    }

    fn lookup(&self, v: &[Complex64]) -> Option<Arc<CurveSolution>> {
        self.cache.read().expect("cache lock").get(&key(v)).cloned()
    }

    fn store(&self, v: &[Complex64], sol: CurveSolution) -> Arc<CurveSolution> {
        let mut map = self.cache.write().expect("cache lock");
        map.entry(key(v)).or_insert_with(|| Arc::new(sol)).clone()
    }

    /// The line for `v`, solved once per exact direction.
    pub fn line(&self, v: &[Complex64]) -> Result<Arc<CurveSolution>> {
        if let Some(s) = self.lookup(v) {
            return Ok(s);
        }
        let sol = self.solver.solve(v)?;
        Ok(self.store(v, sol))
    }

    /// As [`LineEvaluator::line`], warm-started from a nearby solution shifted by `zeta (v - v_near)`.
    fn line_near(&self, v: &[Complex64], near: &CurveSolution) -> Result<Arc<CurveSolution>> {
        if let Some(s) = self.lookup(v) {
            return Ok(s);
        }
        let dv: Vec<Complex64> = v.iter().zip(&near.anchor).map(|(a, b)| a - b).collect();
        let shift = linear_map(self.solver.radius(), self.solver.points(), &dv)?;
        let start = near.samples.axpy(Complex64::new(1.0, 0.0), &shift)?;
        let sol = self.solver.solve_from(v, Some(&start))?;
        Ok(self.store(v, sol))
    }

    /// `L_J^v(zeta)`.
    pub fn evaluate_at(&self, zeta: Complex64, v: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self.line(v)?.evaluate_at(zeta))
    }

    /// `L_J^v(t)` for real `t >= 0`.
    pub fn evaluate(&self, t: f64, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter(format!("evaluation parameter must be nonnegative, got {t}")));
        }
        self.evaluate_at(Complex64::new(t, 0.0), v)
    }

    /// Finds `(v, zeta)` with `L_J^v(zeta) = p` by Gauss-Newton on `S^(2n-1) x C`,
    /// starting at `v = p/|p|`, `zeta = |p|`.
    pub fn cover_point(&self, p: &[Complex64], settings: &CoverSettings) -> Result<CoverResult> {
        let n = self.solver.structure().n();
        if p.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: p.len() });
        }
        let norm = cnorm(p);
        if norm <= 1.0 {
            return Err(Error::OutOfRegion { norm });
        }
        let warning = (norm > self.solver.radius() / 4.0).then(|| {
            let w = format!(
                "|p| = {norm:.3} exceeds R/4 = {:.3}; the line is resolved on a grid with less margin than recommended",
                self.solver.radius() / 4.0
            );
            log::warn!("{w}");
            w
        });
        let d = 2 * n;
        let mut v = normalized(p);
        let mut zeta = Complex64::new(norm, 0.0);
        let mut line = self.line(&v)?;
        let mut r = residual(&line.evaluate_at(zeta), p);
        let mut steps = 0;
        while linalg::norm(&r) > settings.tol && steps < settings.max_steps {
            steps += 1;
            let vr = linalg::to_real(&v);
            let tangents = tangent_basis(&vr);
            let base = line.evaluate_at(zeta);
            let mut jac = DMatrix::zeros(d, d + 1);
            for (col, t) in tangents.iter().enumerate() {
                let moved = retract(&vr, t, settings.fd_direction);
                let other = self.line_near(&moved, &line)?;
                let diff = linalg::to_real(&other.evaluate_at(zeta));
                let b = linalg::to_real(&base);
                for i in 0..d {
                    jac[(i, col)] = (diff[i] - b[i]) / settings.fd_direction * settings.direction_weight;
                }
            }
            for (col, dir) in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)].into_iter().enumerate() {
                let s = dir * settings.fd_zeta;
                let fp = linalg::to_real(&line.evaluate_at(zeta + s));
                let fm = linalg::to_real(&line.evaluate_at(zeta - s));
                for i in 0..d {
                    jac[(i, d - 1 + col)] = (fp[i] - fm[i]) / (2.0 * settings.fd_zeta);
                }
            }
            let rhs = -DVector::from_vec(r.clone());
            let step = jac
                .svd(true, true)
                .solve(&rhs, 1e-12)
                .map_err(|e| Error::InvalidParameter(format!("Gauss-Newton step failed: {e}")))?;
            // backtrack until the residual decreases
            let current = linalg::norm(&r);
            let mut scale = 1.0;
            let mut accepted = false;
            for _ in 0..8 {
                let dt: Vec<f64> = (0..d - 1).map(|i| step[i] * scale * settings.direction_weight).collect();
                let mut dir = vec![0.0; d];
                for (t, c) in tangents.iter().zip(&dt) {
                    for i in 0..d {
                        dir[i] += c * t[i];
                    }
                }
                let nv = retract(&vr, &dir, 1.0);
                let nz = zeta + Complex64::new(step[d - 1], step[d]) * scale;
                let nl = self.line_near(&nv, &line)?;
                let nr = residual(&nl.evaluate_at(nz), p);
                if linalg::norm(&nr) < current {
                    v = nv;
                    zeta = nz;
                    line = nl;
                    r = nr;
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        let achieved = line.evaluate_at(zeta);
        let error = linalg::norm(&r);
        Ok(CoverResult {
            target: p.to_vec(),
            v,
            zeta,
            achieved,
            error,
            steps,
            converged: error <= settings.tol && line.fixed_point_converged(),
            line_residual_cr: line.diagnostics.residual_cr,
            warning,
        })
    }
}

fn residual(at: &[Complex64], p: &[Complex64]) -> Vec<f64> {
    let d: Vec<Complex64> = at.iter().zip(p).map(|(a, b)| a - b).collect();
    linalg::to_real(&d)
}

/// Orthonormal basis of the tangent space `v^perp` of the unit sphere at `v`.
fn tangent_basis(v: &[f64]) -> Vec<Vec<f64>> {
    let d = v.len();
    let mut m = DMatrix::identity(d, d);
    m.set_column(0, &DVector::from_column_slice(v));
    // put the identity column most aligned with v last so the rest stay independent
    let drop = (0..d).fold(0, |b, i| if v[i].abs() > v[b].abs() { i } else { b });
    let mut col = 1;
    for i in 0..d {
        if i != drop {
            let mut e = DVector::zeros(d);
            e[i] = 1.0;
            m.set_column(col, &e);
            col += 1;
        }
    }
    let q = m.qr().q();
    (1..d).map(|c| q.column(c).iter().copied().collect()).collect()
}

/// `(v + s t) / |v + s t|` as a complex vector.
fn retract(v: &[f64], t: &[f64], s: f64) -> Vec<Complex64> {
    let w: Vec<f64> = v.iter().zip(t).map(|(a, b)| a + s * b).collect();
    let n = linalg::norm(&w);
    linalg::to_complex(&w.iter().map(|x| x / n).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acs::gallery::{Profile, Pushforward};
    use crate::acs::StructureField;
    use crate::cauchy_green::NormParams;
    use crate::curve::SolverSettings;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn evaluator(j: StructureField, r: f64, n: usize) -> LineEvaluator {
        let st = SolverSettings { admissibility_lambda: None, tol_residual: 1e-2, ..SolverSettings::default() };
        LineEvaluator::new(LineSolver::new(j, r, n, NormParams::default(), st).unwrap())
    }

    #[test]
    fn tangent_basis_is_orthonormal_and_orthogonal_to_v() {
        let v = [0.6, 0.0, 0.0, 0.8];
        let b = tangent_basis(&v);
        assert_eq!(b.len(), 3);
        for (i, x) in b.iter().enumerate() {
            assert!(x.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>().abs() < 1e-14);
            for (k, y) in b.iter().enumerate() {
                let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                assert!((dot - if i == k { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn standard_evaluation_is_exact() {
        let ev = evaluator(StructureField::standard(2), 4.0, 17);
        assert_eq!(ev.evaluate(2.5, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap(), vec![c(2.5, 0.0), c(0.0, 0.0)]);
        assert!(ev.evaluate(-1.0, &[c(1.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn standard_cover_needs_no_steps() {
        let ev = evaluator(StructureField::standard(2), 8.0, 17);
        let p = [c(1.2, -0.4), c(0.3, 2.0)];
        let r = ev.cover_point(&p, &CoverSettings::default()).unwrap();
        assert!(r.converged && r.steps == 0, "{r:?}");
        let nv = cnorm(&p);
        assert!(r.v.iter().zip(&p).all(|(a, b)| (a - b / nv).norm() < 1e-15));
        assert_eq!(r.zeta, c(nv, 0.0));
    }

    #[test]
    fn cover_rejects_inner_ball() {
        let ev = evaluator(StructureField::standard(2), 8.0, 17);
        assert!(matches!(ev.cover_point(&[c(0.5, 0.0), c(0.0, 0.5)], &CoverSettings::default()), Err(Error::OutOfRegion { .. })));
    }

    #[test]
    fn gallery_cover_hits_target() {
        let j = StructureField::new(Pushforward::new(2, 1e-2, Profile::Bump, None).unwrap());
        let ev = evaluator(j, 8.0, 33);
        let p = [c(0.9, 0.5), c(-0.7, 0.4)];
        let r = ev.cover_point(&p, &CoverSettings::default()).unwrap();
        assert!(r.error <= 1e-8, "{r:?}");
        assert!(ev.cached_lines() >= 1);
    }
}
